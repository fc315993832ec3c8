//! Composite quadrature rules on uniform lattices.

/// Composite Simpson weightings for `values` sampled on a uniform lattice
/// with spacing `h`. Requires an odd number of nodes (even panel count).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 3 && values.len() % 2 == 1, "simpson needs an odd node count >= 3");
    let mut acc = values[0] + values[values.len() - 1];
    for (i, v) in values.iter().enumerate().skip(1).take(values.len() - 2) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Composite trapezoid rule on a uniform lattice.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 2);
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * (values[0] + values[values.len() - 1]) + inner)
}

/// Simpson integral of `f` over `[a, b]` with `n` nodes (odd, >= 3).
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|i| f(a + i as f64 * h)).collect();
    simpson(&values, h)
}
