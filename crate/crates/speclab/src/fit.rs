//! Small least-squares helpers for empirical trend fits.

/// Ordinary least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    assert!(points.len() >= 2, "linear fit needs at least two points");
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Slope of `log y` against `log x`; pairs with nonpositive entries are
/// skipped. Returns `None` if fewer than two usable pairs remain.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    Some(linear_fit(&usable).0)
}

/// Empirical convergence orders `log2(e_i / e_{i+1})` of a refinement
/// sequence of errors.
pub fn refinement_orders(errors: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect()
}
