//! Real spherical harmonics and Gauss–Legendre quadrature on the sphere.
//!
//! Harmonics are enumerated by increasing degree `l`, then order
//! `m = -l…l`, so the first `(l+1)²` entries exhaust degrees `0…l`.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th root (descending).
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Associated Legendre `P_l^m(x)` for `m ≥ 0`, without the Condon–Shortley
/// phase, by the standard stable recursion.
fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    debug_assert!(m <= l);
    // P_m^m = (2m-1)!! (1-x^2)^{m/2}
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 1..=m {
        pmm *= (2 * i - 1) as f64 * somx2;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = pmm;
    let mut p = x * (2 * m + 1) as f64 * pmm; // P_{m+1}^m
    if l == m + 1 {
        return p;
    }
    for ll in (m + 2)..=l {
        let llf = ll as f64;
        let mf = m as f64;
        let pnew = ((2.0 * llf - 1.0) * x * p - (llf + mf - 1.0) * pm1) / (llf - mf);
        pm1 = p;
        p = pnew;
    }
    p
}

fn factorial_ratio(l: usize, m: usize) -> f64 {
    // (l-m)! / (l+m)!
    let mut acc = 1.0;
    for j in (l - m + 1)..=(l + m) {
        acc /= j as f64;
    }
    acc
}

/// Real orthonormal spherical harmonic with flat index `idx` (0-based) in
/// the (l, m = -l…l) enumeration, at polar angle `theta`, azimuth `phi`.
pub fn real_harmonic(idx: usize, theta: f64, phi: f64) -> f64 {
    let (l, m) = degree_order(idx);
    let x = theta.cos();
    let mabs = m.unsigned_abs() as usize;
    let norm = (((2 * l + 1) as f64) / (4.0 * PI) * factorial_ratio(l, mabs)).sqrt();
    let plm = assoc_legendre(l, mabs, x);
    if m == 0 {
        norm * plm
    } else if m > 0 {
        std::f64::consts::SQRT_2 * norm * plm * (mabs as f64 * phi).cos()
    } else {
        std::f64::consts::SQRT_2 * norm * plm * (mabs as f64 * phi).sin()
    }
}

/// Degree and order of the flat index: indices `l²…l²+2l` carry degree `l`.
pub fn degree_order(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= idx { l + 1 } else { l };
    let m = idx as i64 - (l * l + l) as i64;
    (l, m)
}

/// Product quadrature rule on the unit sphere exact for harmonics of degree
/// up to roughly `2·n_polar - 1`: Gauss–Legendre in `cos θ`, uniform in `φ`.
pub struct SphereQuadrature {
    /// (theta, phi, weight) triples; weights sum to 4π.
    pub points: Vec<(f64, f64, f64)>,
}

impl SphereQuadrature {
    pub fn new(n_polar: usize) -> Self {
        let n_azimuth = 2 * n_polar;
        let (mu, w) = gauss_legendre(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut points = Vec::with_capacity(n_polar * n_azimuth);
        for (m, wm) in mu.iter().zip(&w) {
            let theta = m.acos();
            for a in 0..n_azimuth {
                let phi = dphi * (a as f64 + 0.5);
                points.push((theta, phi, wm * dphi));
            }
        }
        SphereQuadrature { points }
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points.iter().map(|&(t, p, w)| w * f(t, p)).sum()
    }
}
