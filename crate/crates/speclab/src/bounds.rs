//! Executable checks of the equation-level estimates: the energy-flux
//! integral identity, the rough exponential bound on ψ in thin rectangles,
//! the first-order convolution lemma, and Combes–Thomas-type decay of the
//! Green's function, all run against solver output.
//!
//! Abstract constants are never asserted: identity checks require the
//! residual to vanish at second order under refinement, and constant-style
//! checks require refinement stability of the empirical constant (a 2×
//! denser lattice must move it by less than 20%, else the verdict is
//! `Inconclusive`).

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::fit::linear_fit;
use crate::grid::RadialGrid;
use crate::interval::Interval;
use crate::operator::{MatrixPotential, SourceProfile, SpectralParameter};
use crate::solver::{greens_column, solve_driven, WaveSolution};
use crate::verdict::Verdict;
use crate::{Error, Result};

/// Noise floor for Green's-function norms in decay fits.
const G_NORM_FLOOR: f64 = 1e-280;

/// Allowed relative drift of an empirical constant under 2× lattice
/// refinement before a check is flagged inconclusive.
const STABILITY_FACTOR: f64 = 0.2;

fn integrate_uniform(values: &[f64], h: f64) -> f64 {
    if values.len() >= 3 && values.len() % 2 == 1 {
        crate::quadrature::simpson(values, h)
    } else {
        crate::quadrature::trapezoid(values, h)
    }
}

/// Centered ψ' at node `j`; the last node uses the radiation closure
/// (`ψ' = 0` in the gauge variable).
fn psi_derivative(sol: &WaveSolution, j: usize) -> DVector<Complex64> {
    let n = sol.dimension();
    let last = sol.grid().node_count() - 1;
    if j == last {
        return DVector::zeros(n);
    }
    assert!(j > 0);
    let h2 = 2.0 * sol.grid().step();
    DVector::from_fn(n, |a, _| (sol.psi_at(j + 1)[a] - sol.psi_at(j - 1)[a]) / Complex64::from(h2))
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Both sides of the energy-flux identity on `[a, b]` and their residual.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub a: f64,
    pub b: f64,
    pub k_re: f64,
    pub k_im: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub step: f64,
}

/// Evaluates
/// `‖ψ(b)‖² + (Im k/|k|²)∫ₐᵇ‖ψ'‖² = ‖ψ(a)‖² + Q₁ - Q₂ - (Im k/|k|²)∫ₐᵇ⟨Vψ,ψ⟩`
/// with `Q = 2·Re[(i/2k)⟨ψ',ψ⟩]` at the endpoint, on the discrete solution.
pub fn check_energy_identity(
    potential: &MatrixPotential,
    source: &SourceProfile,
    k: SpectralParameter,
    a: f64,
    b: f64,
    grid: &RadialGrid,
) -> Result<IdentityResidual> {
    if !(1.0 < a && a <= b && b <= grid.right_end()) {
        return Err(Error::invalid(format!("need 1 < a <= b <= R, got a={a}, b={b}")));
    }
    if !(k.k().im > 0.0) {
        return Err(Error::invalid("energy identity needs Im k > 0"));
    }
    let sol = solve_driven(potential, source, k, grid)?;
    let v = potential.sample_on(grid)?;
    let n = sol.dimension();
    let ja = grid.nearest_node(a);
    let jb = grid.nearest_node(b);
    let kk = k.k();
    let weight = kk.im / kk.norm_sqr();

    let q_at = |j: usize| -> f64 {
        let dpsi = psi_derivative(&sol, j);
        let w = inner(dpsi.as_slice(), sol.psi_at(j));
        (Complex64::i() / (kk * Complex64::from(2.0)) * w).re * 2.0
    };

    let (lhs, rhs) = if ja == jb {
        let psi_a_sq = sol.psi_norm(ja).powi(2);
        (psi_a_sq, psi_a_sq)
    } else {
        let mut dpsi_sq = Vec::with_capacity(jb - ja + 1);
        let mut vpsi = Vec::with_capacity(jb - ja + 1);
        for j in ja..=jb {
            let dpsi = psi_derivative(&sol, j);
            dpsi_sq.push(dpsi.norm_squared());
            let block = v.block(j);
            let psi = sol.psi_at(j);
            let mut acc = Complex64::default();
            for row in 0..n {
                let mut vp = Complex64::default();
                for col in 0..n {
                    vp += block[col * n + row] * psi[col];
                }
                acc += vp * psi[row].conj();
            }
            vpsi.push(acc.re);
        }
        let h = grid.step();
        let lhs = sol.psi_norm(jb).powi(2) + weight * integrate_uniform(&dpsi_sq, h);
        let rhs = sol.psi_norm(ja).powi(2) + q_at(jb) - q_at(ja) - weight * integrate_uniform(&vpsi, h);
        (lhs, rhs)
    };
    Ok(IdentityResidual {
        a: grid.node(ja),
        b: grid.node(jb),
        k_re: kk.re,
        k_im: kk.im,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        step: grid.step(),
    })
}

/// Identity check with an (h, h/2, h/4) refinement triple; passes only when
/// the residual order is at least 1.7.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyIdentityReport {
    pub residuals: Vec<IdentityResidual>,
    pub orders: Vec<f64>,
    pub verdict: Verdict,
}

pub fn check_energy_identity_refined(
    potential: &MatrixPotential,
    source: &SourceProfile,
    k: SpectralParameter,
    a: f64,
    b: f64,
    grid: &RadialGrid,
    levels: usize,
) -> Result<EnergyIdentityReport> {
    assert!(levels >= 2);
    let mut g = grid.clone();
    let mut residuals = Vec::with_capacity(levels);
    for _ in 0..levels {
        residuals.push(check_energy_identity(potential, source, k, a, b, &g)?);
        g = g.refined();
    }
    let scale = residuals.iter().map(|r| r.lhs.abs()).fold(0.0, f64::max).max(1e-30);
    // Roundoff-level residuals grow like 1/h² under refinement; only pairs
    // safely above that floor carry convergence information.
    let mut orders = Vec::new();
    for w in residuals.windows(2) {
        if w[0].residual > 1e-11 * scale && w[1].residual > 1e-11 * scale {
            orders.push((w[0].residual / w[1].residual).log2());
        }
    }
    let verdict = if orders.is_empty() {
        if residuals.iter().all(|r| r.residual <= 1e-10 * scale) {
            Verdict::Pass // identity holds at roundoff on every grid
        } else {
            Verdict::Inconclusive
        }
    } else if orders.iter().sum::<f64>() / orders.len() as f64 >= 1.7 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(EnergyIdentityReport { residuals, orders, verdict })
}

/// One lattice point of the rough-bound statistic.
#[derive(Debug, Clone, Serialize)]
pub struct RoughBoundSample {
    pub k_re: f64,
    pub k_im: f64,
    pub sup_psi: f64,
    /// `log sup_r‖ψ(r,k)‖ - 2(Im k)^{-(1-α)/α}`; bounded above uniformly
    /// when the rough bound holds with some constant.
    pub statistic: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoughBoundReport {
    pub alpha: f64,
    pub t: f64,
    pub x_count: usize,
    pub y_count: usize,
    pub samples: Vec<RoughBoundSample>,
    /// `log` of the empirical constant `C_{I,α}` (max statistic).
    pub log_constant: f64,
}

/// Samples `log sup_r‖ψ‖ - 2(Im k)^{-(1-α)/α}` on a lattice in the
/// rectangle `I × (0, T^{-α}]`.
pub fn check_rough_bound(
    potential: &MatrixPotential,
    source: &SourceProfile,
    interval: Interval,
    alpha: f64,
    x_count: usize,
    y_count: usize,
    grid_step: f64,
) -> Result<RoughBoundReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let t = potential.support_bound();
    let y_top = t.powf(-alpha);
    let exponent = -(1.0 - alpha) / alpha;
    let k_ref = SpectralParameter::from_k(Complex64::new(interval.left(), y_top))?;
    let grid = crate::solver::default_grid(potential, k_ref, grid_step)?;
    let sampled_v = potential.sample_on(&grid)?;
    let sampled_f = source.sample_on(&grid);
    let mut samples = Vec::with_capacity(x_count * y_count);
    let mut log_constant = f64::NEG_INFINITY;
    for iy in 0..y_count {
        let frac = if y_count <= 1 { 0.0 } else { iy as f64 / (y_count - 1) as f64 };
        let y = y_top * 8.0_f64.powf(-frac);
        for &x in &interval.lattice(x_count.max(2)) {
            let kp = SpectralParameter::from_k(Complex64::new(x, y))?;
            let sol = crate::solver::solve_driven_sampled(&sampled_v, &sampled_f, kp, &grid)?;
            let sup = sol.psi_sup_norm();
            let statistic = sup.max(1e-300).ln() - 2.0 * y.powf(exponent);
            log_constant = log_constant.max(statistic);
            samples.push(RoughBoundSample { k_re: x, k_im: y, sup_psi: sup, statistic });
        }
    }
    Ok(RoughBoundReport { alpha, t, x_count, y_count, samples, log_constant })
}

/// Refinement stability of a rough-bound pair: the log-constant from a 2×
/// denser lattice must move by less than `log(1.2)`.
pub fn rough_bound_stability(coarse: &RoughBoundReport, fine: &RoughBoundReport) -> Verdict {
    if (coarse.log_constant - fine.log_constant).abs() <= (1.0 + STABILITY_FACTOR).ln() {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

/// Empirical constants and representation check of the convolution lemma
/// for `Y = (i/2k)Y' + A` on `[a, ∞)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvolutionReport {
    /// `‖Y‖_∞ · √(Im k) / (|k|·‖A‖₂)`.
    pub c_sup: f64,
    /// `‖Y‖₂ · Im k / (|k|·‖A‖₂)`.
    pub c_l2: f64,
    /// `(r, |Y(r) - Y_repr(r)| / scale)` at the probe radii, with
    /// `Y_repr = -2ik∫_r^∞ A(s)e^{2ik(s-r)}ds`.
    pub representation_errors: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

pub fn check_convolution_lemma(
    y: &dyn Fn(f64) -> DVector<Complex64>,
    a_fn: &dyn Fn(f64) -> DVector<Complex64>,
    k: Complex64,
    range: (f64, f64),
    step: f64,
    probe_radii: &[f64],
) -> Result<ConvolutionReport> {
    if !(k.im > 0.0) {
        return Err(Error::invalid("convolution lemma needs Im k > 0"));
    }
    let (r0, r1) = range;
    if !(r0 < r1 && step > 0.0) || probe_radii.len() < 3 {
        return Err(Error::invalid("bad range or fewer than 3 probe radii"));
    }
    let n = ((r1 - r0) / step).ceil() as usize;
    let n = if n % 2 == 0 { n } else { n + 1 }; // even panel count for Simpson
    let h = (r1 - r0) / n as f64;
    let mut y_sup: f64 = 0.0;
    let mut y_sq = Vec::with_capacity(n + 1);
    let mut a_sq = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let r = r0 + i as f64 * h;
        let yv = y(r);
        y_sup = y_sup.max(yv.norm());
        y_sq.push(yv.norm_squared());
        a_sq.push(a_fn(r).norm_squared());
    }
    let a_l2 = integrate_uniform(&a_sq, h).sqrt();
    let y_l2 = integrate_uniform(&y_sq, h).sqrt();
    let denom = (k.norm() * a_l2).max(1e-300);
    let c_sup = y_sup * k.im.sqrt() / denom;
    let c_l2 = y_l2 * k.im / denom;

    // Explicit representation Y(r) = -2ik ∫_r^∞ A(s) e^{2ik(s-r)} ds, with
    // the integrand written in the decaying form to avoid overflow.
    let mut representation_errors = Vec::with_capacity(probe_radii.len());
    let scale = y_sup.max(a_l2).max(1e-300);
    for &r in probe_radii {
        let m = (((r1 - r) / h).ceil() as usize).max(2);
        let m = if m % 2 == 0 { m } else { m + 1 };
        let hh = (r1 - r) / m as f64;
        let dim = y(r).len();
        let mut acc = DVector::<Complex64>::zeros(dim);
        for i in 0..=m {
            let s = r + i as f64 * hh;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let phase = (Complex64::i() * k * Complex64::from(2.0 * (s - r))).exp();
            let av = a_fn(s);
            for c in 0..dim {
                acc[c] += av[c] * phase * Complex64::from(w);
            }
        }
        let factor = -Complex64::i() * k * Complex64::from(2.0) * Complex64::from(hh / 3.0);
        let repr = acc.map(|c| c * factor);
        let err = (y(r) - repr).norm() / scale;
        representation_errors.push((r, err));
    }
    let verdict = if representation_errors.iter().all(|(_, e)| *e < 1e-3)
        && c_sup.is_finite()
        && c_l2.is_finite()
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConvolutionReport { c_sup, c_l2, representation_errors, verdict })
}

/// Exponential-decay fit of `log‖G(r,ρ)‖` against `|r-ρ|`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Rate the lemma guarantees (e.g. `-0.5·Im k`).
    pub target_rate: f64,
    /// Decades of `‖G‖` covered by the usable pairs.
    pub decades_spanned: f64,
    pub verdict: Verdict,
}

fn fit_decay(pairs: Vec<(f64, f64)>, target_rate: f64, tolerance: f64) -> Result<DecayFit> {
    if pairs.len() < 4 {
        return Err(Error::FitUnderdetermined(pairs.len()));
    }
    let (slope, intercept) = linear_fit(&pairs);
    let lo = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let decades_spanned = (hi - lo) / std::f64::consts::LN_10;
    let verdict = if slope <= target_rate + tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(DecayFit { pairs, slope, intercept, target_rate, decades_spanned, verdict })
}

/// Combes–Thomas check: fits the off-diagonal decay of `‖G(r,ρ,k²)‖` and
/// asserts the slope is at most `-0.5·Im k`. Requires
/// `Im k > threshold_factor·‖V‖_∞` (the contraction gate; default factor 4).
pub fn check_combes_thomas(
    potential: &MatrixPotential,
    k: SpectralParameter,
    rho: f64,
    separations: &[f64],
    grid_step: f64,
    threshold_factor: f64,
) -> Result<DecayFit> {
    let s_max = separations.iter().cloned().fold(0.0, f64::max);
    let margin = (2.0 * std::f64::consts::PI / k.k().norm()).min(16.0);
    let reach = (rho + s_max + margin).max(potential.support_bound().max(1.0) + margin);
    let grid = RadialGrid::covering(grid_step, reach)?;
    let sampled = potential.sample_on(&grid)?;
    let sup_v = sampled.sup_norm();
    if !(k.k().im > threshold_factor * sup_v) {
        return Err(Error::invalid(format!(
            "Combes–Thomas gate: Im k = {} must exceed {threshold_factor}·‖V‖_∞ = {}",
            k.k().im,
            threshold_factor * sup_v
        )));
    }
    let col = greens_column(potential, k, rho, &grid)?;
    let mut pairs = Vec::new();
    for &s in separations {
        if s <= 0.0 {
            continue; // zero separation excluded from the fit
        }
        let j = grid.nearest_node(rho + s);
        let norm = col.norm(j);
        if norm > G_NORM_FLOOR {
            pairs.push((grid.node(j) - rho, norm.ln()));
        }
    }
    fit_decay(pairs, -0.5 * k.k().im, 0.05 * k.k().im)
}

/// Windowed decay check for power-law potentials: both points confined to
/// `[T/2, T]`, gate `Im k > C₁·T^{-γ}` with the contraction-derived default
/// `C₁ = 4λ·4^γ` (so the gate equals `4·λ(T/4)^{-γ}`).
#[derive(Debug, Clone, Serialize)]
pub struct WindowedDecayReport {
    pub t: f64,
    pub im_k: f64,
    pub threshold: f64,
    /// Gate not met: reported, fit skipped.
    pub skipped: bool,
    pub fit: Option<DecayFit>,
    /// Fitted `c` in the rate `c·Im k` (positive when the lemma holds).
    pub c_empirical: Option<f64>,
}

pub fn check_windowed_decay(
    potential: &MatrixPotential,
    k: SpectralParameter,
    c1: Option<f64>,
    separation_count: usize,
    grid_step: f64,
) -> Result<WindowedDecayReport> {
    let env = potential
        .envelope()
        .ok_or_else(|| Error::invalid("windowed decay needs a declared power-law envelope"))?;
    if !(env.gamma > 0.0 && env.gamma < 1.0) {
        return Err(Error::invalid("windowed decay needs gamma in (0,1)"));
    }
    let t = potential.support_bound();
    let c1 = c1.unwrap_or(4.0 * env.lambda * 4.0_f64.powf(env.gamma));
    let threshold = c1 * t.powf(-env.gamma);
    let im_k = k.k().im;
    if !(im_k > threshold) {
        return Ok(WindowedDecayReport {
            t,
            im_k,
            threshold,
            skipped: true,
            fit: None,
            c_empirical: None,
        });
    }
    let rho = t / 2.0;
    let count = separation_count.max(8);
    let separations: Vec<f64> = (1..=count).map(|i| i as f64 * (t / 2.0) / count as f64).collect();
    let margin = (2.0 * std::f64::consts::PI / k.k().norm()).min(16.0);
    let grid = RadialGrid::covering(grid_step, t + margin)?;
    let col = greens_column(potential, k, rho, &grid)?;
    let mut pairs = Vec::new();
    for &s in &separations {
        let j = grid.nearest_node(rho + s);
        let norm = col.norm(j);
        if norm > G_NORM_FLOOR {
            pairs.push((grid.node(j) - rho, norm.ln()));
        }
    }
    // target rate 0: any positive c passes; the caller compares c across T.
    let fit = fit_decay(pairs, 0.0, 0.0)?;
    let c_empirical = -fit.slope / im_k;
    let verdict = if c_empirical > 0.0 { Verdict::Pass } else { Verdict::Fail };
    Ok(WindowedDecayReport {
        t,
        im_k,
        threshold,
        skipped: false,
        fit: Some(DecayFit { verdict, ..fit }),
        c_empirical: Some(c_empirical),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{identity_coupling, ChannelSpace};
    use crate::solver::default_grid;

    fn scalar_power_law(lambda: f64, gamma: f64, support: f64) -> MatrixPotential {
        let cs = ChannelSpace::new(1).unwrap();
        MatrixPotential::power_law(cs, lambda, gamma, support, identity_coupling(1)).unwrap()
    }

    #[test]
    fn energy_identity_free_exact_beyond_source() {
        // V ≡ 0 on [2,4]: ψ is constant there, the identity holds at roundoff.
        let cs = ChannelSpace::new(1).unwrap();
        let v = MatrixPotential::zero(cs);
        let f = SourceProfile::indicator(cs);
        let k = SpectralParameter::from_k(Complex64::new(1.0, 0.1)).unwrap();
        let grid = default_grid(&v, k, 2e-3).unwrap();
        let rep = check_energy_identity_refined(&v, &f, k, 2.0, 4.0, &grid, 3).unwrap();
        assert!(rep.residuals[0].residual < 1e-12, "residual {}", rep.residuals[0].residual);
        assert_eq!(rep.verdict, Verdict::Pass, "orders {:?}", rep.orders);
    }

    #[test]
    fn energy_identity_power_law_second_order() {
        let v = scalar_power_law(0.5, 0.8, 8.0);
        let f = SourceProfile::indicator(ChannelSpace::new(1).unwrap());
        let k = SpectralParameter::from_k(Complex64::new(1.0, 0.1)).unwrap();
        let grid = default_grid(&v, k, 2e-3).unwrap();
        let rep = check_energy_identity_refined(&v, &f, k, 2.0, 4.0, &grid, 3).unwrap();
        assert!(rep.residuals[0].residual < 1e-4);
        assert_eq!(rep.verdict, Verdict::Pass, "orders {:?}", rep.orders);
        let mean: f64 = rep.orders.iter().sum::<f64>() / rep.orders.len() as f64;
        assert!(mean >= 1.7, "order {mean}");
    }

    #[test]
    fn energy_identity_degenerate_interval() {
        let cs = ChannelSpace::new(1).unwrap();
        let v = MatrixPotential::zero(cs);
        let f = SourceProfile::indicator(cs);
        let k = SpectralParameter::from_k(Complex64::new(1.0, 0.2)).unwrap();
        let grid = default_grid(&v, k, 5e-3).unwrap();
        let r = check_energy_identity(&v, &f, k, 3.0, 3.0, &grid).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn energy_identity_nonnegative_potential_bounds_derivative() {
        // V ≥ 0 diagonal: the identity rearranges to an apriori bound on
        // ∫‖ψ'‖² by endpoint data.
        let v = scalar_power_law(0.5, 0.8, 8.0);
        let f = SourceProfile::indicator(ChannelSpace::new(1).unwrap());
        let k = SpectralParameter::from_k(Complex64::new(1.2, 0.15)).unwrap();
        let grid = default_grid(&v, k, 2e-3).unwrap();
        let r = check_energy_identity(&v, &f, k, 1.5, 7.5, &grid).unwrap();
        let kk = k.k();
        let weight = kk.im / kk.norm_sqr();
        // recompute the pieces from the identity record:
        // weight·∫‖ψ'‖² = rhs - ‖ψ(b)‖² ≥ lhs - ‖ψ(b)‖² - residual
        let sol = solve_driven(&v, &f, k, &grid).unwrap();
        let psi_b_sq = sol.psi_norm(grid.nearest_node(7.5)).powi(2);
        let dpsi_term = r.lhs - psi_b_sq;
        let endpoint_budget = r.rhs - psi_b_sq; // = ψ(a)²+Q₁-Q₂-∫⟨Vψ,ψ⟩ ≥ weight∫‖ψ'‖² when V ≥ 0
        assert!(dpsi_term <= endpoint_budget + 1e-10 + r.residual);
        assert!(weight > 0.0);
    }

    #[test]
    fn rough_bound_free_far_inside() {
        let cs = ChannelSpace::new(1).unwrap();
        let v = MatrixPotential::zero(cs);
        let f = SourceProfile::indicator(cs);
        let interval = Interval::new(1.0, 2.0).unwrap();
        let rep = check_rough_bound(&v, &f, interval, 0.5, 3, 3, 1e-2).unwrap();
        // free ψ stays O(1); the bound exponent at the lattice top is ≥ 2/y
        // with y ≤ T^{-1/2} < 1, so the statistic is deeply negative.
        assert!(rep.log_constant < -1.0, "log constant {}", rep.log_constant);
    }

    #[test]
    fn rough_bound_stable_under_lattice_refinement() {
        let v = scalar_power_law(1.0, 0.8, 2.0_f64.powi(8));
        let f = SourceProfile::indicator(ChannelSpace::new(1).unwrap());
        let interval = Interval::new(1.0, 2.0).unwrap();
        let coarse = check_rough_bound(&v, &f, interval, 0.5, 3, 3, 2e-2).unwrap();
        let fine = check_rough_bound(&v, &f, interval, 0.5, 6, 6, 2e-2).unwrap();
        assert_eq!(rough_bound_stability(&coarse, &fine), Verdict::Pass);
        assert!(coarse.samples.len() == 9 && fine.samples.len() == 36);
    }

    #[test]
    fn convolution_lemma_on_closed_form_pair() {
        // A = χ_{[a,a+1]}e₁, k = 1+i: the representation integral has the
        // elementary antiderivative Y(r) = 1 - e^{2ik(a+1-r)} on [a, a+1].
        let k = Complex64::new(1.0, 1.0);
        let a = 2.0;
        let y = move |r: f64| {
            let val = if (a..=a + 1.0).contains(&r) {
                Complex64::from(1.0)
                    - (Complex64::i() * k * Complex64::from(2.0 * (a + 1.0 - r))).exp()
            } else if r < a {
                let decay = (Complex64::i() * k * Complex64::from(2.0 * (a - r))).exp();
                decay * (Complex64::from(1.0) - (Complex64::i() * k * Complex64::from(2.0)).exp())
            } else {
                Complex64::default()
            };
            DVector::from_vec(vec![val])
        };
        let a_fn = move |r: f64| {
            DVector::from_vec(vec![if (a..=a + 1.0).contains(&r) {
                Complex64::from(1.0)
            } else {
                Complex64::default()
            }])
        };
        let rep = check_convolution_lemma(
            &y,
            &a_fn,
            k,
            (a, a + 12.0),
            1e-3,
            &[a + 0.25, a + 0.5, a + 0.75, a + 2.0],
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "errors {:?}", rep.representation_errors);
        assert!(rep.c_sup > 0.0 && rep.c_sup < 10.0);
        assert!(rep.c_l2 > 0.0 && rep.c_l2 < 10.0);
    }

    #[test]
    fn convolution_lemma_zero_and_scaling() {
        let k = Complex64::new(1.0, 0.5);
        let zero = |_r: f64| DVector::<Complex64>::zeros(1);
        let rep = check_convolution_lemma(&zero, &zero, k, (1.0, 10.0), 1e-2, &[2.0, 3.0, 4.0]).unwrap();
        assert!(rep.representation_errors.iter().all(|(_, e)| *e == 0.0));

        // scaling A and Y by c leaves the empirical constants unchanged
        let a = 2.0;
        let mk = |c: f64| {
            let y = move |r: f64| {
                let val = if (a..=a + 1.0).contains(&r) {
                    Complex64::from(c)
                        * (Complex64::from(1.0)
                            - (Complex64::i() * k * Complex64::from(2.0 * (a + 1.0 - r))).exp())
                } else {
                    Complex64::default()
                };
                DVector::from_vec(vec![val])
            };
            let a_fn = move |r: f64| {
                DVector::from_vec(vec![if (a..=a + 1.0).contains(&r) {
                    Complex64::from(c)
                } else {
                    Complex64::default()
                }])
            };
            (y, a_fn)
        };
        let (y1, a1) = mk(1.0);
        let (y3, a3) = mk(3.0);
        let r1 = check_convolution_lemma(&y1, &a1, k, (a, a + 14.0), 2e-3, &[2.25, 2.5, 2.75]).unwrap();
        let r3 = check_convolution_lemma(&y3, &a3, k, (a, a + 14.0), 2e-3, &[2.25, 2.5, 2.75]).unwrap();
        assert!((r1.c_sup - r3.c_sup).abs() < 1e-12);
        assert!((r1.c_l2 - r3.c_l2).abs() < 1e-12);
    }

    #[test]
    fn combes_thomas_free_kernel_full_rate() {
        let cs = ChannelSpace::new(1).unwrap();
        let v = MatrixPotential::zero(cs);
        let k = SpectralParameter::from_k(Complex64::new(0.5, 2.0)).unwrap();
        let seps: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
        let fit = check_combes_thomas(&v, k, 2.0, &seps, 5e-3, 4.0).unwrap();
        // free kernel decays at the full rate Im k = 2
        assert!((fit.slope + 2.0).abs() < 0.05, "slope {}", fit.slope);
        assert_eq!(fit.verdict, Verdict::Pass);
        assert!(fit.decades_spanned >= 2.0);
        assert!(fit.pairs.len() >= 8);
    }

    #[test]
    fn combes_thomas_with_potential_beats_half_rate() {
        let v = scalar_power_law(0.1, 0.8, 8.0);
        let k = SpectralParameter::from_k(Complex64::new(1.0, 1.0)).unwrap();
        let seps: Vec<f64> = (1..=10).map(|i| 0.8 * i as f64).collect();
        let fit = check_combes_thomas(&v, k, 2.0, &seps, 5e-3, 4.0).unwrap();
        assert!(fit.slope <= -0.5 + 0.05, "slope {}", fit.slope);
        assert_eq!(fit.verdict, Verdict::Pass);
    }

    #[test]
    fn combes_thomas_gate_enforced() {
        let v = scalar_power_law(1.0, 0.8, 8.0); // ‖V‖_∞ = 1
        let k = SpectralParameter::from_k(Complex64::new(1.0, 1.0)).unwrap(); // Im k = 1 < 4
        let seps = [1.0, 2.0, 3.0, 4.0];
        assert!(check_combes_thomas(&v, k, 2.0, &seps, 1e-2, 4.0).is_err());
    }

    #[test]
    fn windowed_decay_free_window_full_rate() {
        let v = scalar_power_law(0.0, 0.8, 64.0);
        let k = SpectralParameter::from_k(Complex64::new(1.0, 0.3)).unwrap();
        let rep = check_windowed_decay(&v, k, None, 10, 1e-2).unwrap();
        assert!(!rep.skipped);
        let c = rep.c_empirical.unwrap();
        assert!((c - 1.0).abs() < 0.05, "free decay constant {c}");
    }

    #[test]
    fn windowed_decay_power_law_positive_constant() {
        let v = scalar_power_law(1.0, 0.8, 2.0_f64.powi(7));
        let im_k = 8.0 * 2.0_f64.powi(7).powf(-0.8);
        let k = SpectralParameter::from_k(Complex64::new(1.0, im_k)).unwrap();
        // explicit knob below the example's Im k so the gate admits it
        let rep = check_windowed_decay(&v, k, Some(6.0), 10, 1e-2).unwrap();
        assert!(!rep.skipped);
        assert!(rep.c_empirical.unwrap() > 0.0);
        assert_eq!(rep.fit.unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn windowed_decay_gate_skips() {
        let v = scalar_power_law(1.0, 0.8, 2.0_f64.powi(7));
        let im_k = 8.0 * 2.0_f64.powi(7).powf(-0.8);
        let k = SpectralParameter::from_k(Complex64::new(1.0, im_k)).unwrap();
        // default C₁ = 4·4^0.8 ≈ 12.1 > 8: precondition fails, check skipped
        let rep = check_windowed_decay(&v, k, None, 10, 1e-2).unwrap();
        assert!(rep.skipped);
        assert!(rep.fit.is_none());
    }
}
