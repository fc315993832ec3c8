//! Spectral-measure densities from boundary data of ψ, the Stieltjes
//! inversion cross-check, total-mass accounting, and entropy integrals.
//!
//! The boundary route reads `σ'_F(k²) = k·π⁻¹·‖ψ(∞,k)‖²` off a real-axis
//! solve (legitimate for compactly supported potentials); the Stieltjes
//! route evaluates `π⁻¹ Im⟨R_{E+iη}F, F⟩` and extrapolates `η → 0`. The two
//! must agree; that cross-oracle is the module's central correctness
//! property.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::grid::RadialGrid;
use crate::interval::Interval;
use crate::operator::{MatrixPotential, SourceProfile, SpectralParameter};
use crate::quadrature::simpson;
use crate::solver::{default_grid, solve_driven, solve_driven_sampled};
use crate::{Error, Result};

/// One sample of the spectral density at `E = k²`, `k > 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensitySample {
    pub k: f64,
    pub e: f64,
    /// `k·π⁻¹·‖ψ(∞,k)‖²`, nonnegative by construction.
    pub density: f64,
    pub psi_norm_sq: f64,
}

/// Boundary formula for the density: real-axis solve, then
/// `σ'_F(k²) = k·π⁻¹·‖ψ(∞,k)‖²`.
pub fn density_via_boundary(
    potential: &MatrixPotential,
    source: &SourceProfile,
    k: f64,
    grid: &RadialGrid,
) -> Result<DensitySample> {
    if !(k > 0.0) {
        return Err(Error::invalid(format!("boundary density needs k > 0, got {k}")));
    }
    let kp = SpectralParameter::real_axis(k)?;
    let sol = solve_driven(potential, source, kp, grid)?;
    let psi_norm_sq = sol.psi_infinity_norm().powi(2);
    Ok(DensitySample { k, e: k * k, density: k / PI * psi_norm_sq, psi_norm_sq })
}

/// Stieltjes-inversion estimate of the density at `E` with an η-sequence.
#[derive(Debug, Clone, Serialize)]
pub struct StieltjesReport {
    pub e: f64,
    pub etas: Vec<f64>,
    /// `π⁻¹ Im⟨R_{E+iη}F, F⟩` per η.
    pub raw: Vec<f64>,
    /// Three-point Richardson extrapolation to `η → 0`.
    pub extrapolated: f64,
    /// Spread of the first-level extrapolants; large spread marks a
    /// non-convergent sequence (reported, not fatal).
    pub spread: f64,
    pub converged: bool,
}

/// `π⁻¹ Im⟨R_{E+iη}F, F⟩` for each η in a ratio-2 decreasing sequence,
/// Richardson-extrapolated to `η → 0`.
pub fn density_via_stieltjes(
    potential: &MatrixPotential,
    source: &SourceProfile,
    e: f64,
    etas: &[f64],
    grid: &RadialGrid,
) -> Result<StieltjesReport> {
    if etas.len() < 3 {
        return Err(Error::invalid("eta sequence needs at least three values"));
    }
    for w in etas.windows(2) {
        if !(w[1] > 0.0) || (w[0] / w[1] - 2.0).abs() > 1e-9 {
            return Err(Error::invalid("eta sequence must decrease with ratio 2"));
        }
    }
    let mut raw = Vec::with_capacity(etas.len());
    for &eta in etas {
        let kp = SpectralParameter::from_z(Complex64::new(e, eta))?;
        let sol = solve_driven(potential, source, kp, grid)?;
        raw.push(sol.inner_product_with_source(source).im / PI);
    }
    // g(η) = σ' + c₁η + c₂η² + …  Level 1 removes η, level 2 removes η².
    let level1: Vec<f64> = raw.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let level2: Vec<f64> = level1.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    let extrapolated = *level2.last().unwrap();
    let spread = level1
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let converged = spread <= 0.25 * extrapolated.abs() + 1e-9;
    Ok(StieltjesReport { e, etas: etas.to_vec(), raw, extrapolated, spread, converged })
}

/// Parameters of the total-mass contour sweep.
#[derive(Debug, Clone, Serialize)]
pub struct TotalMassParams {
    pub window: Interval,
    pub eta: f64,
    pub e_step: f64,
    pub grid_step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TotalMassReport {
    pub params: TotalMassParams,
    /// Trapezoid of `π⁻¹ Im⟨R_{E+iη}F, F⟩` over the window.
    pub mass: f64,
    /// Heuristic estimate of the mass beyond the window, from a
    /// `C·k⁻³`-type density fit over the top of the window.
    pub tail_estimate: f64,
    pub panel_count: usize,
}

/// Estimates `∫ dσ_F` by sweeping the window at height η; expected ≈ 1 for
/// a unit-norm source (the measure is a probability measure).
pub fn total_mass_check(
    potential: &MatrixPotential,
    source: &SourceProfile,
    params: &TotalMassParams,
) -> Result<TotalMassReport> {
    let n_panels = (params.window.length() / params.e_step).ceil() as usize;
    let h_e = params.window.length() / n_panels as f64;
    let mut values = Vec::with_capacity(n_panels + 1);
    for i in 0..=n_panels {
        let e = params.window.left() + i as f64 * h_e;
        let kp = SpectralParameter::from_z(Complex64::new(e, params.eta))?;
        let grid = default_grid(potential, kp, params.grid_step)?;
        let sol = solve_driven(potential, source, kp, &grid)?;
        values.push(sol.inner_product_with_source(source).im / PI);
    }
    let mass = crate::quadrature::trapezoid(&values, h_e);
    // density ~ C k^{-3} in k at large k for a fixed source; fit C over the
    // top of the window and integrate the tail in E.
    let e_hi = params.window.right();
    let e_lo_fit = (0.8 * e_hi).max(params.window.left().max(0.0));
    let mut c_acc = 0.0;
    let mut c_cnt = 0;
    for (i, v) in values.iter().enumerate() {
        let e = params.window.left() + i as f64 * h_e;
        if e >= e_lo_fit && e > 0.0 {
            c_acc += v * e.sqrt().powi(3);
            c_cnt += 1;
        }
    }
    let tail_estimate = if c_cnt > 0 && e_hi > 0.0 {
        let c = c_acc / c_cnt as f64;
        2.0 * c / e_hi.sqrt()
    } else {
        f64::NAN
    };
    Ok(TotalMassReport { params: params.clone(), mass, tail_estimate, panel_count: n_panels })
}

/// Entropy integral `∫_I log σ'_F(k²) dk` with its `log₊ / log₋` split.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub interval: Interval,
    /// Integration variable ("k"): the E-variant follows by substitution.
    pub variable: char,
    pub node_count: usize,
    /// `-∞` when any node falls below the resolvable-density floor.
    pub value: f64,
    pub log_plus: f64,
    pub log_minus: f64,
    /// Nodes whose density fell below `zero_floor`.
    pub offending_nodes: Vec<f64>,
    pub zero_floor: f64,
    pub densities: Vec<DensitySample>,
}

/// Densities below this are treated as unresolvable zeros of the density
/// (the discrete solve cannot distinguish them from exact zeros).
pub const DEFAULT_ZERO_FLOOR: f64 = 1e-9;

/// Integration variable of an entropy integral. The interval is always
/// given in k; the E-variant integrates `log σ'_F(E) dE` over `[a², b²]`
/// by the substitution `dE = 2k·dk` on the same k-lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntropyVariable {
    K,
    E,
}

impl EntropyVariable {
    fn tag(&self) -> char {
        match self {
            EntropyVariable::K => 'k',
            EntropyVariable::E => 'E',
        }
    }
}

/// Composite-Simpson entropy over an interval in the k variable.
pub fn entropy_integral(
    potential: &MatrixPotential,
    source: &SourceProfile,
    interval: Interval,
    node_count: usize,
    grid_step: f64,
    zero_floor: f64,
) -> Result<EntropyReport> {
    entropy_integral_in(potential, source, interval, node_count, grid_step, zero_floor, EntropyVariable::K)
}

/// Entropy with an explicit integration variable.
pub fn entropy_integral_in(
    potential: &MatrixPotential,
    source: &SourceProfile,
    interval: Interval,
    node_count: usize,
    grid_step: f64,
    zero_floor: f64,
    variable: EntropyVariable,
) -> Result<EntropyReport> {
    if interval.left() <= 0.0 {
        return Err(Error::invalid("entropy interval must lie in (0, ∞)"));
    }
    if node_count < 3 || node_count % 2 == 0 {
        return Err(Error::invalid("entropy quadrature needs an odd node count >= 3"));
    }
    // One grid serves every node: margin sized for the smallest k.
    let k_lo = SpectralParameter::real_axis(interval.left())?;
    let grid = default_grid(potential, k_lo, grid_step)?;
    let sampled_v = potential.sample_on(&grid)?;
    let sampled_f = source.sample_on(&grid);
    let nodes = interval.lattice(node_count);
    let mut densities = Vec::with_capacity(node_count);
    let mut offending = Vec::new();
    let mut log_vals = Vec::with_capacity(node_count);
    for &k in &nodes {
        let kp = SpectralParameter::real_axis(k)?;
        let sol = solve_driven_sampled(&sampled_v, &sampled_f, kp, &grid)?;
        let psi_norm_sq = sol.psi_infinity_norm().powi(2);
        let density = k / PI * psi_norm_sq;
        densities.push(DensitySample { k, e: k * k, density, psi_norm_sq });
        if density <= zero_floor {
            offending.push(k);
            log_vals.push(f64::NEG_INFINITY);
        } else {
            log_vals.push(density.ln());
        }
    }
    // in the E variable the same lattice carries the substitution weight 2k
    let weight = |i: usize| match variable {
        EntropyVariable::K => 1.0,
        EntropyVariable::E => 2.0 * nodes[i],
    };
    let h = interval.length() / (node_count - 1) as f64;
    let (value, log_plus, log_minus) = if offending.is_empty() {
        let plus: Vec<f64> =
            log_vals.iter().enumerate().map(|(i, v)| v.max(0.0) * weight(i)).collect();
        let minus: Vec<f64> =
            log_vals.iter().enumerate().map(|(i, v)| v.min(0.0) * weight(i)).collect();
        let lp = simpson(&plus, h);
        let lm = simpson(&minus, h);
        (lp + lm, lp, lm)
    } else {
        let plus: Vec<f64> = log_vals
            .iter()
            .enumerate()
            .map(|(i, v)| if v.is_finite() { v.max(0.0) * weight(i) } else { 0.0 })
            .collect();
        (f64::NEG_INFINITY, simpson(&plus, h), f64::NEG_INFINITY)
    };
    Ok(EntropyReport {
        interval,
        variable: variable.tag(),
        node_count,
        value,
        log_plus,
        log_minus,
        offending_nodes: offending,
        zero_floor,
        densities,
    })
}
