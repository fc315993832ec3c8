//! Driven-equation solver: `-u'' + Vu = k²u + F`, `u(0) = 0`, closed at the
//! right end by the exact outgoing condition `u'(R) = ik·u(R)`.
//!
//! The solve is performed in the gauge variable `ψ = e^{-ikr}u`, which
//! satisfies `-ψ'' - 2ikψ' + Vψ = Fe^{-ikr}` and is O(1) across the whole
//! grid; `u` would decay like `e^{-Im k·r}` and lose all relative accuracy
//! in its tail for the large supports the multiscale iteration needs. The
//! radiation condition reads `ψ'(R) = 0` in this gauge and is discretized
//! at second order by ghost-node elimination. Because `V ≡ 0` beyond the
//! support bound, the discrete gauge equation admits exactly constant
//! tails, so `ψ(∞, k)` is read off the last node.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::grid::RadialGrid;
use crate::operator::{MatrixPotential, SampledPotential, SampledSource, SourceProfile, SpectralParameter};
use crate::tridiag::{BlockFactor, ScalarFactor};
use crate::{Error, Result};

/// Sampling criterion: centered differences need `h·|k| ≤ 0.5`.
pub const SAMPLING_LIMIT: f64 = 0.5;

/// Cap on the wavelength margin demanded beyond the potential support; the
/// radiation closure is exact there, so the margin only buys a visible tail
/// and must not blow up as `|k| → 0`.
const MARGIN_CAP: f64 = 32.0;

/// Solution of the driven equation on a grid.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    grid: RadialGrid,
    k: SpectralParameter,
    dimension: usize,
    support_bound: f64,
    u: Vec<Complex64>,
    psi: Vec<Complex64>,
    psi_infinity: Vec<Complex64>,
}

impl WaveSolution {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn k(&self) -> SpectralParameter {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn u_at(&self, j: usize) -> &[Complex64] {
        &self.u[j * self.dimension..(j + 1) * self.dimension]
    }

    pub fn psi_at(&self, j: usize) -> &[Complex64] {
        &self.psi[j * self.dimension..(j + 1) * self.dimension]
    }

    pub fn psi_infinity(&self) -> &[Complex64] {
        &self.psi_infinity
    }

    pub fn u_norm(&self, j: usize) -> f64 {
        norm(self.u_at(j))
    }

    pub fn psi_norm(&self, j: usize) -> f64 {
        norm(self.psi_at(j))
    }

    pub fn psi_infinity_norm(&self) -> f64 {
        norm(&self.psi_infinity)
    }

    /// `‖ψ‖` at the node nearest to radius `r`.
    pub fn psi_norm_at_radius(&self, r: f64) -> f64 {
        self.psi_norm(self.grid.nearest_node(r))
    }

    pub fn psi_sup_norm(&self) -> f64 {
        (0..self.grid.node_count())
            .map(|j| self.psi_norm(j))
            .fold(0.0, f64::max)
    }

    /// Trapezoid `∫ ‖u‖² dr` over the grid.
    pub fn u_l2_norm_sq(&self) -> f64 {
        let last = self.grid.node_count() - 1;
        let mut acc = 0.0;
        for j in 0..=last {
            let w = if j == 0 || j == last { 0.5 } else { 1.0 };
            acc += w * self.u_at(j).iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        acc * self.grid.step()
    }

    /// `⟨u, F⟩_ℋ` with the source sampled nodally (Riemann sum; exact
    /// trapezoid for the indicator profile thanks to `u(0) = 0`).
    pub fn inner_product_with_source(&self, source: &SourceProfile) -> Complex64 {
        let h = self.grid.step();
        let mut acc = Complex64::default();
        for j in 0..self.grid.node_count() {
            let r = self.grid.node(j);
            if r > 1.0 + h {
                break;
            }
            let f = source.sample_nodal(r);
            for c in 0..self.dimension {
                acc += self.u_at(j)[c] * f[c].conj();
            }
        }
        acc * h
    }

    /// Maximal deviation of ψ from ψ(∞) over nodes past the support.
    pub fn psi_tail_deviation(&self) -> f64 {
        let start = self.support_bound.max(1.0) + self.grid.step();
        let mut worst: f64 = 0.0;
        for j in 0..self.grid.node_count() {
            if self.grid.node(j) < start {
                continue;
            }
            let dev: f64 = self
                .psi_at(j)
                .iter()
                .zip(&self.psi_infinity)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(dev);
        }
        worst
    }

    /// CSV rows `r, Re u_c, Im u_c, …, Re ψ_c, Im ψ_c, …`.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        write!(out, "r")?;
        for c in 1..=self.dimension {
            write!(out, ",u{c}_re,u{c}_im")?;
        }
        for c in 1..=self.dimension {
            write!(out, ",psi{c}_re,psi{c}_im")?;
        }
        writeln!(out)?;
        for j in 0..self.grid.node_count() {
            write!(out, "{}", self.grid.node(j))?;
            for c in 0..self.dimension {
                let v = self.u_at(j)[c];
                write!(out, ",{},{}", v.re, v.im)?;
            }
            for c in 0..self.dimension {
                let v = self.psi_at(j)[c];
                write!(out, ",{},{}", v.re, v.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Validates the sampling criterion and the wavelength margin of `grid`
/// for the pair (`support`, `k`).
fn validate_grid(grid: &RadialGrid, support: f64, k: Complex64) -> Result<()> {
    let hk = grid.step() * k.norm();
    if hk > SAMPLING_LIMIT {
        return Err(Error::GridTooCoarse(hk));
    }
    let margin = (2.0 * std::f64::consts::PI / k.norm()).min(MARGIN_CAP);
    let required = support.max(1.0) + margin;
    if grid.right_end() < required - 1e-9 {
        return Err(Error::invalid(format!(
            "grid right end {:.4} is below max(T,1) + wavelength margin = {:.4}",
            grid.right_end(),
            required
        )));
    }
    Ok(())
}

/// Default grid for a (potential, k) pair: right end `max(T,1) + 4π/|k|`
/// (capped), rounded up to a whole number of steps.
pub fn default_grid(potential: &MatrixPotential, k: SpectralParameter, step: f64) -> Result<RadialGrid> {
    let margin = (4.0 * std::f64::consts::PI / k.k().norm()).min(MARGIN_CAP);
    RadialGrid::covering(step, potential.support_bound().max(1.0) + margin)
}

enum Factor {
    Scalar(ScalarFactor),
    Block(BlockFactor),
}

impl Factor {
    fn solve(&self, rhs: &mut [Complex64]) {
        match self {
            Factor::Scalar(f) => f.solve(rhs),
            Factor::Block(f) => f.solve(rhs),
        }
    }
}

/// Assembles and factors the discrete gauge operator for `dimension`
/// channels on `grid`. Unknowns are nodes `1…J`.
fn factor_gauge_operator(
    v: &SampledPotential,
    k: Complex64,
    grid: &RadialGrid,
) -> Result<Factor> {
    let n = v.dimension();
    let m = grid.node_count() - 1;
    let h = grid.step();
    let inv_h2 = Complex64::from(1.0 / (h * h));
    let ik_h = Complex64::new(0.0, 1.0) * k / Complex64::from(h);
    let a = -inv_h2 + ik_h; // coefficient of ψ_{j-1}
    let c = -inv_h2 - ik_h; // coefficient of ψ_{j+1}
    let d0 = inv_h2 * Complex64::from(2.0);
    if n == 1 {
        let mut sub = Vec::with_capacity(m - 1);
        let mut diag = Vec::with_capacity(m);
        let mut sup = Vec::with_capacity(m - 1);
        for i in 0..m {
            let j = i + 1;
            diag.push(d0 + v.scalar(j));
            if i + 1 < m {
                // sub entry feeding row i+1; the last row eliminates the
                // ghost node, folding c into the sub-diagonal.
                sub.push(if i + 2 == m { a + c } else { a });
                sup.push(c);
            }
        }
        if m == 1 {
            // single unknown: radiation row only
            return ScalarFactor::new(&[], &diag, &[])
                .map(Factor::Scalar)
                .map_err(|_| Error::SingularSystem(k));
        }
        ScalarFactor::new(&sub, &diag, &sup)
            .map(Factor::Scalar)
            .map_err(|_| Error::SingularSystem(k))
    } else {
        let eye = DMatrix::<Complex64>::identity(n, n);
        let mut sub = Vec::with_capacity(m - 1);
        let mut diag = Vec::with_capacity(m);
        let mut sup = Vec::with_capacity(m - 1);
        for i in 0..m {
            let j = i + 1;
            let block = v.block(j);
            let mut d = eye.map(|e| e * d0);
            for bcol in 0..n {
                for brow in 0..n {
                    d[(brow, bcol)] += block[bcol * n + brow];
                }
            }
            diag.push(d);
            if i + 1 < m {
                let s = if i + 2 == m { a + c } else { a };
                sub.push(eye.map(|e| e * s));
                sup.push(eye.map(|e| e * c));
            }
        }
        BlockFactor::new(&sub, &diag, &sup)
            .map(Factor::Block)
            .map_err(|_| Error::SingularSystem(k))
    }
}

/// Solves the driven equation for a pre-sampled potential and source.
pub fn solve_driven_sampled(
    v: &SampledPotential,
    f: &SampledSource,
    k: SpectralParameter,
    grid: &RadialGrid,
) -> Result<WaveSolution> {
    let n = v.dimension();
    if f.dimension() != n {
        return Err(Error::invalid("source and potential channel counts differ"));
    }
    validate_grid(grid, v.support_bound(), k.k())?;
    let factor = factor_gauge_operator(v, k.k(), grid)?;
    let m = grid.node_count() - 1;
    let kk = k.k();
    let mut rhs = vec![Complex64::default(); m * n];
    for j in 1..=m {
        let block = f.node(j);
        if block.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        // e^{-ikr} grows like e^{Im k·r}; only evaluated on the source
        // support so it stays bounded.
        let phase = (-Complex64::i() * kk * Complex64::from(grid.node(j))).exp();
        for c in 0..n {
            rhs[(j - 1) * n + c] = block[c] * phase;
        }
    }
    factor.solve(&mut rhs);

    let nodes = grid.node_count();
    let mut psi = vec![Complex64::default(); nodes * n];
    psi[n..].copy_from_slice(&rhs);
    let mut u = vec![Complex64::default(); nodes * n];
    for j in 0..nodes {
        let phase = (Complex64::i() * kk * Complex64::from(grid.node(j))).exp();
        for c in 0..n {
            u[j * n + c] = psi[j * n + c] * phase;
        }
    }
    let psi_infinity = psi[(nodes - 1) * n..].to_vec();
    Ok(WaveSolution {
        grid: grid.clone(),
        k,
        dimension: n,
        support_bound: v.support_bound(),
        u,
        psi,
        psi_infinity,
    })
}

/// Solves `-u'' + Vu = k²u + F`, `u(0) = 0`, radiation closure at the right
/// end. Real-axis `k` is legitimate here because every potential has
/// compact support.
pub fn solve_driven(
    potential: &MatrixPotential,
    source: &SourceProfile,
    k: SpectralParameter,
    grid: &RadialGrid,
) -> Result<WaveSolution> {
    if potential.dimension() != source.dimension() {
        return Err(Error::invalid("source and potential channel counts differ"));
    }
    let v = potential.sample_on(grid)?;
    let f = source.sample_on(grid);
    solve_driven_sampled(&v, &f, k, grid)
}

/// One column of the Green's function: `G(·, ρ, k²)`, all channels.
#[derive(Debug, Clone)]
pub struct GreensColumn {
    grid: RadialGrid,
    k: SpectralParameter,
    dimension: usize,
    source_node: usize,
    /// `(J+1)` blocks, column-major within each `N×N` block.
    values: Vec<Complex64>,
}

impl GreensColumn {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn k(&self) -> SpectralParameter {
        self.k
    }

    pub fn source_node(&self) -> usize {
        self.source_node
    }

    pub fn rho(&self) -> f64 {
        self.grid.node(self.source_node)
    }

    pub fn block(&self, j: usize) -> DMatrix<Complex64> {
        let n = self.dimension;
        DMatrix::from_fn(n, n, |a, b| self.values[j * n * n + b * n + a])
    }

    /// Operator norm of the block at node `j` (largest singular value).
    pub fn norm(&self, j: usize) -> f64 {
        if self.dimension == 1 {
            self.values[j].norm()
        } else {
            crate::operator::operator_norm(&self.block(j))
        }
    }
}

/// Green's-function column for a discrete delta (weight `1/h`) at the grid
/// node nearest `ρ`. The solve is gauged around the source position so the
/// stored data keep full relative accuracy at large separations.
pub fn greens_column(
    potential: &MatrixPotential,
    k: SpectralParameter,
    rho: f64,
    grid: &RadialGrid,
) -> Result<GreensColumn> {
    let v = potential.sample_on(grid)?;
    validate_grid(grid, v.support_bound(), k.k())?;
    let n = v.dimension();
    let j0 = grid.nearest_node(rho);
    if j0 == 0 {
        return Err(Error::invalid("source radius must be a positive grid node"));
    }
    let factor = factor_gauge_operator(&v, k.k(), grid)?;
    let m = grid.node_count() - 1;
    let h = grid.step();
    let nodes = grid.node_count();
    let mut values = vec![Complex64::default(); nodes * n * n];
    // Solve Φ = e^{-ik(r-ρ)}·G(·,ρ) column by column: the delta RHS needs
    // no exponential prefactor in this gauge.
    for col in 0..n {
        let mut rhs = vec![Complex64::default(); m * n];
        rhs[(j0 - 1) * n + col] = Complex64::from(1.0 / h);
        factor.solve(&mut rhs);
        for j in 1..nodes {
            let phase = (Complex64::i() * k.k() * Complex64::from(grid.node(j) - grid.node(j0))).exp();
            for a in 0..n {
                values[j * n * n + col * n + a] = rhs[(j - 1) * n + a] * phase;
            }
        }
    }
    Ok(GreensColumn {
        grid: grid.clone(),
        k,
        dimension: n,
        source_node: j0,
        values,
    })
}

/// Recomputes `ψ = e^{-ikr}u` and `ψ(∞)` from the stored `u`, then returns
/// the maximal discrete residual of the gauge equation
/// `-ψ'' - 2ikψ' + Vψ - Fe^{-ikr}` over interior nodes.
pub fn gauge_transform(
    solution: &mut WaveSolution,
    potential: &MatrixPotential,
    source: &SourceProfile,
) -> Result<f64> {
    let n = solution.dimension;
    let kk = solution.k.k();
    let nodes = solution.grid.node_count();
    for j in 0..nodes {
        let phase = (-Complex64::i() * kk * Complex64::from(solution.grid.node(j))).exp();
        for c in 0..n {
            solution.psi[j * n + c] = solution.u[j * n + c] * phase;
        }
    }
    solution.psi_infinity = solution.psi[(nodes - 1) * n..].to_vec();
    gauge_residual_max(solution, potential, source)
}

/// Maximal norm over interior nodes of the discrete gauge-equation residual.
pub fn gauge_residual_max(
    solution: &WaveSolution,
    potential: &MatrixPotential,
    source: &SourceProfile,
) -> Result<f64> {
    let v = potential.sample_on(&solution.grid)?;
    let f = source.sample_on(&solution.grid);
    let n = solution.dimension;
    let h = solution.grid.step();
    let kk = solution.k.k();
    let two_ik = Complex64::i() * kk * Complex64::from(2.0);
    let mut worst: f64 = 0.0;
    for j in 1..solution.grid.node_count() - 1 {
        let psi_m = solution.psi_at(j - 1);
        let psi_0 = solution.psi_at(j);
        let psi_p = solution.psi_at(j + 1);
        let block = v.block(j);
        let mut res_sq = 0.0;
        let r = solution.grid.node(j);
        let phase_ok = kk.im * r < 600.0;
        for a in 0..n {
            let d2 = (psi_p[a] - psi_0[a] * Complex64::from(2.0) + psi_m[a]) / Complex64::from(h * h);
            let d1 = (psi_p[a] - psi_m[a]) / Complex64::from(2.0 * h);
            let mut vpsi = Complex64::default();
            for b in 0..n {
                vpsi += block[b * n + a] * psi_0[b];
            }
            let mut rhs = Complex64::default();
            if phase_ok {
                let fval = f.node(j)[a];
                if fval.norm_sqr() > 0.0 {
                    rhs = fval * (-Complex64::i() * kk * Complex64::from(r)).exp();
                }
            }
            res_sq += (-d2 - two_ik * d1 + vpsi - rhs).norm_sqr();
        }
        worst = worst.max(res_sq.sqrt());
    }
    Ok(worst)
}

/// Maximal norm over interior nodes of the discrete residual of the
/// original equation `-D₂u + Vu - k²u - F` (centered second difference).
pub fn driven_residual_max(
    solution: &WaveSolution,
    potential: &MatrixPotential,
    source: &SourceProfile,
) -> Result<f64> {
    let v = potential.sample_on(&solution.grid)?;
    let f = source.sample_on(&solution.grid);
    let n = solution.dimension;
    let h = solution.grid.step();
    let z = solution.k.z();
    let mut worst: f64 = 0.0;
    for j in 1..solution.grid.node_count() - 1 {
        let u_m = solution.u_at(j - 1);
        let u_0 = solution.u_at(j);
        let u_p = solution.u_at(j + 1);
        let block = v.block(j);
        let mut res_sq = 0.0;
        for a in 0..n {
            let d2 = (u_p[a] - u_0[a] * Complex64::from(2.0) + u_m[a]) / Complex64::from(h * h);
            let mut vu = Complex64::default();
            for b in 0..n {
                vu += block[b * n + a] * u_0[b];
            }
            res_sq += (-d2 + vu - z * u_0[a] - f.node(j)[a]).norm_sqr();
        }
        worst = worst.max(res_sq.sqrt());
    }
    Ok(worst)
}

/// Grid-refinement study of `ψ(∞, k)`.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub psi_infinity: Vec<Vec<Complex64>>,
    /// `‖ψ_h(∞) - ψ_{h/2}(∞)‖` per refinement.
    pub diffs: Vec<f64>,
    /// `log₂` of successive difference ratios; empty if differences sit at
    /// roundoff.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn empirical_order(&self) -> Option<f64> {
        if self.orders.is_empty() {
            None
        } else {
            Some(self.orders.iter().sum::<f64>() / self.orders.len() as f64)
        }
    }
}

/// Solves on `grid`, `grid/2`, … (`levels ≥ 2` grids) and reports the
/// empirical convergence order of `ψ(∞, k)`; expected ≈ 2.
pub fn richardson_check(
    potential: &MatrixPotential,
    source: &SourceProfile,
    k: SpectralParameter,
    grid: &RadialGrid,
    levels: usize,
) -> Result<ConvergenceReport> {
    assert!(levels >= 2);
    let mut g = grid.clone();
    let mut steps = Vec::with_capacity(levels);
    let mut psis = Vec::with_capacity(levels);
    for _ in 0..levels {
        let sol = solve_driven(potential, source, k, &g)?;
        steps.push(g.step());
        psis.push(sol.psi_infinity().to_vec());
        g = g.refined();
    }
    let scale = psis
        .iter()
        .map(|p| norm(p))
        .fold(0.0, f64::max)
        .max(1e-30);
    let diffs: Vec<f64> = psis
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mut orders = Vec::new();
    for w in diffs.windows(2) {
        if w[0] > 1e-13 * scale && w[1] > 1e-14 * scale {
            orders.push((w[0] / w[1]).log2());
        }
    }
    Ok(ConvergenceReport { steps, psi_infinity: psis, diffs, orders })
}

/// Closed-form free Green's function
/// `G⁰(r,ρ,k²) = (i/2k)(e^{ik|r-ρ|} - e^{ik(r+ρ)})`.
pub fn free_greens_function(r: f64, rho: f64, k: Complex64) -> Complex64 {
    let i = Complex64::i();
    i / (k * Complex64::from(2.0))
        * ((i * k * Complex64::from((r - rho).abs())).exp() - (i * k * Complex64::from(r + rho)).exp())
}
