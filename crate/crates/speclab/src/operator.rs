//! Channel spaces, matrix-valued potentials, source profiles, and the
//! spectral-parameter convention `z = k²`.
//!
//! Potentials and sources are pure samplers evaluated per grid node, so one
//! object serves many grids. All types are immutable after construction.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::grid::RadialGrid;
use crate::harmonics::{degree_order, real_harmonic, SphereQuadrature};
use crate::{Error, Result};

/// Truncation of `ℓ²(ℕ)` to the first `N ≥ 1` channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelSpace {
    dimension: usize,
}

impl ChannelSpace {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("channel space needs at least one channel"));
        }
        Ok(ChannelSpace { dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Power-law decay envelope `λ(1+r)^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub lambda: f64,
    pub gamma: f64,
}

impl DecayEnvelope {
    pub fn at(&self, r: f64) -> f64 {
        self.lambda * (1.0 + r).powf(-self.gamma)
    }
}

type MatrixSampler = Arc<dyn Fn(f64) -> DMatrix<Complex64> + Send + Sync>;

/// Hermitian `N×N` potential `r ↦ V(r)` with compact support `[0, T]`.
///
/// The declared envelope, when present, bounds the operator norm of every
/// sample; the spherical-reduction generator carries no envelope (its
/// centrifugal part does not decay like a power law) and envelope checks
/// for it are advisory only.
#[derive(Clone)]
pub struct MatrixPotential {
    channels: ChannelSpace,
    support_bound: f64,
    envelope: Option<DecayEnvelope>,
    sampler: MatrixSampler,
}

impl std::fmt::Debug for MatrixPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixPotential")
            .field("channels", &self.channels.dimension())
            .field("support_bound", &self.support_bound)
            .field("envelope", &self.envelope)
            .finish_non_exhaustive()
    }
}

/// Operator norm (largest singular value) of a complex matrix.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone().singular_values().max()
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl MatrixPotential {
    /// `V(r) = λ(1+r)^{-γ}·χ_{[0,T]}(r)·coupling` with a Hermitian coupling
    /// pattern of unit operator norm.
    ///
    /// Accepts `γ ∈ (0, 1]`; the multiscale iteration additionally requires
    /// `γ > 2/3` and gates on that itself. `λ = 0` produces the zero
    /// potential.
    pub fn power_law(
        channels: ChannelSpace,
        lambda: f64,
        gamma: f64,
        support: f64,
        coupling: DMatrix<Complex64>,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::invalid(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        if !(lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be nonnegative, got {lambda}")));
        }
        if !(support > 1.0) {
            return Err(Error::invalid(format!("support bound must exceed 1, got {support}")));
        }
        let n = channels.dimension();
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(Error::invalid("coupling pattern does not match the channel space"));
        }
        if hermiticity_defect(&coupling) > 1e-12 {
            return Err(Error::invalid("coupling pattern is not Hermitian"));
        }
        if lambda > 0.0 && (operator_norm(&coupling) - 1.0).abs() > 1e-8 {
            return Err(Error::invalid("coupling pattern must have unit operator norm"));
        }
        let envelope = DecayEnvelope { lambda, gamma };
        let sampler: MatrixSampler = Arc::new(move |r: f64| {
            if r > support || lambda == 0.0 {
                DMatrix::zeros(n, n)
            } else {
                let scale = Complex64::new(envelope.at(r), 0.0);
                coupling.map(|c| c * scale)
            }
        });
        Ok(MatrixPotential {
            channels,
            support_bound: support,
            envelope: Some(envelope),
            sampler,
        })
    }

    /// The zero potential (free operator) on `N` channels.
    pub fn zero(channels: ChannelSpace) -> Self {
        let n = channels.dimension();
        MatrixPotential {
            channels,
            support_bound: 2.0,
            envelope: Some(DecayEnvelope { lambda: 0.0, gamma: 0.8 }),
            sampler: Arc::new(move |_| DMatrix::zeros(n, n)),
        }
    }

    /// Channel-truncated reduction of `-∂²_rr - P_{≤r^κ}B/r² + V(r,θ)`:
    /// channel `m` (harmonics in increasing degree) carries the centrifugal
    /// entry `l(l+1)/r²` once `m ≤ ⌊r^κ⌋`, plus the matrix elements of the
    /// scalar angular potential in the real-harmonic basis, computed by
    /// product quadrature on the sphere.
    ///
    /// No decay envelope is declared: the centrifugal part grows with the
    /// number of active harmonics and is generally not power-law bounded.
    pub fn spherical_reduction(
        channel_budget: usize,
        kappa: f64,
        support: f64,
        angular: Option<Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>>,
    ) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
        }
        if !(support > 1.0) {
            return Err(Error::invalid(format!("support bound must exceed 1, got {support}")));
        }
        let channels = ChannelSpace::new(channel_budget)?;
        let active_at_support = support.powf(kappa).floor() as usize;
        if channel_budget < active_at_support {
            return Err(Error::invalid(format!(
                "channel budget {channel_budget} cannot hold the {active_at_support} harmonics active at r = {support}"
            )));
        }
        let l_max = degree_order(channel_budget.saturating_sub(1)).0;
        let quad = Arc::new(SphereQuadrature::new(2 * l_max + 4));
        let n = channel_budget;
        let sampler: MatrixSampler = Arc::new(move |r: f64| {
            let mut m = DMatrix::zeros(n, n);
            if r > support || r <= 0.0 {
                return m;
            }
            let active = (r.powf(kappa).floor() as usize).min(n);
            for idx in 0..active {
                let (l, _) = degree_order(idx);
                let centrifugal = (l * (l + 1)) as f64 / (r * r);
                m[(idx, idx)] += Complex64::new(centrifugal, 0.0);
            }
            if let Some(v) = &angular {
                for a in 0..n {
                    for b in a..n {
                        let val = quad.integrate(|t, p| {
                            v(r, t, p) * real_harmonic(a, t, p) * real_harmonic(b, t, p)
                        });
                        m[(a, b)] += Complex64::new(val, 0.0);
                        if a != b {
                            m[(b, a)] += Complex64::new(val, 0.0);
                        }
                    }
                }
            }
            m
        });
        Ok(MatrixPotential {
            channels,
            support_bound: support,
            envelope: None,
            sampler,
        })
    }

    pub fn channels(&self) -> ChannelSpace {
        self.channels
    }

    pub fn dimension(&self) -> usize {
        self.channels.dimension()
    }

    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    pub fn envelope(&self) -> Option<DecayEnvelope> {
        self.envelope
    }

    /// Raw sample `V(r)`.
    pub fn sample(&self, r: f64) -> DMatrix<Complex64> {
        (self.sampler)(r)
    }

    /// Potential truncated to `[0, t]`; the support bound shrinks to
    /// `min(T, t)` and samples beyond it vanish.
    pub fn truncated(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("truncation radius must be positive, got {t}")));
        }
        let inner = self.sampler.clone();
        let n = self.dimension();
        let sampler: MatrixSampler = Arc::new(move |r: f64| {
            if r > t {
                DMatrix::zeros(n, n)
            } else {
                inner(r)
            }
        });
        Ok(MatrixPotential {
            channels: self.channels,
            support_bound: self.support_bound.min(t),
            envelope: self.envelope,
            sampler,
        })
    }

    /// Samples the potential on every node of `grid`, applying the midpoint
    /// convention at the support jump and validating Hermiticity (and the
    /// envelope, when one is declared) at each node.
    pub fn sample_on(&self, grid: &RadialGrid) -> Result<SampledPotential> {
        let n = self.dimension();
        let t = self.support_bound;
        let mut values = Vec::with_capacity(grid.node_count() * n * n);
        let mut max_norm: f64 = 0.0;
        for j in 0..grid.node_count() {
            let r = grid.node(j);
            let mut m = self.sample(r);
            // A node sitting exactly on the support edge carries the mean of
            // the one-sided limits (V vanishes beyond T), keeping the nodal
            // data second-order consistent with the truncated potential.
            if (r - t).abs() <= 1e-9 * t.max(1.0) {
                m.scale_mut(0.5);
            }
            let defect = hermiticity_defect(&m);
            let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
            if defect > 1e-12 * scale {
                return Err(Error::invalid(format!(
                    "potential sample at r = {r} is not Hermitian (defect {defect:.3e})"
                )));
            }
            if let Some(env) = self.envelope {
                // Frobenius norm dominates the operator norm; only fall back
                // to the exact singular value when the cheap bound fails.
                let frob = m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                let bound = env.at(r) + 1e-12 * (1.0 + env.lambda);
                if frob > bound && operator_norm(&m) > bound {
                    return Err(Error::invalid(format!(
                        "potential sample at r = {r} violates the decay envelope"
                    )));
                }
            }
            max_norm = max_norm.max(operator_norm(&m));
            values.extend(m.iter().copied());
        }
        Ok(SampledPotential {
            dimension: n,
            support_bound: t,
            sup_norm: max_norm,
            values,
        })
    }
}

/// Potential pre-sampled on a grid: column-major `N×N` block per node.
#[derive(Debug, Clone)]
pub struct SampledPotential {
    dimension: usize,
    support_bound: f64,
    sup_norm: f64,
    values: Vec<Complex64>,
}

impl SampledPotential {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    /// Sup over sampled nodes of the operator norm.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn block(&self, j: usize) -> &[Complex64] {
        let nn = self.dimension * self.dimension;
        &self.values[j * nn..(j + 1) * nn]
    }

    /// Scalar value at node `j` (single-channel potentials only).
    pub fn scalar(&self, j: usize) -> Complex64 {
        debug_assert_eq!(self.dimension, 1);
        self.values[j]
    }
}

type VectorSampler = Arc<dyn Fn(f64) -> DVector<Complex64> + Send + Sync>;

/// Driving profile `F` with support in `[0, 1]` and unit `ℋ`-norm.
#[derive(Clone)]
pub struct SourceProfile {
    channels: ChannelSpace,
    sampler: VectorSampler,
    /// Radii where the profile jumps; nodal sampling uses the mean of the
    /// one-sided limits there.
    jumps: Vec<f64>,
}

impl std::fmt::Debug for SourceProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceProfile")
            .field("channels", &self.channels.dimension())
            .field("jumps", &self.jumps)
            .finish_non_exhaustive()
    }
}

impl SourceProfile {
    /// `F = (χ_{[0,1]}, 0, …)`: all mass in channel 1, unit norm exactly.
    pub fn indicator(channels: ChannelSpace) -> Self {
        let n = channels.dimension();
        SourceProfile {
            channels,
            sampler: Arc::new(move |r: f64| {
                let mut v = DVector::zeros(n);
                if (0.0..=1.0).contains(&r) {
                    v[0] = Complex64::new(1.0, 0.0);
                }
                v
            }),
            jumps: vec![1.0],
        }
    }

    /// Smooth variant `f(r) = √30·r(1-r)` on `[0, 1]` (unit norm since
    /// `∫₀¹ r²(1-r)² dr = 1/30`), mass in channel 1.
    pub fn smooth(channels: ChannelSpace) -> Self {
        let n = channels.dimension();
        let c = 30.0_f64.sqrt();
        SourceProfile {
            channels,
            sampler: Arc::new(move |r: f64| {
                let mut v = DVector::zeros(n);
                if (0.0..=1.0).contains(&r) {
                    v[0] = Complex64::new(c * r * (1.0 - r), 0.0);
                }
                v
            }),
            jumps: Vec::new(),
        }
    }

    /// Arbitrary profile; caller declares jump radii for nodal sampling.
    pub fn custom(channels: ChannelSpace, sampler: VectorSampler, jumps: Vec<f64>) -> Self {
        SourceProfile { channels, sampler, jumps }
    }

    pub fn channels(&self) -> ChannelSpace {
        self.channels
    }

    pub fn dimension(&self) -> usize {
        self.channels.dimension()
    }

    pub fn sample(&self, r: f64) -> DVector<Complex64> {
        (self.sampler)(r)
    }

    /// Sample with the jump midpoint convention applied: a node sitting
    /// exactly on a declared jump carries the mean of the one-sided limits.
    pub fn sample_nodal(&self, r: f64) -> DVector<Complex64> {
        for &jr in &self.jumps {
            if (r - jr).abs() <= 1e-9 * jr.abs().max(1.0) {
                let left = self.sample(jr - 1e-7);
                let right = self.sample(jr + 1e-7);
                return (left + right).scale(0.5);
            }
        }
        self.sample(r)
    }

    /// `∫₀¹ ‖F‖² dr` by panel-wise trapezoid on `grid`; panels stop at the
    /// support edge so a jump sitting on a node costs nothing.
    pub fn quadrature_norm_sq(&self, grid: &RadialGrid) -> f64 {
        let h = grid.step();
        let mut acc = 0.0;
        let mut prev = self.sample(0.0).norm_squared();
        for j in 1..grid.node_count() {
            let r = grid.node(j);
            if r > 1.0 + 1e-12 {
                break;
            }
            let cur = self.sample(r).norm_squared();
            acc += 0.5 * (prev + cur) * h;
            prev = cur;
        }
        acc
    }

    /// Samples the profile on every node with the nodal jump convention.
    pub fn sample_on(&self, grid: &RadialGrid) -> SampledSource {
        let n = self.dimension();
        let mut values = Vec::with_capacity(grid.node_count() * n);
        for j in 0..grid.node_count() {
            let v = self.sample_nodal(grid.node(j));
            values.extend(v.iter().copied());
        }
        SampledSource { dimension: n, values }
    }
}

/// Source pre-sampled on a grid (nodal convention applied).
#[derive(Debug, Clone)]
pub struct SampledSource {
    dimension: usize,
    values: Vec<Complex64>,
}

impl SampledSource {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn node(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.dimension..(j + 1) * self.dimension]
    }
}

/// Spectral parameter: `k` in the closed first quadrant minus the origin,
/// `z = k²` with `k` the principal square root of `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    k: Complex64,
}

impl SpectralParameter {
    pub fn from_k(k: Complex64) -> Result<Self> {
        if !(k.re >= 0.0 && k.im >= 0.0 && k.norm() > 0.0 && k.re.is_finite() && k.im.is_finite())
        {
            return Err(Error::invalid(format!(
                "k must lie in the closed first quadrant away from 0, got {k}"
            )));
        }
        Ok(SpectralParameter { k })
    }

    /// Principal square root: `Im z > 0` maps to `Re k > 0, Im k > 0`.
    pub fn from_z(z: Complex64) -> Result<Self> {
        if z.im < 0.0 {
            return Err(Error::invalid(format!("z must satisfy Im z >= 0, got {z}")));
        }
        Self::from_k(z.sqrt())
    }

    /// Real-axis evaluation at `k > 0` (legitimate for compactly supported
    /// potentials).
    pub fn real_axis(k: f64) -> Result<Self> {
        Self::from_k(Complex64::new(k, 0.0))
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn z(&self) -> Complex64 {
        self.k * self.k
    }

    pub fn is_real_axis(&self) -> bool {
        self.k.im == 0.0
    }
}

/// Identity coupling pattern of dimension `n`.
pub fn identity_coupling(n: usize) -> DMatrix<Complex64> {
    DMatrix::identity(n, n)
}
