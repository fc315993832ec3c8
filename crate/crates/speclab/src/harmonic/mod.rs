//! Harmonic measure of cylinders, rectangles, and thin isosceles
//! trapezoids: the exact cylinder kernel, a Shortley–Weller
//! finite-difference solver, a walk-on-spheres estimator, and the
//! subharmonic interpolation checks built on them.
//!
//! Boundaries decompose into exactly four pieces (lower, right, upper,
//! left); for the trapezoid the left/right pieces are the legs and for the
//! truncated cylinder they are the artificial cuts.

pub mod fd;
pub mod geometry;
pub mod lemmas;
pub mod walk;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::interval::Interval;
use crate::{Error, Result};
use geometry::{inside_convex, Segment};

/// Boundary piece of a four-sided domain, enumerated CCW from the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceId {
    Lower,
    Right,
    Upper,
    Left,
}

impl PieceId {
    pub const ALL: [PieceId; 4] = [PieceId::Lower, PieceId::Right, PieceId::Upper, PieceId::Left];
}

impl std::fmt::Display for PieceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PieceId::Lower => "lower",
            PieceId::Right => "right",
            PieceId::Upper => "upper",
            PieceId::Left => "left",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DomainKind {
    /// Infinite strip `0 < Im k < ε` truncated to `|Re k| ≤ cut` for the
    /// numerical methods; the exponential tail of the truncation (rate
    /// `π/ε`) belongs to their error budget.
    Cylinder { epsilon: f64, cut: f64 },
    /// `R_{I,δ} = I × (0, height)`.
    Rectangle { x0: f64, x1: f64, height: f64 },
    /// Thin isosceles trapezoid: lower base on the real axis, legs at base
    /// angle `π/β`, height ε.
    Trapezoid { base_left: f64, base_right: f64, epsilon: f64, beta: f64 },
}

/// Convex four-sided planar domain with a labelled boundary decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarDomain {
    pub kind: DomainKind,
    /// CCW vertices: lower-left, lower-right, upper-right, upper-left.
    vertices: [(f64, f64); 4],
    /// Regime conditions not met (checks still run, marked non-asserting).
    pub regime_flags: Vec<String>,
}

impl PlanarDomain {
    fn from_vertices(kind: DomainKind, vs: [Complex64; 4], regime_flags: Vec<String>) -> Self {
        PlanarDomain {
            kind,
            vertices: [
                (vs[0].re, vs[0].im),
                (vs[1].re, vs[1].im),
                (vs[2].re, vs[2].im),
                (vs[3].re, vs[3].im),
            ],
            regime_flags,
        }
    }

    /// Truncated model of `Cyl_ε = {0 < Im k < ε}`.
    pub fn cylinder(epsilon: f64, cut: f64) -> Result<Self> {
        if !(epsilon > 0.0 && cut > epsilon) {
            return Err(Error::invalid("cylinder needs 0 < epsilon < cut"));
        }
        let vs = [
            Complex64::new(-cut, 0.0),
            Complex64::new(cut, 0.0),
            Complex64::new(cut, epsilon),
            Complex64::new(-cut, epsilon),
        ];
        Ok(Self::from_vertices(DomainKind::Cylinder { epsilon, cut }, vs, Vec::new()))
    }

    /// Rectangle `I × (0, height)`.
    pub fn rectangle(base: Interval, height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::invalid("rectangle height must be positive"));
        }
        let vs = [
            Complex64::new(base.left(), 0.0),
            Complex64::new(base.right(), 0.0),
            Complex64::new(base.right(), height),
            Complex64::new(base.left(), height),
        ];
        Ok(Self::from_vertices(
            DomainKind::Rectangle { x0: base.left(), x1: base.right(), height },
            vs,
            Vec::new(),
        ))
    }

    /// Trapezoid with a given lower base, height ε, base angles `π/β`.
    /// `β > 2` is structural (legs must lean inward); thinness regimes are
    /// recorded as flags, not enforced.
    pub fn trapezoid_on_base(base: Interval, epsilon: f64, beta: f64) -> Result<Self> {
        if !(beta > 2.0) {
            return Err(Error::invalid(format!("trapezoid needs beta > 2, got {beta}")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::invalid("trapezoid height must be positive"));
        }
        let angle = PI / beta;
        let inset = epsilon / angle.tan();
        if 2.0 * inset >= base.length() {
            return Err(Error::invalid("trapezoid too tall: upper base collapses"));
        }
        let mut flags = Vec::new();
        if epsilon >= 0.1 {
            flags.push("epsilon-not-small".to_string());
        }
        let vs = [
            Complex64::new(base.left(), 0.0),
            Complex64::new(base.right(), 0.0),
            Complex64::new(base.right() - inset, epsilon),
            Complex64::new(base.left() + inset, epsilon),
        ];
        Ok(Self::from_vertices(
            DomainKind::Trapezoid {
                base_left: base.left(),
                base_right: base.right(),
                epsilon,
                beta,
            },
            vs,
            flags,
        ))
    }

    /// The normalized trapezoid with lower base `[0, 2]`.
    pub fn trapezoid_normalized(epsilon: f64, beta: f64) -> Result<Self> {
        Self::trapezoid_on_base(Interval::new(0.0, 2.0)?, epsilon, beta)
    }

    /// Trapezoid `𝒯` parameterized by the projection of its *upper* base.
    pub fn trapezoid(upper_projection: Interval, epsilon: f64, beta: f64) -> Result<Self> {
        let inset = epsilon / (PI / beta).tan();
        let base =
            Interval::new(upper_projection.left() - inset, upper_projection.right() + inset)?;
        Self::trapezoid_on_base(base, epsilon, beta)
    }

    pub fn vertex(&self, i: usize) -> Complex64 {
        Complex64::new(self.vertices[i].0, self.vertices[i].1)
    }

    fn vertex_ring(&self) -> [Complex64; 4] {
        [self.vertex(0), self.vertex(1), self.vertex(2), self.vertex(3)]
    }

    /// Edge of a boundary piece, oriented CCW.
    pub fn piece_segment(&self, piece: PieceId) -> Segment {
        let v = self.vertex_ring();
        match piece {
            PieceId::Lower => Segment { a: v[0], b: v[1] },
            PieceId::Right => Segment { a: v[1], b: v[2] },
            PieceId::Upper => Segment { a: v[2], b: v[3] },
            PieceId::Left => Segment { a: v[3], b: v[0] },
        }
    }

    pub fn edges(&self) -> [(PieceId, Segment); 4] {
        PieceId::ALL.map(|p| (p, self.piece_segment(p)))
    }

    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        let v = self.vertex_ring();
        let x0 = v.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
        let x1 = v.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        let y0 = v.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
        let y1 = v.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max);
        (Complex64::new(x0, y0), Complex64::new(x1, y1))
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Shortest dimension (the thin direction the mesh must resolve).
    pub fn thinnest_dimension(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi.re - lo.re).min(hi.im - lo.im)
    }

    pub fn contains(&self, p: Complex64) -> bool {
        inside_convex(&self.vertex_ring(), p, 1e-12 * self.diameter().max(1.0))
    }

    /// Distance to the boundary with the closest point and its piece.
    pub fn boundary_distance(&self, p: Complex64) -> (f64, Complex64, PieceId) {
        let mut best = (f64::INFINITY, p, PieceId::Lower);
        for (piece, seg) in self.edges() {
            let (d, q, _) = seg.closest_point(p);
            if d < best.0 {
                best = (d, q, piece);
            }
        }
        best
    }

    /// Short identifier for reports and CSV rows.
    pub fn id(&self) -> String {
        match &self.kind {
            DomainKind::Cylinder { epsilon, cut } => format!("cylinder(eps={epsilon},cut={cut})"),
            DomainKind::Rectangle { x0, x1, height } => {
                format!("rectangle([{x0},{x1}]x{height})")
            }
            DomainKind::Trapezoid { base_left, base_right, epsilon, beta } => {
                format!("trapezoid([{base_left},{base_right}],eps={epsilon},beta={beta})")
            }
        }
    }
}

/// Exact density of harmonic measure of the infinite cylinder
/// `{0 < Im k < ε}` on its lower side:
/// `ω'_k(t) = (1/2ε)·sin(πy/ε) / (cosh(π(x-t)/ε) - cos(πy/ε))`.
pub fn cylinder_density(epsilon: f64, pole: Complex64, t: f64) -> f64 {
    assert!(pole.im > 0.0 && pole.im < epsilon, "pole must lie inside the cylinder");
    let s = PI / epsilon;
    0.5 / epsilon * (s * pole.im).sin() / ((s * (pole.re - t)).cosh() - (s * pole.im).cos())
}

/// Exact total mass of the lower side of the infinite cylinder: `1 - y/ε`
/// (the lower-side indicator extends harmonically to `1 - y/ε`).
pub fn cylinder_lower_mass(epsilon: f64, pole: Complex64) -> f64 {
    1.0 - pole.im / epsilon
}

/// How a harmonic-measure estimate was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum MeasureMethod {
    Exact,
    Grid { mesh: f64 },
    MonteCarlo { walkers: usize, seed: u64 },
}

/// Harmonic measure of the boundary pieces seen from one pole.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicMeasureEstimate {
    pub domain_id: String,
    pub pole_re: f64,
    pub pole_im: f64,
    pub method: MeasureMethod,
    pub masses: Vec<(PieceId, f64)>,
    /// Standard error (MC) or refinement gauge (grid) per piece.
    pub errors: Vec<(PieceId, f64)>,
    /// Walkers that hit the step cap without absorbing (MC only).
    pub unabsorbed: usize,
}

impl HarmonicMeasureEstimate {
    pub fn mass_of(&self, piece: PieceId) -> f64 {
        self.masses.iter().find(|(p, _)| *p == piece).map(|(_, m)| *m).unwrap_or(0.0)
    }

    pub fn error_of(&self, piece: PieceId) -> f64 {
        self.errors.iter().find(|(p, _)| *p == piece).map(|(_, e)| *e).unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().map(|(_, m)| m).sum()
    }
}
