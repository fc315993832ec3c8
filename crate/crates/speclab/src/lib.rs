//! Numerical laboratory for one-dimensional Schrödinger operators
//! `H = -d²/dr² + V(r)` on the half-line with Dirichlet condition at the
//! origin and Hermitian matrix-valued, compactly supported potentials.
//!
//! The crate is organized around a driven-equation solver
//! (`-u'' + Vu = k²u + F`) with an exact outgoing boundary closure, and the
//! machinery built on top of it:
//!
//! * [`operator`] — channel spaces, matrix potentials, source profiles,
//!   spectral-parameter conventions;
//! * [`solver`] — the block-tridiagonal driven solve, gauge transform
//!   `ψ = e^{-ikr}u`, Green's-function columns, convergence reporting;
//! * [`spectral`] — spectral densities from boundary data of ψ, the
//!   Stieltjes-inversion cross-check, entropy integrals;
//! * [`multiscale`] — dyadic potential truncations, the zone of perfect
//!   control, shrinking-interval iteration and its stability probes;
//! * [`harmonic`] — harmonic measure of cylinders, rectangles and thin
//!   trapezoids (exact, finite-difference, walk-on-spheres) plus the
//!   subharmonic interpolation checks;
//! * [`bounds`] — equation-level integral identities and Combes–Thomas
//!   decay verification against solver output.

pub mod bounds;
pub mod fit;
pub mod grid;
pub mod harmonic;
pub mod harmonics;
pub mod interval;
pub mod multiscale;
pub mod operator;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod tridiag;
pub mod verdict;

mod error;

pub use error::Error;
pub use interval::Interval;
pub use verdict::Verdict;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
