use num_complex::Complex64;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The sampling criterion `h·|k| ≤ 0.5` is violated.
    #[error("grid too coarse: h*|k| = {0:.3e} exceeds 0.5")]
    GridTooCoarse(f64),

    /// The discretized operator is numerically singular (k² within
    /// discretization distance of a resonance of the truncated problem).
    #[error("linear system numerically singular near k = {0}")]
    SingularSystem(Complex64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// An interval shrink would produce nonpositive length; the starting
    /// scale is too small for the interval.
    #[error("interval exhausted: shrink by 2*{shrink:.6} exceeds length {length:.6}")]
    IntervalExhausted { shrink: f64, length: f64 },

    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),

    /// A decay fit has too few usable points above the noise floor.
    #[error("decay fit underdetermined: only {0} usable separations")]
    FitUnderdetermined(usize),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }
}
