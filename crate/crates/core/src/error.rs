use thiserror::Error;

/// Errors raised by the solver library.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spectral parameter {re}{im:+}i lies on the cut [0, inf)")]
    OnCut { re: f64, im: f64 },

    #[error("spectral parameter w = 0 is the branch point of the 1D Green function")]
    BranchPoint,

    #[error("3D Green function is singular at zero separation")]
    SingularPoint,

    #[error("derivative of the 1D Green function is undefined at x = 0")]
    UndefinedSign,

    #[error("negative radius {0} passed as a 3D displacement")]
    NegativeRadius(f64),

    #[error("overlap is degenerate for z = w")]
    DegenerateOverlap,

    #[error("spin count {n} outside 1..={cap}")]
    SpinCount { n: usize, cap: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}x{expected} matrices, got {rows}x{cols}")]
    MatrixShape { expected: usize, rows: usize, cols: usize },

    #[error("multi-index component out of range: {0}")]
    IndexOutOfRange(String),

    #[error("spin sites {0} and {1} coincide")]
    CoincidentSites(usize, usize),

    #[error("unsupported dimension {0} (expected 1 or 3)")]
    BadDimension(usize),

    #[error("{what} is not available in dimension {dim}")]
    UnsupportedDimension { what: &'static str, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("boundary pair fails validation (hermiticity defect {defect:e}, rank {rank}/{size}); pass `unchecked` to evaluate anyway")]
    InvalidPair { defect: f64, rank: usize, size: usize },

    #[error("Gamma^AB(z) is singular or ill-conditioned (condition ~ {condition:e}, smallest singular value {smallest_singular_value:e}); z is at or near a discrete eigenvalue")]
    NearPole { condition: f64, smallest_singular_value: f64 },

    #[error("evaluation point coincides with spin site {0}")]
    AtSpinSite(usize),

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("extrapolation of boundary data did not converge: error estimate {estimate:e}, tolerance {tolerance:e}")]
    Extrapolation { estimate: f64, tolerance: f64 },

    #[error("no exponential decay available to choose a truncation radius (Im sqrt(w) = 0)")]
    NoDecay,

    #[error("energy {energy} is not below the essential spectrum bottom {bottom}")]
    AboveThreshold { energy: f64, bottom: f64 },

    #[error("norm drift {drift:e} at t = {t} exceeds the tolerance {tolerance:e}")]
    NormDrift { t: f64, drift: f64, tolerance: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
