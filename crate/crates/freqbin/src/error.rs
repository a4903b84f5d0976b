use thiserror::Error;

/// Errors raised across the simulation and reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation contract (bad lengths, ranges, flags).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Matrix/vector dimensions do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix that must be Hermitian is not, beyond tolerance.
    #[error("matrix not Hermitian: max |A - A'| entry = {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    /// A matrix that must be positive semidefinite has a negative eigenvalue.
    #[error("matrix not positive semidefinite: smallest eigenvalue {eigenvalue:.3e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    /// Trace or norm constraint failed.
    #[error("normalization failure: {0}")]
    Normalization(String),

    /// Bessel order outside the validated recurrence range.
    #[error("Bessel order {order} outside supported range |n| <= {max}")]
    BesselOrder { order: i32, max: i32 },

    /// Sideband window too small for the requested truncation residue.
    #[error("sideband window too small: residue {residue:.3e} exceeds {limit:.1e}; need >= {required_guard} guard bins")]
    WindowTooSmall {
        residue: f64,
        limit: f64,
        required_guard: usize,
    },

    /// Quadrature grid does not cover the joint spectral amplitudes.
    #[error("quadrature grid too small: relative norm coverage {coverage:.6} < {required:.6}")]
    GridTooSmall { coverage: f64, required: f64 },

    /// Unsupported qudit dimension for the requested operation.
    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    /// Fit preconditions not met (too few points, degenerate data).
    #[error("fit error: {0}")]
    Fit(String),

    /// Phase calibration failed to converge.
    #[error("calibration did not converge after {passes} passes; residual phases (rad): {residuals:?}")]
    CalibrationDiverged { passes: usize, residuals: Vec<f64> },

    /// Tomography problem under-determined by the supplied counts.
    #[error("under-determined problem: {0}")]
    UnderDetermined(String),

    /// Configuration validation failure.
    #[error("config error: {0}")]
    Config(String),

    /// File format violation.
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
