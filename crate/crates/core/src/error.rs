use thiserror::Error;

/// Errors produced by the toolkit. Every variant is a domain or input
/// failure; none are recoverable by retrying.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("shape mismatch: {0}")]
    ShapeError(String),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("distortion budget {0} is not positive; the rate is infinite")]
    InfiniteRate(f64),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid range: {0}")]
    RangeError(String),

    #[error("structure violated: {0}")]
    StructureError(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A prior-work channel formula has a zero denominator on this
    /// eigen-coordinate (delta_i = lambda_i), so its noise variance is infinite.
    #[error("singular channel: coordinate {index} is saturated (delta = lambda), noise variance is infinite")]
    SingularChannel { index: usize },
}

impl Error {
    /// Stable variant name, for reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCovariance(_) => "InvalidCovariance",
            Error::ShapeError(_) => "ShapeError",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::InfiniteRate(_) => "InfiniteRate",
            Error::InvalidSpectrum(_) => "InvalidSpectrum",
            Error::RangeError(_) => "RangeError",
            Error::StructureError(_) => "StructureError",
            Error::InvalidParam(_) => "InvalidParam",
            Error::SingularChannel { .. } => "SingularChannel",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
