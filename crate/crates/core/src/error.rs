use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin: 2I = {0} (need 2I >= 1)")]
    InvalidSpin(u32),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (max |A - A†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error(
        "mean spin vector not along x: <{component}> = {value:e} exceeds tolerance {tolerance:e}"
    )]
    MsvMisaligned {
        component: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error("at time index {index}: {source}")]
    AtTimeIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("fidelity undefined for a zero matrix")]
    ZeroMatrix,

    #[error("no rotating frame: omega0 = 0 but the quadrupole coupling has non-secular terms")]
    NoRotatingFrame,

    #[error("Euler angle `{0}` must be zero for squeezing sweeps (MSV would leave x)")]
    EulerAngleNotSupported(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical precondition, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::MsvMisaligned { .. } | Error::NoRotatingFrame | Error::NotHermitian { .. } => {
                true
            }
            Error::AtTimeIndex { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
