use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("axis too narrow: spans ±{actual}, kernel needs at least ±{required}")]
    AxisTooNarrow { required: f64, actual: f64 },

    #[error("pump fraction {0} is at or above threshold; only the below-threshold regime is modeled")]
    AboveThreshold(f64),

    #[error("degenerate pump: spot-size ratios {0} and {1} coincide, the mixed pump vanishes identically")]
    DegeneratePump(f64, f64),

    #[error("singular coupling system (condition number {condition:.3e}); choose more widely separated spot-size ratios")]
    Singular { condition: f64 },

    #[error("reference coupling vanishes; ratios are undefined, use the raw couplings instead")]
    ZeroReference,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
