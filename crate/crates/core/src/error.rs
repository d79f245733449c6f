use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time grid step {actual:.4e} s is too coarse; required step <= {required:.4e} s")]
    StepTooLarge { required: f64, actual: f64 },

    #[error("non-finite drive sample at index {index}")]
    NonFiniteDrive { index: usize },

    #[error("frequency {freq:.6e} Hz violates Nyquist for sample rate {sample_rate:.6e} Hz")]
    Nyquist { freq: f64, sample_rate: f64 },

    #[error(
        "weak-drive approximation invalid: max saturation parameter {max_s:.4} exceeds {limit}"
    )]
    WeakDriveViolated { max_s: f64, limit: f64 },

    #[error("correlation range {actual:.4e} s is too short; need at least {required:.4e} s")]
    TauRangeTooShort { required: f64, actual: f64 },

    #[error("resolution {resolution:.4e} Hz exceeds grid span {span:.4e} Hz")]
    ResolutionTooCoarse { resolution: f64, span: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no identifiable peak near {around:.6e} Hz")]
    NoPeak { around: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("undefined: {0}")]
    Undefined(&'static str),

    #[error("stream too short: {0}")]
    StreamTooShort(String),

    #[error("{location}: {reason}")]
    Format { location: String, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of physical or numerical preconditions, as opposed
    /// to malformed files or I/O.
    pub fn is_physics(&self) -> bool {
        !matches!(self, Error::Format { .. } | Error::Io(_))
    }
}

pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    reason: impl FnOnce() -> String,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::param(name, reason()))
    }
}
