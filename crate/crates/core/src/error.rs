use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A dataset or grid definition is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A sample window does not fit inside its record.
    #[error("out of bounds: {0}")]
    Bounds(String),
    /// A classifier could not be trained on the given data.
    #[error("training failed: {0}")]
    Training(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! param_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Parameter(alloc::format!($($arg)*))
    };
}
pub(crate) use param_err;
