use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    IndexOutOfRange { index: usize, len: usize },
    InvalidParameter(String),
    ConstantsUnavailable,
    Unsupported(String),
    Singular,
    NoUniqueSaddle,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::IndexOutOfRange { index, len } => write!(f, "index {index} out of range for {len} nodes"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::ConstantsUnavailable => f.write_str("constants unavailable"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::Singular => f.write_str("linear system is singular"),
            Error::NoUniqueSaddle => f.write_str("problem has no unique saddle point"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
