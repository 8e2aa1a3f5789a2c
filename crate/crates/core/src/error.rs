use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("envelope derivative of order {0} requested; only orders 0..=5 are available")]
    DerivativeOrder(usize),
    #[error("effective series order {order} exceeds the maximum {max} for this envelope")]
    SeriesOrder { order: usize, max: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
