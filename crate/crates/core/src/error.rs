use thiserror::Error;

/// Errors raised by the bound, geometry and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the range where a formula is stated.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed input: wrong dimensions, empty grids, bad parameters.
    #[error("usage error: {0}")]
    Usage(String),
    /// The moment profile is infinite at the requested order.
    #[error("outside finiteness range: moment profile is infinite at p = {0}")]
    Infinite(f64),
    /// No order above the key-estimate threshold gives a finite bound.
    #[error("key moment condition violated: no p > max(κ,4) with finite ρ")]
    ConditionViolated,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
