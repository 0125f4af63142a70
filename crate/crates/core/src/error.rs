use thiserror::Error;

/// Errors raised by the constructions and checkers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter mismatch: operands built for a = {left} and a = {right}")]
    ParameterMismatch { left: u64, right: u64 },

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("{what} = {value} exceeds the guard {cap}")]
    GuardExceeded {
        what: &'static str,
        value: String,
        cap: u64,
    },

    #[error("division by zero")]
    DivisionByZero,

    #[error("malformed number: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn guard(what: &'static str, value: &num_bigint::BigInt, cap: u64) -> Result<()> {
    if *value > num_bigint::BigInt::from(cap) {
        return Err(Error::GuardExceeded {
            what,
            value: value.to_string(),
            cap,
        });
    }
    Ok(())
}
