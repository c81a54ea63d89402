use thiserror::Error;

/// Errors produced anywhere in the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(usize),
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(usize, usize),
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid matrix entry: {0}")]
    InvalidEntry(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("instance too large: {what} needs {needed} items, cap is {cap}")]
    TooLarge { what: &'static str, needed: u128, cap: u128 },
    #[error("linear program: {0}")]
    Lp(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no sampled code qualified after {0} tries")]
    SearchExhausted(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_cap(what: &'static str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::TooLarge { what, needed, cap })
    } else {
        Ok(())
    }
}
