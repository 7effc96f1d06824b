use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter out of domain: {name} = {value} (expected {expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("state space too large: ring of {size} sites exceeds cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("thinning envelope violated: rate factor {rate} exceeds bound {bound} at ({x}, {y})")]
    EnvelopeViolation {
        rate: u32,
        bound: u32,
        x: usize,
        y: usize,
    },

    #[error("solver instability at t = {time}: sup norm {sup_norm}")]
    Instability { time: f64, sup_norm: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "gamma",
            value: gamma,
            expected: "0 < gamma < 2",
        })
    }
}
