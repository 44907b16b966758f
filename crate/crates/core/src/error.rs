use thiserror::Error;

/// Errors raised by models, environments, the algorithm and the CLI layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("position {0} is outside [0, 1]")]
    Domain(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("arm index {arm} outside 1..={k}")]
    ArmIndex { arm: usize, k: usize },

    #[error("filter vanishes at {0}; the lower-bound CIF is undefined there")]
    DegenerateFilter(f64),

    #[error("lower-bound filter condition violated at arm {index}: {detail}")]
    Construction { index: usize, detail: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_unit(y: f64) -> Result<()> {
    if (0.0..=1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::Domain(y))
    }
}
