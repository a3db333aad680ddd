use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Every particle's emission density underflowed (or was non-finite).
    #[error("particle weights degenerate at t = {t}")]
    DegenerateWeights { t: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
