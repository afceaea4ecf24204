use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("node budget of {cap} exceeded")]
    Overflow { cap: usize },
    #[error("tree is not reduced to generation {0}")]
    NotReduced(u32),
    #[error("tree has height {height}, below the required generation {target}")]
    TooShallow { height: u32, target: u32 },
    #[error("no marked vertex at generation {0}")]
    MissingMark(u32),
    #[error("backward tree has {found} marked levels, {needed} needed")]
    InsufficientLevels { found: usize, needed: usize },
    #[error("pool mismatch: {0}")]
    PoolMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
