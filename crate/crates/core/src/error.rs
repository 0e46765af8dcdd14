use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate tree: {0}")]
    DegenerateTree(String),

    #[error("invalid dendrogram: {0}")]
    InvalidDendrogram(String),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("k = {k} out of range 2..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("palette exhausted: {0} categories, at most 12 supported")]
    PaletteExhausted(usize),

    #[error("{path}: row {row}: {msg}")]
    Parse { path: String, row: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
