use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient samples: total degree {degree_bound} is not determined along a_{direction}")]
    InsufficientSamples { direction: usize, degree_bound: u32 },

    #[error("inconsistent samples: no polynomial of total degree <= {degree_bound} fits the data")]
    InconsistentSamples { degree_bound: u32 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("ambient mismatch: expected M({0},{1}), found M({2},{3})")]
    AmbientMismatch(u32, usize, u32, usize),

    #[error("cache schema error at line {line}: {msg}")]
    CacheSchema { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
