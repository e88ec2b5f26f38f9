use thiserror::Error;

/// Errors produced by the clustering core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate cluster: {0}")]
    DegenerateCluster(String),

    #[error("node {0} has zero degree; add self-loops or prune isolated nodes before building a normalized-cut kernel")]
    ZeroDegreeNode(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
