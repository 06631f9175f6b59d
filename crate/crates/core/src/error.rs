use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("size guard exceeded: {what} is {actual}, limit {limit}")]
    SizeGuard {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("graph is not an H(n,k) instance")]
    NotHGraph,

    #[error("fibonacci index {0} overflows u64")]
    FibonacciOverflow(u32),

    #[error("root not bracketed on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
