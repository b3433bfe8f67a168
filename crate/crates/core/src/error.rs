use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The BFS visited more group elements than the configured node budget.
    #[error("node budget of {budget} exceeded; exploration completed through radius {radius_reached}")]
    BudgetExceeded { budget: usize, radius_reached: u32 },

    #[error("group has no geodesic axis (finite group)")]
    NoAxis,

    #[error("axis vertex {index} has word length {found}, expected {expected}")]
    NotGeodesic { index: i64, expected: u64, found: String },

    #[error("truncation radius {available} too small; need at least {needed}")]
    TruncationTooSmall { needed: u64, available: u32 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("gl-partition is trivial: {0}")]
    TrivialPartition(String),

    #[error("invalid metric space: {0}")]
    InvalidMetric(String),
}
