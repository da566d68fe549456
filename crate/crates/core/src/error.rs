use alloc::string::String;

/// Errors produced by the clustering and bandit routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid pair ({u}, {v}) for n = {n}")]
    InvalidPair { u: usize, v: usize, n: usize },

    #[error("pair index {index} out of range for {m} pairs")]
    PairOutOfRange { index: usize, m: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("clustering has {got} labels, instance has {expected} elements")]
    InvalidClustering { expected: usize, got: usize },

    /// The oracle refused a pull because it would exceed the hard budget.
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("pair {0} has not been sampled")]
    NoSamples(usize),

    #[error("confidence radius needs at least one pull")]
    ZeroPulls,

    #[error("exhaustive search limited to n <= {max}, got n = {n}")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("budget T = {budget} is smaller than the number of pairs m = {m}")]
    InsufficientBudget { budget: u64, m: usize },

    #[error("gap profile of an instance without pairs is undefined")]
    EmptyProfile,
}

pub type Result<T> = core::result::Result<T, Error>;
