use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("negative edge weight {weight} on ({src}, {dst})")]
    NegativeWeight { src: usize, dst: usize, weight: f64 },
    #[error("conflicting weights for edge ({src}, {dst}): {first} vs {second}")]
    AsymmetricWeights { src: usize, dst: usize, first: f64, second: f64 },
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("node {0} has zero degree")]
    ZeroDegreeNode(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(&'static str),
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("column {0} sums to zero")]
    ZeroColumn(usize),
    #[error("signals are not normalized; enable keep-mass mode to embed raw signals")]
    Unnormalized,
    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("k = {k} must be smaller than the number of items ({m})")]
    KTooLarge { k: usize, m: usize },
    #[error("subsampling left band {0} empty")]
    EmptyBandAfterSubsample(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("total masses differ: {mu} vs {nu}")]
    MassMismatch { mu: f64, nu: f64 },
    #[error("instance of size {n} exceeds the oracle limit {limit}")]
    InstanceTooLarge { n: usize, limit: usize },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("cost matrix invalid: {0}")]
    InvalidCost(String),
    #[error("a cluster needs at least one point")]
    DegenerateCluster,
    #[error("clustering score needs at least two clusters")]
    TooFewClusters,
}

pub type Result<T> = core::result::Result<T, Error>;
