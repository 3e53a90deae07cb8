//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("empty ground set")]
    EmptyGroundSet,

    #[error("duplicate site {0} in ground set")]
    DuplicateSite(u32),

    #[error("ground sets do not match: {left} vs {right}")]
    GroundSetMismatch { left: String, right: String },

    #[error("{subset} is not a subset of {superset}")]
    NotASubset { subset: String, superset: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("block index {index} out of range for partition with {len} blocks")]
    BlockIndexOutOfRange { index: usize, len: usize },

    #[error("cannot remove the only block of a partition")]
    CannotRemoveOnlyBlock,

    #[error("ground sets overlap at site {0}")]
    OverlappingGroundSets(u32),

    #[error("join requires at least one partition")]
    EmptyJoin,

    #[error("partition {0} is not in the enumeration of its ground set")]
    UnknownPartition(String),

    #[error("site sizes do not match site list: {sites} sites, {sizes} sizes")]
    SiteSizeMismatch { sites: usize, sizes: usize },

    #[error("site size must be at least 1")]
    InvalidSiteSize,

    #[error("state count overflows the platform index range")]
    StateCountOverflow,

    #[error("weight table has length {got}, space has {expected} states")]
    WeightLengthMismatch { expected: usize, got: usize },

    #[error("non-finite weight at index {0}")]
    NonFiniteWeight(usize),

    #[error("measure spaces do not match")]
    SpaceMismatch,

    #[error("configuration {0} is invalid for this space")]
    InvalidConfiguration(String),

    #[error("tensor product requires at least one factor")]
    EmptyTensor,

    #[error("measure is not positive: {0}")]
    NotPositive(String),

    #[error("measure is not a probability measure: {0}")]
    NotAProbability(String),

    #[error("duplicate key {0} after canonicalization")]
    DuplicateKey(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("probabilities sum to {sum} (residual {residual:e} exceeds 1e-9)")]
    ProbabilitySum { sum: f64, residual: f64 },

    #[error(
        "partition matrices are dense over Bell(n) partitions; n = {sites} gives \
         Bell({sites}) = {bell} rows, supported up to n = 6 (Bell(6) = 203)"
    )]
    TooManySites { sites: usize, bell: u128 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("evaluation times must be non-decreasing")]
    UnsortedTimes,

    #[error("step size must be positive, got {0}")]
    InvalidStepSize(f64),

    #[error("sample count must be at least 1")]
    NoSamples,

    #[error("numerical invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}
