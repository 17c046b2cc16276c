use thiserror::Error;

/// Errors raised by the rounding, analysis and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ground set must contain at least one element")]
    EmptyGroundSet,

    #[error("element {index} is outside the ground set of size {n}")]
    ElementOutOfRange { index: usize, n: usize },

    #[error("ground set mismatch: expected {expected} elements, found {found}")]
    GroundMismatch { expected: usize, found: usize },

    #[error("coordinate {index} = {value} is not in [0, 1]")]
    CoordinateOutOfRange { index: usize, value: f64 },

    #[error("operation requires a non-empty set")]
    EmptySet,

    #[error("set is not contained in its parent set")]
    NotSubset,

    #[error("element {0} is not a member of the set")]
    NotMember(usize),

    #[error("invalid cardinality: {0}")]
    Cardinality(String),

    #[error("point lies outside the matroid polytope (worst violation {violation:e})")]
    OutsidePolytope { violation: f64 },

    #[error("distribution table would hold {entries} entries, cap is {cap}")]
    TableTooLarge { entries: u128, cap: u128 },

    #[error("instance of size {size} exceeds the enumeration cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("element {0} has zero probability of being realized")]
    ZeroProbability(usize),

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
