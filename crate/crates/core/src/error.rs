use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("type set is empty, arity-dependent quantity is undefined")]
    EmptyTypeSet,
    #[error("arity must be between 1 and {max}, got {got}")]
    BadArity { got: usize, max: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("restriction removes every component")]
    EmptyRestriction,
    #[error("arity {arity} exceeds the exhaustive-search cap {cap}")]
    ArityCapExceeded { arity: usize, cap: usize },
    #[error("not a splitting: {0}")]
    NotSplitting(String),
    #[error("type set is not rich")]
    NotRich,

    #[error("group parameter out of range: {0}")]
    GroupParameter(String),
    #[error("group order {order} exceeds cap {cap}")]
    OrderCapExceeded { order: usize, cap: usize },
    #[error("element index {index} out of range for group of order {order}")]
    ElementOutOfRange { index: usize, order: usize },
    #[error("element set is not a subgroup")]
    NotSubgroup,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("group is not perfect (commutator subgroup has order {commutator_order} < {order})")]
    NotPerfect { order: usize, commutator_order: usize },
    #[error("element {0} is not in the commutator subgroup")]
    NotInCommutatorSubgroup(usize),
    #[error("group law violated: {0}")]
    LawViolation(String),

    #[error("state space of {states} exceeds cap {cap}")]
    StateCapExceeded { states: u128, cap: u64 },
    #[error("tuple subsets belong to different groups or arities")]
    SubsetMismatch,
    #[error("no group decomposition supplied or recognised: {0}")]
    NoDecomposition(String),

    #[error("integer overflow in exact lattice arithmetic")]
    Overflow,
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),

    #[error("invalid web: {0}")]
    InvalidWeb(String),
    #[error("web has no regular steps")]
    NoRegularSteps,
    #[error("segment label {0:?} has no assigned element")]
    MissingLabel(String),
    #[error("step window invalid: {0}")]
    BadStepWindow(String),

    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
