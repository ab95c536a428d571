use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not a sublattice: generator {0} does not lie in the claimed superlattice")]
    NotASublattice(String),
    #[error("infinite index: sublattice has lower rank than the superlattice")]
    InfiniteIndex,
    #[error("element does not belong to the stated field: {0}")]
    FieldMismatch(String),
    #[error("element has negative value under the valuation: {0}")]
    NegativeValue(String),
    #[error("unsupported extension pair: {0}")]
    UnsupportedExtension(String),
    #[error("zero element where a nonzero element is required")]
    ZeroElement,
    #[error("element is not homogeneous: {0}")]
    NonHomogeneous(String),
    #[error("elements belong to different parents: {0}")]
    ParentMismatch(String),
    #[error("containment comparison not supported for this pair of valuations: {0}")]
    UnsupportedComparison(String),
    #[error("oracle mode precondition violated: {0}")]
    WrongMode(String),
    #[error("no dominated extension found (this indicates a bug): {0}")]
    NoDominatedExtension(String),
    #[error("point set is not stable under the group: missing translate {0}")]
    NotGStable(String),
    #[error("membership table is incomplete: {0}")]
    IncompleteUniverse(String),
    #[error("neighborhood search pool exhausted; excluded points not separable: {0}")]
    NoNeighborhoodInPool(String),
    #[error("basis construction failed (n = ef bookkeeping inconsistent): {0}")]
    BasisConstructionFailure(String),
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
