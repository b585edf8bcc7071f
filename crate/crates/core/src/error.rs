use thiserror::Error;

/// Errors raised by the exact dynamics routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("matrix is not skew-symmetric at entry ({i}, {j})")]
    NotSkewSymmetric { i: usize, j: usize },

    #[error("matrix shape error: {0}")]
    Shape(String),

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("rank {rank} exceeds the permutation search cap of {cap}")]
    SearchCapExceeded { rank: usize, cap: usize },

    #[error("closing permutation does not close the mutation path")]
    NotALoop,

    #[error("sign word has a zero at step {step}")]
    NonStrictSign { step: usize },

    #[error("sign word has length {got}, expected {expected}")]
    SignLength { got: usize, expected: usize },

    #[error("the zero point has no direction")]
    ZeroPoint,

    #[error("stability report is not verified on samples")]
    Unverified,

    #[error("invalid triangulation: {0}")]
    Triangulation(String),

    #[error("edge {0} cannot be flipped: {1}")]
    Unflippable(usize, String),

    #[error("unknown mapping class `{0}`")]
    UnknownMappingClass(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
