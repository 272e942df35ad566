use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("empty heap")]
    Empty,
    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),
    #[error("cannot meld heaps with different error parameters ({0} vs {1})")]
    EpsilonMismatch(String, String),
    #[error("item {0} was already inserted")]
    AlreadyInserted(u64),
    #[error("item {0} is not live in the heap")]
    NotLive(u64),
    #[error("cannot meld a {0} heap with a {1} heap")]
    KindMismatch(&'static str, &'static str),
    #[error("{0} is not supported by this heap")]
    Unsupported(&'static str),
}
