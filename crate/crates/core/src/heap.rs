//! The interface shared by the exact baseline and both soft heaps.

use std::fmt;
use std::str::FromStr;

use crate::error::HeapError;
use crate::item::{ItemRef, Lifecycle};
use crate::param::{Epsilon, ErrorParam, Variant};
use crate::seqheap::SequenceHeap;
use crate::softseq::SoftSeqHeap;
use crate::ternary::TernaryHeap;

/// Result of an extraction: the item, the (possibly corrupted) key it was
/// returned with, and the items that became corrupted by removing it.
#[derive(Debug, Clone)]
pub struct Extracted<K, V = ()> {
    pub item: ItemRef<K, V>,
    pub reported_key: K,
    pub corrupted: Vec<ItemRef<K, V>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeapStats {
    /// Total insertions `N`, summed over melds.
    pub inserted: u64,
    /// Items physically in the heap that have been reported corrupted.
    pub corrupted_in_heap: u64,
    /// Calls to the item comparison made by this heap and everything melded into it.
    pub comparisons: u64,
}

pub trait SoftHeap<K: Ord + Clone, V>: Sized {
    fn insert(&mut self, item: ItemRef<K, V>) -> Result<(), HeapError>;

    /// An item with minimum current key and that key.
    fn find_min(&self) -> Result<(ItemRef<K, V>, K), HeapError>;

    fn extract_min(&mut self) -> Result<Extracted<K, V>, HeapError>;

    /// Removes `item`, returning the items that became corrupted as a result.
    fn delete(&mut self, item: &ItemRef<K, V>) -> Result<Vec<ItemRef<K, V>>, HeapError>;

    /// Absorbs `other` into `self`. On error `other` is handed back untouched.
    fn meld(&mut self, other: Self) -> Result<(), MeldError<Self>>;

    /// Number of live (inserted, not extracted, not deleted) items.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stats(&self) -> HeapStats;

    /// `None` for exact heaps.
    fn error_param(&self) -> Option<ErrorParam>;
}

pub struct MeldError<H> {
    pub error: HeapError,
    pub rejected: H,
}

impl<H> fmt::Debug for MeldError<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeldError")
            .field("error", &self.error)
            .finish_non_exhaustive()
    }
}

impl<H> fmt::Display for MeldError<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl<H> std::error::Error for MeldError<H> {}

/// Moves a fresh item into the live state.
pub(crate) fn admit<K, V>(item: &ItemRef<K, V>) -> Result<(), HeapError> {
    if item.lifecycle() != Lifecycle::Fresh {
        return Err(HeapError::AlreadyInserted(item.id()));
    }
    item.set_lifecycle(Lifecycle::Live);
    Ok(())
}

pub(crate) fn require_live<K, V>(item: &ItemRef<K, V>) -> Result<(), HeapError> {
    if item.lifecycle() != Lifecycle::Live {
        return Err(HeapError::NotLive(item.id()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeapKind {
    /// Exact sequence heap.
    Sequence,
    SoftSequence,
    Ternary,
}

impl HeapKind {
    pub const ALL: [HeapKind; 3] = [HeapKind::Sequence, HeapKind::SoftSequence, HeapKind::Ternary];

    pub fn name(self) -> &'static str {
        match self {
            HeapKind::Sequence => "seq",
            HeapKind::SoftSequence => "softseq",
            HeapKind::Ternary => "ternary",
        }
    }

    pub fn is_soft(self) -> bool {
        self != HeapKind::Sequence
    }
}

impl fmt::Display for HeapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeapKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seq" | "seqheap" => Ok(HeapKind::Sequence),
            "softseq" => Ok(HeapKind::SoftSequence),
            "ternary" => Ok(HeapKind::Ternary),
            _ => Err(format!(
                "unknown heap implementation {s:?} (expected seq, softseq or ternary)"
            )),
        }
    }
}

/// Any of the three heaps, chosen at runtime.
#[derive(Debug)]
pub enum AnyHeap<K, V = ()> {
    Sequence(SequenceHeap<K, V>),
    SoftSequence(SoftSeqHeap<K, V>),
    Ternary(TernaryHeap<K, V>),
}

impl<K: Ord + Clone, V> AnyHeap<K, V> {
    /// `epsilon` is ignored by the exact heap.
    pub fn new(kind: HeapKind, epsilon: Epsilon) -> Self {
        match kind {
            HeapKind::Sequence => AnyHeap::Sequence(SequenceHeap::new()),
            HeapKind::SoftSequence => AnyHeap::SoftSequence(SoftSeqHeap::new(epsilon)),
            HeapKind::Ternary => AnyHeap::Ternary(TernaryHeap::new(epsilon)),
        }
    }

    pub fn kind(&self) -> HeapKind {
        match self {
            AnyHeap::Sequence(_) => HeapKind::Sequence,
            AnyHeap::SoftSequence(_) => HeapKind::SoftSequence,
            AnyHeap::Ternary(_) => HeapKind::Ternary,
        }
    }

    pub fn variant(kind: HeapKind) -> Option<Variant> {
        match kind {
            HeapKind::Sequence => None,
            HeapKind::SoftSequence => Some(Variant::SoftSequence),
            HeapKind::Ternary => Some(Variant::Ternary),
        }
    }
}

macro_rules! dispatch {
    ($self:expr, $h:ident => $body:expr) => {
        match $self {
            AnyHeap::Sequence($h) => $body,
            AnyHeap::SoftSequence($h) => $body,
            AnyHeap::Ternary($h) => $body,
        }
    };
}

impl<K: Ord + Clone, V> SoftHeap<K, V> for AnyHeap<K, V> {
    fn insert(&mut self, item: ItemRef<K, V>) -> Result<(), HeapError> {
        dispatch!(self, h => h.insert(item))
    }

    fn find_min(&self) -> Result<(ItemRef<K, V>, K), HeapError> {
        dispatch!(self, h => h.find_min())
    }

    fn extract_min(&mut self) -> Result<Extracted<K, V>, HeapError> {
        dispatch!(self, h => h.extract_min())
    }

    fn delete(&mut self, item: &ItemRef<K, V>) -> Result<Vec<ItemRef<K, V>>, HeapError> {
        dispatch!(self, h => h.delete(item))
    }

    fn meld(&mut self, other: Self) -> Result<(), MeldError<Self>> {
        #[allow(clippy::result_large_err)]
        fn wrap<H, K, V>(
            r: Result<(), MeldError<H>>,
            f: fn(H) -> AnyHeap<K, V>,
        ) -> Result<(), MeldError<AnyHeap<K, V>>> {
            r.map_err(|e| MeldError {
                error: e.error,
                rejected: f(e.rejected),
            })
        }
        match (self, other) {
            (AnyHeap::Sequence(a), AnyHeap::Sequence(b)) => wrap(a.meld(b), AnyHeap::Sequence),
            (AnyHeap::SoftSequence(a), AnyHeap::SoftSequence(b)) => wrap(a.meld(b), AnyHeap::SoftSequence),
            (AnyHeap::Ternary(a), AnyHeap::Ternary(b)) => wrap(a.meld(b), AnyHeap::Ternary),
            (a, b) => Err(MeldError {
                error: HeapError::KindMismatch(a.kind().name(), b.kind().name()),
                rejected: b,
            }),
        }
    }

    fn len(&self) -> usize {
        dispatch!(self, h => h.len())
    }

    fn stats(&self) -> HeapStats {
        dispatch!(self, h => h.stats())
    }

    fn error_param(&self) -> Option<ErrorParam> {
        dispatch!(self, h => h.error_param())
    }
}
