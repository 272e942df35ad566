//! Soft heaps: an exact sequence-heap baseline, the soft sequence heap and
//! the ternary-tree soft heap behind one interface, with a checker that
//! validates the soft-heap contract and the per-rank structural bounds.

pub mod checker;
pub mod error;
pub mod heap;
pub mod item;
pub mod param;
pub mod pool;
pub mod seqheap;
pub mod softseq;
pub mod ternary;
pub mod workload;

pub use error::HeapError;
pub use heap::{AnyHeap, Extracted, HeapKind, HeapStats, MeldError, SoftHeap};
pub use item::{compare_items, Comparisons, IdSource, Item, ItemRef, Key, Lifecycle};
pub use param::{rank_threshold, Epsilon, ErrorParam, Variant};
pub use pool::Pool;
pub use seqheap::SequenceHeap;
pub use softseq::SoftSeqHeap;
pub use ternary::TernaryHeap;
