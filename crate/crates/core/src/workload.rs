//! Insert-and-drain drivers shared by the CLI, the benchmarks and the
//! acceptance suite.

use rand::Rng;

use crate::checker::count_inversions;
use crate::checker::harness::rng;
use crate::heap::{AnyHeap, HeapKind, SoftHeap};
use crate::item::{IdSource, Key};
use crate::param::Epsilon;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DrainOutcome {
    /// Real keys in extraction order.
    pub order: Vec<Key>,
    /// Comparisons spent on the inserts alone.
    pub insert_comparisons: u64,
    /// Comparisons for inserts and the full drain.
    pub comparisons: u64,
    /// Items reported corrupted over the whole drain.
    pub corrupted: u64,
}

/// `n` keys drawn uniformly from `0..4n` with a seeded generator.
pub fn random_keys(n: usize, seed: u64) -> Vec<Key> {
    let mut r = rng(seed);
    let hi = (n as Key * 4).max(1);
    (0..n).map(|_| r.random_range(0..hi)).collect()
}

/// Inserts every key into a fresh heap, then extracts until empty.
pub fn insert_drain(kind: HeapKind, epsilon: Epsilon, keys: &[Key]) -> DrainOutcome {
    let mut h: AnyHeap<Key> = AnyHeap::new(kind, epsilon);
    let mut ids = IdSource::new();
    for &k in keys {
        h.insert(ids.item(k, ())).expect("fresh item");
    }
    let insert_comparisons = h.stats().comparisons;
    let mut order = Vec::with_capacity(keys.len());
    let mut corrupted = 0;
    while let Ok(r) = h.extract_min() {
        order.push(*r.item.real_key());
        corrupted += r.corrupted.len() as u64;
    }
    DrainOutcome {
        order,
        insert_comparisons,
        comparisons: h.stats().comparisons,
        corrupted,
    }
}

/// Comparisons made by `keys.len()` insertions into a fresh heap.
pub fn insert_only(kind: HeapKind, epsilon: Epsilon, keys: &[Key]) -> u64 {
    let mut h: AnyHeap<Key> = AnyHeap::new(kind, epsilon);
    let mut ids = IdSource::new();
    for &k in keys {
        h.insert(ids.item(k, ())).expect("fresh item");
    }
    h.stats().comparisons
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortOutcome {
    pub drain: DrainOutcome,
    pub inversions: u64,
    /// `⌊ε n²⌋`.
    pub bound: u64,
}

impl SortOutcome {
    pub fn within_bound(&self) -> bool {
        self.inversions <= self.bound
    }
}

/// Sorts approximately by pushing everything through a soft heap; the
/// quality is the inversion count of the real keys in output order.
pub fn approx_sort(kind: HeapKind, epsilon: Epsilon, keys: &[Key]) -> SortOutcome {
    let drain = insert_drain(kind, epsilon, keys);
    let inversions = count_inversions(&drain.order);
    let n = keys.len() as u64;
    SortOutcome {
        drain,
        inversions,
        bound: epsilon.budget(n * n),
    }
}
