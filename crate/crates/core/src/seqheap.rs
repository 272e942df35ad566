//! Exact sequence heap: sorted runs of distinct ranks, merged like a binary
//! counter on insertion. Baseline for differential tests and benchmarks.

use std::collections::VecDeque;

use crate::error::HeapError;
use crate::heap::{admit, Extracted, HeapStats, MeldError, SoftHeap};
use crate::item::{Comparisons, ItemRef, Lifecycle};
use crate::param::ErrorParam;

/// Sorted run of rank `r`, built from `2^r` insertions. Extracted items stay
/// in the buffer in front of `head`.
#[derive(Debug)]
pub struct Run<K, V = ()> {
    rank: u32,
    items: Vec<ItemRef<K, V>>,
    head: usize,
}

impl<K, V> Run<K, V> {
    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Items not yet extracted, in ascending order.
    pub fn items(&self) -> &[ItemRef<K, V>] {
        &self.items[self.head..]
    }

    /// Length including extracted slots.
    pub fn capacity_used(&self) -> usize {
        self.items.len()
    }

    fn first(&self) -> &ItemRef<K, V> {
        &self.items[self.head]
    }
}

#[derive(Debug)]
pub struct SequenceHeap<K, V = ()> {
    runs: VecDeque<Run<K, V>>,
    inserted: u64,
    live: usize,
    cmp: Comparisons,
}

impl<K, V> Default for SequenceHeap<K, V> {
    fn default() -> Self {
        SequenceHeap {
            runs: VecDeque::new(),
            inserted: 0,
            live: 0,
            cmp: Comparisons::new(),
        }
    }
}

impl<K: Ord + Clone, V> SequenceHeap<K, V> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs front to back, in increasing rank.
    pub fn runs(&self) -> impl Iterator<Item = &Run<K, V>> {
        self.runs.iter()
    }

    fn merge(&self, a: Run<K, V>, b: Run<K, V>) -> Run<K, V> {
        debug_assert_eq!(a.rank, b.rank);
        let (xs, ys) = (a.items(), b.items());
        let mut out = Vec::with_capacity(xs.len() + ys.len());
        let (mut i, mut j) = (0, 0);
        while i < xs.len() && j < ys.len() {
            if self.cmp.less(&ys[j], &xs[i]) {
                out.push(ys[j].clone());
                j += 1;
            } else {
                out.push(xs[i].clone());
                i += 1;
            }
        }
        out.extend_from_slice(&xs[i..]);
        out.extend_from_slice(&ys[j..]);
        Run {
            rank: a.rank + 1,
            items: out,
            head: 0,
        }
    }

    /// Index of the run whose head is smallest, by linear scan.
    fn min_run(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, run) in self.runs.iter().enumerate() {
            match best {
                Some(b) if !self.cmp.less(run.first(), self.runs[b].first()) => {}
                _ => best = Some(i),
            }
        }
        best
    }
}

impl<K: Ord + Clone, V> SoftHeap<K, V> for SequenceHeap<K, V> {
    fn insert(&mut self, item: ItemRef<K, V>) -> Result<(), HeapError> {
        admit(&item)?;
        self.inserted += 1;
        self.live += 1;
        self.runs.push_front(Run {
            rank: 0,
            items: vec![item],
            head: 0,
        });
        while self.runs.len() >= 2 && self.runs[0].rank == self.runs[1].rank {
            let a = self.runs.pop_front().unwrap();
            let b = self.runs.pop_front().unwrap();
            let merged = self.merge(a, b);
            self.runs.push_front(merged);
        }
        Ok(())
    }

    fn find_min(&self) -> Result<(ItemRef<K, V>, K), HeapError> {
        let i = self.min_run().ok_or(HeapError::Empty)?;
        let item = self.runs[i].first().clone();
        let key = item.real_key().clone();
        Ok((item, key))
    }

    fn extract_min(&mut self) -> Result<Extracted<K, V>, HeapError> {
        let i = self.min_run().ok_or(HeapError::Empty)?;
        let run = &mut self.runs[i];
        let item = run.items[run.head].clone();
        run.head += 1;
        if run.items().is_empty() {
            self.runs.remove(i);
        }
        self.live -= 1;
        item.set_lifecycle(Lifecycle::Removed);
        Ok(Extracted {
            reported_key: item.real_key().clone(),
            item,
            corrupted: Vec::new(),
        })
    }

    fn delete(&mut self, _item: &ItemRef<K, V>) -> Result<Vec<ItemRef<K, V>>, HeapError> {
        Err(HeapError::Unsupported("delete"))
    }

    fn meld(&mut self, other: Self) -> Result<(), MeldError<Self>> {
        Err(MeldError {
            error: HeapError::Unsupported("meld"),
            rejected: other,
        })
    }

    fn len(&self) -> usize {
        self.live
    }

    fn stats(&self) -> HeapStats {
        HeapStats {
            inserted: self.inserted,
            corrupted_in_heap: 0,
            comparisons: self.cmp.count(),
        }
    }

    fn error_param(&self) -> Option<ErrorParam> {
        None
    }
}
