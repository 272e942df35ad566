//! Soft sequence heap.
//!
//! Items live in sorted sequences of strictly increasing rank. Sequences of
//! rank at most `r0` behave exactly like the plain sequence heap. A sequence
//! created at rank `r > r0` with `r - r0` even is reduced: every second
//! interior entry is pruned into the corruption-set of its successor (car
//! pooling) and the witness-set of its predecessor. Pruned items only count
//! as corrupted once their witness has been extracted, and they are reported
//! by that extraction.

mod sequence;

use std::collections::VecDeque;

pub use sequence::{merge_sequences, reduce, reduces_at, Entry, SoftSequence};
use sequence::{merge_with, MergeOptions};

use crate::error::HeapError;
use crate::heap::{admit, require_live, Extracted, HeapStats, MeldError, SoftHeap};
use crate::item::{Comparisons, ItemRef, Lifecycle};
use crate::param::{Epsilon, ErrorParam, Variant};

/// Deliberate defects used to check that the auditor and contract checker
/// notice broken implementations.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    SkipReduce,
    SkipWitness,
    SkipSuffixMinRepair,
}

#[derive(Debug, Clone, Copy, Default)]
struct Faults {
    skip_reduce: bool,
    skip_witness: bool,
    skip_suffix_repair: bool,
}

#[derive(Debug)]
pub struct SoftSeqHeap<K, V = ()> {
    seqs: VecDeque<SoftSequence<K, V>>,
    param: ErrorParam,
    inserted: u64,
    live: usize,
    corrupted: u64,
    cmp: Comparisons,
    faults: Faults,
}

impl<K: Ord + Clone, V> SoftSeqHeap<K, V> {
    pub fn new(epsilon: Epsilon) -> Self {
        Self::with_param(ErrorParam::new(epsilon, Variant::SoftSequence))
    }

    pub fn with_param(param: ErrorParam) -> Self {
        SoftSeqHeap {
            seqs: VecDeque::new(),
            param,
            inserted: 0,
            live: 0,
            corrupted: 0,
            cmp: Comparisons::new(),
            faults: Faults::default(),
        }
    }

    /// Assembles a heap from hand-built sequences, front (lowest rank) first.
    /// Nothing about the sequences is validated; items are marked live.
    pub fn from_sequences(param: ErrorParam, sequences: Vec<SoftSequence<K, V>>, inserted: u64) -> Self {
        let mut h = Self::with_param(param);
        for s in &sequences {
            for e in s.entries() {
                for x in std::iter::once(&e.item).chain(e.corruption.iter()) {
                    if x.lifecycle() == Lifecycle::Fresh {
                        x.set_lifecycle(Lifecycle::Live);
                    }
                    if !x.is_deleted() {
                        h.live += 1;
                    }
                    if x.is_corrupted() {
                        h.corrupted += 1;
                    }
                }
            }
        }
        h.seqs = sequences.into();
        h.inserted = inserted;
        if !h.seqs.is_empty() {
            h.update_suffix_min(h.seqs.len() - 1);
        }
        h
    }

    #[doc(hidden)]
    pub fn inject_fault(&mut self, fault: Fault) {
        match fault {
            Fault::SkipReduce => self.faults.skip_reduce = true,
            Fault::SkipWitness => self.faults.skip_witness = true,
            Fault::SkipSuffixMinRepair => self.faults.skip_suffix_repair = true,
        }
    }

    pub fn param(&self) -> ErrorParam {
        self.param
    }

    pub fn rank_threshold(&self) -> u32 {
        self.param.rank_threshold()
    }

    /// Sequences front to back.
    pub fn sequences(&self) -> impl Iterator<Item = &SoftSequence<K, V>> {
        self.seqs.iter()
    }

    fn merge(&self, a: SoftSequence<K, V>, b: SoftSequence<K, V>) -> SoftSequence<K, V> {
        let opts = MergeOptions {
            reduce: reduces_at(a.rank + 1, self.param.rank_threshold()) && !self.faults.skip_reduce,
            keep_witnesses: !self.faults.skip_witness,
        };
        merge_with(a, b, opts, &self.cmp)
    }

    /// Index of the sequence whose head is the minimum.
    fn min_index(&self) -> usize {
        self.seqs[0].suffix_min.min(self.seqs.len() - 1)
    }

    fn update_suffix_min_at(&mut self, i: usize) {
        let offset = if i + 1 == self.seqs.len() {
            0
        } else {
            let j = (i + 1 + self.seqs[i + 1].suffix_min).min(self.seqs.len() - 1);
            if self.cmp.less(&self.seqs[j].head().item, &self.seqs[i].head().item) {
                j - i
            } else {
                0
            }
        };
        self.seqs[i].suffix_min = offset;
    }

    /// Repairs suffix-min references of sequences `from_index, …, 0`,
    /// assuming everything after `from_index` is already correct.
    pub fn update_suffix_min(&mut self, from_index: usize) {
        for i in (0..=from_index).rev() {
            self.update_suffix_min_at(i);
        }
    }

    /// The item `find_min` would report, without the key.
    fn min_candidate(&self) -> Option<&ItemRef<K, V>> {
        if self.seqs.is_empty() {
            return None;
        }
        let head = self.seqs[self.min_index()].head();
        Some(head.corruption.front().unwrap_or(&head.item))
    }

    /// Removes the current minimum: either a corrupted item from the head's
    /// corruption-set, or the head itself, whose witnesses become corrupted.
    fn remove_min(&mut self, reported: &mut Vec<ItemRef<K, V>>) -> (ItemRef<K, V>, K) {
        let i = self.min_index();
        let head = self.seqs[i].head_mut();
        let key = head.item.real_key().clone();
        if let Some(x) = head.corruption.pop() {
            return (x, key);
        }
        let entry = self.seqs[i].entries.pop_front().unwrap();
        for w in entry.witness {
            if !w.is_deleted() && w.mark_corrupted() {
                self.corrupted += 1;
                reported.push(w);
            }
        }
        let repair_from = if self.seqs[i].is_empty() {
            self.seqs.remove(i);
            i.checked_sub(1)
        } else {
            Some(i)
        };
        if let Some(from) = repair_from {
            if !self.faults.skip_suffix_repair {
                self.update_suffix_min(from);
            }
        }
        (entry.item, key)
    }

    fn release(&mut self, item: &ItemRef<K, V>) {
        item.set_lifecycle(Lifecycle::Removed);
        if item.is_corrupted() {
            self.corrupted -= 1;
        }
    }

    /// Physically removes lazily deleted items while one of them is the
    /// minimum.
    fn discard_deleted_minima(&mut self, reported: &mut Vec<ItemRef<K, V>>) {
        while self.min_candidate().is_some_and(|x| x.is_deleted()) {
            let (x, _) = self.remove_min(reported);
            self.release(&x);
        }
    }
}

impl<K: Ord + Clone, V> SoftHeap<K, V> for SoftSeqHeap<K, V> {
    fn insert(&mut self, item: ItemRef<K, V>) -> Result<(), HeapError> {
        admit(&item)?;
        self.inserted += 1;
        self.live += 1;
        self.seqs.push_front(SoftSequence::new(0, vec![Entry::new(item)]));
        while self.seqs.len() >= 2 && self.seqs[0].rank == self.seqs[1].rank {
            let a = self.seqs.pop_front().unwrap();
            let b = self.seqs.pop_front().unwrap();
            let merged = self.merge(a, b);
            self.seqs.push_front(merged);
        }
        self.update_suffix_min_at(0);
        Ok(())
    }

    fn find_min(&self) -> Result<(ItemRef<K, V>, K), HeapError> {
        if self.seqs.is_empty() {
            return Err(HeapError::Empty);
        }
        let head = self.seqs[self.min_index()].head();
        let key = head.item.real_key().clone();
        let item = head.corruption.front().unwrap_or(&head.item).clone();
        Ok((item, key))
    }

    fn extract_min(&mut self) -> Result<Extracted<K, V>, HeapError> {
        if self.seqs.is_empty() {
            return Err(HeapError::Empty);
        }
        let mut corrupted = Vec::new();
        let (item, reported_key) = self.remove_min(&mut corrupted);
        debug_assert!(!item.is_deleted());
        self.release(&item);
        self.live -= 1;
        self.discard_deleted_minima(&mut corrupted);
        Ok(Extracted {
            item,
            reported_key,
            corrupted,
        })
    }

    fn delete(&mut self, item: &ItemRef<K, V>) -> Result<Vec<ItemRef<K, V>>, HeapError> {
        require_live(item)?;
        let (min, _) = self.find_min()?;
        if min.id() == item.id() {
            return Ok(self.extract_min()?.corrupted);
        }
        item.set_lifecycle(Lifecycle::Deleted);
        self.live -= 1;
        Ok(Vec::new())
    }

    fn meld(&mut self, other: Self) -> Result<(), MeldError<Self>> {
        if other.param != self.param {
            return Err(MeldError {
                error: HeapError::EpsilonMismatch(self.param.epsilon().to_string(), other.param.epsilon().to_string()),
                rejected: other,
            });
        }
        let SoftSeqHeap {
            seqs: theirs,
            inserted,
            live,
            corrupted,
            cmp,
            ..
        } = other;
        self.inserted += inserted;
        self.live += live;
        self.corrupted += corrupted;
        self.cmp.absorb(&cmp);

        // Interleave by rank; ties keep our sequence first.
        let mut ours = std::mem::take(&mut self.seqs);
        let mut theirs = theirs;
        let mut input = VecDeque::with_capacity(ours.len() + theirs.len());
        while let (Some(a), Some(b)) = (ours.front(), theirs.front()) {
            let next = if b.rank < a.rank {
                theirs.pop_front()
            } else {
                ours.pop_front()
            };
            input.push_back(next.unwrap());
        }
        input.extend(ours);
        input.extend(theirs);

        // Binary carry. With a carry and two inputs of the same rank, the two
        // last ones are merged and the carry stays.
        let mut out = VecDeque::with_capacity(input.len());
        let mut carry: Option<SoftSequence<K, V>> = None;
        loop {
            let rank = match (&carry, input.front()) {
                (Some(c), Some(s)) => c.rank.min(s.rank),
                (Some(c), None) => c.rank,
                (None, Some(s)) => s.rank,
                (None, None) => break,
            };
            let mut group: Vec<SoftSequence<K, V>> = Vec::with_capacity(3);
            if carry.as_ref().is_some_and(|c| c.rank == rank) {
                group.push(carry.take().unwrap());
            }
            while input.front().is_some_and(|s| s.rank == rank) {
                group.push(input.pop_front().unwrap());
            }
            debug_assert!(group.len() <= 3);
            if group.len() == 1 {
                out.push_back(group.pop().unwrap());
                continue;
            }
            let b = group.pop().unwrap();
            let a = group.pop().unwrap();
            if let Some(first) = group.pop() {
                out.push_back(first);
            }
            carry = Some(self.merge(a, b));
        }
        self.seqs = out;
        if !self.seqs.is_empty() {
            self.update_suffix_min(self.seqs.len() - 1);
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.live
    }

    fn stats(&self) -> HeapStats {
        HeapStats {
            inserted: self.inserted,
            corrupted_in_heap: self.corrupted,
            comparisons: self.cmp.count(),
        }
    }

    fn error_param(&self) -> Option<ErrorParam> {
        Some(self.param)
    }
}
