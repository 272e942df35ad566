//! Sorted sequences with corruption-sets and witness-sets, and the merge and
//! reduce steps that build them.

use std::collections::VecDeque;

use crate::item::{Comparisons, ItemRef};
use crate::pool::Pool;

/// An item in a sequence together with its corruption-set `C` and
/// witness-set `W`.
///
/// Every member of `C` has a real key no larger than the entry's item; every
/// member of `W` has a real key no smaller.
#[derive(Debug)]
pub struct Entry<K, V = ()> {
    pub(crate) item: ItemRef<K, V>,
    pub(crate) corruption: Pool<K, V>,
    pub(crate) witness: Pool<K, V>,
}

impl<K, V> Entry<K, V> {
    pub fn new(item: ItemRef<K, V>) -> Self {
        Entry {
            item,
            corruption: Pool::new(),
            witness: Pool::new(),
        }
    }

    /// Entry with prefilled pools, for hand-built fixtures.
    pub fn with_pools(item: ItemRef<K, V>, corruption: Pool<K, V>, witness: Pool<K, V>) -> Self {
        Entry {
            item,
            corruption,
            witness,
        }
    }

    pub fn item(&self) -> &ItemRef<K, V> {
        &self.item
    }

    pub fn corruption_set(&self) -> &Pool<K, V> {
        &self.corruption
    }

    pub fn witness_set(&self) -> &Pool<K, V> {
        &self.witness
    }
}

#[derive(Debug)]
pub struct SoftSequence<K, V = ()> {
    pub(crate) rank: u32,
    pub(crate) entries: VecDeque<Entry<K, V>>,
    /// Distance to the sequence holding the smallest head among this one and
    /// all later ones.
    pub(crate) suffix_min: usize,
}

impl<K, V> SoftSequence<K, V> {
    /// Wraps `entries` as they are; ordering is not checked.
    pub fn new(rank: u32, entries: Vec<Entry<K, V>>) -> Self {
        SoftSequence {
            rank,
            entries: entries.into(),
            suffix_min: 0,
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry<K, V>> {
        self.entries.iter()
    }

    pub fn suffix_min_offset(&self) -> usize {
        self.suffix_min
    }

    pub(crate) fn head(&self) -> &Entry<K, V> {
        &self.entries[0]
    }

    pub(crate) fn head_mut(&mut self) -> &mut Entry<K, V> {
        &mut self.entries[0]
    }

    /// Item keys front to back.
    pub fn keys(&self) -> Vec<K>
    where
        K: Clone,
    {
        self.entries.iter().map(|e| e.item.real_key().clone()).collect()
    }
}

/// Prunes every second interior entry of a stream of `len` entries as they
/// are pushed, so reduction can run inside the merge output pass.
///
/// The entry at 1-based position `p` is pruned when `p` is even and `p < len`.
/// Its item and corruption-set go to the end of the next entry's
/// corruption-set; its item and witness-set go to the end of the previous
/// entry's witness-set.
struct Reducer<K, V> {
    len: usize,
    position: usize,
    out: Vec<Entry<K, V>>,
    carry: Option<Pool<K, V>>,
    keep_witnesses: bool,
}

impl<K, V> Reducer<K, V> {
    fn new(len: usize, keep_witnesses: bool) -> Self {
        Reducer {
            len,
            position: 0,
            out: Vec::with_capacity(len / 2 + 1),
            carry: None,
            keep_witnesses,
        }
    }

    fn push(&mut self, mut entry: Entry<K, V>) {
        self.position += 1;
        if self.position.is_multiple_of(2) && self.position < self.len {
            let Entry {
                item,
                mut corruption,
                mut witness,
            } = entry;
            let prev = self.out.last_mut().expect("odd positions survive");
            if self.keep_witnesses {
                witness.push(item.clone());
                prev.witness.append(&mut witness);
            }
            corruption.push(item);
            self.carry = Some(corruption);
        } else {
            if let Some(mut carry) = self.carry.take() {
                entry.corruption.append(&mut carry);
            }
            self.out.push(entry);
        }
    }

    fn finish(self) -> Vec<Entry<K, V>> {
        debug_assert!(self.carry.is_none());
        debug_assert_eq!(self.position, self.len);
        self.out
    }
}

/// Prunes `e_2, e_4, …` (never the first or last) from `entries`, leaving
/// `⌈(m + 1) / 2⌉` of the original `m` entries.
pub fn reduce<K, V>(entries: Vec<Entry<K, V>>) -> Vec<Entry<K, V>> {
    reduce_with(entries, true)
}

pub(crate) fn reduce_with<K, V>(entries: Vec<Entry<K, V>>, keep_witnesses: bool) -> Vec<Entry<K, V>> {
    let mut r = Reducer::new(entries.len(), keep_witnesses);
    for e in entries {
        r.push(e);
    }
    r.finish()
}

/// Whether a freshly created sequence of `rank` gets reduced.
pub fn reduces_at(rank: u32, rank_threshold: u32) -> bool {
    rank > rank_threshold && (rank - rank_threshold).is_multiple_of(2)
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MergeOptions {
    pub reduce: bool,
    pub keep_witnesses: bool,
}

/// Merges two sequences of equal rank `r` into one of rank `r + 1`, reducing
/// the result when `reduces_at(r + 1, rank_threshold)`.
pub fn merge_sequences<K: Ord, V>(
    a: SoftSequence<K, V>,
    b: SoftSequence<K, V>,
    rank_threshold: u32,
    cmp: &Comparisons,
) -> SoftSequence<K, V> {
    let rank = a.rank + 1;
    let opts = MergeOptions {
        reduce: reduces_at(rank, rank_threshold),
        keep_witnesses: true,
    };
    merge_with(a, b, opts, cmp)
}

pub(crate) fn merge_with<K: Ord, V>(
    a: SoftSequence<K, V>,
    b: SoftSequence<K, V>,
    opts: MergeOptions,
    cmp: &Comparisons,
) -> SoftSequence<K, V> {
    assert_eq!(a.rank, b.rank, "only sequences of equal rank are merged");
    let rank = a.rank + 1;
    let (mut xs, mut ys) = (a.entries, b.entries);
    let len = xs.len() + ys.len();

    let mut plain: Vec<Entry<K, V>> = Vec::new();
    let mut reducer = None;
    if opts.reduce {
        reducer = Some(Reducer::new(len, opts.keep_witnesses));
    } else {
        plain.reserve_exact(len);
    }
    {
        let mut emit = |e: Entry<K, V>| match reducer.as_mut() {
            Some(r) => r.push(e),
            None => plain.push(e),
        };
        while let (Some(x), Some(y)) = (xs.front(), ys.front()) {
            let next = if cmp.less(&y.item, &x.item) {
                ys.pop_front()
            } else {
                xs.pop_front()
            };
            emit(next.unwrap());
        }
        xs.into_iter().chain(ys).for_each(&mut emit);
    }
    let entries = match reducer {
        Some(r) => r.finish(),
        None => plain,
    };
    SoftSequence::new(rank, entries)
}
