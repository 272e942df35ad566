//! White-box auditor for the per-rank bounds of each structure.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::heap::{AnyHeap, SoftHeap};
use crate::item::{compare_items, ItemRef};
use crate::seqheap::SequenceHeap;
use crate::softseq::SoftSeqHeap;
use crate::ternary::{TernaryHeap, DEGREE};

fn pow2(e: u32) -> u64 {
    if e >= 64 {
        u64::MAX
    } else {
        1u64 << e
    }
}

/// Longest possible soft sequence of rank `r`.
pub fn sequence_length_bound(r: u32, r0: u32) -> u64 {
    if r <= r0 {
        pow2(r)
    } else {
        (pow2(r0) + 1).saturating_mul(pow2((r - r0).div_ceil(2)))
    }
}

/// Largest corruption-set (and witness-set) of an entry in a rank `r`
/// soft sequence.
pub fn pool_bound(r: u32, r0: u32) -> u64 {
    if r <= r0 {
        0
    } else {
        pow2((r - r0) / 2) - 1
    }
}

/// Most corrupted items a rank `r` soft sequence can hold.
pub fn sequence_corruption_bound(r: u32, r0: u32) -> u64 {
    if r <= r0 {
        0
    } else {
        pow2(r - r0 - 1)
    }
}

/// Largest corruption-set at a ternary node of rank `r`.
pub fn ternary_pool_bound(r: u32, r0: u32) -> u64 {
    if r <= r0 {
        0
    } else {
        pow2(r - r0) - 1
    }
}

fn floor_log(n: u64, base: u64) -> u32 {
    let (mut r, mut p) = (0, base);
    while p <= n {
        r += 1;
        p = p.saturating_mul(base);
        if p == u64::MAX {
            break;
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    RankOrder,
    MaxRank,
    Unsorted,
    SequenceLength,
    CorruptionSetSize,
    WitnessSetSize,
    SequenceCorruption,
    GlobalCorruption,
    CorruptedCount,
    LiveCount,
    Placement,
    PoolOrder,
    SuffixMin,
    TreeShape,
    HeapOrder,
    RootsPerRank,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundKind::RankOrder => "rank-order",
            BoundKind::MaxRank => "max-rank",
            BoundKind::Unsorted => "unsorted",
            BoundKind::SequenceLength => "s_r",
            BoundKind::CorruptionSetSize => "c_r",
            BoundKind::WitnessSetSize => "w_r",
            BoundKind::SequenceCorruption => "d_r",
            BoundKind::GlobalCorruption => "epsilon-n",
            BoundKind::CorruptedCount => "corrupted-count",
            BoundKind::LiveCount => "live-count",
            BoundKind::Placement => "placement",
            BoundKind::PoolOrder => "pool-order",
            BoundKind::SuffixMin => "suffix-min",
            BoundKind::TreeShape => "tree-shape",
            BoundKind::HeapOrder => "heap-order",
            BoundKind::RootsPerRank => "roots-per-rank",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundViolation {
    pub kind: BoundKind,
    pub rank: Option<u32>,
    pub message: String,
}

impl fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rank {
            Some(r) => write!(f, "bound={} rank={} {}", self.kind, r, self.message),
            None => write!(f, "bound={} {}", self.kind, self.message),
        }
    }
}

/// Worst observed values at one rank next to their bounds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankRow {
    pub rank: u32,
    /// Sequences, or nodes for the ternary heap.
    pub count: usize,
    pub max_len: u64,
    pub len_bound: u64,
    pub max_corruption_set: u64,
    pub corruption_set_bound: u64,
    pub max_witness_set: u64,
    pub witness_set_bound: u64,
    pub max_corrupted: u64,
    pub corrupted_bound: u64,
}

#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub rows: Vec<RankRow>,
    pub inserted: u64,
    pub corrupted_in_heap: u64,
    pub budget: u64,
    pub violations: Vec<BoundViolation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: BoundKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn flag(&mut self, kind: BoundKind, rank: Option<u32>, message: String) {
        self.violations.push(BoundViolation { kind, rank, message });
    }

    fn row(&mut self, rank: u32) -> &mut RankRow {
        let i = match self.rows.iter().position(|r| r.rank == rank) {
            Some(i) => i,
            None => {
                self.rows.push(RankRow {
                    rank,
                    ..RankRow::default()
                });
                self.rows.len() - 1
            }
        };
        &mut self.rows[i]
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "audit inserted={} corrupted={} budget={} violations={}",
            self.inserted,
            self.corrupted_in_heap,
            self.budget,
            self.violations.len()
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "rank={} count={} len={}/{} c={}/{} w={}/{} corrupted={}/{}",
                r.rank,
                r.count,
                r.max_len,
                r.len_bound,
                r.max_corruption_set,
                r.corruption_set_bound,
                r.max_witness_set,
                r.witness_set_bound,
                r.max_corrupted,
                r.corrupted_bound
            )?;
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn check_bounds<K: Ord + Clone, V>(heap: &AnyHeap<K, V>) -> AuditReport {
    match heap {
        AnyHeap::Sequence(h) => check_sequence_heap(h),
        AnyHeap::SoftSequence(h) => check_soft_sequence_heap(h),
        AnyHeap::Ternary(h) => check_ternary_heap(h),
    }
}

fn is_sorted<'a, K: Ord + 'a, V: 'a>(items: impl Iterator<Item = &'a ItemRef<K, V>>) -> bool {
    let mut prev: Option<&ItemRef<K, V>> = None;
    for x in items {
        if prev.is_some_and(|p| compare_items(p, x) == Ordering::Greater) {
            return false;
        }
        prev = Some(x);
    }
    true
}

pub fn check_sequence_heap<K: Ord + Clone, V>(h: &SequenceHeap<K, V>) -> AuditReport {
    let stats = h.stats();
    let mut rep = AuditReport {
        inserted: stats.inserted,
        ..AuditReport::default()
    };
    let max_rank = floor_log(stats.inserted, 2);
    let mut prev_rank = None;
    for run in h.runs() {
        let r = run.rank();
        if prev_rank.is_some_and(|p| p >= r) {
            rep.flag(BoundKind::RankOrder, Some(r), "ranks not strictly increasing".into());
        }
        prev_rank = Some(r);
        if r > max_rank {
            rep.flag(
                BoundKind::MaxRank,
                Some(r),
                format!("rank above floor(lg N) = {max_rank}"),
            );
        }
        if !is_sorted(run.items().iter()) {
            rep.flag(BoundKind::Unsorted, Some(r), "run not sorted".into());
        }
        let len = run.capacity_used() as u64;
        if len > pow2(r) {
            rep.flag(BoundKind::SequenceLength, Some(r), format!("length {len} > 2^{r}"));
        }
        let row = rep.row(r);
        row.count += 1;
        row.max_len = row.max_len.max(len);
        row.len_bound = pow2(r);
    }
    let live: usize = h.runs().map(|r| r.items().len()).sum();
    if live != h.len() {
        rep.flag(
            BoundKind::LiveCount,
            None,
            format!("{live} items stored, len() says {}", h.len()),
        );
    }
    rep
}

pub fn check_soft_sequence_heap<K: Ord + Clone, V>(h: &SoftSeqHeap<K, V>) -> AuditReport {
    let stats = h.stats();
    let r0 = h.rank_threshold();
    let mut rep = AuditReport {
        inserted: stats.inserted,
        corrupted_in_heap: stats.corrupted_in_heap,
        budget: h.param().budget(stats.inserted),
        ..AuditReport::default()
    };
    let max_rank = floor_log(stats.inserted, 2);
    let seqs: Vec<_> = h.sequences().collect();

    let mut positions: HashSet<u64> = HashSet::new();
    let mut flagged = 0u64;
    let mut live = 0usize;
    let mut prev_rank = None;

    for seq in &seqs {
        let r = seq.rank();
        if prev_rank.is_some_and(|p| p >= r) {
            rep.flag(BoundKind::RankOrder, Some(r), "ranks not strictly increasing".into());
        }
        prev_rank = Some(r);
        if r > max_rank {
            rep.flag(
                BoundKind::MaxRank,
                Some(r),
                format!("rank above floor(lg N) = {max_rank}"),
            );
        }
        if seq.is_empty() {
            rep.flag(
                BoundKind::SequenceLength,
                Some(r),
                "empty sequence kept in the list".into(),
            );
            continue;
        }
        if !is_sorted(seq.entries().map(|e| e.item())) {
            rep.flag(BoundKind::Unsorted, Some(r), "sequence not sorted".into());
        }

        let len = seq.len() as u64;
        let s_r = sequence_length_bound(r, r0);
        if len > s_r {
            rep.flag(
                BoundKind::SequenceLength,
                Some(r),
                format!("length {len} > s_r = {s_r}"),
            );
        }
        let c_r = pool_bound(r, r0);

        // Which entry (by index) witnesses each item.
        let mut witnessed_by: HashMap<u64, usize> = HashMap::new();
        let mut max_c = 0u64;
        let mut max_w = 0u64;
        for (i, e) in seq.entries().enumerate() {
            let (c, w) = (e.corruption_set().len() as u64, e.witness_set().len() as u64);
            max_c = max_c.max(c);
            max_w = max_w.max(w);
            if c > c_r {
                rep.flag(
                    BoundKind::CorruptionSetSize,
                    Some(r),
                    format!("|C({})| = {c} > c_r = {c_r}", e.item().id()),
                );
            }
            if w > c_r {
                rep.flag(
                    BoundKind::WitnessSetSize,
                    Some(r),
                    format!("|W({})| = {w} > w_r = {c_r}", e.item().id()),
                );
            }
            for x in e.witness_set().iter() {
                if compare_items(e.item(), x) == Ordering::Greater {
                    rep.flag(
                        BoundKind::PoolOrder,
                        Some(r),
                        format!("witness {} above witnessed item {}", e.item().id(), x.id()),
                    );
                }
                if witnessed_by.insert(x.id(), i).is_some() {
                    rep.flag(
                        BoundKind::Placement,
                        Some(r),
                        format!("item {} has two witnesses", x.id()),
                    );
                }
            }
        }

        let mut witnessless = 0u64;
        let mut in_pools: HashSet<u64> = HashSet::new();
        for (i, e) in seq.entries().enumerate() {
            for x in std::iter::once(e.item()).chain(e.corruption_set().iter()) {
                if !positions.insert(x.id()) {
                    rep.flag(BoundKind::Placement, Some(r), format!("item {} stored twice", x.id()));
                }
                if !x.is_deleted() {
                    live += 1;
                }
                if x.is_corrupted() {
                    flagged += 1;
                }
            }
            if e.item().is_corrupted() {
                rep.flag(
                    BoundKind::Placement,
                    Some(r),
                    format!("corrupted item {} sits in a sequence", e.item().id()),
                );
            }
            for x in e.corruption_set().iter() {
                in_pools.insert(x.id());
                if compare_items(x, e.item()) == Ordering::Greater {
                    rep.flag(
                        BoundKind::PoolOrder,
                        Some(r),
                        format!("item {} above corruption-set owner {}", x.id(), e.item().id()),
                    );
                }
                match witnessed_by.get(&x.id()) {
                    Some(&w) if w < i => {
                        if x.is_corrupted() {
                            rep.flag(
                                BoundKind::Placement,
                                Some(r),
                                format!("corrupted item {} still has a witness", x.id()),
                            );
                        }
                    }
                    Some(_) => rep.flag(
                        BoundKind::Placement,
                        Some(r),
                        format!("witness of item {} does not precede its corruption-set owner", x.id()),
                    ),
                    None => {
                        witnessless += 1;
                        if !x.is_corrupted() && !x.is_deleted() {
                            rep.flag(
                                BoundKind::Placement,
                                Some(r),
                                format!("item {} has neither a witness nor a corruption report", x.id()),
                            );
                        }
                    }
                }
            }
        }
        for id in witnessed_by.keys() {
            if !in_pools.contains(id) {
                rep.flag(
                    BoundKind::Placement,
                    Some(r),
                    format!("witnessed item {id} is in no corruption-set of this sequence"),
                );
            }
        }
        let d_r = sequence_corruption_bound(r, r0);
        if witnessless > d_r {
            rep.flag(
                BoundKind::SequenceCorruption,
                Some(r),
                format!("{witnessless} corrupted items > d_r = {d_r}"),
            );
        }

        let row = rep.row(r);
        row.count += 1;
        row.max_len = row.max_len.max(len);
        row.len_bound = s_r;
        row.max_corruption_set = row.max_corruption_set.max(max_c);
        row.max_witness_set = row.max_witness_set.max(max_w);
        row.corruption_set_bound = c_r;
        row.witness_set_bound = c_r;
        row.max_corrupted = row.max_corrupted.max(witnessless);
        row.corrupted_bound = d_r;
    }

    // Suffix-min references against a direct scan from the back.
    let mut best: Option<usize> = None;
    for i in (0..seqs.len()).rev() {
        if seqs[i].is_empty() {
            continue;
        }
        best = match best {
            Some(b)
                if compare_items(
                    seqs[b].entries().next().unwrap().item(),
                    seqs[i].entries().next().unwrap().item(),
                ) == Ordering::Less =>
            {
                Some(b)
            }
            _ => Some(i),
        };
        let expected = best.unwrap();
        let actual = i + seqs[i].suffix_min_offset();
        if actual != expected {
            rep.flag(
                BoundKind::SuffixMin,
                Some(seqs[i].rank()),
                format!("sequence {i} points at {actual}, minimum head is in {expected}"),
            );
        }
    }

    finish_counts(&mut rep, flagged, live, h.len());
    rep
}

fn finish_counts(rep: &mut AuditReport, flagged: u64, live: usize, len: usize) {
    if flagged != rep.corrupted_in_heap {
        rep.flag(
            BoundKind::CorruptedCount,
            None,
            format!("{flagged} flagged items stored, counter says {}", rep.corrupted_in_heap),
        );
    }
    if flagged > rep.budget {
        rep.flag(
            BoundKind::GlobalCorruption,
            None,
            format!("{flagged} corrupted items > floor(eps N) = {}", rep.budget),
        );
    }
    if live != len {
        rep.flag(
            BoundKind::LiveCount,
            None,
            format!("{live} live items stored, len() says {len}"),
        );
    }
}

pub fn check_ternary_heap<K: Ord + Clone, V>(h: &TernaryHeap<K, V>) -> AuditReport {
    let stats = h.stats();
    let r0 = h.rank_threshold();
    let mut rep = AuditReport {
        inserted: stats.inserted,
        corrupted_in_heap: stats.corrupted_in_heap,
        budget: h.param().budget(stats.inserted),
        ..AuditReport::default()
    };
    let max_rank = floor_log(stats.inserted, DEGREE as u64);
    let trees: Vec<_> = h.trees().collect();

    let mut per_rank: BTreeMap<u32, usize> = BTreeMap::new();
    let mut prev_rank = None;
    for t in &trees {
        let r = t.rank();
        *per_rank.entry(r).or_default() += 1;
        if prev_rank.is_some_and(|p| p > r) {
            rep.flag(BoundKind::RankOrder, Some(r), "roots not in non-decreasing rank".into());
        }
        prev_rank = Some(r);
        if r > max_rank {
            rep.flag(
                BoundKind::MaxRank,
                Some(r),
                format!("rank above floor(log3 N) = {max_rank}"),
            );
        }
        if t.root().item().is_none() {
            rep.flag(BoundKind::TreeShape, Some(r), "root without an item".into());
        }
    }
    for (&r, &n) in &per_rank {
        if n > DEGREE - 1 {
            rep.flag(BoundKind::RootsPerRank, Some(r), format!("{n} roots of rank {r}"));
        }
    }

    let mut positions: HashSet<u64> = HashSet::new();
    let mut flagged = 0u64;
    let mut live = 0usize;
    for t in &trees {
        let mut stack = vec![t.root()];
        while let Some(n) = stack.pop() {
            let r = n.rank();
            let kids = n.children();
            if (r == 0) != kids.is_empty() || (!kids.is_empty() && kids.len() != DEGREE) {
                rep.flag(
                    BoundKind::TreeShape,
                    Some(r),
                    "node is not a perfect ternary node".into(),
                );
            }
            if kids.iter().any(|c| c.rank() + 1 != r) {
                rep.flag(BoundKind::TreeShape, Some(r), "child rank mismatch".into());
            }
            let c_r = ternary_pool_bound(r, r0);
            let row = rep.row(r);
            row.count += 1;
            row.corruption_set_bound = c_r;
            row.corrupted_bound = c_r;
            if let Some(slot) = n.slot() {
                let item = slot.item();
                for c in kids {
                    if let Some(ci) = c.item() {
                        if compare_items(item, ci) == Ordering::Greater {
                            rep.flag(
                                BoundKind::HeapOrder,
                                Some(r),
                                format!("item {} above child item {}", item.id(), ci.id()),
                            );
                        }
                    }
                }
                let size = slot.corruption_set().len() as u64;
                let row = rep.row(r);
                row.max_corruption_set = row.max_corruption_set.max(size);
                if size > c_r {
                    rep.flag(
                        BoundKind::CorruptionSetSize,
                        Some(r),
                        format!("|C({})| = {size} > {c_r}", item.id()),
                    );
                }
                let mut node_flagged = 0;
                for x in std::iter::once(item).chain(slot.corruption_set().iter()) {
                    if !positions.insert(x.id()) {
                        rep.flag(BoundKind::Placement, Some(r), format!("item {} stored twice", x.id()));
                    }
                    if !x.is_deleted() {
                        live += 1;
                    }
                    if x.is_corrupted() {
                        node_flagged += 1;
                    }
                }
                if item.is_corrupted() {
                    rep.flag(
                        BoundKind::Placement,
                        Some(r),
                        format!("corrupted item {} holds a node", item.id()),
                    );
                }
                for x in slot.corruption_set().iter() {
                    if compare_items(x, item) == Ordering::Greater {
                        rep.flag(
                            BoundKind::PoolOrder,
                            Some(r),
                            format!("item {} above corruption-set owner {}", x.id(), item.id()),
                        );
                    }
                    if !x.is_corrupted() && !x.is_deleted() {
                        rep.flag(
                            BoundKind::Placement,
                            Some(r),
                            format!("item {} in a corruption-set was never reported", x.id()),
                        );
                    }
                }
                flagged += node_flagged;
                let row = rep.row(r);
                row.max_corrupted = row.max_corrupted.max(node_flagged);
            }
            stack.extend(kids);
        }
    }
    rep.rows.sort_by_key(|r| r.rank);

    let mut best: Option<usize> = None;
    for i in (0..trees.len()).rev() {
        let Some(item) = trees[i].root().item() else { continue };
        best = match best {
            Some(b) if compare_items(trees[b].root().item().unwrap(), item) == Ordering::Less => Some(b),
            _ => Some(i),
        };
        let actual = i + trees[i].suffix_min_offset();
        if actual != best.unwrap() {
            rep.flag(
                BoundKind::SuffixMin,
                Some(trees[i].rank()),
                format!("root {i} points at {actual}, minimum is {}", best.unwrap()),
            );
        }
    }

    finish_counts(&mut rep, flagged, live, h.len());
    rep
}
