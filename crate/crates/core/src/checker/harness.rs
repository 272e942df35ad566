//! Checked sessions and seeded random workloads.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::HeapError;
use crate::heap::{AnyHeap, Extracted, HeapKind, SoftHeap};
use crate::item::{IdSource, ItemRef, Key};
use crate::param::Epsilon;

use super::audit::{check_bounds, AuditReport};
use super::model::{Clause, ModelState, Violation};
use super::reference::TextbookHeap;
use super::trace::TraceOp;

/// Violations kept verbatim; later ones are only counted.
const KEPT_VIOLATIONS: usize = 100;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// One heap driven through the contract model, with the budget checked after
/// every operation and the structural audit every `audit_every` operations
/// (never if 0).
#[derive(Debug)]
pub struct Session {
    heap: AnyHeap<Key>,
    model: ModelState<Key>,
    handles: Vec<ItemRef<Key>>,
    slots: HashMap<u64, usize>,
    violations: Vec<Violation>,
    violation_count: u64,
    audit_every: u64,
    since_audit: u64,
    audits: u64,
    extracts: u64,
    max_corrupted: u64,
}

impl Session {
    pub fn new(heap: AnyHeap<Key>, audit_every: u64) -> Self {
        Session {
            heap,
            model: ModelState::new(),
            handles: Vec::new(),
            slots: HashMap::new(),
            violations: Vec::new(),
            violation_count: 0,
            audit_every,
            since_audit: 0,
            audits: 0,
            extracts: 0,
            max_corrupted: 0,
        }
    }

    pub fn heap(&self) -> &AnyHeap<Key> {
        &self.heap
    }

    pub fn heap_mut(&mut self) -> &mut AnyHeap<Key> {
        &mut self.heap
    }

    pub fn model(&self) -> &ModelState<Key> {
        &self.model
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// All violations, including those not kept.
    pub fn violation_count(&self) -> u64 {
        self.violation_count
    }

    pub fn audits(&self) -> u64 {
        self.audits
    }

    /// Successful extract-min calls.
    pub fn extracts(&self) -> u64 {
        self.extracts
    }

    /// Largest corrupted-in-heap count seen after any operation.
    pub fn max_corrupted_in_heap(&self) -> u64 {
        self.max_corrupted
    }

    /// Live items the session can delete.
    pub fn live_items(&self) -> &[ItemRef<Key>] {
        &self.handles
    }

    pub fn set_step(&mut self, step: u64) {
        self.model.set_step(step);
    }

    fn push(&mut self, vs: impl IntoIterator<Item = Violation>) {
        for v in vs {
            self.violation_count += 1;
            if self.violations.len() < KEPT_VIOLATIONS {
                self.violations.push(v);
            }
        }
    }

    fn flag(&mut self, clause: Clause, message: String) {
        let step = self.model.step();
        self.push([Violation { step, clause, message }]);
    }

    fn track(&mut self, item: ItemRef<Key>) {
        self.slots.insert(item.id(), self.handles.len());
        self.handles.push(item);
    }

    fn untrack(&mut self, id: u64) {
        if let Some(i) = self.slots.remove(&id) {
            self.handles.swap_remove(i);
            if let Some(moved) = self.handles.get(i) {
                self.slots.insert(moved.id(), i);
            }
        }
    }

    fn after_op(&mut self) {
        let stats = self.heap.stats();
        self.max_corrupted = self.max_corrupted.max(stats.corrupted_in_heap);
        if let Some(param) = self.heap.error_param() {
            let budget = param.budget(stats.inserted);
            if stats.corrupted_in_heap > budget {
                self.flag(
                    Clause::Budget,
                    format!(
                        "{} corrupted items in heap > floor(eps N) = {budget} at N = {}",
                        stats.corrupted_in_heap, stats.inserted
                    ),
                );
            }
        }
        self.since_audit += 1;
        if self.audit_every > 0 && self.since_audit >= self.audit_every {
            self.audit();
        }
    }

    /// Runs the structural audit now and records its violations.
    pub fn audit(&mut self) -> AuditReport {
        self.since_audit = 0;
        self.audits += 1;
        let report = check_bounds(&self.heap);
        let step = self.model.step();
        self.push(report.violations.iter().map(|v| Violation {
            step,
            clause: Clause::Bound(v.kind.to_string()),
            message: v.to_string(),
        }));
        let live = self.model.live_count();
        if live != self.heap.len() {
            self.flag(
                Clause::Conservation,
                format!("model holds {live} live items, heap reports {}", self.heap.len()),
            );
        }
        let corrupted_live = self.model.corrupted_live() as u64;
        let in_heap = self.heap.stats().corrupted_in_heap;
        if corrupted_live > in_heap {
            self.flag(
                Clause::Conservation,
                format!("{corrupted_live} live items were reported corrupted, heap counts {in_heap}"),
            );
        }
        report
    }

    pub fn insert(&mut self, item: ItemRef<Key>) {
        let before = self.heap.stats().corrupted_in_heap;
        if let Err(e) = self.heap.insert(item.clone()) {
            self.flag(Clause::UnexpectedError, format!("insert {}: {e}", item.id()));
            return;
        }
        let after = self.heap.stats().corrupted_in_heap;
        if after != before {
            self.flag(
                Clause::InsertPurity,
                format!("insert {} changed corrupted count {before} -> {after}", item.id()),
            );
        }
        let vs = self.model.record_insert(&item);
        self.push(vs);
        self.track(item);
        self.after_op();
    }

    pub fn find_min(&mut self) -> Option<(ItemRef<Key>, Key)> {
        let out = match self.heap.find_min() {
            Ok((item, key)) => {
                let vs = self.model.check_find_min(&item, &key);
                self.push(vs);
                Some((item, key))
            }
            Err(HeapError::Empty) => {
                let vs = self.model.check_empty();
                self.push(vs);
                None
            }
            Err(e) => {
                self.flag(Clause::UnexpectedError, format!("findmin: {e}"));
                None
            }
        };
        self.after_op();
        out
    }

    pub fn extract(&mut self) -> Option<Extracted<Key>> {
        let out = match self.heap.extract_min() {
            Ok(r) => {
                let vs = self.model.check_extract(&r);
                self.push(vs);
                self.untrack(r.item.id());
                self.extracts += 1;
                Some(r)
            }
            Err(HeapError::Empty) => {
                let vs = self.model.check_empty();
                self.push(vs);
                None
            }
            Err(e) => {
                self.flag(Clause::UnexpectedError, format!("extract: {e}"));
                None
            }
        };
        self.after_op();
        out
    }

    /// Deletes a live item of this session; heap errors are returned as they
    /// are and recorded only if they are not `Unsupported`.
    pub fn delete(&mut self, id: u64) -> Result<Vec<ItemRef<Key>>, HeapError> {
        let item = match self.slots.get(&id) {
            Some(&i) => self.handles[i].clone(),
            None => return Err(HeapError::NotLive(id)),
        };
        let out = match self.heap.delete(&item) {
            Ok(corrupted) => {
                let vs = self.model.record_delete(id, &corrupted);
                self.push(vs);
                self.untrack(id);
                Ok(corrupted)
            }
            Err(e) => {
                if !matches!(e, HeapError::Unsupported(_)) {
                    self.flag(Clause::UnexpectedError, format!("delete {id}: {e}"));
                }
                Err(e)
            }
        };
        self.after_op();
        out
    }

    /// Absorbs `other`. Its violations carry over.
    pub fn meld(&mut self, other: Session) -> Result<(), HeapError> {
        let Session {
            heap,
            model,
            handles,
            slots,
            violations,
            violation_count,
            audits,
            extracts,
            max_corrupted,
            ..
        } = other;
        if let Err(e) = self.heap.meld(heap) {
            self.flag(Clause::UnexpectedError, format!("meld: {e}"));
            return Err(e.error);
        }
        self.model.record_meld(model);
        let (mut handles, mut slots) = (handles, slots);
        if handles.len() > self.handles.len() {
            std::mem::swap(&mut handles, &mut self.handles);
            std::mem::swap(&mut slots, &mut self.slots);
        }
        for h in handles {
            self.track(h);
        }
        self.violation_count += violation_count - violations.len() as u64;
        self.push(violations);
        self.audits += audits;
        self.extracts += extracts;
        self.max_corrupted = self.max_corrupted.max(max_corrupted);
        self.after_op();
        Ok(())
    }

    /// Extracts until the heap is empty, then checks the model agrees.
    pub fn drain(&mut self) -> Vec<Extracted<Key>> {
        let mut out = Vec::new();
        while let Some(r) = self.extract() {
            out.push(r);
        }
        out
    }
}

/// Relative weights of the random operation mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpMix {
    pub insert: u32,
    pub extract: u32,
    pub delete: u32,
    pub meld: u32,
}

impl Default for OpMix {
    fn default() -> Self {
        OpMix {
            insert: 50,
            extract: 35,
            delete: 10,
            meld: 5,
        }
    }
}

impl OpMix {
    /// The mix with the operations `kind` cannot perform removed.
    pub fn for_kind(self, kind: HeapKind) -> Self {
        if kind.is_soft() {
            self
        } else {
            OpMix {
                delete: 0,
                meld: 0,
                ..self
            }
        }
    }

    fn pick(&self, rng: &mut impl Rng) -> Op {
        let total = self.insert + self.extract + self.delete + self.meld;
        let mut x = rng.random_range(0..total.max(1));
        for (w, op) in [
            (self.insert, Op::Insert),
            (self.extract, Op::Extract),
            (self.delete, Op::Delete),
            (self.meld, Op::Meld),
        ] {
            if x < w {
                return op;
            }
            x -= w;
        }
        Op::Insert
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Insert,
    Extract,
    Delete,
    Meld,
}

#[derive(Debug, Clone)]
pub struct ValidateConfig {
    pub kind: HeapKind,
    pub epsilon: Epsilon,
    pub ops: u64,
    pub seed: u64,
    pub heaps: usize,
    pub audit_every: u64,
    pub mix: OpMix,
    /// Keys are drawn from `0..key_range`.
    pub key_range: Key,
}

impl ValidateConfig {
    pub fn new(kind: HeapKind, epsilon: Epsilon, ops: u64, seed: u64) -> Self {
        ValidateConfig {
            kind,
            epsilon,
            ops,
            seed,
            heaps: 4,
            audit_every: 1,
            mix: OpMix::default(),
            key_range: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub kind: Option<HeapKind>,
    pub epsilon: Option<Epsilon>,
    pub seed: u64,
    pub ops: u64,
    pub heaps: usize,
    pub inserts: u64,
    pub extracts: u64,
    pub empty_extracts: u64,
    pub deletes: u64,
    pub melds: u64,
    pub live: u64,
    pub reported_corrupted: u64,
    pub max_corrupted_in_heap: u64,
    pub audits: u64,
    pub violations: Vec<Violation>,
    pub violation_count: u64,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violation_count == 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = self.kind.map(|k| k.name()).unwrap_or("?");
        let eps = self.epsilon.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            f,
            "validate impl={kind} ops={} epsilon={eps} seed={} heaps={}",
            self.ops, self.seed, self.heaps
        )?;
        writeln!(
            f,
            "ops insert={} extract={} empty-extract={} delete={} meld={}",
            self.inserts, self.extracts, self.empty_extracts, self.deletes, self.melds
        )?;
        writeln!(
            f,
            "live={} reported-corrupted={} max-corrupted-in-heap={} audits={}",
            self.live, self.reported_corrupted, self.max_corrupted_in_heap, self.audits
        )?;
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        if self.is_clean() {
            writeln!(f, "result=ok")
        } else {
            writeln!(f, "result=violations count={}", self.violation_count)
        }
    }
}

/// Runs `cfg.ops` random operations over a pool of heaps, every one checked
/// against the contract model, and a final audit of every heap.
pub fn validate(cfg: &ValidateConfig) -> ValidationReport {
    validate_with(cfg, &|| AnyHeap::new(cfg.kind, cfg.epsilon))
}

/// [`validate`] with the pool's heaps built by `make_heap`, which must
/// produce heaps of `cfg.kind`.
pub fn validate_with(cfg: &ValidateConfig, make_heap: &dyn Fn() -> AnyHeap<Key>) -> ValidationReport {
    let mut rng = rng(cfg.seed);
    let mix = cfg.mix.for_kind(cfg.kind);
    let fresh = || Session::new(make_heap(), cfg.audit_every);
    let mut pool: Vec<Session> = (0..cfg.heaps.max(1)).map(|_| fresh()).collect();
    let mut ids = IdSource::new();
    let mut rep = ValidationReport {
        kind: Some(cfg.kind),
        epsilon: Some(cfg.epsilon),
        seed: cfg.seed,
        ops: cfg.ops,
        heaps: pool.len(),
        ..ValidationReport::default()
    };

    for step in 0..cfg.ops {
        let h = rng.random_range(0..pool.len());
        pool[h].set_step(step);
        let mut op = mix.pick(&mut rng);
        if op == Op::Delete && pool[h].live_items().is_empty() || op == Op::Meld && pool.len() < 2 {
            op = Op::Insert;
        }
        match op {
            Op::Insert => {
                let key = rng.random_range(0..cfg.key_range.max(1));
                pool[h].insert(ids.item(key, ()));
                rep.inserts += 1;
            }
            Op::Extract => {
                if pool[h].extract().is_some() {
                    rep.extracts += 1;
                } else {
                    rep.empty_extracts += 1;
                }
            }
            Op::Delete => {
                let live = pool[h].live_items();
                let id = live[rng.random_range(0..live.len())].id();
                let _ = pool[h].delete(id);
                rep.deletes += 1;
            }
            Op::Meld => {
                let mut other = rng.random_range(0..pool.len() - 1);
                if other >= h {
                    other += 1;
                }
                let absorbed = std::mem::replace(&mut pool[other], fresh());
                let _ = pool[h].meld(absorbed);
                rep.melds += 1;
            }
        }
    }

    for s in &mut pool {
        s.set_step(cfg.ops);
        s.audit();
        rep.live += s.heap().len() as u64;
        rep.reported_corrupted += s.model().reported_corrupted() as u64;
        rep.max_corrupted_in_heap = rep.max_corrupted_in_heap.max(s.max_corrupted_in_heap());
        rep.audits += s.audits();
        rep.violation_count += s.violation_count();
        for v in s.violations() {
            if rep.violations.len() < KEPT_VIOLATIONS {
                rep.violations.push(v.clone());
            }
        }
    }
    rep.violations.sort_by_key(|v| v.step);
    rep
}

/// One heap receiving `inserts` random keys interleaved with extractions
/// and (for soft heaps) deletions, then drained. Insert probability is 60%,
/// extract 30%, delete 10%.
pub fn churn(kind: HeapKind, epsilon: Epsilon, inserts: u64, seed: u64, audit_every: u64) -> Session {
    churn_heap(AnyHeap::new(kind, epsilon), inserts, seed, audit_every)
}

/// [`churn`] on a caller-supplied heap.
pub fn churn_heap(heap: AnyHeap<Key>, inserts: u64, seed: u64, audit_every: u64) -> Session {
    let kind = heap.kind();
    let mut rng = rng(seed);
    let mut s = Session::new(heap, audit_every);
    let mut ids = IdSource::new();
    let mut step = 0;
    let mut done = 0;
    while done < inserts {
        s.set_step(step);
        step += 1;
        let x = rng.random_range(0..10);
        if x < 6 || s.live_items().is_empty() {
            s.insert(ids.item(rng.random_range(0..1 << 30), ()));
            done += 1;
        } else if x < 9 || !kind.is_soft() {
            s.extract();
        } else {
            let live = s.live_items();
            let id = live[rng.random_range(0..live.len())].id();
            let _ = s.delete(id);
        }
    }
    s.set_step(step);
    s.drain();
    s.audit();
    s
}

/// A single-heap trace named `H` with `inserts` random insertions mixed with
/// find-mins, extractions and (if `deletes`) deletions of live items, ending
/// in a drain. Deletions only target items an exact heap still holds.
pub fn random_trace(inserts: u64, seed: u64, deletes: bool) -> Vec<TraceOp> {
    let mut rng = rng(seed);
    let heap = || "H".to_string();
    let mut ops = vec![TraceOp::Make {
        heap: heap(),
        epsilon: Epsilon::new(1, 2).expect("valid"),
    }];
    let mut exact = TextbookHeap::new();
    let mut live: Vec<u64> = Vec::new();
    let mut next_id = 0;
    while next_id < inserts {
        let x = rng.random_range(0..20);
        if x < 11 || live.is_empty() {
            next_id += 1;
            let key = rng.random_range(0..(inserts as Key * 4).max(1));
            exact.insert(next_id, key);
            live.push(next_id);
            ops.push(TraceOp::Insert { heap: heap(), key });
        } else if x < 12 {
            ops.push(TraceOp::FindMin { heap: heap() });
        } else if x < 17 || !deletes {
            if let Some((id, _)) = exact.extract_min() {
                live.retain(|&x| x != id);
            }
            ops.push(TraceOp::Extract { heap: heap() });
        } else {
            let id = live.swap_remove(rng.random_range(0..live.len()));
            exact.delete(id);
            ops.push(TraceOp::Delete { heap: heap(), id });
        }
    }
    for _ in 0..exact.len() {
        ops.push(TraceOp::Extract { heap: heap() });
    }
    ops
}
