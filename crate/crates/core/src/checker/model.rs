//! Black-box model of the soft heap contract.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::heap::Extracted;
use crate::item::ItemRef;

/// Which part of the contract a violation breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clause {
    /// Returned item was not live.
    NotLive,
    /// Reported key below the item's real key.
    KeyBelowReal,
    /// Reported key above the smallest key that cannot be corrupted.
    KeyAboveMin,
    /// Item never reported corrupted came back with a raised key.
    SilentCorruption,
    /// A reported corruption was not a live, uncorrupted item.
    BadCorruptionReport,
    /// Reported keys decreased inside an extraction-only window.
    NotMonotone,
    DuplicateId,
    /// The heap ran dry while the model still holds live items, or the
    /// other way round.
    Conservation,
    /// More corrupted items in the heap than `⌊εN⌋`.
    Budget,
    /// An insertion changed corruption state.
    InsertPurity,
    /// The heap returned an error the model did not expect.
    UnexpectedError,
    /// A structural bound reported by the auditor.
    Bound(String),
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Clause::NotLive => "a",
            Clause::KeyBelowReal => "b",
            Clause::KeyAboveMin => "c",
            Clause::SilentCorruption => "d",
            Clause::BadCorruptionReport => "e",
            Clause::NotMonotone => "f",
            Clause::DuplicateId => "dup-id",
            Clause::Conservation => "conservation",
            Clause::Budget => "budget",
            Clause::InsertPurity => "insert-purity",
            Clause::UnexpectedError => "heap-error",
            Clause::Bound(kind) => return write!(f, "bound:{kind}"),
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub step: u64,
    pub clause: Clause,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "violation step={} clause={} {}",
            self.step, self.clause, self.message
        )
    }
}

/// Ground truth for one heap: which items are live, which were reported
/// corrupted, and the last key an extraction returned.
#[derive(Debug, Clone)]
pub struct ModelState<K> {
    /// Live, non-deleted items and their real keys.
    live: HashMap<u64, K>,
    /// Live, non-deleted, never reported corrupted; their current key equals
    /// their real key.
    exact: BTreeSet<(K, u64)>,
    seen: HashSet<u64>,
    reported_corrupted: HashSet<u64>,
    inserted: u64,
    last_reported: Option<K>,
    step: u64,
}

impl<K> Default for ModelState<K> {
    fn default() -> Self {
        ModelState {
            live: HashMap::new(),
            exact: BTreeSet::new(),
            seen: HashSet::new(),
            reported_corrupted: HashSet::new(),
            inserted: 0,
            last_reported: None,
            step: 0,
        }
    }
}

impl<K: Ord + Clone + fmt::Debug> ModelState<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    /// Live items not deleted.
    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn is_live(&self, id: u64) -> bool {
        self.live.contains_key(&id)
    }

    /// Items ever reported corrupted.
    pub fn reported_corrupted(&self) -> usize {
        self.reported_corrupted.len()
    }

    /// Reported-corrupted items still live and not deleted. A lower bound on
    /// the heap's own corrupted count.
    pub fn corrupted_live(&self) -> usize {
        self.reported_corrupted.iter().filter(|id| self.is_live(**id)).count()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn set_step(&mut self, step: u64) {
        self.step = step;
    }

    fn violation(&self, clause: Clause, message: String) -> Violation {
        Violation {
            step: self.step,
            clause,
            message,
        }
    }

    pub fn record_insert<V>(&mut self, item: &ItemRef<K, V>) -> Vec<Violation> {
        self.last_reported = None;
        if !self.seen.insert(item.id()) {
            return vec![self.violation(Clause::DuplicateId, format!("id {} inserted twice", item.id()))];
        }
        self.inserted += 1;
        let key = item.real_key().clone();
        self.exact.insert((key.clone(), item.id()));
        self.live.insert(item.id(), key);
        Vec::new()
    }

    /// Checks the corruption report of a delete and marks `id` deleted.
    pub fn record_delete<V>(&mut self, id: u64, corrupted: &[ItemRef<K, V>]) -> Vec<Violation> {
        self.last_reported = None;
        let mut out = Vec::new();
        match self.live.remove(&id) {
            Some(key) => {
                self.exact.remove(&(key, id));
            }
            None => out.push(self.violation(Clause::NotLive, format!("deleted item {id} is not live"))),
        }
        self.absorb_report(corrupted, &mut out);
        out
    }

    /// Union with the model of a heap melded into this one.
    pub fn record_meld(&mut self, mut other: ModelState<K>) {
        let size = |m: &ModelState<K>| m.live.len() + m.seen.len() + m.reported_corrupted.len();
        if size(&other) > size(self) {
            std::mem::swap(self, &mut other);
            self.step = other.step;
        }
        self.last_reported = None;
        self.live.extend(other.live);
        self.exact.extend(other.exact);
        self.seen.extend(other.seen);
        self.reported_corrupted.extend(other.reported_corrupted);
        self.inserted += other.inserted;
    }

    fn absorb_report<V>(&mut self, corrupted: &[ItemRef<K, V>], out: &mut Vec<Violation>) {
        for x in corrupted {
            let id = x.id();
            if !self.is_live(id) {
                out.push(self.violation(
                    Clause::BadCorruptionReport,
                    format!("reported corrupted item {id} is not live"),
                ));
            } else if !self.reported_corrupted.insert(id) {
                out.push(self.violation(
                    Clause::BadCorruptionReport,
                    format!("item {id} reported corrupted twice"),
                ));
            } else {
                self.exact.remove(&(self.live[&id].clone(), id));
            }
        }
    }

    /// Clauses shared by find-min and extract-min: the item is live, its
    /// reported key is between its real key and the smallest exact key, and
    /// equals the real key unless the item was reported corrupted.
    fn check_answer<V>(&self, item: &ItemRef<K, V>, key: &K, out: &mut Vec<Violation>) {
        let id = item.id();
        let Some(real) = self.live.get(&id) else {
            out.push(self.violation(Clause::NotLive, format!("item {id} is not live")));
            return;
        };
        if key < real {
            out.push(self.violation(
                Clause::KeyBelowReal,
                format!("item {id} reported with key {key:?} below its real key {real:?}"),
            ));
        }
        if let Some((min, min_id)) = self.exact.first() {
            if key > min {
                out.push(self.violation(
                    Clause::KeyAboveMin,
                    format!("reported key {key:?} exceeds uncorrupted item {min_id} with key {min:?}"),
                ));
            }
        }
        if !self.reported_corrupted.contains(&id) && key != real {
            out.push(self.violation(
                Clause::SilentCorruption,
                format!("item {id} never reported corrupted but returned with key {key:?} != {real:?}"),
            ));
        }
    }

    pub fn check_find_min<V>(&self, item: &ItemRef<K, V>, key: &K) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check_answer(item, key, &mut out);
        out
    }

    pub fn check_extract<V>(&mut self, r: &Extracted<K, V>) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check_answer(&r.item, &r.reported_key, &mut out);
        if r.corrupted.iter().any(|x| x.id() == r.item.id()) {
            out.push(self.violation(
                Clause::BadCorruptionReport,
                format!("extracted item {} listed in its own corruption report", r.item.id()),
            ));
        }
        self.absorb_report(&r.corrupted, &mut out);
        if let Some(last) = &self.last_reported {
            if r.reported_key < *last {
                out.push(self.violation(
                    Clause::NotMonotone,
                    format!("reported key {:?} after {:?}", r.reported_key, last),
                ));
            }
        }
        let id = r.item.id();
        if let Some(key) = self.live.remove(&id) {
            self.exact.remove(&(key, id));
        }
        self.last_reported = Some(r.reported_key.clone());
        out
    }

    /// The heap reported itself empty.
    pub fn check_empty(&self) -> Vec<Violation> {
        match self.live_count() {
            0 => Vec::new(),
            n => vec![self.violation(
                Clause::Conservation,
                format!("heap empty but {n} live items outstanding"),
            )],
        }
    }
}
