//! Exact textbook binary heap and the differential comparison against it.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

use crate::heap::{AnyHeap, HeapKind, SoftHeap};
use crate::item::{IdSource, ItemRef, Key};
use crate::param::Epsilon;

use super::trace::TraceOp;

/// Binary heap over `(key, id)` with lazy deletion.
#[derive(Debug, Clone)]
pub struct TextbookHeap<K> {
    heap: BinaryHeap<Reverse<(K, u64)>>,
    deleted: HashSet<u64>,
    live: HashSet<u64>,
}

impl<K: Ord + Clone> Default for TextbookHeap<K> {
    fn default() -> Self {
        TextbookHeap {
            heap: BinaryHeap::new(),
            deleted: HashSet::new(),
            live: HashSet::new(),
        }
    }
}

impl<K: Ord + Clone> TextbookHeap<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: u64, key: K) {
        self.live.insert(id);
        self.heap.push(Reverse((key, id)));
    }

    fn settle(&mut self) {
        while let Some(Reverse((_, id))) = self.heap.peek() {
            if !self.deleted.remove(id) {
                break;
            }
            self.heap.pop();
        }
    }

    pub fn find_min(&mut self) -> Option<(u64, K)> {
        self.settle();
        self.heap.peek().map(|Reverse((k, id))| (*id, k.clone()))
    }

    pub fn extract_min(&mut self) -> Option<(u64, K)> {
        self.settle();
        let Reverse((k, id)) = self.heap.pop()?;
        self.live.remove(&id);
        Some((id, k))
    }

    /// False if `id` is not in the heap.
    pub fn delete(&mut self, id: u64) -> bool {
        if !self.live.remove(&id) {
            return false;
        }
        self.deleted.insert(id);
        true
    }

    pub fn meld(&mut self, mut other: TextbookHeap<K>) {
        self.heap.append(&mut other.heap);
        self.deleted.extend(other.deleted);
        self.live.extend(other.live);
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompareError {
    /// The heap under test answered differently from the reference.
    Diverged {
        step: usize,
        op: String,
        expected: String,
        actual: String,
    },
    /// The trace cannot be run (unknown heap, unknown id, unsupported
    /// operation).
    Invalid { step: usize, message: String },
}

impl fmt::Display for CompareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareError::Diverged {
                step,
                op,
                expected,
                actual,
            } => write!(
                f,
                "divergence step={step} op={op:?} expected={expected} actual={actual}"
            ),
            CompareError::Invalid { step, message } => write!(f, "invalid trace step={step}: {message}"),
        }
    }
}

impl std::error::Error for CompareError {}

fn show(x: &Option<(u64, Key)>) -> String {
    match x {
        Some((id, k)) => format!("(id={id} key={k})"),
        None => "empty".into(),
    }
}

fn show_corrupted(xs: &[ItemRef<Key>]) -> String {
    let ids: Vec<String> = xs.iter().map(|x| x.id().to_string()).collect();
    format!("corrupted=[{}]", ids.join(","))
}

fn get<'a, P>(heaps: &'a mut HashMap<String, P>, name: &str, step: usize) -> Result<&'a mut P, CompareError> {
    heaps.get_mut(name).ok_or_else(|| CompareError::Invalid {
        step,
        message: format!("unknown heap {name}"),
    })
}

/// Runs `trace` on a `kind` heap with error parameter `epsilon` (overriding
/// any `make` parameter) and on [`TextbookHeap`]s side by side. Every answer
/// must agree in item and key, and no corruption may be reported.
///
/// Returns the number of answers compared.
pub fn reference_heap_compare(trace: &[TraceOp], kind: HeapKind, epsilon: Epsilon) -> Result<usize, CompareError> {
    reference_heap_compare_with(trace, &|| AnyHeap::new(kind, epsilon))
}

/// [`reference_heap_compare`] with every `make` served by `make_heap`.
pub fn reference_heap_compare_with(
    trace: &[TraceOp],
    make_heap: &dyn Fn() -> AnyHeap<Key>,
) -> Result<usize, CompareError> {
    struct Pair {
        heap: AnyHeap<Key>,
        reference: TextbookHeap<Key>,
    }
    let mut heaps: HashMap<String, Pair> = HashMap::new();
    let mut items: HashMap<u64, ItemRef<Key>> = HashMap::new();
    let mut ids = IdSource::new();
    let mut compared = 0;

    for (step, op) in trace.iter().enumerate() {
        let invalid = |message: String| CompareError::Invalid { step, message };
        let diverged = |expected: String, actual: String| CompareError::Diverged {
            step,
            op: op.to_string(),
            expected,
            actual,
        };
        match op {
            TraceOp::Make { heap, .. } => {
                heaps.insert(
                    heap.clone(),
                    Pair {
                        heap: make_heap(),
                        reference: TextbookHeap::new(),
                    },
                );
            }
            TraceOp::Insert { heap, key } => {
                let p = get(&mut heaps, heap, step)?;
                let item = ids.item(*key, ());
                p.reference.insert(item.id(), *key);
                p.heap.insert(item.clone()).map_err(|e| invalid(e.to_string()))?;
                items.insert(item.id(), item);
            }
            TraceOp::FindMin { heap } => {
                let p = get(&mut heaps, heap, step)?;
                let expected = p.reference.find_min();
                let actual = p.heap.find_min().ok().map(|(x, k)| (x.id(), k));
                compared += 1;
                if expected != actual {
                    return Err(diverged(show(&expected), show(&actual)));
                }
            }
            TraceOp::Extract { heap } => {
                let p = get(&mut heaps, heap, step)?;
                let expected = p.reference.extract_min();
                let (actual, corrupted) = match p.heap.extract_min() {
                    Ok(r) => (Some((r.item.id(), r.reported_key)), r.corrupted),
                    Err(_) => (None, Vec::new()),
                };
                compared += 1;
                if expected != actual || !corrupted.is_empty() {
                    return Err(diverged(
                        format!("{} corrupted=[]", show(&expected)),
                        format!("{} {}", show(&actual), show_corrupted(&corrupted)),
                    ));
                }
            }
            TraceOp::Delete { heap, id } => {
                let item = items
                    .get(id)
                    .cloned()
                    .ok_or_else(|| invalid(format!("unknown item {id}")))?;
                let p = get(&mut heaps, heap, step)?;
                if !p.reference.delete(*id) {
                    return Err(invalid(format!("item {id} is not in heap {heap}")));
                }
                let corrupted = p.heap.delete(&item).map_err(|e| invalid(e.to_string()))?;
                compared += 1;
                if !corrupted.is_empty() {
                    return Err(diverged("corrupted=[]".into(), show_corrupted(&corrupted)));
                }
            }
            TraceOp::Meld { a, b, result } => {
                let mut pa = heaps.remove(a).ok_or_else(|| invalid(format!("unknown heap {a}")))?;
                let pb = heaps.remove(b).ok_or_else(|| invalid(format!("unknown heap {b}")))?;
                pa.heap.meld(pb.heap).map_err(|e| invalid(e.to_string()))?;
                pa.reference.meld(pb.reference);
                heaps.insert(result.clone(), pa);
            }
        }
    }
    Ok(compared)
}
