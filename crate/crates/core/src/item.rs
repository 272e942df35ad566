//! Items and the comparison discipline shared by every heap.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU8, Ordering as AtomicOrdering};
use std::sync::Arc;

/// Key domain used by the command line tools.
pub type Key = i64;

/// Shared handle to an item. Heaps, pools and callers all hold clones of the
/// same handle; the handle doubles as the location reference `delete` needs.
pub type ItemRef<K, V = ()> = Arc<Item<K, V>>;

/// Where an item is in its lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lifecycle {
    /// Created but not yet inserted.
    Fresh,
    /// Stored in a heap.
    Live,
    /// Marked for lazy deletion, still physically stored.
    Deleted,
    /// Returned by an extraction or physically discarded after deletion.
    Removed,
}

impl Lifecycle {
    fn from_u8(raw: u8) -> Self {
        match raw {
            0 => Lifecycle::Fresh,
            1 => Lifecycle::Live,
            2 => Lifecycle::Deleted,
            _ => Lifecycle::Removed,
        }
    }
}

/// A `(key, value)` record with a unique insertion id.
///
/// The real key never changes. Corruption is tracked structurally by the heap
/// holding the item; the only thing recorded here is whether the item has been
/// reported as corrupted.
pub struct Item<K, V = ()> {
    id: u64,
    key: K,
    value: V,
    state: AtomicU8,
    corrupted: AtomicBool,
}

impl<K, V> Item<K, V> {
    pub fn new(id: u64, key: K, value: V) -> ItemRef<K, V> {
        Arc::new(Item {
            id,
            key,
            value,
            state: AtomicU8::new(Lifecycle::Fresh as u8),
            corrupted: AtomicBool::new(false),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// The key the item was inserted with.
    pub fn real_key(&self) -> &K {
        &self.key
    }

    pub fn value(&self) -> &V {
        &self.value
    }

    pub fn lifecycle(&self) -> Lifecycle {
        Lifecycle::from_u8(self.state.load(AtomicOrdering::Relaxed))
    }

    pub fn is_deleted(&self) -> bool {
        self.lifecycle() == Lifecycle::Deleted
    }

    pub fn is_corrupted(&self) -> bool {
        self.corrupted.load(AtomicOrdering::Relaxed)
    }

    pub(crate) fn set_lifecycle(&self, state: Lifecycle) {
        self.state.store(state as u8, AtomicOrdering::Relaxed);
    }

    /// Flags the item as corrupted. Returns `false` if it already was.
    pub(crate) fn mark_corrupted(&self) -> bool {
        !self.corrupted.swap(true, AtomicOrdering::Relaxed)
    }
}

impl<K: fmt::Debug, V> fmt::Debug for Item<K, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Item")
            .field("id", &self.id)
            .field("key", &self.key)
            .field("state", &self.lifecycle())
            .field("corrupted", &self.is_corrupted())
            .finish()
    }
}

/// Total order on items: real key first, insertion id breaks ties.
pub fn compare_items<K: Ord, V>(a: &Item<K, V>, b: &Item<K, V>) -> Ordering {
    a.key.cmp(&b.key).then(a.id.cmp(&b.id))
}

/// Counts every call to [`compare_items`] made by a heap.
#[derive(Debug, Default)]
pub struct Comparisons(Cell<u64>);

impl Comparisons {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn compare<K: Ord, V>(&self, a: &Item<K, V>, b: &Item<K, V>) -> Ordering {
        self.0.set(self.0.get() + 1);
        compare_items(a, b)
    }

    /// `a < b` under [`compare_items`].
    pub fn less<K: Ord, V>(&self, a: &Item<K, V>, b: &Item<K, V>) -> bool {
        self.compare(a, b) == Ordering::Less
    }

    pub fn count(&self) -> u64 {
        self.0.get()
    }

    pub(crate) fn absorb(&self, other: &Comparisons) {
        self.0.set(self.0.get() + other.0.get());
    }
}

/// Hands out consecutive item ids starting at 1.
#[derive(Debug, Clone)]
pub struct IdSource {
    next: u64,
}

impl Default for IdSource {
    fn default() -> Self {
        IdSource { next: 1 }
    }
}

impl IdSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn item<K, V>(&mut self, key: K, value: V) -> ItemRef<K, V> {
        let id = self.next;
        self.next += 1;
        Item::new(id, key, value)
    }

    /// Id the next call to [`IdSource::item`] will use.
    pub fn peek(&self) -> u64 {
        self.next
    }
}
