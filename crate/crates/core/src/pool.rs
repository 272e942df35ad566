use std::collections::LinkedList;

use crate::item::ItemRef;

/// Bag of item references with constant-time concatenation. Used for
/// corruption-sets and witness-sets. Each pool owns its cells; an item held by
/// two pools occupies two cells.
#[derive(Debug)]
pub struct Pool<K, V = ()> {
    cells: LinkedList<ItemRef<K, V>>,
}

impl<K, V> Default for Pool<K, V> {
    fn default() -> Self {
        Pool {
            cells: LinkedList::new(),
        }
    }
}

impl<K, V> Pool<K, V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_items(items: impl IntoIterator<Item = ItemRef<K, V>>) -> Self {
        Pool {
            cells: items.into_iter().collect(),
        }
    }

    pub fn push(&mut self, item: ItemRef<K, V>) {
        self.cells.push_back(item);
    }

    /// Moves every cell of `other` to the end of `self`, leaving `other` empty.
    pub fn append(&mut self, other: &mut Pool<K, V>) {
        self.cells.append(&mut other.cells);
    }

    pub fn front(&self) -> Option<&ItemRef<K, V>> {
        self.cells.front()
    }

    pub fn pop(&mut self) -> Option<ItemRef<K, V>> {
        self.cells.pop_front()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ItemRef<K, V>> {
        self.cells.iter()
    }
}

impl<K, V> IntoIterator for Pool<K, V> {
    type Item = ItemRef<K, V>;
    type IntoIter = std::collections::linked_list::IntoIter<ItemRef<K, V>>;

    fn into_iter(self) -> Self::IntoIter {
        self.cells.into_iter()
    }
}
