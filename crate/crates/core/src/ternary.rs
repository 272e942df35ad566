//! Soft heap over a forest of perfectly balanced, heap-ordered ternary trees.
//!
//! Insertions link three trees of equal rank and fill the new root by pulling
//! single minima up, so they never corrupt anything. Refills during
//! extraction pull *two* items into nodes of rank above `r0`; the smaller one
//! joins the corruption-set of the larger and is reported corrupted.

use std::collections::VecDeque;

use crate::error::HeapError;
use crate::heap::{admit, require_live, Extracted, HeapStats, MeldError, SoftHeap};
use crate::item::{Comparisons, ItemRef, Lifecycle};
use crate::param::{Epsilon, ErrorParam, Variant};
use crate::pool::Pool;

pub const DEGREE: usize = 3;

/// An item stored at a node, with the corrupted items car-pooling on it.
#[derive(Debug)]
pub struct Slot<K, V = ()> {
    item: ItemRef<K, V>,
    corruption: Pool<K, V>,
}

impl<K, V> Slot<K, V> {
    pub fn new(item: ItemRef<K, V>, corruption: Pool<K, V>) -> Self {
        Slot { item, corruption }
    }

    pub fn item(&self) -> &ItemRef<K, V> {
        &self.item
    }

    pub fn corruption_set(&self) -> &Pool<K, V> {
        &self.corruption
    }
}

#[derive(Debug)]
pub struct Node<K, V = ()> {
    rank: u32,
    slot: Option<Slot<K, V>>,
    children: Option<Box<[Node<K, V>; DEGREE]>>,
}

impl<K, V> Node<K, V> {
    pub fn leaf(item: ItemRef<K, V>) -> Self {
        Node {
            rank: 0,
            slot: Some(Slot::new(item, Pool::new())),
            children: None,
        }
    }

    /// A perfect tree of the given rank with every slot empty.
    pub fn empty(rank: u32) -> Self {
        let children = (rank > 0).then(|| Box::new(std::array::from_fn(|_| Node::empty(rank - 1))));
        Node {
            rank,
            slot: None,
            children,
        }
    }

    /// Node over three children of equal rank, with the given slot. Heap
    /// order is not checked.
    pub fn with_children(slot: Option<Slot<K, V>>, children: [Node<K, V>; DEGREE]) -> Self {
        let rank = children[0].rank + 1;
        assert!(
            children.iter().all(|c| c.rank + 1 == rank),
            "children must have equal rank"
        );
        Node {
            rank,
            slot,
            children: Some(Box::new(children)),
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn slot(&self) -> Option<&Slot<K, V>> {
        self.slot.as_ref()
    }

    pub fn item(&self) -> Option<&ItemRef<K, V>> {
        self.slot.as_ref().map(|s| &s.item)
    }

    /// Empty for leaves.
    pub fn children(&self) -> &[Node<K, V>] {
        match &self.children {
            Some(c) => &c[..],
            None => &[],
        }
    }

    pub(crate) fn children_mut(&mut self) -> &mut [Node<K, V>] {
        match &mut self.children {
            Some(c) => &mut c[..],
            None => &mut [],
        }
    }

    /// Visits every node of the subtree, parents before children.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Node<K, V>)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Refills this empty node as an extraction would, returning the items
    /// that became corrupted.
    pub fn fill(&mut self, rank_threshold: u32, cmp: &Comparisons) -> Vec<ItemRef<K, V>>
    where
        K: Ord,
    {
        let mut ctx = FillCtx {
            cmp,
            double_above: Some(rank_threshold),
            reported: Vec::new(),
        };
        refill(self, &mut ctx);
        ctx.reported
    }
}

struct FillCtx<'a, K, V> {
    cmp: &'a Comparisons,
    /// `None` for plain (linking) fills.
    double_above: Option<u32>,
    reported: Vec<ItemRef<K, V>>,
}

/// Takes the node's slot and refills the node from below.
fn pull<K: Ord, V>(node: &mut Node<K, V>, ctx: &mut FillCtx<'_, K, V>) -> Option<Slot<K, V>> {
    let slot = node.slot.take()?;
    refill(node, ctx);
    Some(slot)
}

fn pull_min_child<K: Ord, V>(node: &mut Node<K, V>, ctx: &mut FillCtx<'_, K, V>) -> Option<Slot<K, V>> {
    let children = node.children_mut();
    let mut best: Option<usize> = None;
    for (i, c) in children.iter().enumerate() {
        let Some(item) = c.item() else { continue };
        match best {
            Some(b) if !ctx.cmp.less(item, children[b].item().unwrap()) => {}
            _ => best = Some(i),
        }
    }
    pull(&mut children[best?], ctx)
}

fn refill<K: Ord, V>(node: &mut Node<K, V>, ctx: &mut FillCtx<'_, K, V>) {
    debug_assert!(node.slot.is_none());
    if node.children.is_none() {
        return;
    }
    let double = ctx.double_above.is_some_and(|r0| node.rank > r0);
    if !double {
        node.slot = pull_min_child(node, ctx);
        return;
    }
    let Some(mut first) = pull_min_child(node, ctx) else {
        return;
    };
    node.slot = match pull_min_child(node, ctx) {
        // Last item of the subtree moves up uncorrupted.
        None => Some(first),
        Some(mut second) => {
            let e1 = first.item.clone();
            first.corruption.push(first.item);
            second.corruption.append(&mut first.corruption);
            if !e1.is_deleted() && e1.mark_corrupted() {
                ctx.reported.push(e1);
            }
            Some(second)
        }
    };
}

/// Makes three equal-rank trees the children of a new root and fills the
/// root by pulling single minima up. Never corrupts.
pub fn link<K: Ord, V>(a: Node<K, V>, b: Node<K, V>, c: Node<K, V>, cmp: &Comparisons) -> Node<K, V> {
    let mut root = Node::with_children(None, [a, b, c]);
    let mut ctx = FillCtx {
        cmp,
        double_above: None,
        reported: Vec::new(),
    };
    refill(&mut root, &mut ctx);
    debug_assert!(ctx.reported.is_empty());
    root
}

#[derive(Debug)]
pub struct Tree<K, V = ()> {
    root: Node<K, V>,
    suffix_min: usize,
}

impl<K, V> Tree<K, V> {
    pub fn new(root: Node<K, V>) -> Self {
        Tree { root, suffix_min: 0 }
    }

    pub fn root(&self) -> &Node<K, V> {
        &self.root
    }

    pub fn rank(&self) -> u32 {
        self.root.rank
    }

    pub fn suffix_min_offset(&self) -> usize {
        self.suffix_min
    }

    fn item(&self) -> &ItemRef<K, V> {
        self.root.item().expect("roots in the forest are occupied")
    }
}

#[derive(Debug)]
pub struct TernaryHeap<K, V = ()> {
    trees: VecDeque<Tree<K, V>>,
    param: ErrorParam,
    inserted: u64,
    live: usize,
    corrupted: u64,
    cmp: Comparisons,
}

impl<K: Ord + Clone, V> TernaryHeap<K, V> {
    pub fn new(epsilon: Epsilon) -> Self {
        Self::with_param(ErrorParam::new(epsilon, Variant::Ternary))
    }

    pub fn with_param(param: ErrorParam) -> Self {
        TernaryHeap {
            trees: VecDeque::new(),
            param,
            inserted: 0,
            live: 0,
            corrupted: 0,
            cmp: Comparisons::new(),
        }
    }

    /// Assembles a heap from hand-built trees in list order. Roots must be
    /// occupied; nothing else is validated.
    pub fn from_trees(param: ErrorParam, roots: Vec<Node<K, V>>, inserted: u64) -> Self {
        let mut h = Self::with_param(param);
        for r in &roots {
            assert!(r.item().is_some(), "root without an item");
            r.walk(&mut |n| {
                let Some(slot) = n.slot() else { return };
                for x in std::iter::once(&slot.item).chain(slot.corruption.iter()) {
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
            });
        }
        h.trees = roots.into_iter().map(Tree::new).collect();
        h.inserted = inserted;
        if !h.trees.is_empty() {
            h.update_suffix_min(h.trees.len() - 1);
        }
        h
    }

    pub fn param(&self) -> ErrorParam {
        self.param
    }

    pub fn rank_threshold(&self) -> u32 {
        self.param.rank_threshold()
    }

    pub fn trees(&self) -> impl Iterator<Item = &Tree<K, V>> {
        self.trees.iter()
    }

    /// Every node of every tree, parents before children.
    pub fn nodes(&self) -> Vec<&Node<K, V>> {
        let mut out = Vec::new();
        for t in &self.trees {
            t.root.walk(&mut |n| out.push(n));
        }
        out
    }

    fn min_index(&self) -> usize {
        self.trees[0].suffix_min
    }

    fn update_suffix_min_at(&mut self, i: usize) {
        let offset = if i + 1 == self.trees.len() {
            0
        } else {
            let j = i + 1 + self.trees[i + 1].suffix_min;
            if self.cmp.less(self.trees[j].item(), self.trees[i].item()) {
                j - i
            } else {
                0
            }
        };
        self.trees[i].suffix_min = offset;
    }

    /// Repairs suffix-min references of roots `from_index, …, 0`.
    pub fn update_suffix_min(&mut self, from_index: usize) {
        for i in (0..=from_index).rev() {
            self.update_suffix_min_at(i);
        }
    }

    fn min_candidate(&self) -> Option<&ItemRef<K, V>> {
        let t = self.trees.get(self.trees.front()?.suffix_min)?;
        let slot = t.root.slot().unwrap();
        Some(slot.corruption.front().unwrap_or(&slot.item))
    }

    fn remove_min(&mut self, reported: &mut Vec<ItemRef<K, V>>) -> (ItemRef<K, V>, K) {
        let i = self.min_index();
        let root = &mut self.trees[i].root;
        let slot = root.slot.as_mut().unwrap();
        let key = slot.item.real_key().clone();
        if let Some(x) = slot.corruption.pop() {
            return (x, key);
        }
        let slot = root.slot.take().unwrap();
        let mut ctx = FillCtx {
            cmp: &self.cmp,
            double_above: Some(self.param.rank_threshold()),
            reported: Vec::new(),
        };
        refill(root, &mut ctx);
        self.corrupted += ctx.reported.len() as u64;
        reported.append(&mut ctx.reported);
        let repair_from = if root.slot.is_none() {
            self.trees.remove(i);
            i.checked_sub(1)
        } else {
            Some(i)
        };
        if let Some(from) = repair_from {
            self.update_suffix_min(from);
        }
        (slot.item, key)
    }

    fn release(&mut self, item: &ItemRef<K, V>) {
        item.set_lifecycle(Lifecycle::Removed);
        if item.is_corrupted() {
            self.corrupted -= 1;
        }
    }

    fn discard_deleted_minima(&mut self, reported: &mut Vec<ItemRef<K, V>>) {
        while self.min_candidate().is_some_and(|x| x.is_deleted()) {
            let (x, _) = self.remove_min(reported);
            self.release(&x);
        }
    }
}

impl<K: Ord + Clone, V> SoftHeap<K, V> for TernaryHeap<K, V> {
    fn insert(&mut self, item: ItemRef<K, V>) -> Result<(), HeapError> {
        admit(&item)?;
        self.inserted += 1;
        self.live += 1;
        self.trees.push_front(Tree::new(Node::leaf(item)));
        while self.trees.len() >= DEGREE && (1..DEGREE).all(|i| self.trees[i].rank() == self.trees[0].rank()) {
            let a = self.trees.pop_front().unwrap().root;
            let b = self.trees.pop_front().unwrap().root;
            let c = self.trees.pop_front().unwrap().root;
            let linked = link(a, b, c, &self.cmp);
            self.trees.push_front(Tree::new(linked));
        }
        self.update_suffix_min_at(0);
        Ok(())
    }

    fn find_min(&self) -> Result<(ItemRef<K, V>, K), HeapError> {
        let t = self
            .trees
            .get(self.trees.front().ok_or(HeapError::Empty)?.suffix_min)
            .unwrap();
        let slot = t.root.slot().unwrap();
        let item = slot.corruption.front().unwrap_or(&slot.item).clone();
        Ok((item, slot.item.real_key().clone()))
    }

    fn extract_min(&mut self) -> Result<Extracted<K, V>, HeapError> {
        if self.trees.is_empty() {
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
        let TernaryHeap {
            trees: mut theirs,
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

        let mut ours = std::mem::take(&mut self.trees);
        let mut input = VecDeque::with_capacity(ours.len() + theirs.len());
        while let (Some(a), Some(b)) = (ours.front(), theirs.front()) {
            let next = if b.rank() < a.rank() {
                theirs.pop_front()
            } else {
                ours.pop_front()
            };
            input.push_back(next.unwrap().root);
        }
        input.extend(ours.into_iter().map(|t| t.root));
        input.extend(theirs.into_iter().map(|t| t.root));

        // Up to two trees per rank from each side plus one carry; the last
        // three of a rank are linked.
        let mut out = VecDeque::with_capacity(input.len());
        let mut carry: Option<Node<K, V>> = None;
        loop {
            let rank = match (&carry, input.front()) {
                (Some(c), Some(s)) => c.rank.min(s.rank),
                (Some(c), None) => c.rank,
                (None, Some(s)) => s.rank,
                (None, None) => break,
            };
            let mut group = Vec::with_capacity(2 * (DEGREE - 1) + 1);
            if carry.as_ref().is_some_and(|c| c.rank == rank) {
                group.push(carry.take().unwrap());
            }
            while input.front().is_some_and(|s| s.rank == rank) {
                group.push(input.pop_front().unwrap());
            }
            if group.len() >= DEGREE {
                let c = group.pop().unwrap();
                let b = group.pop().unwrap();
                let a = group.pop().unwrap();
                carry = Some(link(a, b, c, &self.cmp));
            }
            debug_assert!(group.len() < DEGREE);
            out.extend(group.into_iter().map(Tree::new));
        }
        self.trees = out;
        if !self.trees.is_empty() {
            self.update_suffix_min(self.trees.len() - 1);
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
