use softheap_core::checker::audit::check_ternary_heap;
use softheap_core::checker::{check_bounds, ModelState};
use softheap_core::ternary::{link, Node, Slot, TernaryHeap};
use softheap_core::{AnyHeap, Comparisons, Epsilon, ErrorParam, HeapError, IdSource, ItemRef, Key, Pool, SoftHeap};

fn eps(p: u64, q: u64) -> Epsilon {
    Epsilon::new(p, q).unwrap()
}

fn key_of(n: &Node<Key>) -> Option<Key> {
    n.item().map(|x| *x.real_key())
}

fn keys(xs: &[ItemRef<Key>]) -> Vec<Key> {
    xs.iter().map(|x| *x.real_key()).collect()
}

fn ranks(h: &TernaryHeap<Key>) -> Vec<u32> {
    h.trees().map(|t| t.rank()).collect()
}

fn leaf(ids: &mut IdSource, k: Key) -> Node<Key> {
    Node::leaf(ids.item(k, ()))
}

/// Rank-`rank` node whose only occupied slots are the given ones at the
/// first child level, as `(key, corruption keys)`.
fn node_with_child_slots(ids: &mut IdSource, rank: u32, slots: [Option<(Key, &[Key])>; 3]) -> Node<Key> {
    let children = slots.map(|s| {
        let slot = s.map(|(k, pool)| {
            let pool = Pool::from_items(pool.iter().map(|&p| ids.item(p, ())));
            Slot::new(ids.item(k, ()), pool)
        });
        let grandchildren = std::array::from_fn(|_| Node::empty(rank - 2));
        Node::with_children(slot, grandchildren)
    });
    Node::with_children(None, children)
}

#[test]
fn thresholds() {
    assert_eq!(TernaryHeap::<Key>::new(eps(1, 2)).rank_threshold(), 2);
    assert_eq!(TernaryHeap::<Key>::new(eps(1, 64)).rank_threshold(), 6);
    assert_eq!(TernaryHeap::<Key>::new(eps(3, 4)).rank_threshold(), 2);
}

#[test]
fn inserts_link_triples() {
    let mut ids = IdSource::new();
    let mut h = TernaryHeap::new(eps(1, 2));
    h.insert(ids.item(5, ())).unwrap();
    assert_eq!(ranks(&h), [0]);

    let mut h = TernaryHeap::new(eps(1, 2));
    for k in [3, 1, 2] {
        h.insert(ids.item(k, ())).unwrap();
    }
    assert_eq!(ranks(&h), [1]);
    assert_eq!(key_of(h.trees().next().unwrap().root()), Some(1));

    let mut h = TernaryHeap::new(eps(1, 2));
    for k in [40, 17, 93, 5, 61, 28, 72, 11, 56] {
        h.insert(ids.item(k, ())).unwrap();
    }
    assert_eq!(ranks(&h), [2]);
    assert_eq!(key_of(h.trees().next().unwrap().root()), Some(5));
    assert_eq!(h.stats().corrupted_in_heap, 0);
}

#[test]
fn link_single_fill_step() {
    let mut ids = IdSource::new();
    let cmp = Comparisons::new();
    let root = link(leaf(&mut ids, 7), leaf(&mut ids, 2), leaf(&mut ids, 9), &cmp);
    assert_eq!((root.rank(), key_of(&root)), (1, Some(2)));
    let kids: Vec<Option<Key>> = root.children().iter().map(key_of).collect();
    assert_eq!(kids, [Some(7), None, Some(9)]);
}

#[test]
fn link_empty_trees() {
    let cmp = Comparisons::new();
    let root: Node<Key> = link(Node::empty(0), Node::empty(0), Node::empty(0), &cmp);
    assert_eq!((root.rank(), root.item().is_none()), (1, true));
}

#[test]
fn link_two_levels() {
    let mut ids = IdSource::new();
    let cmp = Comparisons::new();
    let mut tree = |a, b, c| link(leaf(&mut ids, a), leaf(&mut ids, b), leaf(&mut ids, c), &cmp);
    let t1 = tree(4, 10, 11);
    let t2 = tree(1, 3, 12);
    let t3 = tree(6, 7, 13);
    let root = link(t1, t2, t3, &cmp);
    assert_eq!((root.rank(), key_of(&root)), (2, Some(1)));
    let donor = &root.children()[1];
    assert_eq!(key_of(donor), Some(3));
    let below: Vec<Option<Key>> = donor.children().iter().map(key_of).collect();
    assert_eq!(below, [None, None, Some(12)]);
}

#[test]
fn fill_below_threshold_is_single() {
    let mut ids = IdSource::new();
    let cmp = Comparisons::new();
    let mut n = Node::with_children(None, [leaf(&mut ids, 4), leaf(&mut ids, 7), leaf(&mut ids, 9)]);
    let reported = n.fill(2, &cmp);
    assert!(reported.is_empty());
    assert_eq!(key_of(&n), Some(4));
    assert_eq!(n.children()[0].item().map(|x| *x.real_key()), None);
}

#[test]
fn fill_above_threshold_car_pools() {
    let mut ids = IdSource::new();
    let cmp = Comparisons::new();
    let mut n = node_with_child_slots(&mut ids, 3, [Some((10, &[8])), Some((12, &[])), Some((20, &[]))]);
    let reported = n.fill(2, &cmp);
    assert_eq!(keys(&reported), [10]);
    assert!(reported[0].is_corrupted());
    let slot = n.slot().unwrap();
    assert_eq!(*slot.item().real_key(), 12);
    let pool: Vec<Key> = slot.corruption_set().iter().map(|x| *x.real_key()).collect();
    assert_eq!(pool, [8, 10]);

    // the refilled node answers find-min with the pool head and its own key
    let h = TernaryHeap::from_trees(ErrorParam::from_rank_threshold(2), vec![n], 4);
    let (x, k) = h.find_min().unwrap();
    assert_eq!((*x.real_key(), k), (8, 12));
}

#[test]
fn fill_last_item_not_corrupted() {
    let mut ids = IdSource::new();
    let cmp = Comparisons::new();
    let mut n = node_with_child_slots(&mut ids, 3, [None, Some((42, &[])), None]);
    let reported = n.fill(2, &cmp);
    assert!(reported.is_empty());
    assert_eq!(key_of(&n), Some(42));
    assert!(!n.item().unwrap().is_corrupted());
}

#[test]
fn suffix_min_over_roots() {
    let mut ids = IdSource::new();
    let cmp = Comparisons::new();
    let r1 = link(leaf(&mut ids, 4), leaf(&mut ids, 5), leaf(&mut ids, 6), &cmp);
    let r2 = link(leaf(&mut ids, 7), leaf(&mut ids, 8), leaf(&mut ids, 10), &cmp);
    let h = TernaryHeap::from_trees(ErrorParam::from_rank_threshold(2), vec![leaf(&mut ids, 9), r1, r2], 7);
    let offsets: Vec<usize> = h.trees().map(|t| t.suffix_min_offset()).collect();
    assert_eq!(offsets, [1, 0, 0]);
    assert_eq!(*h.find_min().unwrap().0.real_key(), 4);
}

#[test]
fn empty_and_singleton() {
    let mut ids = IdSource::new();
    let mut h: TernaryHeap<Key> = TernaryHeap::new(eps(1, 2));
    assert_eq!(h.find_min().unwrap_err(), HeapError::Empty);
    assert_eq!(h.extract_min().unwrap_err(), HeapError::Empty);
    h.insert(ids.item(5, ())).unwrap();
    let (x, k) = h.find_min().unwrap();
    assert_eq!((*x.real_key(), k), (5, 5));
    let r = h.extract_min().unwrap();
    assert_eq!((*r.item.real_key(), r.reported_key, r.corrupted.len()), (5, 5, 0));
    assert!(h.is_empty() && h.trees().next().is_none());
}

#[test]
fn twenty_seven_ascending_one_extract() {
    let mut ids = IdSource::new();
    let mut h = TernaryHeap::new(eps(1, 2));
    for k in 1..=27 {
        h.insert(ids.item(k, ())).unwrap();
    }
    assert_eq!(ranks(&h), [3]);
    let r = h.extract_min().unwrap();
    assert_eq!((*r.item.real_key(), r.reported_key), (1, 1));
    // only the rank-3 root pulls twice; 2 rides with 3
    assert_eq!(keys(&r.corrupted), [2]);
    let root = h.trees().next().unwrap().root();
    assert_eq!(key_of(root), Some(3));
    let pool: Vec<Key> = root
        .slot()
        .unwrap()
        .corruption_set()
        .iter()
        .map(|x| *x.real_key())
        .collect();
    assert_eq!(pool, [2]);
    for n in h.nodes() {
        if n.rank() <= 2 {
            assert!(n.slot().is_none_or(|s| s.corruption_set().is_empty()));
        }
    }
    assert!(check_bounds(&AnyHeap::Ternary(h)).is_clean());
}

#[test]
fn eighty_one_random_keys_drain() {
    use rand::seq::SliceRandom;
    let mut rng = softheap_core::checker::harness::rng(81);
    for round in 0..20 {
        let mut ks: Vec<Key> = (0..81).collect();
        ks.shuffle(&mut rng);
        let mut ids = IdSource::new();
        let mut h = TernaryHeap::new(eps(1, 4));
        let mut m = ModelState::new();
        for k in ks {
            let x = ids.item(k, ());
            m.record_insert(&x);
            h.insert(x).unwrap();
        }
        let mut last = Key::MIN;
        while let Ok(r) = h.extract_min() {
            assert!(m.check_extract(&r).is_empty(), "round {round}");
            assert!(r.reported_key >= last);
            last = r.reported_key;
            assert!(h.stats().corrupted_in_heap <= 20);
        }
    }
}

#[test]
fn delete_paths() {
    let mut ids = IdSource::new();
    let mut h = TernaryHeap::new(eps(1, 4));
    let items: Vec<_> = (0..30).map(|k| ids.item(k * 2, ())).collect();
    for x in &items {
        h.insert(x.clone()).unwrap();
    }
    assert!(h.delete(&items[10]).unwrap().is_empty());
    assert_eq!(h.delete(&items[10]).unwrap_err(), HeapError::NotLive(items[10].id()));
    assert_eq!(h.len(), 29);
    // items[0] is the minimum: delete extracts it
    h.delete(&items[0]).unwrap();
    assert_eq!(h.len(), 28);
    let mut out = Vec::new();
    while let Ok(r) = h.extract_min() {
        assert!(r.corrupted.iter().all(|x| x.id() != items[10].id()));
        out.push(r.item.id());
    }
    assert_eq!(out.len(), 28);
    assert!(!out.contains(&items[10].id()) && !out.contains(&items[0].id()));
    assert_eq!(h.stats().corrupted_in_heap, 0);
}

#[test]
fn meld_links_triples_and_keeps_items() {
    let mut ids = IdSource::new();
    let mut a = TernaryHeap::new(eps(1, 4));
    let mut b = TernaryHeap::new(eps(1, 4));
    let mut all = Vec::new();
    for k in 0..8 {
        let x = ids.item(k, ());
        all.push(x.id());
        a.insert(x).unwrap();
    }
    for k in 0..7 {
        let x = ids.item(100 - k, ());
        all.push(x.id());
        b.insert(x).unwrap();
    }
    assert_eq!(ranks(&a), [0, 0, 1, 1]);
    assert_eq!(ranks(&b), [0, 1, 1]);
    a.meld(b).unwrap();
    // 0,0,0 link; then 1,1,1,1 plus the carry: last three link, two stay
    assert_eq!(ranks(&a), [1, 1, 2]);
    assert!(check_ternary_heap(&a).is_clean());
    let mut got = Vec::new();
    while let Ok(r) = a.extract_min() {
        got.push(r.item.id());
    }
    got.sort();
    assert_eq!(got, all);
}

#[test]
fn meld_rejects_other_epsilon() {
    let mut a: TernaryHeap<Key> = TernaryHeap::new(eps(1, 8));
    let e = a.meld(TernaryHeap::new(eps(1, 16))).unwrap_err();
    assert!(matches!(e.error, HeapError::EpsilonMismatch(..)));
}
