//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p softheap-core --test acceptance -- --nocapture`
//! to see the report.

use std::collections::HashMap;
use std::io::Write;
use std::panic::AssertUnwindSafe;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use softheap_core::checker::{
    churn_heap, random_trace, reference_heap_compare_with, validate_with, Clause, CompareError, Session, TraceOp,
    ValidateConfig,
};
use softheap_core::softseq::Fault;
use softheap_core::workload::{approx_sort, insert_drain, insert_only, random_keys};
use softheap_core::{
    AnyHeap, Epsilon, ErrorParam, HeapKind, IdSource, ItemRef, Key, SequenceHeap, SoftHeap, SoftSeqHeap,
};

#[derive(Debug, Clone)]
struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Outcome { name, pass, detail }
    }

    fn line(&self) -> String {
        format!(
            "criterion {:<3} {} {}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn eps(p: u64, q: u64) -> Epsilon {
    Epsilon::new(p, q).unwrap()
}

/// Builds heaps, optionally with a defect injected into soft sequence heaps.
#[derive(Debug, Clone, Copy)]
struct Maker {
    fault: Option<Fault>,
}

impl Maker {
    const CLEAN: Maker = Maker { fault: None };

    fn soft_sequence(&self, param: ErrorParam) -> SoftSeqHeap<Key> {
        let mut h = SoftSeqHeap::with_param(param);
        if let Some(f) = self.fault {
            h.inject_fault(f);
        }
        h
    }

    fn heap(&self, kind: HeapKind, epsilon: Epsilon) -> AnyHeap<Key> {
        match kind {
            HeapKind::SoftSequence => AnyHeap::SoftSequence(
                self.soft_sequence(ErrorParam::new(epsilon, softheap_core::Variant::SoftSequence)),
            ),
            _ => AnyHeap::new(kind, epsilon),
        }
    }

    fn kinds(&self) -> &'static [HeapKind] {
        if self.fault.is_some() {
            &[HeapKind::SoftSequence]
        } else {
            &[HeapKind::SoftSequence, HeapKind::Ternary]
        }
    }
}

/// Runs `jobs` on all cores; results keep job order.
fn parallel<T: Send, R: Send>(jobs: Vec<T>, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    let n = jobs.len();
    let jobs: Vec<Mutex<Option<T>>> = jobs.into_iter().map(|j| Mutex::new(Some(j))).collect();
    let results: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map_or(4, |p| p.get())
        .min(n.max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let job = jobs[i].lock().unwrap().take().unwrap();
                *results[i].lock().unwrap() = Some(f(job));
            });
        }
    });
    results.into_iter().map(|r| r.into_inner().unwrap().unwrap()).collect()
}

#[derive(Debug, Clone)]
struct Cell {
    kind: HeapKind,
    n: u64,
    epsilon: Epsilon,
    seed: u64,
    budget: u64,
    max_in_heap: u64,
    reported_total: u64,
    budget_violations: u64,
    bound_violations: u64,
    other_violations: u64,
    first: Option<String>,
}

fn run_cell(maker: Maker, kind: HeapKind, n: u64, epsilon: Epsilon, seed: u64) -> Cell {
    let s: Session = churn_heap(maker.heap(kind, epsilon), n, seed, (n / 16).max(1));
    let (mut budget_violations, mut bound_violations, mut other_violations) = (0, 0, 0);
    for v in s.violations() {
        match v.clause {
            Clause::Budget => budget_violations += 1,
            Clause::Bound(_) => bound_violations += 1,
            _ => other_violations += 1,
        }
    }
    // only the first 100 are kept; anything beyond counts as "other"
    other_violations += s.violation_count() - s.violations().len() as u64;
    Cell {
        kind,
        n,
        epsilon,
        seed,
        budget: epsilon.budget(n),
        max_in_heap: s.max_corrupted_in_heap(),
        reported_total: s.model().reported_corrupted() as u64,
        budget_violations,
        bound_violations,
        other_violations,
        first: s.violations().first().map(|v| v.to_string()),
    }
}

fn matrix(maker: Maker, sizes: &[u64], epsilons: &[Epsilon], seeds: u64) -> Vec<Cell> {
    let mut jobs = Vec::new();
    for &kind in maker.kinds() {
        for &n in sizes {
            for &e in epsilons {
                for i in 0..seeds {
                    jobs.push((kind, n, e, 0x5eed_0000 + n * 131 + e.denominator() * 7 + i));
                }
            }
        }
    }
    // largest first so the tail is short
    jobs.sort_by_key(|j| std::cmp::Reverse(j.1));
    parallel(jobs, |(kind, n, e, seed)| run_cell(maker, kind, n, e, seed))
}

const EPSILONS: [(u64, u64); 4] = [(1, 2), (1, 4), (1, 16), (1, 64)];

fn full_matrix() -> &'static [Cell] {
    static CELLS: OnceLock<Vec<Cell>> = OnceLock::new();
    CELLS.get_or_init(|| {
        let epsilons: Vec<Epsilon> = EPSILONS.iter().map(|&(p, q)| eps(p, q)).collect();
        matrix(Maker::CLEAN, &[1 << 10, 1 << 12, 1 << 14, 1 << 16], &epsilons, 10)
    })
}

fn describe(c: &Cell) -> String {
    format!("{} N={} eps={} seed={:#x}", c.kind, c.n, c.epsilon, c.seed)
}

fn criterion_1a(cells: &[Cell]) -> Outcome {
    let bad: Vec<&Cell> = cells
        .iter()
        .filter(|c| c.budget_violations > 0 || c.max_in_heap > c.budget)
        .collect();
    let worst = cells
        .iter()
        .max_by(|a, b| (a.max_in_heap * b.budget.max(1)).cmp(&(b.max_in_heap * a.budget.max(1))))
        .map(|c| format!("worst {}/{} at {}", c.max_in_heap, c.budget, describe(c)))
        .unwrap_or_default();
    let detail = match bad.first() {
        None => format!(
            "corrupted-in-heap <= floor(eps N) at every step in {} runs; {worst}",
            cells.len()
        ),
        Some(c) => format!("{} runs over budget, first {}: {:?}", bad.len(), describe(c), c.first),
    };
    Outcome::new("1a", bad.is_empty(), detail)
}

fn criterion_1b(cells: &[Cell]) -> Outcome {
    let bad: Vec<&Cell> = cells.iter().filter(|c| c.reported_total > c.budget).collect();
    let detail = match bad.iter().max_by_key(|c| c.reported_total * 1000 / c.budget.max(1)) {
        None => format!("total reported corrupted <= floor(eps N) in {} runs", cells.len()),
        Some(c) => format!(
            "{}/{} runs report more corruptions over a full drain than floor(eps N); worst {} > {} at {}",
            bad.len(),
            cells.len(),
            c.reported_total,
            c.budget,
            describe(c)
        ),
    };
    Outcome::new("1b", bad.is_empty(), detail)
}

fn criterion_2(cells: &[Cell]) -> Outcome {
    let bad: Vec<&Cell> = cells
        .iter()
        .filter(|c| c.bound_violations > 0 || c.other_violations > 0)
        .collect();
    let detail = match bad.first() {
        None => format!(
            "audits found no s_r, c_r, w_r, d_r or ternary |C| violation in {} runs",
            cells.len()
        ),
        Some(c) => format!(
            "{} runs with violations, first {}: {:?}",
            bad.len(),
            describe(c),
            c.first
        ),
    };
    Outcome::new("2", bad.is_empty(), detail)
}

fn criterion_3(maker: Maker, ops: u64) -> Outcome {
    let kinds: Vec<HeapKind> = if maker.fault.is_some() {
        vec![HeapKind::SoftSequence]
    } else {
        HeapKind::ALL.to_vec()
    };
    let reports = parallel(kinds, |kind| {
        let mut cfg = ValidateConfig::new(kind, eps(1, 4), ops, 0xc0ffee);
        cfg.audit_every = 0;
        validate_with(&cfg, &|| maker.heap(kind, cfg.epsilon))
    });
    let contract = |c: &Clause| !matches!(c, Clause::Bound(_));
    let mut parts = Vec::new();
    let mut pass = true;
    for r in &reports {
        let bad: Vec<_> = r.violations.iter().filter(|v| contract(&v.clause)).collect();
        let ok = r.violation_count == 0;
        pass &= ok;
        match bad.first() {
            None if ok => parts.push(format!("{}: {} ops clean", r.kind.unwrap(), r.ops)),
            None => parts.push(format!("{}: {} violations", r.kind.unwrap(), r.violation_count)),
            Some(v) => parts.push(format!(
                "{}: {} violations, first {v}",
                r.kind.unwrap(),
                r.violation_count
            )),
        }
    }
    Outcome::new("3", pass, parts.join("; "))
}

fn criterion_4(maker: Maker, traces: u64) -> Outcome {
    const N: u64 = 1024;
    let tiny = eps(1, 2 * N);
    let results = parallel((0..traces).collect(), |i| {
        let with_deletes = random_trace(N, 0xde9e_0000 + i, true);
        let plain = random_trace(N, 0xe8ac_0000 + i, false);
        let mut errors: Vec<(HeapKind, CompareError)> = Vec::new();
        for kind in [HeapKind::SoftSequence, HeapKind::Ternary] {
            for t in [&with_deletes, &plain] {
                if let Err(e) = reference_heap_compare_with(t, &|| maker.heap(kind, tiny)) {
                    errors.push((kind, e));
                }
            }
        }
        if let Err(e) = reference_heap_compare_with(&plain, &|| AnyHeap::Sequence(SequenceHeap::new())) {
            errors.push((HeapKind::Sequence, e));
        }
        // drains against the sequence heap directly
        let drain = |kind| drain_ids(&plain, maker.heap(kind, tiny));
        let baseline = drain(HeapKind::Sequence);
        for kind in [HeapKind::SoftSequence, HeapKind::Ternary] {
            if drain(kind) != baseline {
                errors.push((
                    kind,
                    CompareError::Invalid {
                        step: 0,
                        message: "drain differs from the sequence heap".into(),
                    },
                ));
            }
        }
        errors
    });
    let errors: Vec<_> = results.into_iter().flatten().collect();
    let detail = match errors.first() {
        None => format!(
            "{traces} traces of N={N} at eps=1/{}: softseq, ternary, seq and textbook heap agree",
            2 * N
        ),
        Some((kind, e)) => format!("{} mismatches, first {kind}: {e}", errors.len()),
    };
    Outcome::new("4", errors.is_empty(), detail)
}

/// Ids returned by every extract of a delete-free trace, in order.
fn drain_ids(trace: &[TraceOp], mut heap: AnyHeap<Key>) -> Vec<(u64, Key)> {
    let mut ids = IdSource::new();
    let mut out = Vec::new();
    for op in trace {
        match op {
            TraceOp::Insert { key, .. } => heap.insert(ids.item(*key, ())).unwrap(),
            TraceOp::Extract { .. } => {
                if let Ok(r) = heap.extract_min() {
                    out.push((r.item.id(), r.reported_key));
                }
            }
            _ => {}
        }
    }
    out
}

fn cascade_fixture(maker: Maker) -> Result<String, String> {
    let mut h = maker.soft_sequence(ErrorParam::from_rank_threshold(0));
    let mut ids = IdSource::new();
    let mut by_key: HashMap<Key, ItemRef<Key>> = HashMap::new();
    for k in [4, 16, 21, 23, 7, 11, 18, 19, 3, 6, 20, 24, 12, 14, 15] {
        let x = ids.item(k, ());
        by_key.insert(k, x.clone());
        h.insert(x).map_err(|e| e.to_string())?;
    }
    let before: Vec<Vec<Key>> = h.sequences().map(|s| s.keys()).collect();
    let expected_before = [vec![15], vec![12, 14], vec![3, 20, 24], vec![4, 7, 18, 19, 21, 23]];
    if before != expected_before {
        return Err(format!("state before insert(10) is {before:?}"));
    }
    h.insert(ids.item(10, ())).map_err(|e| e.to_string())?;
    let seqs: Vec<_> = h.sequences().collect();
    if seqs.len() != 1 || seqs[0].rank() != 4 || seqs[0].keys() != [3, 7, 14, 18, 20, 23, 24] {
        let got: Vec<(u32, Vec<Key>)> = seqs.iter().map(|s| (s.rank(), s.keys())).collect();
        return Err(format!("after insert(10): {got:?}"));
    }
    // pruned in the rank-2 merge: 12; in the rank-4 reduce: 4, 10, 15, 19, 21
    let pools: Vec<(Key, Vec<Key>)> = seqs[0]
        .entries()
        .map(|e| {
            (
                *e.item().real_key(),
                e.corruption_set().iter().map(|x| *x.real_key()).collect(),
            )
        })
        .collect();
    let expected_pools = vec![
        (3, vec![]),
        (7, vec![4]),
        (14, vec![12, 10]),
        (18, vec![11, 15]),
        (20, vec![6, 19]),
        (23, vec![16, 21]),
        (24, vec![]),
    ];
    if pools != expected_pools {
        return Err(format!("corruption-sets {pools:?}"));
    }
    let r = h.extract_min().map_err(|e| e.to_string())?;
    let reported: Vec<Key> = r.corrupted.iter().map(|x| *x.real_key()).collect();
    if (*r.item.real_key(), r.reported_key, reported.as_slice()) != (3, 3, &[6, 16, 4][..]) {
        return Err(format!(
            "extract-min gave ({}, {}, {reported:?})",
            r.item.real_key(),
            r.reported_key
        ));
    }
    Ok("softseq insert cascade and extract (3, 3, [6,16,4])".into())
}

fn runs_fixture() -> Result<String, String> {
    let mut h: SequenceHeap<Key> = SequenceHeap::new();
    let mut ids = IdSource::new();
    for k in [1, 6, 7, 8, 9, 10, 11, 12, 3, 5, 2] {
        h.insert(ids.item(k, ())).map_err(|e| e.to_string())?;
    }
    let runs = |h: &SequenceHeap<Key>| -> Vec<(u32, Vec<Key>)> {
        h.runs()
            .map(|r| (r.rank(), r.items().iter().map(|x| *x.real_key()).collect()))
            .collect()
    };
    let before = runs(&h);
    if before != [(0, vec![2]), (1, vec![3, 5]), (3, vec![1, 6, 7, 8, 9, 10, 11, 12])] {
        return Err(format!("state before insert(4) is {before:?}"));
    }
    h.insert(ids.item(4, ())).map_err(|e| e.to_string())?;
    let after = runs(&h);
    if after != [(2, vec![2, 3, 4, 5]), (3, vec![1, 6, 7, 8, 9, 10, 11, 12])] {
        return Err(format!("after insert(4): {after:?}"));
    }
    let r = h.extract_min().map_err(|e| e.to_string())?;
    if (*r.item.real_key(), r.reported_key) != (1, 1) {
        return Err(format!("extract-min gave {}", r.item.real_key()));
    }
    Ok("seqheap insert(4) gives (2,3,4,5), extract-min gives 1".into())
}

fn criterion_5(maker: Maker) -> Outcome {
    let results = [runs_fixture(), cascade_fixture(maker)];
    let pass = results.iter().all(|r| r.is_ok());
    let detail: Vec<String> = results
        .into_iter()
        .map(|r| match r {
            Ok(s) => s,
            Err(e) => format!("mismatch: {e}"),
        })
        .collect();
    Outcome::new("5", pass, detail.join("; "))
}

fn criterion_6() -> Outcome {
    const N: usize = 1 << 18;
    let keys = random_keys(N, 0x6);
    let per = |c: u64| c as f64 / N as f64;
    let epsilons: Vec<Epsilon> = (1..=8).map(|k| Epsilon::pow2(k).unwrap()).collect();
    let soft: Vec<f64> = parallel(epsilons.clone(), |e| {
        per(insert_drain(HeapKind::SoftSequence, e, &keys).comparisons)
    });
    let ternary: Vec<f64> = parallel(epsilons, |e| per(insert_only(HeapKind::Ternary, e, &keys)));
    let seq = per(insert_drain(HeapKind::Sequence, eps(1, 2), &keys).comparisons);

    let max_step = soft.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
    let increasing = soft.windows(2).all(|w| w[1] >= w[0]);
    let i = max_step <= 4.0 && increasing;
    let (lo, hi) = ternary
        .iter()
        .fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
    let spread = (hi - lo) / lo;
    let ii = spread < 0.20;
    let ratio = seq / soft[1];
    let iii = ratio >= 2.0;
    Outcome::new(
        "6",
        i && ii && iii,
        format!(
            "(i) softseq cmp/N {:.2}..{:.2}, max step {max_step:.2} <= 4 {}; (ii) ternary insert cmp/N spread {:.1}% < 20% {}; (iii) seq {seq:.2} / softseq(1/4) {:.2} = {ratio:.2} >= 2 {}",
            soft[0],
            soft[7],
            if i { "ok" } else { "no" },
            spread * 100.0,
            if ii { "ok" } else { "no" },
            soft[1],
            if iii { "ok" } else { "no" },
        ),
    )
}

fn criterion_7() -> Outcome {
    const N: usize = 4096;
    let mut jobs = Vec::new();
    for kind in [HeapKind::SoftSequence, HeapKind::Ternary] {
        for q in [4, 16] {
            for seed in 0..20 {
                jobs.push((kind, eps(1, q), seed));
            }
        }
    }
    let results = parallel(jobs, |(kind, e, seed)| {
        let keys = random_keys(N, 0x7000 + seed);
        (kind, e, seed, approx_sort(kind, e, &keys))
    });
    let bad: Vec<_> = results.iter().filter(|r| !r.3.within_bound()).collect();
    let worst = results
        .iter()
        .max_by(|a, b| (a.3.inversions * b.3.bound).cmp(&(b.3.inversions * a.3.bound)))
        .unwrap();
    let detail = match bad.first() {
        None => format!(
            "{} sorts of n={N}: inversions <= eps n^2; worst {} <= {} ({} eps={})",
            results.len(),
            worst.3.inversions,
            worst.3.bound,
            worst.0,
            worst.1
        ),
        Some(r) => format!(
            "{} over bound, first {} eps={} seed={}: {} > {}",
            bad.len(),
            r.0,
            r.1,
            r.2,
            r.3.inversions,
            r.3.bound
        ),
    };
    Outcome::new("7", bad.is_empty(), detail)
}

/// Criteria 1-5 at reduced scale against a faulted soft sequence heap.
fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for fault in [Fault::SkipReduce, Fault::SkipWitness, Fault::SkipSuffixMinRepair] {
        let maker = Maker { fault: Some(fault) };
        let epsilons = [eps(1, 2), eps(1, 16)];
        let cells = || matrix(maker, &[1 << 10, 1 << 12], &epsilons, 2);
        let checks: [(&str, &dyn Fn() -> Outcome); 5] = [
            ("1a", &|| criterion_1a(&cells())),
            ("2", &|| criterion_2(&cells())),
            ("3", &|| criterion_3(maker, 100_000)),
            ("4", &|| criterion_4(maker, 5)),
            ("5", &|| criterion_5(maker)),
        ];
        // a faulted heap may trip its own internal assertions; that counts
        // as a detection
        let hook = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let failed: Vec<String> = checks
            .iter()
            .filter_map(
                |(name, check)| match std::panic::catch_unwind(AssertUnwindSafe(check)) {
                    Ok(o) if o.pass => None,
                    Ok(_) => Some(name.to_string()),
                    Err(_) => Some(format!("{name}(panic)")),
                },
            )
            .collect();
        std::panic::set_hook(hook);
        pass &= !failed.is_empty();
        parts.push(format!("{fault:?} fails [{}]", failed.join(",")));
    }
    Outcome::new("8", pass, parts.join("; "))
}

/// Criterion 1b cannot hold and is reported, not enforced; see the
/// decisions ledger.
const UNATTAINABLE: &[&str] = &["1b"];

#[test]
fn acceptance_report() {
    let cells = full_matrix();
    let outcomes = vec![
        criterion_1a(cells),
        criterion_1b(cells),
        criterion_2(cells),
        criterion_3(Maker::CLEAN, 1_000_000),
        criterion_4(Maker::CLEAN, 100),
        criterion_5(Maker::CLEAN),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    // straight to the handle so the report shows without --nocapture
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        writeln!(out, "{}", o.line()).unwrap();
    }
    drop(out);
    let unexpected: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass && !UNATTAINABLE.contains(&o.name))
        .map(Outcome::line)
        .collect();
    assert!(unexpected.is_empty(), "failed criteria:\n{}", unexpected.join("\n"));
}

/// The literal total-reported clause of criterion 1. Expected to fail.
#[test]
#[ignore = "unattainable as stated; kept to show the failure"]
fn criterion_1b_total_reported_within_budget() {
    let o = criterion_1b(full_matrix());
    println!("{}", o.line());
    assert!(o.pass, "{}", o.line());
}
