//! Comparison-count and wall-time table over implementations, sizes and
//! error parameters, written as CSV.

use std::fmt;
use std::time::Instant;

use softheap_core::checker::count_inversions;
use softheap_core::workload::{insert_drain, random_keys};
use softheap_core::{Epsilon, HeapKind};

use crate::CliError;

pub const CSV_HEADER: &str = "impl,N,epsilon,comparisons,time_ns,corrupted,inversions";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRecord {
    pub kind: HeapKind,
    pub n: usize,
    /// `None` for the sequence heap, which has no error parameter.
    pub epsilon: Option<Epsilon>,
    pub comparisons: u64,
    /// Median over the timed runs.
    pub time_ns: u128,
    pub corrupted: u64,
    pub inversions: u64,
}

impl fmt::Display for BenchRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eps = self.epsilon.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
        write!(
            f,
            "{},{},{eps},{},{},{},{}",
            self.kind, self.n, self.comparisons, self.time_ns, self.corrupted, self.inversions
        )
    }
}

fn parse_size(s: &str) -> Result<usize, CliError> {
    let bad = || CliError::Usage(format!("bad size {s:?}"));
    let n = match s.trim().strip_prefix("2^") {
        Some(e) => {
            let e: u32 = e.parse().map_err(|_| bad())?;
            1usize.checked_shl(e).filter(|_| e < usize::BITS).ok_or_else(bad)?
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    Ok(n)
}

/// Sizes from `2^a..2^b` (every power of two from `a` to `b`), or a comma
/// list of sizes each written as `n` or `2^k`.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>, CliError> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let exp = |s: &str| -> Result<u32, CliError> {
            s.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse().ok())
                .filter(|&e| e < usize::BITS)
                .ok_or_else(|| CliError::Usage(format!("range bounds must be powers 2^k, got {s:?}")))
        };
        let (a, b) = (exp(lo)?, exp(hi)?);
        if a > b {
            return Err(CliError::Usage(format!("empty size range {spec:?}")));
        }
        return Ok((a..=b).map(|e| 1 << e).collect());
    }
    spec.split(',').map(parse_size).collect()
}

pub fn parse_epsilons(spec: &str) -> Result<Vec<Epsilon>, CliError> {
    spec.split(',')
        .map(|s| s.parse().map_err(|e| CliError::Usage(format!("{e}"))))
        .collect()
}

pub fn parse_impls(spec: &str) -> Result<Vec<HeapKind>, CliError> {
    spec.split(',')
        .map(|s| s.trim().parse().map_err(CliError::Usage))
        .collect()
}

/// One cell: `n` seeded random keys inserted then drained. Comparisons,
/// corruptions and inversions come from the first run; the time is the
/// median over `runs` runs.
pub fn bench_cell(kind: HeapKind, n: usize, epsilon: Epsilon, seed: u64, runs: usize) -> BenchRecord {
    let keys = random_keys(n, seed);
    let mut times = Vec::with_capacity(runs.max(1));
    let mut first = None;
    for _ in 0..runs.max(1) {
        let t = Instant::now();
        let out = insert_drain(kind, epsilon, &keys);
        times.push(t.elapsed().as_nanos());
        first.get_or_insert(out);
    }
    times.sort_unstable();
    let out = first.unwrap();
    BenchRecord {
        kind,
        n,
        epsilon: kind.is_soft().then_some(epsilon),
        comparisons: out.comparisons,
        time_ns: times[times.len() / 2],
        corrupted: out.corrupted,
        inversions: count_inversions(&out.order),
    }
}

/// Every `(impl, N, epsilon)` cell in order. The sequence heap gets one row
/// per size.
pub fn bench(kinds: &[HeapKind], sizes: &[usize], epsilons: &[Epsilon], seed: u64, runs: usize) -> Vec<BenchRecord> {
    let mut out = Vec::new();
    for &kind in kinds {
        for &n in sizes {
            if kind.is_soft() {
                out.extend(epsilons.iter().map(|&e| bench_cell(kind, n, e, seed, runs)));
            } else if let Some(&e) = epsilons.first() {
                out.push(bench_cell(kind, n, e, seed, runs));
            }
        }
    }
    out
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}
