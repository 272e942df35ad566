//! Approximate sorting: insert everything, drain, count inversions of the
//! real keys against `⌊ε n²⌋`.

use std::fmt::Write;

use softheap_core::workload::{approx_sort, random_keys, SortOutcome};
use softheap_core::{Epsilon, HeapKind, Key};

use crate::{CliError, Exit, Output};

/// Whitespace-separated signed integers.
pub fn parse_keys(text: &str) -> Result<Vec<Key>, CliError> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("bad key {t:?}"))))
        .collect()
}

pub fn random_input(n: usize, seed: u64) -> Vec<Key> {
    random_keys(n, seed)
}

/// Output keys one per line unless `summary_only`, then a summary line.
/// Exits with a violation status if the inversion bound fails.
pub fn run(kind: HeapKind, epsilon: Epsilon, keys: &[Key], summary_only: bool) -> Output {
    let out: SortOutcome = approx_sort(kind, epsilon, keys);
    let mut s = String::new();
    if !summary_only {
        for k in &out.drain.order {
            writeln!(s, "{k}").unwrap();
        }
    }
    writeln!(
        s,
        "approx-sort impl={kind} n={} epsilon={epsilon} comparisons={} corrupted={} inversions={} bound={} within-bound={}",
        keys.len(),
        out.drain.comparisons,
        out.drain.corrupted,
        out.inversions,
        out.bound,
        if out.within_bound() { "yes" } else { "no" }
    )
    .unwrap();
    Output {
        stdout: s,
        exit: if out.within_bound() {
            Exit::Clean
        } else {
            Exit::Violation
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_parse() {
        assert_eq!(parse_keys(" 3 -1\n7\n").unwrap(), [3, -1, 7]);
        assert!(parse_keys("3 x").is_err());
    }

    #[test]
    fn epsilon_one_over_n_sorts() {
        let keys = random_input(256, 5);
        let out = run(HeapKind::Ternary, Epsilon::new(1, 256).unwrap(), &keys, true);
        assert!(out.stdout.contains("inversions=0 "), "{}", out.stdout);
        assert_eq!(out.exit, Exit::Clean);
    }
}
