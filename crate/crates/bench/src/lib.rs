//! Shared inputs for the criterion benchmarks.

use softheap_core::workload::random_keys;
use softheap_core::{Epsilon, Key};

pub const SEED: u64 = 0x5eed;

pub fn epsilons() -> Vec<Epsilon> {
    (1..=8).map(|k| Epsilon::pow2(k).unwrap()).collect()
}

pub fn keys(n: usize) -> Vec<Key> {
    random_keys(n, SEED)
}
