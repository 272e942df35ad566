//! The error parameter and the rank threshold derived from it.

use std::fmt;
use std::str::FromStr;

use crate::error::HeapError;

/// Exact rational error parameter `num/den`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Epsilon {
    /// Accepts only `0 < num/den < 1`.
    pub fn new(num: u64, den: u64) -> Result<Self, HeapError> {
        if num == 0 || den == 0 || num >= den {
            return Err(HeapError::InvalidEpsilon(format!(
                "{num}/{den} is outside the open interval (0, 1)"
            )));
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: u64, den: u64) -> Self {
        let g = gcd(num, den);
        Epsilon {
            num: num / g,
            den: den / g,
        }
    }

    /// `1/2^k`.
    pub fn pow2(k: u32) -> Result<Self, HeapError> {
        if k == 0 || k > 63 {
            return Err(HeapError::InvalidEpsilon(format!(
                "1/2^{k} is outside the supported range"
            )));
        }
        Epsilon::new(1, 1 << k)
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// `⌈lg(1/ε)⌉`: the smallest `r` with `num · 2^r ≥ den`.
    pub fn ceil_lg_inverse(&self) -> u32 {
        let (num, den) = (u128::from(self.num), u128::from(self.den));
        let mut r = 0;
        while num << r < den {
            r += 1;
        }
        r
    }

    /// `⌊ε·n⌋`.
    pub fn budget(&self, n: u64) -> u64 {
        (u128::from(n) * u128::from(self.num) / u128::from(self.den)) as u64
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Epsilon {
    type Err = HeapError;

    /// Parses `p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HeapError::InvalidEpsilon(format!("expected p/q, got {s:?}"));
        let (p, q) = s.trim().split_once('/').ok_or_else(bad)?;
        let p = p.trim().parse().map_err(|_| bad())?;
        let q = q.trim().parse().map_err(|_| bad())?;
        Epsilon::new(p, q)
    }
}

/// Which soft heap the threshold is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    SoftSequence,
    Ternary,
}

pub fn rank_threshold(epsilon: Epsilon, variant: Variant) -> u32 {
    let r = epsilon.ceil_lg_inverse();
    match variant {
        Variant::SoftSequence => r,
        Variant::Ternary => r.max(2),
    }
}

/// Error parameter together with its rank threshold `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorParam {
    epsilon: Epsilon,
    rank_threshold: u32,
}

impl ErrorParam {
    pub fn new(epsilon: Epsilon, variant: Variant) -> Self {
        ErrorParam {
            epsilon,
            rank_threshold: rank_threshold(epsilon, variant),
        }
    }

    /// Laboratory constructor fixing `r0` directly; the corruption budget
    /// becomes `⌊N / 2^r0⌋`. Allows `r0 = 0`, which no `ε < 1` produces.
    pub fn from_rank_threshold(r0: u32) -> Self {
        assert!(r0 < 64, "rank threshold {r0} too large");
        ErrorParam {
            epsilon: Epsilon::reduced(1, 1 << r0),
            rank_threshold: r0,
        }
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn rank_threshold(&self) -> u32 {
        self.rank_threshold
    }

    /// Maximum number of corrupted items allowed after `n` insertions.
    pub fn budget(&self, n: u64) -> u64 {
        self.epsilon.budget(n)
    }
}
