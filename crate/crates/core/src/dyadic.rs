//! Arithmetic on the dyadic group `(Z+, ∔)`.
//!
//! `a ∔ b` adds the binary digits of `a` and `b` modulo 2, which is bitwise
//! XOR on machine integers. Every element is its own inverse, so translating
//! a set by `n` is an involution and preserves cardinality.
//!
//! Intervals are half-open `[a, b)` throughout the public API. All integers
//! are capped at [`INTEGER_CAP`] so that interval end points and partial sums
//! of powers of two never overflow.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalshError};

/// Largest integer accepted by the interval types (exclusive).
pub const INTEGER_CAP: u64 = 1 << 62;

/// Group operation of `(Z+, ∔)`: digitwise addition modulo 2.
#[inline]
pub fn xor_add(a: u64, b: u64) -> u64 {
    a ^ b
}

/// `θ_k(n)`: the `k`-th binary digit of `n`.
#[inline]
pub fn digit(n: u64, k: u32) -> bool {
    k < 64 && (n >> k) & 1 == 1
}

/// Exponents of the set binary digits of an integer, strictly descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DyadicExponents(Vec<u32>);

impl DyadicExponents {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reconstructs `Σ 2^{k_i}`.
    pub fn value(&self) -> u64 {
        self.0.iter().map(|&k| 1u64 << k).sum()
    }

    /// Partial sum `Σ_{l < i} 2^{k_l}` of the `i` largest terms.
    pub fn prefix_sum(&self, i: usize) -> u64 {
        self.0[..i].iter().map(|&k| 1u64 << k).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

impl From<DyadicExponents> for Vec<u32> {
    fn from(e: DyadicExponents) -> Self {
        e.0
    }
}

/// Dyadic decomposition `n = 2^{k_1} + … + 2^{k_s}` with `k_1 > … > k_s`.
pub fn dyadic_exponents(n: u64) -> DyadicExponents {
    DyadicExponents((0..64).rev().filter(|&k| digit(n, k)).collect())
}

/// First `count` elements `κ_1 < κ_2 < …` of `Z+ \ {exponents of n}`.
pub fn complement_exponents(n: u64, count: usize) -> Vec<u32> {
    (0u32..)
        .filter(|&k| !digit(n, k))
        .take(count)
        .collect()
}

/// Half-open integer interval `[a, b)` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct IntervalZ {
    start: u64,
    end: u64,
}

impl IntervalZ {
    pub fn new(start: u64, end: u64) -> Result<Self> {
        if end > INTEGER_CAP {
            return Err(WalshError::IntegerCap(end));
        }
        if start >= end {
            return Err(WalshError::EmptyInterval { start, end });
        }
        Ok(Self { start, end })
    }

    /// Interval `[lo, hi]` given in inclusive notation.
    pub fn inclusive(lo: u64, hi: u64) -> Result<Self> {
        if hi >= INTEGER_CAP {
            return Err(WalshError::IntegerCap(hi));
        }
        Self::new(lo, hi + 1)
    }

    pub fn singleton(n: u64) -> Result<Self> {
        Self::inclusive(n, n)
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Exclusive upper end.
    pub fn end(&self) -> u64 {
        self.end
    }

    /// Largest element, `b - 1`.
    pub fn last(&self) -> u64 {
        self.end - 1
    }

    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        self.start <= n && n < self.end
    }

    pub fn range(&self) -> Range<u64> {
        self.start..self.end
    }

    pub fn intersection(&self, other: &IntervalZ) -> Option<IntervalZ> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start < end).then_some(IntervalZ { start, end })
    }

    pub fn is_disjoint(&self, other: &IntervalZ) -> bool {
        self.intersection(other).is_none()
    }

    /// Elements as a sorted list.
    pub fn to_vec(&self) -> Vec<u64> {
        self.range().collect()
    }
}

impl TryFrom<(u64, u64)> for IntervalZ {
    type Error = WalshError;

    fn try_from((start, end): (u64, u64)) -> Result<Self> {
        Self::new(start, end)
    }
}

impl From<IntervalZ> for (u64, u64) {
    fn from(i: IntervalZ) -> Self {
        (i.start, i.end)
    }
}

impl fmt::Display for IntervalZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// The block `δ_k`: `δ_0 = {0}` and `δ_k = [2^{k-1}, 2^k - 1]` for `k > 0`.
///
/// The blocks partition `Z+` and carry the Walsh frequencies of the
/// martingale difference `Δ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeltaBlock {
    level: u32,
}

impl DeltaBlock {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn start(&self) -> u64 {
        if self.level == 0 {
            0
        } else {
            1 << (self.level - 1)
        }
    }

    /// Exclusive upper end.
    pub fn end(&self) -> u64 {
        1 << self.level
    }

    pub fn len(&self) -> u64 {
        self.end() - self.start()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        self.start() <= n && n < self.end()
    }

    pub fn interval(&self) -> IntervalZ {
        IntervalZ {
            start: self.start(),
            end: self.end(),
        }
    }

    /// Level of the block that contains `n`.
    pub fn containing(n: u64) -> DeltaBlock {
        DeltaBlock {
            level: 64 - n.leading_zeros(),
        }
    }
}

impl fmt::Display for DeltaBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "δ_{}", self.level)
    }
}

/// `δ_k`. Levels are limited to 62 so the block stays below [`INTEGER_CAP`].
pub fn delta_block(k: u32) -> DeltaBlock {
    assert!(k <= 62, "block level {k} exceeds the integer cap");
    DeltaBlock { level: k }
}

/// `{x ∔ n : x ∈ s}` as a sorted, deduplicated list.
pub fn xor_translate_set(s: &[u64], n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = s.iter().map(|&x| xor_add(x, n)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// One row of the interval image law: `source ∔ n = image`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftRow {
    pub source: IntervalZ,
    pub image: DeltaBlock,
}

/// Splits `[0, ∞)` into intervals that `∔ n` maps onto whole `δ` blocks.
///
/// Emits the `s` rows left of `n` (one per binary digit of `n`, largest
/// first), the row `{n} → δ_0`, and then `tail_count` rows to the right of
/// `n`, one for each of the first `tail_count` zero digits `κ_j` of `n`.
pub fn shift_decomposition(n: u64, tail_count: usize) -> Result<Vec<ShiftRow>> {
    if n == 0 {
        return Err(WalshError::ZeroShift);
    }
    if n >= INTEGER_CAP {
        return Err(WalshError::IntegerCap(n));
    }
    let exponents = dyadic_exponents(n);
    let mut rows = Vec::with_capacity(exponents.len() + 1 + tail_count);

    let mut lo = 0u64;
    for k in exponents.iter() {
        let hi = lo + (1 << k);
        rows.push(ShiftRow {
            source: IntervalZ::new(lo, hi)?,
            image: delta_block(k + 1),
        });
        lo = hi;
    }
    rows.push(ShiftRow {
        source: IntervalZ::singleton(n)?,
        image: delta_block(0),
    });

    let mut offset = 0u64;
    for kappa in complement_exponents(n, tail_count) {
        if kappa >= 62 {
            return Err(WalshError::IntegerCap(u64::MAX));
        }
        let first = n
            .checked_add(offset + 1)
            .filter(|&x| x < INTEGER_CAP)
            .ok_or(WalshError::IntegerCap(n))?;
        offset += 1 << kappa;
        let last = n
            .checked_add(offset)
            .filter(|&x| x < INTEGER_CAP)
            .ok_or(WalshError::IntegerCap(n))?;
        rows.push(ShiftRow {
            source: IntervalZ::inclusive(first, last)?,
            image: delta_block(kappa + 1),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Digit-by-digit evaluation of the group operation.
    fn xor_add_oracle(a: u64, b: u64) -> u64 {
        let (mut a, mut b) = (a, b);
        let (mut out, mut weight) = (0u64, 1u64);
        while a > 0 || b > 0 {
            out += ((a % 2 + b % 2) % 2) * weight;
            a /= 2;
            b /= 2;
            weight *= 2;
        }
        out
    }

    fn exponents_oracle(mut n: u64) -> Vec<u32> {
        let mut out = Vec::new();
        let mut k = 0;
        while n > 0 {
            if n % 2 == 1 {
                out.push(k);
            }
            n /= 2;
            k += 1;
        }
        out.reverse();
        out
    }

    #[test]
    fn xor_add_examples() {
        assert_eq!(xor_add_oracle(5, 3), 6);
        assert_eq!(xor_add(5, 3), 6);
        assert_eq!(xor_add(7, 7), 0);
        assert_eq!(xor_add(0, 42), 42);
    }

    #[test]
    fn xor_add_matches_digit_oracle() {
        for a in 0..300 {
            for b in 0..300 {
                assert_eq!(xor_add(a, b), xor_add_oracle(a, b));
            }
        }
    }

    #[test]
    fn exponents_examples() {
        assert_eq!(dyadic_exponents(6).as_slice(), &[2, 1]);
        assert!(dyadic_exponents(0).is_empty());
        assert_eq!(dyadic_exponents(1).as_slice(), &[0]);
        for n in 0..5000 {
            let e = dyadic_exponents(n);
            assert_eq!(e.as_slice(), exponents_oracle(n).as_slice());
            assert_eq!(e.value(), n);
        }
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement_exponents(6, 3), vec![0, 3, 4]);
        assert_eq!(complement_exponents(0, 3), vec![0, 1, 2]);
        assert_eq!(complement_exponents(1, 2), vec![1, 2]);
    }

    #[test]
    fn complement_matches_enumeration() {
        for n in 0..1024u64 {
            let taken = exponents_oracle(n);
            let expected: Vec<u32> = (0..40).filter(|k| !taken.contains(k)).take(8).collect();
            assert_eq!(complement_exponents(n, 8), expected);
        }
    }

    #[test]
    fn delta_blocks() {
        assert_eq!(delta_block(0).interval().to_vec(), vec![0]);
        assert_eq!(delta_block(1).interval().to_vec(), vec![1]);
        assert_eq!(delta_block(3).interval().to_vec(), vec![4, 5, 6, 7]);
        for k in 1..20 {
            assert_eq!(delta_block(k).len(), 1 << (k - 1));
            assert_eq!(delta_block(k).start(), delta_block(k - 1).end());
        }
        for n in 0..4096 {
            let block = DeltaBlock::containing(n);
            assert!(block.contains(n));
            let holders = (0..20).filter(|&k| delta_block(k).contains(n)).count();
            assert_eq!(holders, 1);
        }
    }

    #[test]
    fn translate_examples() {
        assert_eq!(xor_translate_set(&[0, 1, 2, 3], 6), vec![4, 5, 6, 7]);
        assert_eq!(xor_translate_set(&[2, 9, 11], 0), vec![2, 9, 11]);
        assert_eq!(xor_translate_set(&[6], 6), vec![0]);
    }

    fn rows_as_pairs(n: u64, tail: usize) -> Vec<((u64, u64), u32)> {
        shift_decomposition(n, tail)
            .unwrap()
            .into_iter()
            .map(|r| (r.source.into(), r.image.level()))
            .collect()
    }

    #[test]
    fn shift_decomposition_examples() {
        assert_eq!(
            rows_as_pairs(6, 1),
            vec![((0, 4), 3), ((4, 6), 2), ((6, 7), 0), ((7, 8), 1)]
        );
        assert_eq!(rows_as_pairs(1, 0), vec![((0, 1), 1), ((1, 2), 0)]);
        for k in 0..12 {
            let n = 1u64 << k;
            assert_eq!(rows_as_pairs(n, 0), vec![((0, n), k + 1), ((n, n + 1), 0)]);
        }
    }

    #[test]
    fn shift_decomposition_rejects_zero() {
        assert!(matches!(shift_decomposition(0, 3), Err(WalshError::ZeroShift)));
    }

    #[test]
    fn interval_validation() {
        assert!(IntervalZ::new(3, 3).is_err());
        assert!(IntervalZ::new(4, 3).is_err());
        assert!(IntervalZ::new(0, INTEGER_CAP + 1).is_err());
        let i = IntervalZ::new(3, 7).unwrap();
        assert_eq!(i.last(), 6);
        assert_eq!(i.to_string(), "[3, 7)");
        assert_eq!(
            i.intersection(&IntervalZ::new(5, 10).unwrap()),
            Some(IntervalZ::new(5, 7).unwrap())
        );
        assert!(i.is_disjoint(&IntervalZ::new(7, 9).unwrap()));
    }

    proptest! {
        #[test]
        fn translation_preserves_cardinality(
            s in proptest::collection::btree_set(0u64..1 << 20, 0..64),
            n in 0u64..1 << 20,
        ) {
            let s: Vec<u64> = s.into_iter().collect();
            let image = xor_translate_set(&s, n);
            prop_assert_eq!(image.len(), s.len());
            prop_assert_eq!(xor_translate_set(&image, n), s);
        }

        #[test]
        fn shift_rows_are_exact_images(n in 1u64..1 << 30, tail in 0usize..4) {
            for row in shift_decomposition(n, tail).unwrap() {
                if row.source.len() > 1 << 12 {
                    continue;
                }
                let image = xor_translate_set(&row.source.to_vec(), n);
                prop_assert_eq!(image, row.image.interval().to_vec());
            }
        }
    }
}
