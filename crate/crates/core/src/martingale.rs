//! Dyadic conditional expectations, martingale differences, the square
//! function and the spectral relocation operator `G`.
//!
//! `E_k f` averages `f` over the dyadic cells of length `2^{-k}` and equals
//! the Walsh partial sum over `[0, 2^k)`. The difference
//! `Δ_k f = E_k f - E_{k-1} f` (with `Δ_0 f = E_0 f`) is the Walsh
//! projection onto `δ_k`.

use std::collections::BTreeMap;

use crate::dyadic::{delta_block, xor_add};
use crate::error::{Result, WalshError};
use crate::walsh::{multiply_pointwise, walsh_function, DyadicFunction, VecFunction};

fn check_level(f: &DyadicFunction, level: u32) -> Result<()> {
    if level > f.resolution() {
        return Err(WalshError::LevelOutOfRange {
            level,
            resolution: f.resolution(),
        });
    }
    Ok(())
}

/// Cell means at every level: `pyramid[k]` has `2^k` entries, the averages
/// of `f` over the cells of length `2^{-k}`.
fn mean_pyramid(f: &DyadicFunction) -> Vec<Vec<f64>> {
    let resolution = f.resolution() as usize;
    let mut pyramid = vec![Vec::new(); resolution + 1];
    pyramid[resolution] = f.values().to_vec();
    for k in (0..resolution).rev() {
        pyramid[k] = pyramid[k + 1]
            .chunks_exact(2)
            .map(|pair| 0.5 * (pair[0] + pair[1]))
            .collect();
    }
    pyramid
}

/// Expands cell means of level `k` back to the full grid.
fn expand(means: &[f64], resolution: u32) -> DyadicFunction {
    let width = (1usize << resolution) / means.len();
    let values = means
        .iter()
        .flat_map(|&m| std::iter::repeat_n(m, width))
        .collect();
    DyadicFunction::from_raw(resolution, values)
}

/// `E_k f`: the average of `f` over each dyadic cell of length `2^{-k}`.
pub fn conditional_expectation(f: &DyadicFunction, level: u32) -> Result<DyadicFunction> {
    check_level(f, level)?;
    let mut means = f.values().to_vec();
    for _ in level..f.resolution() {
        means = means
            .chunks_exact(2)
            .map(|pair| 0.5 * (pair[0] + pair[1]))
            .collect();
    }
    Ok(expand(&means, f.resolution()))
}

/// `Δ_k f`, with `Δ_0 f = E_0 f`.
pub fn martingale_difference(f: &DyadicFunction, level: u32) -> Result<DyadicFunction> {
    check_level(f, level)?;
    let fine = conditional_expectation(f, level)?;
    if level == 0 {
        return Ok(fine);
    }
    fine.try_sub(&conditional_expectation(f, level - 1)?)
}

/// Adds `Σ_k |Δ_k f(x)|²` into `acc`, for `k = 0..=K`.
fn accumulate_square_differences(f: &DyadicFunction, acc: &mut [f64]) {
    let resolution = f.resolution();
    let pyramid = mean_pyramid(f);
    let mean = pyramid[0][0];
    for (cell, a) in acc.iter_mut().enumerate() {
        let mut sum = mean * mean;
        for k in 1..=resolution {
            let d = pyramid[k as usize][cell >> (resolution - k)]
                - pyramid[k as usize - 1][cell >> (resolution - k + 1)];
            sum += d * d;
        }
        *a += sum;
    }
}

/// `Sf = (Σ_{k=0}^{K} |Δ_k f|²)^{1/2}`. Differences above level `K` vanish.
pub fn square_function(f: &DyadicFunction) -> DyadicFunction {
    let mut acc = vec![0.0; f.len()];
    accumulate_square_differences(f, &mut acc);
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    DyadicFunction::from_raw(f.resolution(), acc)
}

/// `l²`-valued square function `(Σ_k Σ_m |Δ_k v_m|²)^{1/2}`.
pub fn square_function_vec(v: &VecFunction) -> DyadicFunction {
    let resolution = v.resolution();
    let mut acc = vec![0.0; 1 << resolution];
    for component in v.components() {
        accumulate_square_differences(component, &mut acc);
    }
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    DyadicFunction::from_raw(resolution, acc)
}

/// `|{x : |f(x)| > λ}|`, exact on the grid.
pub fn distribution_tail(f: &DyadicFunction, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(WalshError::NonPositiveThreshold(lambda));
    }
    let count = f.values().iter().filter(|v| v.abs() > lambda).count();
    Ok(count as f64 / f.len() as f64)
}

/// Multi-index `(j, k)`: `j` labels the entry, `k` is the martingale level.
pub type MultiIndex = (usize, usize);

/// Functions `h_{j,k}` indexed by a finite set of multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedFamily {
    resolution: u32,
    entries: BTreeMap<MultiIndex, DyadicFunction>,
}

impl IndexedFamily {
    pub fn new(entries: BTreeMap<MultiIndex, DyadicFunction>) -> Result<Self> {
        let resolution = entries
            .values()
            .next()
            .ok_or(WalshError::EmptyFamily)?
            .resolution();
        for f in entries.values() {
            if f.resolution() != resolution {
                return Err(WalshError::ResolutionMismatch {
                    left: resolution,
                    right: f.resolution(),
                });
            }
        }
        Ok(Self { resolution, entries })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn entries(&self) -> &BTreeMap<MultiIndex, DyadicFunction> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The family as an `l²`-valued function, in index order.
    pub fn to_vec_function(&self) -> VecFunction {
        VecFunction::new(self.entries.values().cloned().collect())
            .expect("family is non-empty with uniform resolution")
    }
}

/// Walsh shifts `a_{j,k}` such that the sets `a_{j,k} ∔ δ_k` are pairwise
/// disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelocationAssignment {
    shifts: BTreeMap<MultiIndex, u64>,
}

impl RelocationAssignment {
    pub fn new(shifts: BTreeMap<MultiIndex, u64>) -> Self {
        Self { shifts }
    }

    pub fn shifts(&self) -> &BTreeMap<MultiIndex, u64> {
        &self.shifts
    }

    /// Checks that every `a_{j,k} ∔ δ_k` lies in `[0, 2^K)` and that the
    /// sets are pairwise disjoint.
    pub fn validate(&self, resolution: u32) -> Result<()> {
        let len = 1u64 << resolution;
        let mut owner: Vec<Option<MultiIndex>> = vec![None; len as usize];
        for (&index, &shift) in &self.shifts {
            let level = index.1;
            if shift >= len || level > resolution as usize {
                return Err(WalshError::SpectralOverflow { index, resolution });
            }
            for n in delta_block(level as u32).interval().range() {
                let frequency = xor_add(n, shift);
                let slot = &mut owner[frequency as usize];
                if let Some(first) = *slot {
                    return Err(WalshError::OverlappingBlocks {
                        first,
                        second: index,
                        frequency,
                    });
                }
                *slot = Some(index);
            }
        }
        Ok(())
    }
}

/// `Gh = Σ_{(j,k)} w_{a_{j,k}} Δ_k h_{j,k}`.
///
/// The assignment is validated before anything is summed; the relocated
/// spectra land in the disjoint sets `a_{j,k} ∔ δ_k`, so
/// `‖Gh‖₂² = Σ ‖Δ_k h_{j,k}‖₂²`.
pub fn operator_g(h: &IndexedFamily, a: &RelocationAssignment) -> Result<DyadicFunction> {
    if let Some(index) = h
        .entries
        .keys()
        .find(|k| !a.shifts.contains_key(k))
        .or_else(|| a.shifts.keys().find(|k| !h.entries.contains_key(k)))
    {
        return Err(WalshError::IndexSetMismatch(*index));
    }
    a.validate(h.resolution)?;
    let mut out = DyadicFunction::zeros(h.resolution)?;
    for (index, f) in &h.entries {
        let difference = martingale_difference(f, index.1 as u32)?;
        let shifted = multiply_pointwise(&walsh_function(a.shifts[index], h.resolution)?, &difference)?;
        out.add_assign(&shifted)?;
    }
    Ok(out)
}
