//! Interval decomposition behind the one-sided Littlewood–Paley inequality.
//!
//! An interval `I = [a, b)` is split into the singleton `{a}`, the pieces
//! `J_1, …, J_{q-1}` that `∔ a` maps onto blocks `δ_{κ_j + 1}`, and the
//! pieces `J̃_{ρ+1}, …, J̃_r` that `∔ b` maps onto blocks `δ_{k̃_i + 1}`.
//! Projecting a function with spectrum in `I` onto these pieces and
//! modulating by `w_a` or `w_b` turns it into a sum of martingale
//! differences, which is what makes the operator `G` applicable.
//!
//! [`DecomposedInstance::chain`] evaluates every norm appearing along that
//! argument so the harness can look at the empirical constants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::{complement_exponents, delta_block, dyadic_exponents, DeltaBlock, IntervalZ};
use crate::error::{Result, WalshError};
use crate::martingale::{square_function_vec, IndexedFamily, RelocationAssignment};
use crate::walsh::{
    fwht_analyze, fwht_synthesize, lp_norm, multiply_pointwise, pointwise_l2, walsh_function,
    DyadicFunction, VecFunction, WalshSpectrum,
};

/// Coefficients below this magnitude count as zero when checking that a
/// spectrum lies inside its interval.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Partition of `[a, b)` into `{a}`, the left pieces `J_j` and the tail
/// pieces `J̃_i`.
///
/// Indices `q`, `rho` and `r` are 1-based counts as in the construction;
/// vectors are 0-based (`left[0]` is `J_1`, `tail[0]` is `J̃_{ρ+1}`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalPartition {
    pub interval: IntervalZ,
    pub q: usize,
    pub rho: usize,
    pub r: usize,
    /// `κ_1 < … < κ_q`, the lowest zero digits of `a`. The first `q - 1`
    /// label the left pieces; `κ_q = k̃_ρ` labels the merged tail block.
    pub kappa: Vec<u32>,
    /// `k̃_1 > … > k̃_r`, the binary digits of `b`.
    pub ktilde: Vec<u32>,
    /// `J_1, …, J_{q-1}`.
    pub left: Vec<IntervalZ>,
    /// `J̃_{ρ+1}, …, J̃_r`.
    pub tail: Vec<IntervalZ>,
}

impl IntervalPartition {
    /// The singleton piece `{a}`.
    pub fn singleton(&self) -> u64 {
        self.interval.start()
    }

    /// `ã = a + Σ_{l<q} 2^{κ_l}`: `a` with its zero digits below `k̃_ρ` filled.
    pub fn filled(&self) -> u64 {
        self.interval.start()
            + self.kappa[..self.q - 1]
                .iter()
                .map(|&k| 1u64 << k)
                .sum::<u64>()
    }

    /// `Σ_{l≤ρ} 2^{k̃_l}`, where the tail pieces start.
    pub fn tail_start(&self) -> u64 {
        self.ktilde[..self.rho].iter().map(|&k| 1u64 << k).sum()
    }

    /// `J_q ∩ I = [Σ_{l≤ρ} 2^{k̃_l}, b)`, empty when `ρ = r`.
    pub fn merged_tail(&self) -> Option<IntervalZ> {
        IntervalZ::new(self.tail_start(), self.interval.end()).ok()
    }

    /// `δ_{κ_q + 1}`, the block holding `w_a` times the tail of the function.
    pub fn merged_block(&self) -> DeltaBlock {
        delta_block(self.kappa[self.q - 1] + 1)
    }

    /// `δ_{κ_j + 1}` for the left piece `left[j]`.
    pub fn left_block(&self, j: usize) -> DeltaBlock {
        delta_block(self.kappa[j] + 1)
    }

    /// `δ_{k̃_i + 1}` for the tail piece `tail[i]`.
    pub fn tail_block(&self, i: usize) -> DeltaBlock {
        delta_block(self.ktilde[self.rho + i] + 1)
    }

    /// `J_j` of the unbounded splitting of `[a, ∞)`, for any `j ≥ 1`.
    pub fn left_interval(&self, j: usize) -> Result<IntervalZ> {
        assert!(j >= 1, "left pieces are numbered from 1");
        let a = self.interval.start();
        let kappa = complement_exponents(a, j);
        let before: u64 = kappa[..j - 1].iter().map(|&k| 1u64 << k).sum();
        IntervalZ::inclusive(a + before + 1, a + before + (1u64 << kappa[j - 1]))
    }

    /// Every piece with its image block and the Walsh shift that maps one
    /// onto the other: `{a}` and `J_j` use `a`, `J̃_i` uses `b`.
    pub fn pieces(&self) -> Vec<(IntervalZ, DeltaBlock, u64)> {
        let (a, b) = (self.interval.start(), self.interval.end());
        let mut out = vec![(IntervalZ::singleton(a).expect("a < b ≤ 2^62"), delta_block(0), a)];
        out.extend(
            self.left
                .iter()
                .enumerate()
                .map(|(j, &piece)| (piece, self.left_block(j), a)),
        );
        out.extend(
            self.tail
                .iter()
                .enumerate()
                .map(|(i, &piece)| (piece, self.tail_block(i), b)),
        );
        out
    }
}

/// Splits `[a, b)` into `{a}`, the `J_j` and the `J̃_i`.
///
/// `k̃_ρ` is the highest binary digit where `a` and `b` differ (there `b`
/// has a one and `a` a zero). `q - 1` counts the zero digits of `a` below
/// it; filling them gives `ã` with `ã + 1 = Σ_{l≤ρ} 2^{k̃_l}`.
pub fn partition_interval(interval: IntervalZ) -> IntervalPartition {
    let (a, b) = (interval.start(), interval.end());
    let ktilde: Vec<u32> = dyadic_exponents(b).into();
    let top = 63 - (a ^ b).leading_zeros();
    let rho = 1 + ktilde
        .iter()
        .position(|&k| k == top)
        .expect("b has a one at the highest digit where it differs from a");
    let q = 1 + (0..top).filter(|&k| (a >> k) & 1 == 0).count();
    let kappa = complement_exponents(a, q);
    debug_assert_eq!(kappa[q - 1], top);

    let mut left = Vec::with_capacity(q - 1);
    let mut offset = 0u64;
    for &k in &kappa[..q - 1] {
        let start = a + offset + 1;
        offset += 1 << k;
        left.push(IntervalZ::inclusive(start, a + offset).expect("pieces lie inside [a, b)"));
    }

    let mut tail = Vec::with_capacity(ktilde.len() - rho);
    let mut start: u64 = ktilde[..rho].iter().map(|&k| 1u64 << k).sum();
    for &k in &ktilde[rho..] {
        let end = start + (1 << k);
        tail.push(IntervalZ::new(start, end).expect("pieces lie inside [a, b)"));
        start = end;
    }

    IntervalPartition {
        interval,
        q,
        rho,
        r: ktilde.len(),
        kappa,
        ktilde,
        left,
        tail,
    }
}

/// Which piece of a decomposition a function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PieceLabel {
    Singleton,
    /// `j` is 0-based: `Left(0)` is `J_1`.
    Left(usize),
    /// `i` is 0-based: `Tail(0)` is `J̃_{ρ+1}`.
    Tail(usize),
    MergedTail,
}

/// Spectral leakage of one modulated piece outside its expected block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub piece: PieceLabel,
    pub block: DeltaBlock,
    /// `L²` norm of the Walsh coefficients outside `block`.
    pub leakage: f64,
}

/// A function split along an [`IntervalPartition`], together with its
/// modulated pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedFunction {
    pub partition: IntervalPartition,
    /// `f_0 = (f, w_a) w_a`.
    pub singleton_piece: DyadicFunction,
    /// `f_j`, the projection onto `J_j`.
    pub left_pieces: Vec<DyadicFunction>,
    /// `f̃_i`, the projection onto `J̃_i`.
    pub tail_pieces: Vec<DyadicFunction>,
    /// `g_0 = w_a f_0`, a constant.
    pub modulated_singleton: DyadicFunction,
    /// `g_j = w_a f_j`.
    pub modulated_left: Vec<DyadicFunction>,
    /// `g̃_i = w_b f̃_i`.
    pub modulated_tail: Vec<DyadicFunction>,
    /// `g_q = w_a` times the projection onto `J_q ∩ I`.
    pub merged_tail: DyadicFunction,
}

impl DecomposedFunction {
    pub fn resolution(&self) -> u32 {
        self.singleton_piece.resolution()
    }

    /// `f_0 + Σ f_j + Σ f̃_i`.
    pub fn reconstruct(&self) -> DyadicFunction {
        let terms = std::iter::once(&self.singleton_piece)
            .chain(&self.left_pieces)
            .chain(&self.tail_pieces);
        DyadicFunction::sum(self.resolution(), terms).expect("uniform resolution")
    }

    /// `w_a w_b Σ_i g̃_i`, which must equal [`Self::merged_tail`].
    pub fn merged_tail_from_pieces(&self) -> Result<DyadicFunction> {
        let resolution = self.resolution();
        // Tail pieces exist only when b < 2^K, so w_b is defined whenever it is needed.
        if self.modulated_tail.is_empty() {
            return DyadicFunction::zeros(resolution);
        }
        let sum = DyadicFunction::sum(resolution, &self.modulated_tail)?;
        let wa = walsh_function(self.partition.interval.start(), resolution)?;
        let wb = walsh_function(self.partition.interval.end(), resolution)?;
        multiply_pointwise(&multiply_pointwise(&wa, &wb)?, &sum)
    }

    /// `g_0, g_1, …, g_{q-1}, g_q`: the modulated left-side pieces.
    pub fn left_chain(&self) -> impl Iterator<Item = &DyadicFunction> {
        std::iter::once(&self.modulated_singleton)
            .chain(&self.modulated_left)
            .chain(std::iter::once(&self.merged_tail))
    }

    /// Out-of-block Walsh mass of every modulated piece.
    pub fn localization(&self) -> Vec<Localization> {
        let p = &self.partition;
        let mut out = vec![Localization {
            piece: PieceLabel::Singleton,
            block: delta_block(0),
            leakage: leakage_outside(&self.modulated_singleton, delta_block(0)),
        }];
        for (j, g) in self.modulated_left.iter().enumerate() {
            let block = p.left_block(j);
            out.push(Localization {
                piece: PieceLabel::Left(j),
                block,
                leakage: leakage_outside(g, block),
            });
        }
        for (i, g) in self.modulated_tail.iter().enumerate() {
            let block = p.tail_block(i);
            out.push(Localization {
                piece: PieceLabel::Tail(i),
                block,
                leakage: leakage_outside(g, block),
            });
        }
        let block = p.merged_block();
        out.push(Localization {
            piece: PieceLabel::MergedTail,
            block,
            leakage: leakage_outside(&self.merged_tail, block),
        });
        out
    }
}

fn leakage_outside(f: &DyadicFunction, block: DeltaBlock) -> f64 {
    fwht_analyze(f)
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(n, _)| !block.contains(*n as u64))
        .map(|(_, c)| c * c)
        .sum::<f64>()
        .sqrt()
}

fn check_fits(interval: &IntervalZ, resolution: u32) -> Result<()> {
    if interval.end() > 1u64 << resolution {
        return Err(WalshError::IntervalBeyondResolution {
            interval: *interval,
            resolution,
        });
    }
    Ok(())
}

fn check_support(spectrum: &WalshSpectrum, interval: &IntervalZ) -> Result<()> {
    let leak = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .find(|&(n, c)| !interval.contains(n as u64) && c.abs() > SUPPORT_TOLERANCE);
    if let Some((index, &coefficient)) = leak {
        return Err(WalshError::SpectralLeakage {
            interval: *interval,
            index: index as u64,
            coefficient,
        });
    }
    Ok(())
}

/// Splits `f` along the partition of `interval` and modulates the pieces.
///
/// The spectrum of `f` must lie in `interval` up to [`SUPPORT_TOLERANCE`].
pub fn decompose_function(f: &DyadicFunction, interval: IntervalZ) -> Result<DecomposedFunction> {
    let resolution = f.resolution();
    check_fits(&interval, resolution)?;
    let spectrum = fwht_analyze(f);
    check_support(&spectrum, &interval)?;

    let partition = partition_interval(interval);
    let a = interval.start();
    let wa = walsh_function(a, resolution)?;
    let project = |piece: &IntervalZ| -> Result<DyadicFunction> {
        Ok(fwht_synthesize(&spectrum.restricted_to(piece)?))
    };

    let singleton_piece = project(&IntervalZ::singleton(a)?)?;
    let left_pieces = partition.left.iter().map(project).collect::<Result<Vec<_>>>()?;
    let tail_pieces = partition.tail.iter().map(project).collect::<Result<Vec<_>>>()?;

    let modulated_singleton = multiply_pointwise(&wa, &singleton_piece)?;
    let modulated_left = left_pieces
        .iter()
        .map(|f| multiply_pointwise(&wa, f))
        .collect::<Result<Vec<_>>>()?;
    let modulated_tail = if tail_pieces.is_empty() {
        Vec::new()
    } else {
        let wb = walsh_function(interval.end(), resolution)?;
        tail_pieces
            .iter()
            .map(|f| multiply_pointwise(&wb, f))
            .collect::<Result<Vec<_>>>()?
    };
    let merged_tail = match partition.merged_tail() {
        Some(piece) => multiply_pointwise(&wa, &project(&piece)?)?,
        None => DyadicFunction::zeros(resolution)?,
    };

    Ok(DecomposedFunction {
        partition,
        singleton_piece,
        left_pieces,
        tail_pieces,
        modulated_singleton,
        modulated_left,
        modulated_tail,
        merged_tail,
    })
}

/// Disjoint intervals with one function per interval.
pub type Instance = Vec<(IntervalZ, DyadicFunction)>;

/// Every norm along the chain of estimates, for one instance and one `p`.
///
/// * `A = ‖Σ_m f_m‖_p`
/// * `B = ‖(Σ_m Σ_{j<q_m} |g_{m,j}|² + Σ_m Σ_i |g̃_{m,i}|²)^{1/2}‖_p`
/// * `C1 = ‖(Σ_m Σ_{j<q_m} |g_{m,j}|²)^{1/2}‖_p`,
///   `C2 = ‖(Σ_m |Σ_i g̃_{m,i}|²)^{1/2}‖_p`
/// * `D1 = ‖(Σ_m Σ_{j≤q_m} |g_{m,j}|²)^{1/2}‖_p`,
///   `D2 = ‖(Σ_m Σ_k |Δ_k g_m|²)^{1/2}‖_p` with `g_m = w_{a_m} f_m`
/// * `E = ‖{f_m}‖_{L^p(l²)}`; `E_modulated = ‖{g_m}‖_{L^p(l²)}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(skip)]
    pub e_modulated: f64,
}

impl ChainReport {
    /// `A / E`, taken as 1 when both sides vanish.
    pub fn ratio(&self) -> f64 {
        if self.e > 0.0 {
            self.a / self.e
        } else if self.a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// An instance split into pieces, with the pointwise profiles of every
/// chain quantity precomputed so that norms for several `p` are cheap.
#[derive(Debug, Clone)]
pub struct DecomposedInstance {
    resolution: u32,
    intervals: Vec<IntervalZ>,
    pieces: Vec<DecomposedFunction>,
    profiles: [DyadicFunction; 8],
}

impl DecomposedInstance {
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn intervals(&self) -> &[IntervalZ] {
        &self.intervals
    }

    pub fn pieces(&self) -> &[DecomposedFunction] {
        &self.pieces
    }

    /// Norms of the chain at exponent `p ∈ (1, 2]`.
    pub fn chain(&self, p: f64) -> Result<ChainReport> {
        check_chain_exponent(p)?;
        self.chain_unchecked(p)
    }

    /// Same as [`Self::chain`] but accepts any `p ≥ 1`.
    pub fn chain_unchecked(&self, p: f64) -> Result<ChainReport> {
        let norms = self
            .profiles
            .iter()
            .map(|f| lp_norm(f, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainReport {
            a: norms[0],
            b: norms[1],
            c1: norms[2],
            c2: norms[3],
            d1: norms[4],
            d2: norms[5],
            e: norms[6],
            e_modulated: norms[7],
        })
    }

    /// Family and shifts realising `Σ_m f_m` as `G` applied to the modulated
    /// pieces: entry `(j, 0)` for `g_{m,0}` and `(j, κ+1)` / `(j, k̃+1)` for
    /// the left and tail pieces, with shifts `a_m` and `b_m` respectively.
    /// `j` runs over all pieces of all intervals.
    pub fn relocation(&self) -> Result<(IndexedFamily, RelocationAssignment)> {
        let mut entries = BTreeMap::new();
        let mut shifts = BTreeMap::new();
        let mut j = 0;
        for d in &self.pieces {
            let modulated = std::iter::once(&d.modulated_singleton)
                .chain(&d.modulated_left)
                .chain(&d.modulated_tail);
            for ((_, block, shift), g) in d.partition.pieces().into_iter().zip(modulated) {
                let index = (j, block.level() as usize);
                entries.insert(index, g.clone());
                shifts.insert(index, shift);
                j += 1;
            }
        }
        Ok((IndexedFamily::new(entries)?, RelocationAssignment::new(shifts)))
    }
}

fn check_chain_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(WalshError::ExponentOutOfRange(p));
    }
    Ok(())
}

/// Checks the instance preconditions and returns the common resolution.
pub fn validate_instance(instance: &[(IntervalZ, DyadicFunction)]) -> Result<u32> {
    let (_, first) = instance.first().ok_or(WalshError::EmptyFamily)?;
    let resolution = first.resolution();
    let mut sorted: Vec<&IntervalZ> = Vec::with_capacity(instance.len());
    for (interval, f) in instance {
        if f.resolution() != resolution {
            return Err(WalshError::ResolutionMismatch {
                left: resolution,
                right: f.resolution(),
            });
        }
        check_fits(interval, resolution)?;
        sorted.push(interval);
    }
    sorted.sort();
    for pair in sorted.windows(2) {
        if !pair[0].is_disjoint(pair[1]) {
            return Err(WalshError::OverlappingIntervals {
                first: *pair[0],
                second: *pair[1],
            });
        }
    }
    Ok(resolution)
}

/// Validates and decomposes every `(I_m, f_m)` of an instance.
pub fn decompose_instance(instance: &[(IntervalZ, DyadicFunction)]) -> Result<DecomposedInstance> {
    let resolution = validate_instance(instance)?;
    let pieces = instance
        .iter()
        .map(|(interval, f)| decompose_function(f, *interval))
        .collect::<Result<Vec<_>>>()?;

    let functions: Vec<&DyadicFunction> = instance.iter().map(|(_, f)| f).collect();
    let total = DyadicFunction::sum(resolution, functions.iter().copied())?;

    let left_open: Vec<&DyadicFunction> = pieces
        .iter()
        .flat_map(|d| std::iter::once(&d.modulated_singleton).chain(&d.modulated_left))
        .collect();
    let tails: Vec<&DyadicFunction> = pieces.iter().flat_map(|d| &d.modulated_tail).collect();
    let tail_sums = pieces
        .iter()
        .map(|d| DyadicFunction::sum(resolution, &d.modulated_tail))
        .collect::<Result<Vec<_>>>()?;
    let left_closed: Vec<&DyadicFunction> = pieces.iter().flat_map(|d| d.left_chain()).collect();

    let modulated = instance
        .iter()
        .map(|(interval, f)| multiply_pointwise(&walsh_function(interval.start(), resolution)?, f))
        .collect::<Result<Vec<_>>>()?;

    let profiles = [
        total.map(f64::abs),
        pointwise_l2(resolution, left_open.iter().copied().chain(tails.iter().copied())),
        pointwise_l2(resolution, left_open.iter().copied()),
        pointwise_l2(resolution, tail_sums.iter()),
        pointwise_l2(resolution, left_closed.iter().copied()),
        square_function_vec(&VecFunction::new(modulated.clone())?),
        pointwise_l2(resolution, functions.iter().copied()),
        pointwise_l2(resolution, modulated.iter()),
    ];

    Ok(DecomposedInstance {
        resolution,
        intervals: instance.iter().map(|(i, _)| *i).collect(),
        pieces,
        profiles,
    })
}

/// Every quantity of the chain of estimates for one instance at `p ∈ (1, 2]`.
pub fn theorem_chain(instance: &[(IntervalZ, DyadicFunction)], p: f64) -> Result<ChainReport> {
    check_chain_exponent(p)?;
    decompose_instance(instance)?.chain(p)
}

/// Family and shifts such that `operator_g` reproduces `Σ_m f_m`.
pub fn relocation_for_instance(
    instance: &[(IntervalZ, DyadicFunction)],
) -> Result<(IndexedFamily, RelocationAssignment)> {
    decompose_instance(instance)?.relocation()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::xor_translate_set;
    use crate::martingale::operator_g;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(a: u64, b: u64) -> IntervalZ {
        IntervalZ::new(a, b).unwrap()
    }

    fn w(n: u64, k: u32) -> DyadicFunction {
        walsh_function(n, k).unwrap()
    }

    fn random_in(rng: &mut ChaCha8Rng, interval: IntervalZ, resolution: u32) -> DyadicFunction {
        let mut s = WalshSpectrum::zeros(resolution).unwrap();
        for n in interval.range() {
            s.coeffs_mut()[n as usize] = rng.random_range(-1.0..1.0);
        }
        fwht_synthesize(&s)
    }

    #[test]
    fn partition_examples() {
        let p = partition_interval(iv(3, 7));
        assert_eq!((p.q, p.rho, p.r), (1, 1, 3));
        assert_eq!(p.singleton(), 3);
        assert!(p.left.is_empty());
        assert_eq!(p.tail, vec![iv(4, 6), iv(6, 7)]);
        assert_eq!(p.filled() + 1, 4);

        let p = partition_interval(iv(0, 4));
        assert_eq!((p.q, p.rho, p.r), (3, 1, 1));
        assert_eq!(p.left, vec![iv(1, 2), iv(2, 4)]);
        assert!(p.tail.is_empty());
        assert!(p.merged_tail().is_none());

        for n in [0u64, 1, 5, 1000] {
            let p = partition_interval(iv(n, n + 1));
            assert_eq!(p.singleton(), n);
            assert!(p.left.is_empty() && p.tail.is_empty());
        }
    }

    #[test]
    fn partition_blocks_are_exact_images() {
        for b in 1..=96u64 {
            for a in 0..b {
                let p = partition_interval(iv(a, b));
                let mut cover = Vec::new();
                for (piece, block, shift) in p.pieces() {
                    assert_eq!(xor_translate_set(&piece.to_vec(), shift), block.interval().to_vec());
                    cover.extend(piece.range());
                }
                cover.sort_unstable();
                assert_eq!(cover, (a..b).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let f = w(5, 4);
        let d = decompose_function(&f, iv(5, 6)).unwrap();
        assert!(d.singleton_piece.max_abs_diff(&f).unwrap() < 1e-15);
        assert!(d.left_pieces.is_empty() && d.tail_pieces.is_empty());
        assert!(d.modulated_singleton.max_abs_diff(&w(0, 4)).unwrap() < 1e-15);

        let f = w(4, 4).try_add(&w(6, 4)).unwrap();
        let d = decompose_function(&f, iv(3, 7)).unwrap();
        assert_eq!(d.tail_pieces.len(), 2);
        assert!(d.tail_pieces[0].max_abs_diff(&w(4, 4)).unwrap() < 1e-15);
        assert!(d.tail_pieces[1].max_abs_diff(&w(6, 4)).unwrap() < 1e-15);
        assert!(d.singleton_piece.max_abs() < 1e-15);
        assert!(d.reconstruct().max_abs_diff(&f).unwrap() < 1e-15);

        let zero = DyadicFunction::zeros(5).unwrap();
        let d = decompose_function(&zero, iv(2, 29)).unwrap();
        assert!(d.left_chain().chain(&d.tail_pieces).all(|g| g.max_abs() == 0.0));
    }

    #[test]
    fn decompose_rejects_bad_inputs() {
        let f = w(9, 4);
        assert!(matches!(
            decompose_function(&f, iv(3, 7)),
            Err(WalshError::SpectralLeakage { index: 9, .. })
        ));
        assert!(matches!(
            decompose_function(&f, iv(3, 17)),
            Err(WalshError::IntervalBeyondResolution { .. })
        ));
    }

    #[test]
    fn decomposition_identities_on_random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let resolution = 8;
        for _ in 0..60 {
            let a = rng.random_range(0..255u64);
            let b = rng.random_range(a + 1..=256);
            let interval = iv(a, b);
            let f = random_in(&mut rng, interval, resolution);
            let d = decompose_function(&f, interval).unwrap();
            assert!(d.reconstruct().max_abs_diff(&f).unwrap() < 1e-12);
            for loc in d.localization() {
                assert!(loc.leakage <= 1e-12, "{interval}: {loc:?}");
            }
            let merged = d.merged_tail_from_pieces().unwrap();
            assert!(merged.max_abs_diff(&d.merged_tail).unwrap() < 1e-12);
            for p in [1.0, 1.3, 2.0] {
                for (f, g) in d.left_pieces.iter().zip(&d.modulated_left) {
                    assert!((lp_norm(f, p).unwrap() - lp_norm(g, p).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn chain_examples() {
        let resolution = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let full = iv(0, 64);
        let instance = vec![(full, random_in(&mut rng, full, resolution))];
        let report = theorem_chain(&instance, 2.0).unwrap();
        assert!((report.ratio() - 1.0).abs() < 1e-9);

        let singles: Instance = [3u64, 17, 40, 41]
            .iter()
            .map(|&n| (iv(n, n + 1), w(n, resolution)))
            .collect();
        let report = theorem_chain(&singles, 2.0).unwrap();
        assert!((report.a - 2.0).abs() < 1e-12);
        assert!((report.e - 2.0).abs() < 1e-12);

        let zeros: Instance = vec![
            (iv(1, 9), DyadicFunction::zeros(resolution).unwrap()),
            (iv(20, 33), DyadicFunction::zeros(resolution).unwrap()),
        ];
        let report = theorem_chain(&zeros, 1.5).unwrap();
        for v in [report.a, report.b, report.c1, report.c2, report.d1, report.d2, report.e] {
            assert_eq!(v, 0.0);
        }
        assert!(theorem_chain(&zeros, 1.0).is_err());
        assert!(theorem_chain(&zeros, 2.5).is_err());
    }

    #[test]
    fn chain_rejects_precondition_violations() {
        let f = DyadicFunction::zeros(5).unwrap();
        let overlapping = vec![(iv(1, 9), f.clone()), (iv(8, 12), f.clone())];
        assert!(matches!(
            theorem_chain(&overlapping, 1.5),
            Err(WalshError::OverlappingIntervals { .. })
        ));
        let leaking = vec![(iv(1, 3), w(7, 5))];
        assert!(matches!(theorem_chain(&leaking, 1.5), Err(WalshError::SpectralLeakage { .. })));
        let mixed = vec![(iv(1, 3), f), (iv(4, 5), DyadicFunction::zeros(4).unwrap())];
        assert!(matches!(theorem_chain(&mixed, 1.5), Err(WalshError::ResolutionMismatch { .. })));
        assert!(theorem_chain(&[], 1.5).is_err());
    }

    #[test]
    fn relocation_examples() {
        let resolution = 5;
        let (h, a) = relocation_for_instance(&[(iv(9, 10), w(9, resolution))]).unwrap();
        assert_eq!(h.len(), 1);
        assert!(operator_g(&h, &a).unwrap().max_abs_diff(&w(9, resolution)).unwrap() < 1e-15);

        let f = w(4, resolution).try_add(&w(6, resolution)).unwrap();
        let (h, a) = relocation_for_instance(&[(iv(3, 7), f.clone())]).unwrap();
        assert!(operator_g(&h, &a).unwrap().max_abs_diff(&f).unwrap() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (i1, i2) = (iv(2, 13), iv(13, 31));
        let instance = vec![
            (i1, random_in(&mut rng, i1, resolution)),
            (i2, random_in(&mut rng, i2, resolution)),
        ];
        let (h, a) = relocation_for_instance(&instance).unwrap();
        a.validate(resolution).unwrap();
        let total = instance[0].1.try_add(&instance[1].1).unwrap();
        assert!(operator_g(&h, &a).unwrap().max_abs_diff(&total).unwrap() < 1e-12);
    }
}
