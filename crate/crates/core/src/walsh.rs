//! Dyadic step functions on `[0, 1)` and their Walsh–Paley spectra.
//!
//! A [`DyadicFunction`] of resolution `K` stores one value per cell
//! `[i 2^{-K}, (i+1) 2^{-K})`. Walsh functions `w_n` with `n < 2^K` are
//! constant on those cells, so inner products, projections and `L^p` norms
//! are computed exactly on the grid (up to floating-point rounding).
//!
//! The transform uses Paley ordering and the normalisation
//! `coeffs[n] = (f, w_n) = ∫ f w_n`: analysis carries the `2^{-K}` factor,
//! synthesis carries none.

use serde::{Deserialize, Serialize};

use crate::dyadic::{dyadic_exponents, IntervalZ};
use crate::error::{Result, WalshError};

/// Largest supported resolution `K`.
pub const MAX_RESOLUTION: u32 = 20;

fn check_resolution(resolution: u32) -> Result<usize> {
    if resolution > MAX_RESOLUTION {
        return Err(WalshError::ResolutionTooLarge(resolution));
    }
    Ok(1usize << resolution)
}

fn check_values(resolution: u32, values: &[f64]) -> Result<()> {
    let expected = check_resolution(resolution)?;
    if values.len() != expected {
        return Err(WalshError::LengthMismatch {
            resolution,
            expected,
            got: values.len(),
        });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(WalshError::NonFinite { index, value });
    }
    Ok(())
}

fn same_resolution(left: u32, right: u32) -> Result<()> {
    if left != right {
        return Err(WalshError::ResolutionMismatch { left, right });
    }
    Ok(())
}

/// Real step function on `[0, 1)`, constant on the `2^K` dyadic cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicFunction {
    resolution: u32,
    values: Vec<f64>,
}

impl DyadicFunction {
    pub fn new(resolution: u32, values: Vec<f64>) -> Result<Self> {
        check_values(resolution, &values)?;
        Ok(Self { resolution, values })
    }

    pub fn zeros(resolution: u32) -> Result<Self> {
        let len = check_resolution(resolution)?;
        Ok(Self {
            resolution,
            values: vec![0.0; len],
        })
    }

    pub fn constant(resolution: u32, c: f64) -> Result<Self> {
        Self::new(resolution, vec![c; check_resolution(resolution)?])
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of cells, `2^K`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checked pointwise sum.
    pub fn try_add(&self, other: &DyadicFunction) -> Result<DyadicFunction> {
        same_resolution(self.resolution, other.resolution)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    /// Checked pointwise difference.
    pub fn try_sub(&self, other: &DyadicFunction) -> Result<DyadicFunction> {
        same_resolution(self.resolution, other.resolution)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, c: f64) -> DyadicFunction {
        self.map(|v| c * v)
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> DyadicFunction {
        DyadicFunction {
            resolution: self.resolution,
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    /// Largest cellwise absolute difference.
    pub fn max_abs_diff(&self, other: &DyadicFunction) -> Result<f64> {
        same_resolution(self.resolution, other.resolution)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Sum of a non-empty list of functions sharing one resolution.
    pub fn sum<'a>(
        resolution: u32,
        terms: impl IntoIterator<Item = &'a DyadicFunction>,
    ) -> Result<DyadicFunction> {
        let mut acc = DyadicFunction::zeros(resolution)?;
        for term in terms {
            acc.add_assign(term)?;
        }
        Ok(acc)
    }

    pub(crate) fn add_assign(&mut self, other: &DyadicFunction) -> Result<()> {
        same_resolution(self.resolution, other.resolution)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    pub(crate) fn from_raw(resolution: u32, values: Vec<f64>) -> DyadicFunction {
        debug_assert_eq!(values.len(), 1 << resolution);
        DyadicFunction { resolution, values }
    }

    fn zip_with(&self, other: &DyadicFunction, op: impl Fn(f64, f64) -> f64) -> DyadicFunction {
        DyadicFunction {
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }
}

/// Walsh coefficients `(f, w_n)`, `0 ≤ n < 2^K`, in Paley order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshSpectrum {
    resolution: u32,
    coeffs: Vec<f64>,
}

impl WalshSpectrum {
    pub fn new(resolution: u32, coeffs: Vec<f64>) -> Result<Self> {
        check_values(resolution, &coeffs)?;
        Ok(Self { resolution, coeffs })
    }

    pub fn zeros(resolution: u32) -> Result<Self> {
        let len = check_resolution(resolution)?;
        Ok(Self {
            resolution,
            coeffs: vec![0.0; len],
        })
    }

    /// Spectrum of the single Walsh function `w_n`.
    pub fn indicator(resolution: u32, n: u64) -> Result<Self> {
        let mut s = Self::zeros(resolution)?;
        let slot = s
            .coeffs
            .get_mut(n as usize)
            .filter(|_| n < 1 << resolution)
            .ok_or(WalshError::IndexOutOfRange { index: n, resolution })?;
        *slot = 1.0;
        Ok(s)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `Σ_n coeffs[n]²`, the squared `L²` norm by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Copy keeping only the coefficients inside `interval`.
    pub fn restricted_to(&self, interval: &IntervalZ) -> Result<WalshSpectrum> {
        let len = self.coeffs.len() as u64;
        if interval.end() > len {
            return Err(WalshError::IntervalBeyondResolution {
                interval: *interval,
                resolution: self.resolution,
            });
        }
        let mut coeffs = vec![0.0; self.coeffs.len()];
        let range = interval.start() as usize..interval.end() as usize;
        coeffs[range.clone()].copy_from_slice(&self.coeffs[range]);
        Ok(WalshSpectrum {
            resolution: self.resolution,
            coeffs,
        })
    }
}

/// `w_n` sampled on the cells of resolution `K`.
///
/// `w_n` is the product of the Rademacher functions `r_{k+1}` over the
/// binary digits `k` of `n`; `r_k` is `+1` on cells whose `k`-th binary
/// address digit is 0 and `-1` otherwise.
pub fn walsh_function(n: u64, resolution: u32) -> Result<DyadicFunction> {
    let len = check_resolution(resolution)?;
    if n >= len as u64 {
        return Err(WalshError::IndexOutOfRange { index: n, resolution });
    }
    let mut values = vec![1.0; len];
    for k in dyadic_exponents(n).iter() {
        // r_{k+1} reads the (k+1)-th address digit, bit K-1-k of the cell index.
        let bit = resolution - 1 - k;
        for (cell, v) in values.iter_mut().enumerate() {
            if (cell >> bit) & 1 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(DyadicFunction::from_raw(resolution, values))
}

fn bit_reverse_permute(data: &mut [f64], resolution: u32) {
    if resolution == 0 {
        return;
    }
    let shift = usize::BITS - resolution;
    for i in 0..data.len() {
        let j = i.reverse_bits() >> shift;
        if i < j {
            data.swap(i, j);
        }
    }
}

/// In-place unnormalised Walsh–Hadamard butterfly in natural (Hadamard) order.
fn hadamard_in_place(data: &mut [f64]) {
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        half *= 2;
    }
}

/// Walsh coefficients `(f, w_n)` in `O(K 2^K)`.
///
/// Paley ordering is the natural Hadamard ordering with the cell index
/// bit-reversed, so the input is permuted before the butterfly.
pub fn fwht_analyze(f: &DyadicFunction) -> WalshSpectrum {
    let mut coeffs = f.values.clone();
    bit_reverse_permute(&mut coeffs, f.resolution);
    hadamard_in_place(&mut coeffs);
    let scale = 1.0 / coeffs.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    WalshSpectrum {
        resolution: f.resolution,
        coeffs,
    }
}

/// `Σ_n coeffs[n] w_n` on the grid; exact inverse of [`fwht_analyze`].
pub fn fwht_synthesize(s: &WalshSpectrum) -> DyadicFunction {
    let mut values = s.coeffs.clone();
    hadamard_in_place(&mut values);
    bit_reverse_permute(&mut values, s.resolution);
    DyadicFunction::from_raw(s.resolution, values)
}

/// Keeps the Walsh coefficients of `f` whose indices are in `set`.
pub fn project_spectrum(f: &DyadicFunction, set: &[u64]) -> Result<DyadicFunction> {
    let spectrum = fwht_analyze(f);
    let mut kept = vec![0.0; spectrum.coeffs.len()];
    for &n in set {
        let slot = kept
            .get_mut(n as usize)
            .filter(|_| n < spectrum.coeffs.len() as u64)
            .ok_or(WalshError::IndexOutOfRange {
                index: n,
                resolution: f.resolution,
            })?;
        *slot = spectrum.coeffs[n as usize];
    }
    Ok(fwht_synthesize(&WalshSpectrum {
        resolution: f.resolution,
        coeffs: kept,
    }))
}

/// Projection onto the Walsh frequencies of an interval.
pub fn project_interval(f: &DyadicFunction, interval: &IntervalZ) -> Result<DyadicFunction> {
    Ok(fwht_synthesize(&fwht_analyze(f).restricted_to(interval)?))
}

/// Cellwise product. Walsh functions multiply as characters:
/// `w_a w_b = w_{a ∔ b}`.
pub fn multiply_pointwise(f: &DyadicFunction, g: &DyadicFunction) -> Result<DyadicFunction> {
    same_resolution(f.resolution, g.resolution)?;
    Ok(f.zip_with(g, |a, b| a * b))
}

fn mean_power(values: impl Iterator<Item = f64>, len: usize, p: f64) -> f64 {
    let inv_len = 1.0 / len as f64;
    if p == 1.0 {
        values.map(f64::abs).sum::<f64>() * inv_len
    } else if p == 2.0 {
        (values.map(|v| v * v).sum::<f64>() * inv_len).sqrt()
    } else {
        (values.map(|v| v.abs().powf(p)).sum::<f64>() * inv_len).powf(1.0 / p)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(WalshError::InvalidExponent(p));
    }
    Ok(())
}

/// `‖f‖_{L^p[0,1]} = (2^{-K} Σ |f_i|^p)^{1/p}` for `p ≥ 1`.
pub fn lp_norm(f: &DyadicFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(mean_power(f.values.iter().copied(), f.len(), p))
}

/// Ordered family of functions at one resolution, viewed as an
/// `l²`-valued function.
#[derive(Debug, Clone, PartialEq)]
pub struct VecFunction {
    components: Vec<DyadicFunction>,
}

impl VecFunction {
    pub fn new(components: Vec<DyadicFunction>) -> Result<Self> {
        let first = components.first().ok_or(WalshError::EmptyFamily)?;
        for c in &components[1..] {
            same_resolution(first.resolution, c.resolution)?;
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[DyadicFunction] {
        &self.components
    }

    pub fn resolution(&self) -> u32 {
        self.components[0].resolution
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Family `{h_i} ∪ {v_j}`.
    pub fn concat(&self, other: &VecFunction) -> Result<VecFunction> {
        same_resolution(self.resolution(), other.resolution())?;
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Ok(VecFunction { components })
    }

    /// Pointwise `l²` norm `(Σ_m |v_m(x)|²)^{1/2}`.
    pub fn pointwise_norm(&self) -> DyadicFunction {
        pointwise_l2(self.resolution(), self.components.iter())
    }
}

/// `(Σ_m |f_m(x)|²)^{1/2}` for any number of equally-sized functions.
pub(crate) fn pointwise_l2<'a>(
    resolution: u32,
    terms: impl IntoIterator<Item = &'a DyadicFunction>,
) -> DyadicFunction {
    let mut acc = vec![0.0; 1 << resolution];
    for term in terms {
        debug_assert_eq!(term.resolution, resolution);
        for (a, v) in acc.iter_mut().zip(&term.values) {
            *a += v * v;
        }
    }
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    DyadicFunction::from_raw(resolution, acc)
}

/// `‖{v_m}‖_{L^p(l²)} = (2^{-K} Σ_i (Σ_m v_m[i]²)^{p/2})^{1/p}`.
pub fn lp_l2_norm(v: &VecFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    lp_norm(&v.pointwise_norm(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::xor_add;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // sign(sin 2^k π x) at the midpoint of each cell.
    fn rademacher_oracle(k: u32, resolution: u32) -> Vec<f64> {
        let len = 1usize << resolution;
        (0..len)
            .map(|i| {
                let x = (i as f64 + 0.5) / len as f64;
                let s = (2f64.powi(k as i32) * std::f64::consts::PI * x).sin();
                if s > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    }

    fn walsh_oracle(n: u64, resolution: u32) -> Vec<f64> {
        let mut out = vec![1.0; 1 << resolution];
        for k in 0..resolution {
            if (n >> k) & 1 == 1 {
                for (o, r) in out.iter_mut().zip(rademacher_oracle(k + 1, resolution)) {
                    *o *= r;
                }
            }
        }
        out
    }

    fn naive_coeffs(f: &DyadicFunction) -> Vec<f64> {
        let len = f.len();
        (0..len as u64)
            .map(|n| {
                let w = walsh_oracle(n, f.resolution());
                f.values().iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / len as f64
            })
            .collect()
    }

    fn random_function(rng: &mut ChaCha8Rng, resolution: u32) -> DyadicFunction {
        let values = (0..1usize << resolution)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        DyadicFunction::new(resolution, values).unwrap()
    }

    #[test]
    fn walsh_function_examples() {
        assert_eq!(walsh_function(0, 2).unwrap().values(), &[1.0; 4]);
        assert_eq!(walsh_function(1, 1).unwrap().values(), &[1.0, -1.0]);
        assert_eq!(walsh_function(3, 2).unwrap().values(), &[1.0, -1.0, -1.0, 1.0]);
        assert!(walsh_function(4, 2).is_err());
    }

    #[test]
    fn walsh_function_matches_rademacher_products() {
        for resolution in 0..=8 {
            for n in 0..1u64 << resolution {
                assert_eq!(
                    walsh_function(n, resolution).unwrap().values(),
                    walsh_oracle(n, resolution).as_slice()
                );
            }
        }
    }

    #[test]
    fn analyze_matches_naive_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for resolution in 0..=8 {
            let f = random_function(&mut rng, resolution);
            let fast = fwht_analyze(&f);
            for (a, b) in fast.coeffs().iter().zip(naive_coeffs(&f)) {
                assert!((a - b).abs() <= 1e-12, "K={resolution}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn analyze_examples() {
        let w7 = walsh_function(7, 4).unwrap();
        let s = fwht_analyze(&w7);
        for (n, c) in s.coeffs().iter().enumerate() {
            let expected = if n == 7 { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-15);
        }
        let s = fwht_analyze(&DyadicFunction::constant(5, 2.5).unwrap());
        assert!((s.coeffs()[0] - 2.5).abs() < 1e-15);
        assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn synthesize_examples() {
        let one = fwht_synthesize(&WalshSpectrum::indicator(3, 0).unwrap());
        assert_eq!(one.values(), &[1.0; 8]);
        let w3 = fwht_synthesize(&WalshSpectrum::indicator(2, 3).unwrap());
        assert_eq!(w3.values(), &[1.0, -1.0, -1.0, 1.0]);
        let zero = fwht_synthesize(&WalshSpectrum::zeros(4).unwrap());
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_trip_at_resolution_ten() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_function(&mut rng, 10);
        let back = fwht_synthesize(&fwht_analyze(&f));
        assert!(back.max_abs_diff(&f).unwrap() <= 1e-12);
    }

    #[test]
    fn orthonormality_and_character_identity() {
        let resolution = 6;
        let len = 1u64 << resolution;
        let walsh: Vec<_> = (0..len).map(|n| walsh_function(n, resolution).unwrap()).collect();
        for a in 0..len {
            for b in 0..len {
                let prod = multiply_pointwise(&walsh[a as usize], &walsh[b as usize]).unwrap();
                assert_eq!(prod, walsh[xor_add(a, b) as usize]);
                let inner = prod.values().iter().sum::<f64>() / len as f64;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((inner - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn multiply_examples() {
        let w5 = walsh_function(5, 4).unwrap();
        let w3 = walsh_function(3, 4).unwrap();
        assert_eq!(multiply_pointwise(&w5, &w3).unwrap(), walsh_function(6, 4).unwrap());
        assert_eq!(
            multiply_pointwise(&w5, &w5).unwrap(),
            DyadicFunction::constant(4, 1.0).unwrap()
        );
        let f = DyadicFunction::new(1, vec![0.5, -2.0]).unwrap();
        assert_eq!(multiply_pointwise(&f, &walsh_function(0, 1).unwrap()).unwrap(), f);
        assert!(multiply_pointwise(&f, &w5).is_err());
    }

    #[test]
    fn projection_examples() {
        let f = walsh_function(2, 3)
            .unwrap()
            .try_add(&walsh_function(5, 3).unwrap())
            .unwrap();
        let all: Vec<u64> = (0..8).collect();
        assert!(project_spectrum(&f, &all).unwrap().max_abs_diff(&f).unwrap() < 1e-15);
        assert!(project_spectrum(&f, &[]).unwrap().max_abs() == 0.0);
        let only5 = project_spectrum(&f, &[5]).unwrap();
        assert!(only5.max_abs_diff(&walsh_function(5, 3).unwrap()).unwrap() < 1e-15);
        assert!(project_spectrum(&f, &[8]).is_err());
    }

    #[test]
    fn norm_examples() {
        let w = walsh_function(13, 5).unwrap();
        for p in [1.0, 1.5, 2.0, 3.7] {
            assert!((lp_norm(&w, p).unwrap() - 1.0).abs() < 1e-15);
        }
        let c = DyadicFunction::constant(3, -1.75).unwrap();
        assert!((lp_norm(&c, 1.3).unwrap() - 1.75).abs() < 1e-14);
        let f = DyadicFunction::new(1, vec![2.0, 0.0]).unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(lp_norm(&f, 0.5), Err(WalshError::InvalidExponent(_))));
    }

    #[test]
    fn vector_norm_examples() {
        let f = DyadicFunction::new(2, vec![1.0, -3.0, 0.5, 2.0]).unwrap();
        let single = VecFunction::new(vec![f.clone()]).unwrap();
        assert!((lp_l2_norm(&single, 1.5).unwrap() - lp_norm(&f, 1.5).unwrap()).abs() < 1e-15);
        let pair = VecFunction::new(vec![
            walsh_function(1, 4).unwrap(),
            walsh_function(2, 4).unwrap(),
        ])
        .unwrap();
        assert!((lp_l2_norm(&pair, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let zeros = VecFunction::new(vec![DyadicFunction::zeros(3).unwrap(); 3]).unwrap();
        assert_eq!(lp_l2_norm(&zeros, 1.2).unwrap(), 0.0);
        assert!(VecFunction::new(vec![]).is_err());
        assert!(VecFunction::new(vec![f, DyadicFunction::zeros(3).unwrap()]).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(DyadicFunction::new(2, vec![0.0; 3]).is_err());
        assert!(DyadicFunction::new(1, vec![0.0, f64::NAN]).is_err());
        assert!(DyadicFunction::zeros(21).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn parseval_and_round_trip(seed in any::<u64>(), resolution in 0u32..=14) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&mut rng, resolution);
            let s = fwht_analyze(&f);
            let l2 = lp_norm(&f, 2.0).unwrap().powi(2);
            prop_assert!((s.energy() - l2).abs() <= 1e-12 * l2);
            prop_assert!(fwht_synthesize(&s).max_abs_diff(&f).unwrap() <= 1e-12);
        }

        #[test]
        fn projection_is_linear_over_disjoint_sets(seed in any::<u64>(), split in 0u64..256) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&mut rng, 8);
            let (left, right): (Vec<u64>, Vec<u64>) = (0..256).partition(|&n| (n * 37 + split) % 3 == 0);
            let sum = project_spectrum(&f, &left).unwrap()
                .try_add(&project_spectrum(&f, &right).unwrap()).unwrap();
            prop_assert!(sum.max_abs_diff(&f).unwrap() <= 1e-12);
            let once = project_spectrum(&f, &left).unwrap();
            let twice = project_spectrum(&once, &left).unwrap();
            prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-12);
        }
    }
}
