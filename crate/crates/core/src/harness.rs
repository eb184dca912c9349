//! Randomised instances and empirical estimates of the inequality's
//! constants.
//!
//! Reproducibility: an [`InstanceSpec`] with seed `s` draws everything from
//! `ChaCha8Rng::seed_from_u64(s)`. Trial `t` of a multi-trial run uses the
//! seed `s + t` (wrapping), so every record can be regenerated on its own
//! from the seed it carries.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose_instance, ChainReport, Instance};
use crate::dyadic::{delta_block, IntervalZ};
use crate::error::{Result, WalshError};
use crate::martingale::{operator_g, square_function, IndexedFamily, RelocationAssignment};
use crate::walsh::{fwht_synthesize, lp_l2_norm, lp_norm, DyadicFunction, WalshSpectrum, MAX_RESOLUTION};

/// Tolerance of the `p = 2` orthogonality anchor.
pub const ANCHOR_TOLERANCE: f64 = 1e-9;

/// How the disjoint intervals of an instance are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalFamily {
    /// `2M` distinct breakpoints drawn uniformly from `[0, 2^K]`, paired
    /// consecutively.
    RandomDisjoint,
    /// `δ_1, …, δ_M` with `M = min(K, max_intervals)`.
    DyadicBlocks,
    /// `M` distinct random singletons.
    Singletons,
    /// The single interval `[0, 2^K)`.
    FullRange,
    Explicit(Vec<IntervalZ>),
}

impl FromStr for IntervalFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random-disjoint" => Ok(Self::RandomDisjoint),
            "dyadic-blocks" => Ok(Self::DyadicBlocks),
            "singletons" => Ok(Self::Singletons),
            "full-range" => Ok(Self::FullRange),
            other => Err(format!(
                "unknown interval family `{other}` (expected random-disjoint, dyadic-blocks, singletons or full-range)"
            )),
        }
    }
}

impl fmt::Display for IntervalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RandomDisjoint => f.write_str("random-disjoint"),
            Self::DyadicBlocks => f.write_str("dyadic-blocks"),
            Self::Singletons => f.write_str("singletons"),
            Self::FullRange => f.write_str("full-range"),
            Self::Explicit(list) => write!(f, "explicit({} intervals)", list.len()),
        }
    }
}

/// Distribution of the Walsh coefficients on each interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CoefficientLaw {
    #[default]
    Gaussian,
    RademacherSigns,
    AllOnes,
}

impl FromStr for CoefficientLaw {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "rademacher-signs" => Ok(Self::RademacherSigns),
            "all-ones" => Ok(Self::AllOnes),
            other => Err(format!(
                "unknown coefficient law `{other}` (expected gaussian, rademacher-signs or all-ones)"
            )),
        }
    }
}

impl fmt::Display for CoefficientLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::RademacherSigns => "rademacher-signs",
            Self::AllOnes => "all-ones",
        })
    }
}

/// Recipe for one random instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub resolution: u32,
    pub family: IntervalFamily,
    pub law: CoefficientLaw,
    /// Lower bound for the number of intervals of the random families.
    pub min_intervals: usize,
    pub max_intervals: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(resolution: u32, family: IntervalFamily) -> Self {
        Self {
            resolution,
            family,
            law: CoefficientLaw::Gaussian,
            min_intervals: 1,
            max_intervals: 16,
            seed: 0,
        }
    }

    pub fn with_law(mut self, law: CoefficientLaw) -> Self {
        self.law = law;
        self
    }

    pub fn with_intervals(mut self, min: usize, max: usize) -> Self {
        self.min_intervals = min;
        self.max_intervals = max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The spec of trial `t`: same parameters, seed `seed + t`.
    pub fn for_trial(&self, trial: u64) -> InstanceSpec {
        InstanceSpec {
            seed: self.seed.wrapping_add(trial),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution > MAX_RESOLUTION {
            return Err(WalshError::ResolutionTooLarge(self.resolution));
        }
        let infeasible = |msg: String| Err(WalshError::InfeasibleFamily(msg));
        if self.max_intervals == 0 {
            return infeasible("max_intervals must be at least 1".into());
        }
        let len = 1u64 << self.resolution;
        match &self.family {
            IntervalFamily::RandomDisjoint | IntervalFamily::Singletons => {
                if self.min_intervals == 0 || self.min_intervals > self.max_intervals {
                    return infeasible(format!(
                        "interval count range {}..={} is empty or starts at 0",
                        self.min_intervals, self.max_intervals
                    ));
                }
                let capacity = if self.family == IntervalFamily::Singletons {
                    len
                } else {
                    (len + 1) / 2
                };
                if self.max_intervals as u64 > capacity {
                    return infeasible(format!(
                        "{} {} intervals do not fit at resolution {}",
                        self.max_intervals, self.family, self.resolution
                    ));
                }
            }
            IntervalFamily::DyadicBlocks if self.resolution == 0 => {
                return infeasible("no dyadic blocks below 2^0".into());
            }
            IntervalFamily::Explicit(list) if list.is_empty() => {
                return infeasible("explicit interval list is empty".into());
            }
            _ => {}
        }
        Ok(())
    }
}

fn draw_count(rng: &mut ChaCha8Rng, spec: &InstanceSpec) -> usize {
    rng.random_range(spec.min_intervals..=spec.max_intervals)
}

fn draw_intervals(rng: &mut ChaCha8Rng, spec: &InstanceSpec) -> Result<Vec<IntervalZ>> {
    let len = 1u64 << spec.resolution;
    let intervals = match &spec.family {
        IntervalFamily::RandomDisjoint => {
            let count = draw_count(rng, spec);
            let mut points: Vec<u64> = sample(rng, len as usize + 1, 2 * count)
                .into_iter()
                .map(|x| x as u64)
                .collect();
            points.sort_unstable();
            points
                .chunks_exact(2)
                .filter(|pair| pair[0] < pair[1])
                .map(|pair| IntervalZ::new(pair[0], pair[1]))
                .collect::<Result<Vec<_>>>()?
        }
        IntervalFamily::DyadicBlocks => (1..=spec.resolution.min(spec.max_intervals as u32))
            .map(|k| delta_block(k).interval())
            .collect(),
        IntervalFamily::Singletons => {
            let count = draw_count(rng, spec);
            let mut points: Vec<u64> = sample(rng, len as usize, count)
                .into_iter()
                .map(|x| x as u64)
                .collect();
            points.sort_unstable();
            points
                .into_iter()
                .map(IntervalZ::singleton)
                .collect::<Result<Vec<_>>>()?
        }
        IntervalFamily::FullRange => vec![IntervalZ::new(0, len)?],
        IntervalFamily::Explicit(list) => list.clone(),
    };
    Ok(intervals)
}

fn draw_coefficient(rng: &mut ChaCha8Rng, law: CoefficientLaw) -> f64 {
    match law {
        CoefficientLaw::Gaussian => rng.sample(StandardNormal),
        CoefficientLaw::RademacherSigns => {
            if rng.random_bool(0.5) {
                1.0
            } else {
                -1.0
            }
        }
        CoefficientLaw::AllOnes => 1.0,
    }
}

/// Disjoint intervals with one random function per interval, spectrum
/// supported on its interval. Deterministic in `spec.seed`.
pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let intervals = draw_intervals(&mut rng, spec)?;
    let mut instance = Vec::with_capacity(intervals.len());
    for interval in intervals {
        if interval.end() > 1u64 << spec.resolution {
            return Err(WalshError::IntervalBeyondResolution {
                interval,
                resolution: spec.resolution,
            });
        }
        let mut spectrum = WalshSpectrum::zeros(spec.resolution)?;
        for n in interval.range() {
            spectrum.coeffs_mut()[n as usize] = draw_coefficient(&mut rng, spec.law);
        }
        instance.push((interval, fwht_synthesize(&spectrum)));
    }
    crate::decomposition::validate_instance(&instance)?;
    Ok(instance)
}

/// One evaluated instance at one exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub p: f64,
    #[serde(rename = "K")]
    pub resolution: u32,
    #[serde(rename = "M")]
    pub intervals: usize,
    /// `‖Σ f_m‖_p`.
    pub lhs: f64,
    /// `‖{f_m}‖_{L^p(l²)}`.
    pub rhs: f64,
    pub ratio: f64,
    pub chain: ChainReport,
}

impl TrialRecord {
    pub fn from_chain(seed: u64, p: f64, resolution: u32, intervals: usize, chain: ChainReport) -> Self {
        Self {
            seed,
            p,
            resolution,
            intervals,
            lhs: chain.a,
            rhs: chain.e,
            ratio: chain.ratio(),
            chain,
        }
    }
}

/// Max / median / mean of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub count: usize,
    pub max: f64,
    pub median: f64,
    pub mean: f64,
}

impl SampleStats {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<SampleStats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(SampleStats {
            count: n,
            max: sorted[n - 1],
            median,
            mean: sorted.iter().sum::<f64>() / n as f64,
        })
    }
}

/// Ratio statistics at one exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSummary {
    pub p: f64,
    pub overall: SampleStats,
    /// Statistics per interval count `M`, ascending in `M`.
    pub by_count: Vec<(usize, SampleStats)>,
    /// Whether the per-`M` maxima never increase as `M` grows. Observational.
    pub max_nonincreasing_in_count: bool,
}

/// Output of [`estimate_constants`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsEstimate {
    /// Records in canonical `(seed, p)` order.
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<ExponentSummary>,
}

impl ConstantsEstimate {
    /// Largest ratio over the whole sweep.
    pub fn max_ratio(&self) -> f64 {
        self.summaries
            .iter()
            .map(|s| s.overall.max)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_exponents(p_grid: &[f64]) -> Result<()> {
    match p_grid.iter().find(|&&p| !(p > 1.0 && p <= 2.0)) {
        Some(&p) => Err(WalshError::ExponentOutOfRange(p)),
        None if p_grid.is_empty() => Err(WalshError::ExponentOutOfRange(f64::NAN)),
        None => Ok(()),
    }
}

/// Runs `trials` instances at every exponent of `p_grid` and summarises
/// `‖Σ f_m‖_p / ‖{f_m}‖_{L^p(l²)}`.
///
/// Fails if any ratio at `p = 2` deviates from 1 by more than
/// [`ANCHOR_TOLERANCE`]. Trials run in parallel; the output does not depend
/// on the thread count.
pub fn estimate_constants(spec: &InstanceSpec, p_grid: &[f64], trials: usize) -> Result<ConstantsEstimate> {
    if trials == 0 {
        return Err(WalshError::NoTrials);
    }
    check_exponents(p_grid)?;
    spec.validate()?;

    let per_trial: Vec<Vec<TrialRecord>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial = spec.for_trial(t);
            let instance = generate_instance(&trial)?;
            let decomposed = decompose_instance(&instance)?;
            p_grid
                .iter()
                .map(|&p| {
                    let chain = decomposed.chain(p)?;
                    Ok(TrialRecord::from_chain(trial.seed, p, spec.resolution, instance.len(), chain))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    records.sort_by(|x, y| x.seed.cmp(&y.seed).then(x.p.total_cmp(&y.p)));

    for r in records.iter().filter(|r| r.p == 2.0) {
        if !((r.ratio - 1.0).abs() <= ANCHOR_TOLERANCE) {
            return Err(WalshError::AnchorViolation {
                seed: r.seed,
                ratio: r.ratio,
            });
        }
    }

    let summaries = p_grid
        .iter()
        .map(|&p| summarize(&records, p))
        .collect();
    Ok(ConstantsEstimate { records, summaries })
}

fn summarize(records: &[TrialRecord], p: f64) -> ExponentSummary {
    let at_p: Vec<&TrialRecord> = records.iter().filter(|r| r.p == p).collect();
    let ratios: Vec<f64> = at_p.iter().map(|r| r.ratio).collect();
    let mut counts: Vec<usize> = at_p.iter().map(|r| r.intervals).collect();
    counts.sort_unstable();
    counts.dedup();
    let by_count: Vec<(usize, SampleStats)> = counts
        .into_iter()
        .map(|m| {
            let sample: Vec<f64> = at_p
                .iter()
                .filter(|r| r.intervals == m)
                .map(|r| r.ratio)
                .collect();
            (m, SampleStats::of(&sample).expect("count taken from the sample"))
        })
        .collect();
    let max_nonincreasing_in_count = by_count.windows(2).all(|w| w[1].1.max <= w[0].1.max);
    ExponentSummary {
        p,
        overall: SampleStats::of(&ratios).expect("trials > 0"),
        by_count,
        max_nonincreasing_in_count,
    }
}

/// Operator probed for the weak type `(1, 1)` bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeakOperator {
    /// Square function applied to `Σ f_m`.
    S,
    /// `G` applied to the modulated pieces of the instance.
    G,
}

impl FromStr for WeakOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "S" | "s" => Ok(Self::S),
            "G" | "g" => Ok(Self::G),
            other => Err(format!("unknown operator `{other}` (expected S or G)")),
        }
    }
}

/// Thresholds at which `λ |{|Tf| > λ}|` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaGrid {
    /// `points` thresholds geometric in `[1e-3, 1e3] · median(|f|)`.
    Geometric { points: usize },
    /// Exact supremum over all `λ > 0`.
    Exact,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Geometric { points: 121 }
    }
}

fn median_abs(f: &DyadicFunction) -> f64 {
    let mut v: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// `sup_λ λ |{|output| > λ}| / input_l1`.
///
/// `scale` anchors the geometric grid (typically the median of the input
/// magnitude). Returns 0 when the input norm vanishes.
pub fn weak_type_ratio(output: &DyadicFunction, input_l1: f64, scale: f64, grid: LambdaGrid) -> f64 {
    if !(input_l1 > 0.0) {
        return 0.0;
    }
    let mut magnitudes: Vec<f64> = output.values().iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    let cell = 1.0 / magnitudes.len() as f64;
    let sup = match grid {
        // For λ just below the i-th largest value the level set has i cells.
        LambdaGrid::Exact => magnitudes
            .iter()
            .enumerate()
            .map(|(i, &v)| v * (i + 1) as f64 * cell)
            .fold(0.0, f64::max),
        LambdaGrid::Geometric { points } => {
            let scale = if scale > 0.0 { scale } else { magnitudes[0] };
            if !(scale > 0.0) {
                return 0.0;
            }
            let steps = points.max(2) - 1;
            (0..=steps)
                .map(|i| {
                    let lambda = scale * 10f64.powf(-3.0 + 6.0 * i as f64 / steps as f64);
                    let count = magnitudes.partition_point(|&v| v > lambda);
                    lambda * count as f64 * cell
                })
                .fold(0.0, f64::max)
        }
    };
    sup / input_l1
}

/// Weak-type ratio of the square function on `f`.
pub fn weak_type_s(f: &DyadicFunction, grid: LambdaGrid) -> Result<f64> {
    let norm = lp_norm(f, 1.0)?;
    Ok(weak_type_ratio(&square_function(f), norm, median_abs(f), grid))
}

/// Weak-type ratio of `G` on `h` with the shifts `a`.
pub fn weak_type_g(h: &IndexedFamily, a: &RelocationAssignment, grid: LambdaGrid) -> Result<f64> {
    let input = h.to_vec_function();
    let norm = lp_l2_norm(&input, 1.0)?;
    let output = operator_g(h, a)?;
    Ok(weak_type_ratio(&output, norm, median_abs(&input.pointwise_norm()), grid))
}

/// One trial of a weak-type probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeTrial {
    pub seed: u64,
    pub value: f64,
}

/// Output of [`weak_type_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeSummary {
    pub operator: WeakOperator,
    pub trials: Vec<WeakTypeTrial>,
    pub stats: SampleStats,
}

/// `sup_λ λ |{|Tf| > λ}| / ‖f‖₁` over `trials` random instances.
///
/// For `S` the input is `f = Σ f_m`; for `G` it is the family of modulated
/// pieces, whose image under `G` is again `Σ f_m`.
pub fn weak_type_probe(
    operator: WeakOperator,
    spec: &InstanceSpec,
    trials: usize,
    grid: LambdaGrid,
) -> Result<WeakTypeSummary> {
    if trials == 0 {
        return Err(WalshError::NoTrials);
    }
    spec.validate()?;
    let values: Vec<WeakTypeTrial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial = spec.for_trial(t);
            let instance = generate_instance(&trial)?;
            let value = match operator {
                WeakOperator::S => {
                    let f = DyadicFunction::sum(spec.resolution, instance.iter().map(|(_, f)| f))?;
                    weak_type_s(&f, grid)?
                }
                WeakOperator::G => {
                    let (h, a) = decompose_instance(&instance)?.relocation()?;
                    weak_type_g(&h, &a, grid)?
                }
            };
            Ok(WeakTypeTrial {
                seed: trial.seed,
                value,
            })
        })
        .collect::<Result<_>>()?;
    let sample: Vec<f64> = values.iter().map(|t| t.value).collect();
    Ok(WeakTypeSummary {
        operator,
        stats: SampleStats::of(&sample).expect("trials > 0"),
        trials: values,
    })
}
