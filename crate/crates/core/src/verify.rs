//! Self-checking suites behind the `verify` subcommands.
//!
//! Each suite walks an exhaustive range or a seeded random sample and stops
//! at the first violated invariant.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{decompose_instance, partition_interval, PieceLabel};
use crate::dyadic::{
    complement_exponents, delta_block, dyadic_exponents, shift_decomposition, xor_add, xor_translate_set,
    IntervalZ,
};
use crate::error::WalshError;
use crate::harness::{generate_instance, InstanceSpec, ANCHOR_TOLERANCE};
use crate::martingale::operator_g;
use crate::walsh::{fwht_analyze, fwht_synthesize, lp_norm, multiply_pointwise, walsh_function, DyadicFunction};

/// Floating-point identities that hold exactly in real arithmetic.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// `|x - y| ≤ tol · max(1, |x|, |y|)`.
pub fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs())
}

/// First invariant that failed, with context.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

impl std::error::Error for Violation {}

impl From<WalshError> for Violation {
    fn from(e: WalshError) -> Self {
        Violation {
            invariant: "no library error",
            detail: e.to_string(),
        }
    }
}

/// Number of individual checks a suite performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub checks: u64,
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} checks passed", self.suite, self.checks)
    }
}

type SuiteResult = Result<SuiteOutcome, Violation>;

fn ensure(cond: bool, invariant: &'static str, detail: impl FnOnce() -> String) -> Result<(), Violation> {
    if cond {
        Ok(())
    } else {
        Err(Violation {
            invariant,
            detail: detail(),
        })
    }
}

/// Group axioms of `∔` for all `a, b, c < max_n`.
pub fn verify_group(max_n: u64) -> SuiteResult {
    let mut checks = 0;
    for a in 0..max_n {
        ensure(xor_add(a, 0) == a, "identity", || format!("{a} ∔ 0 ≠ {a}"))?;
        ensure(xor_add(a, a) == 0, "self-inverse", || format!("{a} ∔ {a} ≠ 0"))?;
        for b in 0..max_n {
            let ab = xor_add(a, b);
            ensure(ab == xor_add(b, a), "commutativity", || format!("a={a}, b={b}"))?;
            for c in 0..max_n {
                ensure(
                    xor_add(ab, c) == xor_add(a, xor_add(b, c)),
                    "associativity",
                    || format!("a={a}, b={b}, c={c}"),
                )?;
            }
            checks += max_n + 1;
        }
        checks += 2;
    }
    Ok(SuiteOutcome {
        suite: "group",
        checks,
    })
}

/// Interval image laws of `∔ N` for every `1 ≤ N < max_n`, with
/// `tail_rows` rows to the right of `N`.
pub fn verify_lemma_intervals(max_n: u64, tail_rows: usize) -> SuiteResult {
    let mut checks = 0;
    for n in 1..max_n {
        let rows = shift_decomposition(n, tail_rows)?;
        let s = dyadic_exponents(n).len();
        ensure(rows.len() == s + 1 + tail_rows, "row count", || format!("N={n}"))?;
        for row in &rows {
            let image = xor_translate_set(&row.source.to_vec(), n);
            ensure(image == row.image.interval().to_vec(), "row image", || {
                format!("N={n}: {} ∔ N ≠ {}", row.source, row.image)
            })?;
            checks += 1;
        }

        let mut left_sources: Vec<u64> = rows[..s].iter().flat_map(|r| r.source.range()).collect();
        left_sources.sort_unstable();
        ensure(left_sources == (0..n).collect::<Vec<_>>(), "left rows tile [0, N-1]", || {
            format!("N={n}")
        })?;
        let mut union: Vec<u64> = dyadic_exponents(n)
            .iter()
            .flat_map(|k| delta_block(k + 1).interval().range())
            .collect();
        union.sort_unstable();
        ensure(
            xor_translate_set(&left_sources, n) == union,
            "[0, N-1] ∔ N is the union of δ_{k_i+1}",
            || format!("N={n}"),
        )?;

        let right_end = rows.last().expect("at least the {N} row").source.end();
        let right: Vec<u64> = (n..right_end).collect();
        let mut expected: Vec<u64> = std::iter::once(0)
            .chain(
                complement_exponents(n, tail_rows)
                    .into_iter()
                    .flat_map(|k| delta_block(k + 1).interval().range()),
            )
            .collect();
        expected.sort_unstable();
        ensure(
            xor_translate_set(&right, n) == expected,
            "[N, ...) ∔ N is δ_0 ∪ the δ_{κ_j+1}",
            || format!("N={n}"),
        )?;
        checks += 3;
    }
    Ok(SuiteOutcome {
        suite: "lemma-intervals",
        checks,
    })
}

/// Partition invariants for every `0 ≤ a < b ≤ max_b`.
pub fn verify_partition(max_b: u64) -> SuiteResult {
    let mut checks = 0;
    let mut cover = Vec::new();
    for b in 1..=max_b {
        for a in 0..b {
            let interval = IntervalZ::new(a, b)?;
            let p = partition_interval(interval);
            let at = || format!("I={interval}");

            cover.clear();
            for (piece, block, shift) in p.pieces() {
                let image = xor_translate_set(&piece.to_vec(), shift);
                ensure(image == block.interval().to_vec(), "piece maps onto its δ block", || {
                    format!("I={interval}: {piece} ∔ {shift} ≠ {block}")
                })?;
                cover.extend(piece.range());
            }
            let total = cover.len();
            cover.sort_unstable();
            cover.dedup();
            ensure(cover.len() == total, "pieces are disjoint", at)?;
            ensure(
                cover.len() as u64 == b - a && cover.first() == Some(&a) && cover.last() == Some(&(b - 1)),
                "pieces cover [a, b-1]",
                at,
            )?;

            ensure(p.filled() + 1 == p.tail_start(), "end of last left interval", at)?;
            let top = p.ktilde[p.rho - 1];
            ensure(
                (a >> top) & 1 == 0 && (b >> top) & 1 == 1 && (a >> (top + 1)) == (b >> (top + 1)),
                "choice of k̃_ρ",
                at,
            )?;

            if p.rho < p.r {
                let jq = p.left_interval(p.q)?;
                let jq1 = p.left_interval(p.q + 1)?;
                let expected = IntervalZ::new(p.tail_start(), b)?;
                ensure(jq.intersection(&interval) == Some(expected), "J_q ∩ I", at)?;
                ensure(jq1.intersection(&interval).is_none(), "J_{q+1} ∩ I = ∅", at)?;
            } else {
                ensure(p.merged_tail().is_none() && p.tail.is_empty(), "empty tail when ρ = r", at)?;
            }
            checks += 1;
        }
    }
    Ok(SuiteOutcome {
        suite: "partition",
        checks,
    })
}

fn random_function(rng: &mut ChaCha8Rng, resolution: u32) -> DyadicFunction {
    let values = (0..1usize << resolution)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    DyadicFunction::new(resolution, values).expect("finite values")
}

/// Parseval and round trip on random functions; orthonormality and the
/// character identity exhaustively at `min(K, 8)`.
pub fn verify_transform(resolution: u32, trials: usize, seed: u64) -> SuiteResult {
    let mut checks = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let f = random_function(&mut rng, resolution);
        let s = fwht_analyze(&f);
        let l2 = lp_norm(&f, 2.0)?.powi(2);
        ensure((s.energy() - l2).abs() <= EXACT_TOLERANCE * l2, "Parseval", || {
            format!("trial {t}: Σc² = {}, ‖f‖² = {l2}", s.energy())
        })?;
        let diff = fwht_synthesize(&s).max_abs_diff(&f)?;
        ensure(diff <= EXACT_TOLERANCE, "round trip", || format!("trial {t}: max diff {diff:e}"))?;
        checks += 2;
    }

    let small = resolution.min(8);
    let len = 1u64 << small;
    let walsh: Vec<DyadicFunction> = (0..len)
        .map(|n| walsh_function(n, small))
        .collect::<Result<_, _>>()?;
    for a in 0..len {
        for b in 0..len {
            let product = multiply_pointwise(&walsh[a as usize], &walsh[b as usize])?;
            ensure(product == walsh[xor_add(a, b) as usize], "w_a w_b = w_{a∔b}", || {
                format!("a={a}, b={b}")
            })?;
            let inner = product.values().iter().sum::<f64>() / len as f64;
            let expected = if a == b { 1.0 } else { 0.0 };
            ensure((inner - expected).abs() <= EXACT_TOLERANCE, "orthonormality", || {
                format!("(w_{a}, w_{b}) = {inner}")
            })?;
            checks += 2;
        }
    }
    Ok(SuiteOutcome {
        suite: "transform",
        checks,
    })
}

/// Decomposition identities on `trials` random instances drawn from `spec`.
pub fn verify_chain(spec: &InstanceSpec, trials: usize) -> SuiteResult {
    let mut checks = 0;
    for t in 0..trials as u64 {
        let trial = spec.for_trial(t);
        let instance = generate_instance(&trial)?;
        let decomposed = decompose_instance(&instance)?;
        let seed = trial.seed;
        let resolution = decomposed.resolution();

        for ((interval, f), d) in instance.iter().zip(decomposed.pieces()) {
            let diff = d.reconstruct().max_abs_diff(f)?;
            ensure(diff <= EXACT_TOLERANCE, "reconstruction from pieces", || {
                format!("seed {seed}, I={interval}: max diff {diff:e}")
            })?;
            for loc in d.localization() {
                ensure(loc.leakage <= EXACT_TOLERANCE, "spectral localization", || {
                    let piece = match loc.piece {
                        PieceLabel::Singleton => "g_0".to_string(),
                        PieceLabel::Left(j) => format!("g_{}", j + 1),
                        PieceLabel::Tail(i) => format!("g̃_{}", d.partition.rho + i + 1),
                        PieceLabel::MergedTail => "g_q".to_string(),
                    };
                    format!("seed {seed}, I={interval}: {piece} leaks {:e} outside {}", loc.leakage, loc.block)
                })?;
            }
            let merged = d.merged_tail_from_pieces()?.max_abs_diff(&d.merged_tail)?;
            ensure(merged <= EXACT_TOLERANCE, "merged tail g_q = w_a w_b Σ g̃", || {
                format!("seed {seed}, I={interval}: max diff {merged:e}")
            })?;
            checks += 3;
        }

        for p in [1.25, 1.5, 2.0] {
            let c = decomposed.chain(p)?;
            ensure(close(c.d1, c.d2, EXACT_TOLERANCE), "D1 = D2", || {
                format!("seed {seed}, p={p}: {} vs {}", c.d1, c.d2)
            })?;
            ensure(close(c.e, c.e_modulated, EXACT_TOLERANCE), "‖{{g_m}}‖ = ‖{{f_m}}‖", || {
                format!("seed {seed}, p={p}: {} vs {}", c.e_modulated, c.e)
            })?;
            if p == 2.0 {
                ensure((c.ratio() - 1.0).abs() <= ANCHOR_TOLERANCE, "p = 2 ratio", || {
                    format!("seed {seed}: {}", c.ratio())
                })?;
            }
            checks += 2;
        }

        let (h, a) = decomposed.relocation()?;
        let total = DyadicFunction::sum(resolution, instance.iter().map(|(_, f)| f))?;
        let diff = operator_g(&h, &a)?.max_abs_diff(&total)?;
        ensure(diff <= EXACT_TOLERANCE, "G reproduces Σ f_m", || {
            format!("seed {seed}: max diff {diff:e}")
        })?;
        checks += 1;
    }
    Ok(SuiteOutcome {
        suite: "chain",
        checks,
    })
}
