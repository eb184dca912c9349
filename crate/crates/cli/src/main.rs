//! `walsh-lp`: verification suites and the constant-estimation harness.
//!
//! Exit codes: 0 when every check passes, 1 when an assertion fails or a run
//! errors out, 2 on usage errors.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use walsh_lp::harness::{ConstantsEstimate, WeakTypeSummary};
use walsh_lp::verify::{self, SuiteOutcome, Violation};
use walsh_lp::{
    emit_report, estimate_constants, weak_type_probe, CoefficientLaw, InstanceSpec, IntervalFamily, LambdaGrid,
    ReportFormat, WalshError, WeakOperator,
};

const THREADS_ENV: &str = "WALSH_LP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "walsh-lp", version, about = "Walsh-Paley Littlewood-Paley verification and estimation")]
#[command(after_help = "Set WALSH_LP_THREADS to a positive integer to cap the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an exact self-check suite.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Estimate the ratio ‖Σf_m‖_p / ‖{f_m}‖_{L^p(l²)} over random instances.
    Estimate(EstimateArgs),
    /// Probe sup_λ λ|{|Tf| > λ}| / ‖f‖₁ for T = S or G.
    WeakType(WeakTypeArgs),
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Group axioms of ∔ for all a, b, c below --max-n.
    Group {
        /// Exclusive upper bound on a, b, c (integers).
        #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..=4096))]
        max_n: u64,
    },
    /// Interval image rows of every N in [1, --max-n) against brute-force translation.
    LemmaIntervals {
        /// Exclusive upper bound on N (integers).
        #[arg(long, default_value_t = 2048, value_parser = clap::value_parser!(u64).range(1..=1 << 20))]
        max_n: u64,
        /// Number of right-hand tail rows checked per N.
        #[arg(long, default_value_t = 3)]
        tail: usize,
    },
    /// Partition of every interval [a, b) with 0 ≤ a < b ≤ --max-b.
    Partition {
        /// Largest right endpoint b (integer, at least 1).
        #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..=1 << 14))]
        max_b: u64,
    },
    /// Parseval, round trip, orthonormality and the character identity.
    Transform {
        /// Resolution K: functions live on 2^K dyadic cells (1..=20).
        #[arg(long, short = 'k', default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=20))]
        resolution: u32,
        /// Number of random functions.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Seed of the ChaCha8 generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decomposition identities on random instances.
    Chain {
        #[command(flatten)]
        instance: InstanceArgs,
    },
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Resolution K: functions live on 2^K dyadic cells (1..=20).
    #[arg(long, short = 'k', default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=20))]
    resolution: u32,
    /// Number of random instances; trial t uses seed + t.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Base seed of the ChaCha8 generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest number of intervals per instance.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    min_intervals: u64,
    /// Largest number of intervals per instance.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    max_intervals: u64,
    /// Interval family: random-disjoint, dyadic-blocks, singletons or full-range.
    #[arg(long, default_value = "random-disjoint")]
    family: IntervalFamily,
    /// Walsh coefficient law: gaussian, rademacher-signs or all-ones.
    #[arg(long, default_value = "gaussian")]
    law: CoefficientLaw,
}

impl InstanceArgs {
    fn spec(&self) -> Result<InstanceSpec, String> {
        let spec = InstanceSpec::new(self.resolution, self.family.clone())
            .with_law(self.law)
            .with_intervals(self.min_intervals as usize, self.max_intervals as usize)
            .with_seed(self.seed);
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    fn echo(&self) -> String {
        format!(
            "seed={} K={} trials={} M={}..={} family={} law={}",
            self.seed, self.resolution, self.trials, self.min_intervals, self.max_intervals, self.family, self.law
        )
    }
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Write the per-trial report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, default_value = "json")]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Comma-separated exponents, each in (1, 2].
    #[arg(long, value_delimiter = ',', default_value = "1.1,1.25,1.5,2", value_parser = parse_exponent)]
    p_grid: Vec<f64>,
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args)]
struct WeakTypeArgs {
    /// Operator: S (square function of Σf_m) or G (relocation of the modulated pieces).
    #[arg(long, default_value = "S")]
    operator: WeakOperator,
    /// Number of geometric thresholds λ spanning [1e-3, 1e3] times the median magnitude.
    #[arg(long, default_value_t = 121, value_parser = clap::value_parser!(u64).range(2..))]
    lambda_points: u64,
    /// Take the exact supremum over all λ > 0 instead of a grid.
    #[arg(long)]
    exact_lambda: bool,
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    report: ReportArgs,
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    let p: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if p > 1.0 && p <= 2.0 {
        Ok(p)
    } else {
        Err(format!("p = {s} is outside (1, 2]"))
    }
}

/// Why a run did not succeed.
enum Failure {
    Usage(String),
    Assertion(String),
}

impl From<Violation> for Failure {
    fn from(v: Violation) -> Self {
        Failure::Assertion(v.to_string())
    }
}

impl From<WalshError> for Failure {
    fn from(e: WalshError) -> Self {
        Failure::Assertion(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Assertion(format!("cannot size the thread pool: {e}")))
}

fn run_verify(cmd: VerifyCommand) -> Result<String, Failure> {
    let (header, outcome): (String, Result<SuiteOutcome, Violation>) = match cmd {
        VerifyCommand::Group { max_n } => (format!("max-n={max_n}"), verify::verify_group(max_n)),
        VerifyCommand::LemmaIntervals { max_n, tail } => (
            format!("max-n={max_n} tail={tail}"),
            verify::verify_lemma_intervals(max_n, tail),
        ),
        VerifyCommand::Partition { max_b } => (format!("max-b={max_b}"), verify::verify_partition(max_b)),
        VerifyCommand::Transform {
            resolution,
            trials,
            seed,
        } => (
            format!("seed={seed} K={resolution} trials={trials}"),
            verify::verify_transform(resolution, trials as usize, seed),
        ),
        VerifyCommand::Chain { instance } => {
            let spec = instance.spec().map_err(Failure::Usage)?;
            (instance.echo(), verify::verify_chain(&spec, instance.trials as usize))
        }
    };
    let outcome = outcome.map_err(|v| Failure::Assertion(format!("{header}: {v}")))?;
    Ok(format!("{header}\nPASS {outcome}\n"))
}

fn estimate_table(est: &ConstantsEstimate) -> String {
    let mut out = String::new();
    for s in &est.summaries {
        let o = &s.overall;
        let _ = writeln!(
            out,
            "p={} trials={} max={:.12} median={:.12} mean={:.12} max-nonincreasing-in-M={}",
            s.p, o.count, o.max, o.median, o.mean, s.max_nonincreasing_in_count
        );
        for (m, st) in &s.by_count {
            let _ = writeln!(
                out,
                "  M={m:<3} trials={:<4} max={:.12} median={:.12} mean={:.12}",
                st.count, st.max, st.median, st.mean
            );
        }
    }
    let _ = writeln!(out, "max ratio over sweep: {:.12}", est.max_ratio());
    out
}

fn run_estimate(args: EstimateArgs) -> Result<String, Failure> {
    let spec = args.instance.spec().map_err(Failure::Usage)?;
    let est = estimate_constants(&spec, &args.p_grid, args.instance.trials as usize)?;
    let mut out = format!("{}\n{}", args.instance.echo(), estimate_table(&est));
    if let Some(path) = &args.report.out {
        emit_report(&est.records, args.report.format, path)?;
        let _ = writeln!(out, "report: {} ({} records)", path.display(), est.records.len());
    }
    Ok(out)
}

fn write_weak_report(summary: &WeakTypeSummary, report: &ReportArgs) -> Result<(), Failure> {
    let Some(path) = &report.out else {
        return Ok(());
    };
    let body = match report.format {
        ReportFormat::Json => serde_json::to_string_pretty(summary).expect("serializable") + "\n",
        ReportFormat::Csv => {
            let mut s = String::from("seed,value\n");
            for t in &summary.trials {
                let _ = writeln!(s, "{},{}", t.seed, t.value);
            }
            s
        }
    };
    std::fs::write(path, body).map_err(|source| {
        Failure::from(WalshError::Io {
            path: path.clone(),
            source,
        })
    })
}

fn run_weak_type(args: WeakTypeArgs) -> Result<String, Failure> {
    let spec = args.instance.spec().map_err(Failure::Usage)?;
    let grid = if args.exact_lambda {
        LambdaGrid::Exact
    } else {
        LambdaGrid::Geometric {
            points: args.lambda_points as usize,
        }
    };
    let summary = weak_type_probe(args.operator, &spec, args.instance.trials as usize, grid)?;
    let st = &summary.stats;
    let mut out = format!(
        "{} operator={:?}\ntrials={} max={:.12} median={:.12} mean={:.12}\n",
        args.instance.echo(),
        args.operator,
        st.count,
        st.max,
        st.median,
        st.mean
    );
    write_weak_report(&summary, &args.report)?;
    if let Some(path) = &args.report.out {
        let _ = writeln!(out, "report: {}", path.display());
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Verify(cmd) => run_verify(cmd),
        Command::Estimate(args) => run_estimate(args),
        Command::WeakType(args) => run_weak_type(args),
    });
    match result {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("FAIL {msg}");
            ExitCode::from(1)
        }
    }
}
