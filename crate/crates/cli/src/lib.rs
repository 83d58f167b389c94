//! The `obf` command line: objective Bayes factor bounds, priors,
//! training-sample enumeration, ANOVA/linear-model evidence, p-value
//! calibration and the seeded simulation harness.
//!
//! Exit codes: 0 success, 2 input/validation error, 3 nonexistent bound,
//! 4 improper training sample, 5 rank-deficient design, 6 insufficient
//! data. All evidence columns in CSV output are base-10 logs with 12
//! significant digits.

pub mod io;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use obf_core::calibration::{exp_wilks_pvalue, gs_bayes_factor, robust_lower_bound, PValue};
use obf_core::discrete::{cox_sequential, pg_bounds, pnb_bounds};
use obf_core::exponential::exp_bounds;
use obf_core::fmt::sig12;
use obf_core::linear::{
    anova_bounds, gl_bf01_full, gl_empirical_bound, AnovaSpec, BoundMode, DesignPair, PriorKind,
    ScanConfig,
};
use obf_core::montecarlo::{run, SimulationPlan};
use obf_core::mts;
use obf_core::normal::{scale_intrinsic_prior, scale_sp_prior};
use obf_core::{Attainer, BoundReport, BoundVariant, EvidenceError, ModelTest, Sample};

const COX_FIXTURE: &str = include_str!("../data/cox1962.txt");

#[derive(Parser)]
#[command(
    name = "obf",
    about = "Objective Bayes factors, intrinsic bounds, priors and calibrations",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate minimal training samples (1-based index tuples).
    Mts(MtsArgs),
    /// Bayes factor bounds for one of the catalog tests.
    Bounds(BoundsArgs),
    /// Prior densities on a grid (normal-scale SP and intrinsic priors).
    Priors(PriorsArgs),
    /// One-way ANOVA bounds from grouped data.
    Anova(AnovaArgs),
    /// Nested linear-model bounds from design matrices.
    Lm(LmArgs),
    /// p-value calibrations.
    Calibrate(CalibrateArgs),
    /// Seeded Monte Carlo scenarios.
    Simulate(SimulateArgs),
    /// Sequential Poisson-vs-Geometric bounds on the Cox count data.
    Cox(CoxArgs),
}

#[derive(Args)]
struct MtsArgs {
    /// Sample size.
    #[arg(long)]
    n: usize,
    /// Training-sample size.
    #[arg(long)]
    k: usize,
    /// Draw this many tuples at random instead of enumerating.
    #[arg(long)]
    limit: Option<usize>,
    /// Seed for --limit draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsTest {
    Exponential,
    PoissonVsGeometric,
    PoissonVsNegbinomial,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct BoundsArgs {
    /// Which test family.
    #[arg(long, value_enum)]
    test: BoundsTest,
    /// Null rate for the exponential test.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Number of successes for the negative binomial.
    #[arg(long)]
    r: Option<u32>,
    /// Data file (whitespace-separated numbers, '#' comments).
    #[arg(long)]
    data: PathBuf,
    /// Explain which formulas and conventions produced each row.
    #[arg(long)]
    explain: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorsTest {
    NormalScale,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PriorsArgs {
    #[arg(long, value_enum)]
    test: PriorsTest,
    /// Null precision.
    #[arg(long)]
    h0: f64,
    /// Grid as start:end:step.
    #[arg(long)]
    grid: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorFlavor {
    FullJeffreys,
    ModifiedJeffreys,
    Reference,
}

#[derive(Args)]
struct AnovaArgs {
    /// CSV rows `group_label,value`.
    #[arg(long)]
    groups: PathBuf,
    #[arg(long, value_enum)]
    prior: PriorFlavor,
    /// Seed for subsampled training-sample scans.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
struct LmArgs {
    /// Design matrix of the null model (whitespace-delimited).
    #[arg(long)]
    a0: PathBuf,
    /// Design matrix of the alternative model.
    #[arg(long)]
    a1: PathBuf,
    /// Response vector file.
    #[arg(long)]
    y: PathBuf,
    /// Prior exponent of the null model.
    #[arg(long)]
    q0: u32,
    /// Prior exponent of the alternative model.
    #[arg(long)]
    q1: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalibrateTest {
    Exponential,
    SimpleNormalMean,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CalibrateArgs {
    /// A p-value to calibrate directly.
    #[arg(long)]
    p: Option<f64>,
    /// Or a test to compute the p-value and bounds from data.
    #[arg(long, value_enum)]
    test: Option<CalibrateTest>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Registered scenario id.
    #[arg(long)]
    scenario: String,
    /// Master seed; defaults to OBF_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications (scenario default when omitted).
    #[arg(long)]
    reps: Option<usize>,
    /// Maximum sample size (scenario default when omitted).
    #[arg(long)]
    n: Option<usize>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoxArgs {
    /// Count data file; the shipped Cox (1962) fixture when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Shuffle the data first with this seed.
    #[arg(long)]
    shuffle_seed: Option<u64>,
}

enum CliError {
    Input(String),
    Evidence(EvidenceError),
}

impl From<EvidenceError> for CliError {
    fn from(e: EvidenceError) -> Self {
        CliError::Evidence(e)
    }
}

impl From<io::InputError> for CliError {
    fn from(e: io::InputError) -> Self {
        CliError::Input(e.0)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Evidence(e) => e.exit_code(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => m.clone(),
            CliError::Evidence(e) => e.to_string(),
        }
    }
}

/// Parses and runs one invocation; returns the process exit code.
pub fn run_cli<W: Write, E: Write>(args: &[String], out: &mut W, err: &mut E) -> i32 {
    let mut argv = vec!["obf".to_string()];
    argv.extend_from_slice(args);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are success; everything else is input error.
            return if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch<W: Write, E: Write>(cli: Cli, out: &mut W, err: &mut E) -> Result<(), CliError> {
    match cli.command {
        Command::Mts(a) => cmd_mts(a, out),
        Command::Bounds(a) => cmd_bounds(a, out, err),
        Command::Priors(a) => cmd_priors(a, out),
        Command::Anova(a) => cmd_anova(a, out, err),
        Command::Lm(a) => cmd_lm(a, out),
        Command::Calibrate(a) => cmd_calibrate(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Cox(a) => cmd_cox(a, out),
    }
}

fn write_io(e: std::io::Error) -> CliError {
    CliError::Input(format!("write failed: {e}"))
}

fn cmd_mts<W: Write>(a: MtsArgs, out: &mut W) -> Result<(), CliError> {
    match a.limit {
        Some(count) => {
            for t in mts::random_subsample(a.n, a.k, count, a.seed)? {
                writeln!(out, "{t}").map_err(write_io)?;
            }
        }
        None => {
            for t in mts::enumerate(a.n, a.k)? {
                writeln!(out, "{t}").map_err(write_io)?;
            }
        }
    }
    Ok(())
}

fn attainer_str(attainer: &Option<Attainer>) -> String {
    match attainer {
        None => String::new(),
        Some(Attainer::Point(p)) => sig12(*p),
        Some(Attainer::Sample(t)) => t
            .indices()
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn write_reports<W: Write>(reports: &[&BoundReport], out: &mut W) -> Result<(), CliError> {
    writeln!(out, "variant,log10_value,attainer").map_err(write_io)?;
    for r in reports {
        writeln!(
            out,
            "{},{},{}",
            r.variant.as_str(),
            sig12(r.value.log10()),
            attainer_str(&r.attainer)
        )
        .map_err(write_io)?;
    }
    Ok(())
}

fn explain_reports<E: Write>(reports: &[&BoundReport], header: &str, err: &mut E) {
    let _ = writeln!(err, "# {header}");
    for r in reports {
        if !r.notes.is_empty() {
            let _ = writeln!(err, "# {}: {}", r.variant.as_str(), r.notes);
        }
    }
}

fn cmd_bounds<W: Write, E: Write>(
    a: BoundsArgs,
    out: &mut W,
    err: &mut E,
) -> Result<(), CliError> {
    let sample = io::read_data(&a.data)?;
    match a.test {
        BoundsTest::Exponential => {
            let lambda0 = a
                .lambda0
                .ok_or_else(|| CliError::Input("--lambda0 is required".into()))?;
            ModelTest::Exponential { lambda0 }.validate()?;
            let b = exp_bounds(&sample, lambda0)?;
            let reports = [
                &b.theoretical.upper10,
                &b.theoretical.lower01,
                &b.empirical.upper10,
                &b.empirical.lower01,
                &b.aibf10,
            ];
            if a.explain {
                explain_reports(
                    &reports,
                    "exponential test: B01(y(l)) = y lambda0 exp(-lambda0 y), \
                     full B01 = lambda0^n exp(-lambda0 S) S^n / Gamma(n)",
                    err,
                );
            }
            write_reports(&reports, out)
        }
        BoundsTest::PoissonVsGeometric => {
            let b = pg_bounds(&sample)?;
            let reports = [
                &b.theoretical.upper10,
                &b.theoretical.lower01,
                &b.empirical.upper10,
                &b.empirical.lower01,
                &b.aibf10,
            ];
            if a.explain {
                explain_reports(
                    &reports,
                    "Poisson vs Geometric: B01(y(l)) = 1/Gamma(y + 3/2), supremum \
                     2/sqrt(pi) at y = 0",
                    err,
                );
            }
            write_reports(&reports, out)
        }
        BoundsTest::PoissonVsNegbinomial => {
            let r = a
                .r
                .ok_or_else(|| CliError::Input("--r is required".into()))?;
            let b = pnb_bounds(&sample, r)?;
            let reports = [
                &b.theoretical_lower01,
                &b.empirical.upper10,
                &b.empirical.lower01,
            ];
            if a.explain {
                explain_reports(
                    &reports,
                    "Poisson vs Negative Binomial: training-point ratio \
                     Gamma(r+y+1/2)Gamma(y+1/2)/(Gamma(y+r)Gamma(y)), increasing in y; \
                     y = 0 is improper",
                    err,
                );
            }
            write_reports(&reports, out)
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!(
            "grid must be start:end:step, got '{spec}'"
        )));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    let nums = nums.map_err(|_| CliError::Input(format!("malformed grid '{spec}'")))?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || end < start {
        return Err(CliError::Input(format!(
            "grid needs end >= start and step > 0, got '{spec}'"
        )));
    }
    let count = ((end - start) / step).round() as usize;
    Ok((0..=count)
        .map(|i| start + i as f64 * step)
        .filter(|&h| h <= end + 1e-12)
        .collect())
}

fn cmd_priors<W: Write>(a: PriorsArgs, out: &mut W) -> Result<(), CliError> {
    let PriorsTest::NormalScale = a.test;
    let sp = scale_sp_prior(a.h0)?;
    let ip = scale_intrinsic_prior(a.h0)?;
    writeln!(out, "h,sp_prior,intrinsic_prior").map_err(write_io)?;
    for h in parse_grid(&a.grid)? {
        writeln!(out, "{},{},{}", sig12(h), sig12(sp.density(h)), sig12(ip.density(h)))
            .map_err(write_io)?;
    }
    Ok(())
}

fn cmd_anova<W: Write, E: Write>(a: AnovaArgs, out: &mut W, err: &mut E) -> Result<(), CliError> {
    let (sizes, sample) = io::read_grouped(&a.groups)?;
    let prior_kind = match a.prior {
        PriorFlavor::FullJeffreys => PriorKind::FullJeffreys,
        PriorFlavor::ModifiedJeffreys => PriorKind::ModifiedJeffreys,
        PriorFlavor::Reference => PriorKind::ReferencePrior,
    };
    let spec = AnovaSpec::new(sizes, prior_kind)?;
    let scan = ScanConfig {
        seed: a.seed,
        ..ScanConfig::default()
    };
    let b = anova_bounds(&spec, &sample, &scan)?;
    let reports = [
        &b.theoretical_upper10,
        &b.theoretical_lower01,
        &b.empirical_upper10,
        &b.empirical_lower01,
    ];
    if a.explain {
        explain_reports(
            &reports,
            "one-way ANOVA SS bounds; reference prior has no bound (exit 3)",
            err,
        );
    }
    write_reports(&reports, out)
}

fn cmd_lm<W: Write>(a: LmArgs, out: &mut W) -> Result<(), CliError> {
    let a0 = io::read_matrix(&a.a0)?;
    let a1 = io::read_matrix(&a.a1)?;
    let y = io::read_data(&a.y)?;
    let design = DesignPair::new(a0, a1, a.q0, a.q1)?;
    let full01 = gl_bf01_full(&design, &y)?;
    let scan = ScanConfig {
        seed: a.seed,
        ..ScanConfig::default()
    };
    let lower = gl_empirical_bound(&design, &y, BoundMode::Lower01, &scan)?;
    let upper = gl_empirical_bound(&design, &y, BoundMode::Upper10, &scan)?;
    let full = BoundReport::new(BoundVariant::Plain01, full01);
    write_reports(&[&full, &lower, &upper], out)
}

fn cmd_calibrate<W: Write>(a: CalibrateArgs, out: &mut W) -> Result<(), CliError> {
    match (a.p, a.test) {
        (Some(p), None) => {
            let p = PValue::supplied(p)?;
            writeln!(out, "p,robust_bound").map_err(write_io)?;
            writeln!(out, "{},{}", sig12(p.p), sig12(robust_lower_bound(p)))
                .map_err(write_io)?;
            Ok(())
        }
        (None, Some(CalibrateTest::Exponential)) => {
            let lambda0 = a
                .lambda0
                .ok_or_else(|| CliError::Input("--lambda0 is required".into()))?;
            let data = a
                .data
                .ok_or_else(|| CliError::Input("--data is required".into()))?;
            let sample = io::read_data(&data)?;
            let p = exp_wilks_pvalue(&sample, lambda0)?;
            let bound = robust_lower_bound(p);
            let ibf = exp_bounds(&sample, lambda0)?;
            writeln!(out, "p_wilks,robust_bound,log10_ibf_lower01").map_err(write_io)?;
            writeln!(
                out,
                "{},{},{}",
                sig12(p.p),
                sig12(bound),
                sig12(ibf.theoretical.lower01.value.log10())
            )
            .map_err(write_io)?;
            Ok(())
        }
        (None, Some(CalibrateTest::SimpleNormalMean)) => {
            let data = a
                .data
                .ok_or_else(|| CliError::Input("--data is required".into()))?;
            let sample = io::read_data(&data)?;
            let r = gs_bayes_factor(&ModelTest::SimpleNormalMean, &sample)?;
            write_reports(&[&r], out)
        }
        _ => Err(CliError::Input(
            "use either --p P or --test TEST with its inputs".into(),
        )),
    }
}

fn cmd_simulate<W: Write>(a: SimulateArgs, out: &mut W) -> Result<(), CliError> {
    let seed = a
        .seed
        .or_else(|| {
            std::env::var("OBF_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(0);
    let plan = SimulationPlan::for_scenario(&a.scenario, seed, a.reps, a.n)?;
    let result = run(&plan)?;
    let csv = result.to_csv();
    match a.out {
        Some(path) => fs::write(&path, csv)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(csv.as_bytes()).map_err(write_io)?,
    }
    Ok(())
}

fn cmd_cox<W: Write>(a: CoxArgs, out: &mut W) -> Result<(), CliError> {
    let sample = match a.data {
        Some(path) => io::read_data(&path)?,
        None => io::parse_data_str(COX_FIXTURE, "cox1962")?,
    };
    let steps = cox_sequential(&sample, a.shuffle_seed)?;
    writeln!(out, "prefix_n,log10_upper10,log10_lower01").map_err(write_io)?;
    for s in steps {
        writeln!(
            out,
            "{},{},{}",
            s.prefix_n,
            sig12(s.upper10.value.log10()),
            sig12(s.lower01.value.log10())
        )
        .map_err(write_io)?;
    }
    Ok(())
}

/// The shipped Cox (1962) fixture as a sample.
pub fn cox_fixture() -> Sample {
    io::parse_data_str(COX_FIXTURE, "cox1962").expect("embedded fixture parses")
}
