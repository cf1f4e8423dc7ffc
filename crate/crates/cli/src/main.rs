use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use yardstack::bench::{self, Suite, COMPARISON_REPS};
use yardstack::constraints::validate_layout;
use yardstack::fitness::{layout_fitness, FitnessMode};
use yardstack::ga::{self, GaConfig, GaError};
use yardstack::io::{self as yio, FormatError, GenSpec, DEFAULT_DATE_RANGE};
use yardstack::lifo::lifo_allocate;
use yardstack::yard::{ContainerType, YardConfig};

#[derive(Parser)]
#[command(name = "yardstack", version, about = "Container yard storage allocation: GA solver, LIFO baseline and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the genetic algorithm on an instance.
    Solve(SolveArgs),
    /// Allocate an instance with the LIFO baseline.
    Baseline(BaselineArgs),
    /// Check a plan against an instance and list every violation.
    Validate(ValidateArgs),
    /// Run a parameter sweep and write one CSV row per run.
    Bench(BenchArgs),
    /// Generate a random instance file.
    Generate(GenerateArgs),
    /// Aggregate a bench CSV into per-case means.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct GaFlags {
    /// Population size N.
    #[arg(long, default_value_t = 30)]
    pop_size: usize,
    /// Generations without improvement before stopping (N_iter).
    #[arg(long, default_value_t = 20)]
    stall: u32,
    #[arg(long, default_value_t = 0.7)]
    p_cross: f64,
    #[arg(long, default_value_t = 0.2)]
    p_mut: f64,
    /// Rehandle counting: `blocking` or `above`.
    #[arg(long, default_value = "blocking")]
    mode: FitnessMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hard cap on generations (default 10 · stall · pop-size).
    #[arg(long)]
    max_generations: Option<u32>,
}

impl GaFlags {
    fn config(&self) -> GaConfig {
        GaConfig {
            pop_size: self.pop_size,
            stall_window: self.stall,
            max_generations: self.max_generations,
            p_cross: self.p_cross,
            p_mut: self.p_mut,
            seed: self.seed,
            mode: self.mode,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Where to write the best plan.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON run report (stdout when omitted).
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    ga: GaFlags,
}

#[derive(Args)]
struct BaselineArgs {
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    plan: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// type-influence, stall-influence, popsize-influence or lifo-comparison.
    suite: Suite,
    /// Repetitions per case (default 15 for lifo-comparison, 5 otherwise).
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed: instances use it directly, repetition r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Table IV preset 1..=5 (uses the comparison yard).
    #[arg(long, conflicts_with_all = ["counts", "yard"])]
    preset: Option<usize>,
    /// Six comma-separated counts: dry, empty, open-top, open-side, tank, reefer.
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<u32>>,
    /// n1,n2,n3,refrigerated blocks,regular blocks.
    #[arg(long, value_delimiter = ',', default_value = "3,3,3,3,3")]
    yard: Vec<u32>,
    /// Inclusive delivery date range min,max.
    #[arg(long, value_delimiter = ',')]
    dates: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    csv: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// The instance or plan is fine but no feasible result exists, or the plan
    /// breaks a rule.
    Infeasible(anyhow::Error),
    /// Bad input: unreadable, malformed or inconsistent files and arguments.
    Usage(anyhow::Error),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Unsatisfiable(_) => Failure::Infeasible(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn ga_failure(e: GaError) -> Failure {
    match e {
        GaError::GenerationFailed { .. } => Failure::Infeasible(e.into()),
        other => Failure::Usage(other.into()),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SolveReport {
    #[serde(rename = "F_i")]
    f_initial: f64,
    #[serde(rename = "F_f")]
    f_final: f64,
    generations: u32,
    elapsed_ms: f64,
    seed: u64,
    mode: FitnessMode,
    pop_size: usize,
    stall: u32,
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = yio::load_instance(&args.instance)?;
    let config = args.ga.config();
    let result = ga::run(&instance, &config).map_err(ga_failure)?;
    if let Some(out) = &args.out {
        yio::save_plan(out, result.best.layout())?;
    }
    let report = SolveReport {
        f_initial: result.initial_fitness(),
        f_final: result.final_fitness(),
        generations: result.generations_run,
        elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
        seed: config.seed,
        mode: config.mode,
        pop_size: config.pop_size,
        stall: config.stall_window,
    };
    emit(args.report.as_deref(), &to_json(&report))
}

#[derive(Serialize)]
struct BaselineReport {
    blocking: f64,
    above: f64,
}

fn baseline(args: BaselineArgs) -> Result<(), Failure> {
    let instance = yio::load_instance(&args.instance)?;
    let layout = lifo_allocate(&instance).map_err(|e| Failure::Infeasible(e.into()))?;
    let fitness = |mode| layout_fitness(&layout, &instance, mode).map(|f| f.value());
    let report = BaselineReport {
        blocking: fitness(FitnessMode::Blocking).context("scoring baseline")?,
        above: fitness(FitnessMode::Above).context("scoring baseline")?,
    };
    if let Some(out) = &args.out {
        yio::save_plan(out, &layout)?;
    }
    emit(None, &to_json(&report))
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let instance = yio::load_instance(&args.instance)?;
    let layout = yio::load_plan(&args.plan, &instance)?;
    let violations = validate_layout(&layout, &instance).context("plan does not match instance")?;
    let mut out = String::new();
    for v in &violations {
        out.push_str(&format!("{v}\n"));
    }
    if violations.is_empty() {
        out.push_str("ok: no violations\n");
        emit(None, &out)
    } else {
        emit(None, &out)?;
        Err(Failure::Infeasible(anyhow::anyhow!("{} violation(s)", violations.len())))
    }
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    let reps = args.reps.unwrap_or(match args.suite {
        Suite::LifoComparison => COMPARISON_REPS,
        _ => 5,
    });
    let rows = bench::run_suite(args.suite, reps, args.seed).map_err(|e| match e {
        bench::BenchError::Ga(g) => ga_failure(g),
        bench::BenchError::Lifo(l) => Failure::Infeasible(l.into()),
        other => Failure::Usage(other.into()),
    })?;
    let mut buf = Vec::new();
    bench::write_csv(&rows, &mut buf).context("writing csv")?;
    emit(args.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let usage = |msg: &str| Failure::Usage(anyhow::anyhow!("{msg}"));
    let dates = match args.dates.as_deref() {
        None => DEFAULT_DATE_RANGE,
        Some(&[lo, hi]) => (lo, hi),
        Some(_) => return Err(usage("--dates takes two values: min,max")),
    };
    let instance = match (args.preset, args.counts) {
        (Some(n), _) => yio::table_iv_preset(n, dates, args.seed)?,
        (None, Some(counts)) => {
            let y = &args.yard;
            if y.len() != 5 {
                return Err(usage("--yard takes five values: n1,n2,n3,refrigerated,regular"));
            }
            let config = YardConfig::new(y[0], y[1], y[2], y[3], y[4]).map_err(|e| Failure::Usage(e.into()))?;
            let counts: [u32; 6] = counts
                .try_into()
                .map_err(|_| usage("--counts takes six values: dry,empty,open-top,open-side,tank,reefer"))?;
            yio::generate_instance(&GenSpec::new(config, counts).with_seed(args.seed).with_dates(dates.0, dates.1))?
        }
        (None, None) => {
            return Err(Failure::Usage(anyhow::anyhow!(
                "give --preset or --counts ({})",
                ContainerType::ALL.map(|t| t.name()).join(",")
            )));
        }
    };
    emit(args.out.as_deref(), &yio::instance_to_json(&instance))
}

fn summarize(args: SummarizeArgs) -> Result<(), Failure> {
    let file = fs::File::open(&args.csv).with_context(|| format!("opening {}", args.csv.display()))?;
    let rows = bench::read_csv(file).context("reading bench csv")?;
    let mut buf = Vec::new();
    bench::write_summary(&bench::summarize(&rows), &mut buf).context("writing summary")?;
    emit(args.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Baseline(a) => baseline(a),
        Command::Validate(a) => validate(a),
        Command::Bench(a) => run_bench(a),
        Command::Generate(a) => generate(a),
        Command::Summarize(a) => summarize(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
