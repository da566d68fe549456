//! `gen`, `run` and `analyze`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qecc_core::analysis::{epsilon_bands, fb_error_bound, fb_min_gap, fc_sample_bound, gaps, tilde_gaps};
use qecc_core::{generate, GeneratorSpec, Instance, NoiseModel, OfflineSolver};

use crate::error::{CliError, Result};
use crate::harness::{self, Algo, BudgetSpec, RunConfig, DEFAULT_REPLAYS};
use crate::instance_file::{read_instance, to_json};
use crate::record::write_csv;

#[derive(Debug, Parser)]
#[command(name = "qecc", version, about = "Correlation clustering from noisy pairwise queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance file.
    Gen(GenArgs),
    /// Run an algorithm for a number of seeded trials and write CSV.
    Run(RunArgs),
    /// Print gap statistics and theoretical reference values.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Planted,
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    /// Number of planted clusters.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Flip probability of planted similarities.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub in_mean: f64,
    #[arg(long, default_value_t = 0.0)]
    pub out_mean: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    Bernoulli,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Exact,
    Kwik,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = parse_algo)]
    pub algo: Algo,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated budgets; a trailing `m` multiplies by the number of pairs.
    #[arg(long, value_delimiter = ',', value_parser = parse_budget)]
    pub budget: Vec<BudgetSpec>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Replays behind the expected-cost estimate.
    #[arg(long, default_value_t = DEFAULT_REPLAYS)]
    pub replays: usize,
    #[arg(long, value_enum, default_value_t = Noise::Bernoulli)]
    pub noise: Noise,
    /// Standard deviation of Gaussian noise.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius_scale: f64,
    /// Offline solver of the uniform baselines.
    #[arg(long, value_enum, default_value_t = Solver::Kwik)]
    pub solver: Solver,
    #[arg(long, default_value_t = qecc_core::uniform::DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Worker threads; all available cores when absent.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fill the wall_ms column. Makes the output nondeterministic.
    #[arg(long)]
    pub timing: bool,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_parser = parse_budget)]
    pub budget: Option<BudgetSpec>,
}

fn parse_algo(s: &str) -> std::result::Result<Algo, String> {
    s.parse()
}

fn parse_budget(s: &str) -> std::result::Result<BudgetSpec, String> {
    s.parse()
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(&args),
        Command::Run(args) => cmd_run(&args),
        Command::Analyze(args) => cmd_analyze(&args),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_all(path: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: path.clone().unwrap_or_else(|| "<stdout>".into()),
        source,
    };
    let mut out = output(path)?;
    out.write_all(bytes).map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub fn gen_spec(args: &GenArgs) -> GeneratorSpec {
    match args.kind {
        Kind::Planted => GeneratorSpec::planted(args.n, args.k, args.q, args.in_mean, args.out_mean, args.seed),
        Kind::Uniform => GeneratorSpec::uniform_random(args.n, args.lo, args.hi, args.seed),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec = gen_spec(args);
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let instance = generate(&spec)?;
    write_all(&args.out, to_json(&instance).as_bytes())
}

pub fn run_config(args: &RunArgs) -> RunConfig {
    RunConfig {
        algo: args.algo,
        epsilon: args.epsilon,
        delta: args.delta,
        budgets: args.budget.clone(),
        seed: args.seed,
        trials: args.trials,
        replays: args.replays,
        noise: match args.noise {
            Noise::Bernoulli => NoiseModel::Bernoulli,
            Noise::Gaussian => NoiseModel::Gaussian { sigma: args.sigma },
        },
        radius_scale: args.radius_scale,
        solver: match args.solver {
            Solver::Exact => OfflineSolver::Exact,
            Solver::Kwik => OfflineSolver::KwikRestarts {
                restarts: args.restarts,
            },
        },
        timing: args.timing,
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    let config = run_config(args);
    let records = match args.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| harness::run(&instance, &config))?,
        None => harness::run(&instance, &config)?,
    };
    write_csv(output(&args.out)?, &records)
}

/// The table printed by `analyze`.
pub fn analysis_table(instance: &Instance, epsilon: f64, delta: f64, budget: Option<u64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n\t{}", instance.n());
    let _ = writeln!(out, "m\t{}", instance.m());
    let _ = writeln!(out, "epsilon\t{epsilon:?}");
    let _ = writeln!(out, "delta\t{delta:?}");
    let Ok(profile) = gaps(instance) else {
        let _ = writeln!(out, "no pairs");
        return out;
    };
    let bands = epsilon_bands(instance, epsilon);
    let tilde = tilde_gaps(instance, epsilon);
    let fmt_list = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    let _ = writeln!(out, "delta_min\t{:?}", profile.delta_min);
    let _ = writeln!(out, "m_g\t{}", profile.m_g);
    let _ = writeln!(out, "band\t{}", bands.band.len());
    let _ = writeln!(out, "above\t{}", bands.above.len());
    let _ = writeln!(out, "below\t{}", bands.below.len());
    let _ = writeln!(out, "tilde_gaps\t{}", fmt_list(&tilde));
    let min = tilde.iter().copied().fold(f64::INFINITY, f64::min);
    let max = tilde.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let _ = writeln!(out, "tilde_gap_min\t{min:?}");
    let _ = writeln!(out, "tilde_gap_max\t{max:?}");
    let _ = writeln!(out, "fb_min_gap\t{:?}", fb_min_gap(instance, epsilon));
    let _ = writeln!(out, "fc_sample_bound\t{:?}", fc_sample_bound(instance, epsilon, delta));
    if let Some(t) = budget {
        let _ = writeln!(out, "budget\t{t}");
        let _ = writeln!(out, "fb_error_bound\t{:?}", fb_error_bound(instance, t, epsilon));
    }
    out
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(CliError::Usage(format!("--epsilon must be positive, got {}", args.epsilon)));
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::Usage(format!("--delta must lie in (0, 1), got {}", args.delta)));
    }
    let budget = args.budget.map(|b| b.resolve(instance.m()));
    write_all(&None, analysis_table(&instance, args.epsilon, args.delta, budget).as_bytes())
}
