//! Trial runner behind `qecc run`. Trial `i` uses seed `base + i` for its
//! oracle and derives every other random stream from that seed, so a row
//! depends only on the instance, the flags and its own index.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use qecc_core::analysis::{fb_error_bound, fc_sample_bound, success_check};
use qecc_core::kcfc::slack_for;
use qecc_core::offline::{estimate_cost, kwikcluster, CostEstimate, EstimatedSimilarity, MAX_EXACT_N};
use qecc_core::rng::{replay_stream, stream_rng, PIVOT_STREAM, SOLVER_STREAM};
use qecc_core::uniform::{uniform_fb_error_ref, uniform_fc_pulls};
use qecc_core::{
    brute_force_opt, cost, run_kcfb, run_kcfc, run_kcfc_sequential, run_uniform_fb, run_uniform_fc, Clustering,
    FcParams, Instance, NoiseModel, OfflineSolver, Oracle, RewardTape,
};

use crate::error::{CliError, Result};
use crate::record::RunRecord;

/// Approximation factor used for the `success` column.
pub const SUCCESS_FACTOR: f64 = 5.0;

pub const DEFAULT_REPLAYS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Kcfc,
    KcfcSeq,
    Kcfb,
    UniformFc,
    UniformFb,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Kcfc => "kcfc",
            Algo::KcfcSeq => "kcfc-seq",
            Algo::Kcfb => "kcfb",
            Algo::UniformFc => "uniform-fc",
            Algo::UniformFb => "uniform-fb",
        }
    }

    pub fn fixed_budget(self) -> bool {
        matches!(self, Algo::Kcfb | Algo::UniformFb)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Algo::Kcfc, Algo::KcfcSeq, Algo::Kcfb, Algo::UniformFc, Algo::UniformFb]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// A budget given either absolutely or as a multiple of `m` (`"10m"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetSpec {
    Absolute(u64),
    PerPair(u64),
}

impl BudgetSpec {
    pub fn resolve(self, m: usize) -> u64 {
        match self {
            BudgetSpec::Absolute(t) => t,
            BudgetSpec::PerPair(k) => k.saturating_mul(m as u64),
        }
    }
}

impl FromStr for BudgetSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (digits, per_pair) = match s.strip_suffix('m') {
            Some(d) => (d, true),
            None => (s, false),
        };
        let value: u64 = digits.parse().map_err(|_| format!("invalid budget {s:?}"))?;
        Ok(if per_pair {
            BudgetSpec::PerPair(value)
        } else {
            BudgetSpec::Absolute(value)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algo: Algo,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub budgets: Vec<BudgetSpec>,
    pub seed: u64,
    pub trials: usize,
    pub replays: usize,
    pub noise: NoiseModel,
    pub radius_scale: f64,
    pub solver: OfflineSolver,
    pub timing: bool,
}

impl RunConfig {
    pub fn new(algo: Algo) -> Self {
        Self {
            algo,
            epsilon: None,
            delta: None,
            budgets: Vec::new(),
            seed: 0,
            trials: 1,
            replays: DEFAULT_REPLAYS,
            noise: NoiseModel::Bernoulli,
            radius_scale: 1.0,
            solver: OfflineSolver::default(),
            timing: false,
        }
    }

    fn fc_params(&self) -> Option<FcParams> {
        Some(FcParams::new(self.epsilon?, self.delta?).with_radius_scale(self.radius_scale))
    }

    /// Rejects flag combinations no trial could run with.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        let m = instance.m();
        if self.trials == 0 {
            return usage("--trials must be at least 1".into());
        }
        if self.replays == 0 {
            return usage("--replays must be at least 1".into());
        }
        self.noise.validate()?;
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return usage(format!("--epsilon must be positive, got {eps}"));
            }
        }
        if self.algo.fixed_budget() {
            if self.budgets.is_empty() {
                return usage(format!("{} needs --budget", self.algo));
            }
            if m > 0 {
                if let Some(t) = self.budgets.iter().map(|b| b.resolve(m)).find(|&t| t < m as u64) {
                    return usage(format!("budget {t} is below the number of pairs m = {m}"));
                }
            }
        } else {
            let Some(params) = self.fc_params() else {
                return usage(format!("{} needs --epsilon and --delta", self.algo));
            };
            params.validate()?;
            if !(self.radius_scale > 0.0 && self.radius_scale.is_finite()) {
                return usage(format!("--radius-scale must be positive, got {}", self.radius_scale));
            }
            if self.algo == Algo::Kcfc && m > 0 && slack_for(params.epsilon, m) >= 0.5 {
                return usage(format!("epsilon {} is too large: slack epsilon / (12 m) must be below 0.5", params.epsilon));
            }
        }
        if matches!(self.algo, Algo::UniformFc | Algo::UniformFb) {
            if let OfflineSolver::KwikRestarts { restarts: 0 } = self.solver {
                return usage("--restarts must be at least 1".into());
            }
            if self.solver == OfflineSolver::Exact && instance.n() > MAX_EXACT_N {
                return usage(format!("the exact solver supports n <= {MAX_EXACT_N}"));
            }
        }
        Ok(())
    }
}

/// Optimal cost when the instance is small enough for exhaustive search.
pub fn optimum(instance: &Instance) -> Option<f64> {
    (instance.n() <= MAX_EXACT_N).then(|| brute_force_opt(instance).expect("size checked").opt_value)
}

struct Job {
    budget: Option<u64>,
    seed: u64,
}

/// Runs every (budget, trial) combination and returns the rows in budget
/// order, then trial order. Errors of individual trials are reported on
/// stderr and leave that row's result fields empty.
pub fn run(instance: &Instance, config: &RunConfig) -> Result<Vec<RunRecord>> {
    config.validate(instance)?;
    let opt = optimum(instance);
    let budgets: Vec<Option<u64>> = if config.algo.fixed_budget() {
        config.budgets.iter().map(|b| Some(b.resolve(instance.m()))).collect()
    } else {
        vec![None]
    };
    let jobs: Vec<Job> = budgets
        .iter()
        .flat_map(|&budget| {
            (0..config.trials as u64).map(move |i| Job {
                budget,
                seed: config.seed.wrapping_add(i),
            })
        })
        .collect();
    Ok(jobs
        .par_iter()
        .map(|job| {
            let started = Instant::now();
            let mut record = blank_record(instance, config, job, opt);
            match run_trial(instance, config, job) {
                Ok(outcome) => {
                    record.queries = Some(outcome.queries);
                    record.cost = Some(outcome.cost);
                    record.mc_expected_cost = Some(outcome.mc.mean);
                    record.mc_stderr = Some(outcome.mc.stderr);
                    record.success = match (opt, config.epsilon) {
                        (Some(opt), Some(eps)) => Some(success_check(outcome.mc.mean, opt, eps, SUCCESS_FACTOR)),
                        _ => None,
                    };
                }
                Err(e) => eprintln!("{} seed {}: {e}", config.algo, job.seed),
            }
            if config.timing {
                record.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            record
        })
        .collect())
}

fn blank_record(instance: &Instance, config: &RunConfig, job: &Job, opt: Option<f64>) -> RunRecord {
    RunRecord {
        algo: config.algo.name().to_owned(),
        seed: job.seed,
        n: instance.n(),
        m: instance.m(),
        epsilon: config.epsilon,
        delta: if config.algo.fixed_budget() { None } else { config.delta },
        budget: job.budget,
        queries: None,
        cost: None,
        mc_expected_cost: None,
        mc_stderr: None,
        opt,
        success: None,
        bound_ref: bound_ref(instance, config, job.budget),
        wall_ms: None,
    }
}

/// Theoretical reference value for the row: expected pull bound for
/// `kcfc`, prescribed pull count for `uniform-fc`, failure probability
/// bound for the fixed-budget algorithms.
pub fn bound_ref(instance: &Instance, config: &RunConfig, budget: Option<u64>) -> Option<f64> {
    let m = instance.m();
    match config.algo {
        Algo::Kcfc => {
            let (eps, delta) = (config.epsilon?, config.delta?);
            Some(if m == 0 { 0.0 } else { fc_sample_bound(instance, slack_for(eps, m), delta) })
        }
        Algo::KcfcSeq => None,
        Algo::UniformFc => {
            let (eps, delta) = (config.epsilon?, config.delta?);
            Some(if m == 0 { 0.0 } else { m as f64 * uniform_fc_pulls(config.solver.alpha(), m, eps, delta) as f64 })
        }
        Algo::Kcfb => Some(fb_error_bound(instance, budget?, config.epsilon?)),
        Algo::UniformFb => Some(uniform_fb_error_ref(instance.n(), budget?, config.epsilon?, config.solver.alpha())),
    }
}

/// Result of a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub clustering: Clustering,
    pub queries: u64,
    /// True cost of the returned clustering.
    pub cost: f64,
    /// Expected cost over the algorithm's internal pivot randomness.
    pub mc: CostEstimate,
    /// Pairs queried at least once.
    pub distinct_pairs: usize,
}

/// Runs one trial of `config.algo` with oracle seed `seed`, and `budget` for
/// the fixed-budget algorithms.
///
/// The expected cost holds the noise realization fixed and varies only the
/// algorithm's pivot choices: `kcfc` replays the pivot loop on the learned
/// set, `kcfc-seq` and `kcfb` rerun the whole algorithm against a recording
/// of the same rewards, and the uniform baselines rerun the offline solver
/// on the same estimates.
pub fn trial(instance: &Instance, config: &RunConfig, seed: u64, budget: Option<u64>) -> Result<TrialOutcome> {
    run_trial(instance, config, &Job { budget, seed })
}

fn run_trial(instance: &Instance, config: &RunConfig, job: &Job) -> Result<TrialOutcome> {
    let seed = job.seed;
    let replays = config.replays;
    let mut oracle = Oracle::new(instance, config.noise, seed)?;
    let mut pivots = stream_rng(seed, PIVOT_STREAM);
    let replay_rng = |i: usize| stream_rng(seed, replay_stream(i as u64));
    let missing = || CliError::Usage(format!("{} is missing parameters", config.algo));
    let (clustering, queries, mc) = match config.algo {
        Algo::Kcfc => {
            let params = config.fc_params().ok_or_else(missing)?;
            let report = run_kcfc(&mut oracle, &params, &mut pivots)?;
            let learned = report.membership();
            let mc = estimate_cost(instance, replays, |i| Ok(kwikcluster(&learned, &mut replay_rng(i))))?;
            (report.clustering, report.queries, mc)
        }
        Algo::KcfcSeq => {
            let params = config.fc_params().ok_or_else(missing)?;
            let report = run_kcfc_sequential(&mut oracle, &params, &mut pivots)?;
            let mut tape = RewardTape::new(instance, config.noise, seed)?;
            let mc = estimate_cost(instance, replays, |i| {
                Ok(run_kcfc_sequential(&mut tape.replay(), &params, &mut replay_rng(i))?.clustering)
            })?;
            (report.clustering, report.queries, mc)
        }
        Algo::Kcfb => {
            let budget = job.budget.ok_or_else(missing)?;
            oracle = oracle.with_budget(budget);
            let report = run_kcfb(&mut oracle, budget, &mut pivots)?;
            let mut tape = RewardTape::new(instance, config.noise, seed)?;
            let mc = estimate_cost(instance, replays, |i| {
                Ok(run_kcfb(&mut tape.replay(), budget, &mut replay_rng(i))?.clustering)
            })?;
            (report.clustering, report.queries_used, mc)
        }
        Algo::UniformFc | Algo::UniformFb => {
            let mut solver_rng = stream_rng(seed, SOLVER_STREAM);
            let (clustering, queries) = if config.algo == Algo::UniformFc {
                let params = config.fc_params().ok_or_else(missing)?;
                let report = run_uniform_fc(&mut oracle, &params, &config.solver, &mut solver_rng)?;
                (report.clustering, report.queries)
            } else {
                let budget = job.budget.ok_or_else(missing)?;
                oracle = oracle.with_budget(budget);
                let report = run_uniform_fb(&mut oracle, budget, &config.solver, &mut solver_rng)?;
                (report.clustering, report.queries_used)
            };
            let mc = match config.solver {
                OfflineSolver::Exact => CostEstimate::from_samples(&[cost(instance, &clustering)?]),
                OfflineSolver::KwikRestarts { .. } => {
                    let values = instance
                        .pairs()
                        .map(|e| oracle.empirical_mean(e).unwrap_or(0.0))
                        .collect();
                    let est = EstimatedSimilarity::new(instance.n(), values)?;
                    estimate_cost(instance, replays, |i| config.solver.solve(&est, &mut replay_rng(i)))?
                }
            };
            (clustering, queries, mc)
        }
    };
    let distinct_pairs = oracle.pulls_report().per_pair.iter().filter(|&&c| c > 0).count();
    Ok(TrialOutcome {
        cost: cost(instance, &clustering)?,
        clustering,
        queries,
        mc,
        distinct_pairs,
    })
}
