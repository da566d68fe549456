//! Uniform-sampling baselines: pull every pair equally often, then hand the
//! estimated instance to an offline solver.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Clustering, PairId};
use crate::kcfb::FbReport;
use crate::kcfc::{FcParams, FcReport};
use crate::offline::{brute_force_opt, cost, kwikcluster, EstimatedSimilarity, SimilaritySource, THRESHOLD};
use crate::oracle::Feedback;

/// Default number of pivot orders tried by [`OfflineSolver::KwikRestarts`].
pub const DEFAULT_RESTARTS: usize = 50;

/// Offline solver applied to the estimated similarities, with its
/// approximation factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfflineSolver {
    /// Exhaustive search; factor 1, limited to small `n`.
    Exact,
    /// Cheapest of `restarts` KwikCluster runs; factor 5.
    KwikRestarts { restarts: usize },
}

impl Default for OfflineSolver {
    fn default() -> Self {
        OfflineSolver::KwikRestarts {
            restarts: DEFAULT_RESTARTS,
        }
    }
}

impl OfflineSolver {
    pub fn alpha(&self) -> f64 {
        match self {
            OfflineSolver::Exact => 1.0,
            OfflineSolver::KwikRestarts { .. } => 5.0,
        }
    }

    pub fn solve<S, R>(&self, source: &S, rng: &mut R) -> Result<Clustering>
    where
        S: SimilaritySource + ?Sized,
        R: Rng + ?Sized,
    {
        match *self {
            OfflineSolver::Exact => Ok(brute_force_opt(source)?.witness),
            OfflineSolver::KwikRestarts { restarts } => {
                if restarts == 0 {
                    return Err(Error::InvalidParameter("restarts must be positive".into()));
                }
                let mut best: Option<(f64, Clustering)> = None;
                for _ in 0..restarts {
                    let c = kwikcluster(source, rng);
                    let value = cost(source, &c)?;
                    if best.as_ref().is_none_or(|(b, _)| value < *b) {
                        best = Some((value, c));
                    }
                }
                Ok(best.expect("restarts > 0").1)
            }
        }
    }
}

/// Pulls per pair that make every estimate accurate to
/// `epsilon / ((alpha + 1) m)` with probability `1 - delta`:
/// `ceil((alpha + 1)^2 m^2 / (2 epsilon^2) * ln(2 m / delta))`.
pub fn uniform_fc_pulls(alpha: f64, m: usize, epsilon: f64, delta: f64) -> u64 {
    let m = m as f64;
    let raw = (alpha + 1.0) * (alpha + 1.0) * m * m / (2.0 * epsilon * epsilon) * libm::log(2.0 * m / delta);
    libm::ceil(raw) as u64
}

fn estimates<F: Feedback + ?Sized>(oracle: &mut F, per_pair: u64) -> Result<EstimatedSimilarity> {
    let inst = oracle.instance();
    let (n, m) = (inst.n(), inst.m());
    let mut values = Vec::with_capacity(m);
    for e in 0..m {
        values.push(oracle.pull_many(PairId(e), per_pair)? / per_pair as f64);
    }
    EstimatedSimilarity::new(n, values)
}

fn check_solver(solver: &OfflineSolver, n: usize) -> Result<()> {
    if let OfflineSolver::Exact = solver {
        if n > crate::offline::MAX_EXACT_N {
            return Err(Error::InstanceTooLarge {
                n,
                max: crate::offline::MAX_EXACT_N,
            });
        }
    }
    Ok(())
}

/// Samples every pair `uniform_fc_pulls(alpha, m, epsilon, delta)` times and
/// solves the estimated instance.
pub fn run_uniform_fc<F, R>(oracle: &mut F, params: &FcParams, solver: &OfflineSolver, rng: &mut R) -> Result<FcReport>
where
    F: Feedback + ?Sized,
    R: Rng + ?Sized,
{
    params.validate()?;
    let (n, m) = (oracle.instance().n(), oracle.instance().m());
    check_solver(solver, n)?;
    if m == 0 {
        return Ok(FcReport {
            clustering: Clustering::singletons(n),
            queries: 0,
            epsilon: params.epsilon,
            delta: params.delta,
            epsilon_prime: None,
            phase_epsilons: Vec::new(),
            good: Vec::new(),
        });
    }
    let per_pair = uniform_fc_pulls(solver.alpha(), m, params.epsilon, params.delta);
    let start = oracle.total_pulls();
    let est = estimates(oracle, per_pair)?;
    let clustering = solver.solve(&est, rng)?;
    let good = above_threshold(&est);
    Ok(FcReport {
        clustering,
        queries: oracle.total_pulls() - start,
        epsilon: params.epsilon,
        delta: params.delta,
        epsilon_prime: None,
        phase_epsilons: Vec::new(),
        good,
    })
}

/// Samples every pair `floor(T / m)` times and solves the estimated instance.
pub fn run_uniform_fb<F, R>(oracle: &mut F, budget: u64, solver: &OfflineSolver, rng: &mut R) -> Result<FbReport>
where
    F: Feedback + ?Sized,
    R: Rng + ?Sized,
{
    let (n, m) = (oracle.instance().n(), oracle.instance().m());
    check_solver(solver, n)?;
    if m == 0 {
        return Ok(FbReport {
            clustering: Clustering::singletons(n),
            budget,
            queries_used: 0,
            phases: 0,
            tau_schedule: Vec::new(),
            phase_sizes: Vec::new(),
        });
    }
    if budget < m as u64 {
        return Err(Error::InsufficientBudget { budget, m });
    }
    let per_pair = budget / m as u64;
    let start = oracle.total_pulls();
    let est = estimates(oracle, per_pair)?;
    let clustering = solver.solve(&est, rng)?;
    Ok(FbReport {
        clustering,
        budget,
        queries_used: oracle.total_pulls() - start,
        phases: 1,
        tau_schedule: alloc::vec![per_pair],
        phase_sizes: alloc::vec![n],
    })
}

fn above_threshold(est: &EstimatedSimilarity) -> Vec<PairId> {
    est.values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > THRESHOLD)
        .map(|(e, _)| PairId(e))
        .collect()
}

/// Reference failure probability `n^2 exp(-T eps^2 / (alpha^2 n^6))` of the
/// uniform fixed-budget baseline, clamped to `[0, 1]`. The constant hidden in
/// the asymptotic statement is taken as 1.
pub fn uniform_fb_error_ref(n: usize, budget: u64, epsilon: f64, alpha: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let exponent = -(budget as f64) * epsilon * epsilon / (alpha * alpha * libm::pow(nf, 6.0));
    (nf * nf * libm::exp(exponent)).min(1.0)
}
