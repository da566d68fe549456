//! Fixed-budget clustering. Every pair starts with a reserved allowance of
//! `floor(T / m)` pulls. A phase spends the allowance on the pivot's incident
//! pairs only; the allowance of pairs removed without being queried is
//! spread over the pairs that remain.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{pair_count, pair_index_unchecked, Clustering};
use crate::offline::{pivot_loop, THRESHOLD};
use crate::oracle::Feedback;

/// Per-pair pull count for the next phase, given `v_r = |V_r|` and
/// `v_next = |V_{r+1}|`. Unchanged once fewer than two elements remain.
pub fn next_tau(tau: u64, v_r: usize, v_next: usize) -> u64 {
    debug_assert!(v_r >= 1 && v_next < v_r);
    let remaining = pair_count(v_next) as u64;
    if remaining == 0 {
        return tau;
    }
    let surplus = pair_count(v_r) as u64 - remaining - (v_r as u64 - 1);
    tau + tau * surplus / remaining
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbReport {
    pub clustering: Clustering,
    pub budget: u64,
    pub queries_used: u64,
    pub phases: usize,
    /// Pulls per incident pair in each phase.
    pub tau_schedule: Vec<u64>,
    /// Unclustered elements at the start of each phase.
    pub phase_sizes: Vec<usize>,
}

impl FbReport {
    /// Queries committed by phase `r` under the schedule, `tau_r * (|V_r| - 1)`.
    pub fn phase_queries(&self) -> impl Iterator<Item = u64> + '_ {
        self.tau_schedule
            .iter()
            .zip(&self.phase_sizes)
            .map(|(&tau, &v)| tau * (v as u64 - 1))
    }
}

/// Runs the fixed-budget pivot algorithm with budget `budget`; uses at most
/// `budget` queries. Requires `budget >= m` unless `n == 1`.
pub fn run_kcfb<F, R>(oracle: &mut F, budget: u64, rng: &mut R) -> Result<FbReport>
where
    F: Feedback + ?Sized,
    R: Rng + ?Sized,
{
    let (n, m) = (oracle.instance().n(), oracle.instance().m());
    if m == 0 {
        return Ok(FbReport {
            clustering: Clustering::singletons(n),
            budget,
            queries_used: 0,
            phases: n,
            tau_schedule: vec![0; n],
            phase_sizes: vec![1; n],
        });
    }
    if budget < m as u64 {
        return Err(Error::InsufficientBudget { budget, m });
    }
    let start = oracle.total_pulls();
    let mut tau = budget / m as u64;
    let mut tau_schedule = Vec::new();
    let mut phase_sizes = Vec::new();
    let clustering = pivot_loop(n, rng, |pivot, rest| {
        let v_r = rest.len() + 1;
        tau_schedule.push(tau);
        phase_sizes.push(v_r);
        let mut joined = Vec::with_capacity(rest.len());
        for &u in rest {
            let sum = oracle.pull_many(pair_index_unchecked(pivot, u, n), tau)?;
            joined.push(sum / tau as f64 > THRESHOLD);
        }
        let v_next = v_r - 1 - joined.iter().filter(|&&j| j).count();
        tau = next_tau(tau, v_r, v_next);
        Ok(joined)
    })?;
    Ok(FbReport {
        clustering,
        budget,
        queries_used: oracle.total_pulls() - start,
        phases: tau_schedule.len(),
        tau_schedule,
        phase_sizes,
    })
}
