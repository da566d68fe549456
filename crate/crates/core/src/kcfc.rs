//! Fixed-confidence clustering: learn which pairs are above the threshold
//! with the threshold bandit, then run the pivot loop on that learned set.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{pair_index_unchecked, Clustering, PairId};
use crate::offline::{kwikcluster, pivot_loop, MembershipSource};
use crate::oracle::Feedback;
use crate::tbhs::{check_delta, run_tbhs, TbhsConfig};

/// Inputs of a fixed-confidence run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcParams {
    /// Additive error of the target `(5, epsilon)` guarantee.
    pub epsilon: f64,
    pub delta: f64,
    pub radius_scale: f64,
}

impl FcParams {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            radius_scale: 1.0,
        }
    }

    pub fn with_radius_scale(mut self, scale: f64) -> Self {
        self.radius_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        check_delta(self.delta)
    }
}

/// Per-pair slack used for a threshold-bandit call over `arms` pairs.
pub fn slack_for(epsilon: f64, arms: usize) -> f64 {
    epsilon / (12.0 * arms as f64)
}

/// Outcome of a fixed-confidence run.
#[derive(Debug, Clone, PartialEq)]
pub struct FcReport {
    pub clustering: Clustering,
    /// Oracle pulls issued by the run.
    pub queries: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Slack handed to the threshold bandit; `None` when no bandit ran.
    pub epsilon_prime: Option<f64>,
    /// Per-phase slacks of the sequential variant, in phase order.
    pub phase_epsilons: Vec<f64>,
    /// Pairs classified as high similarity.
    pub good: Vec<PairId>,
}

impl FcReport {
    pub fn good_set_size(&self) -> usize {
        self.good.len()
    }

    /// The learned set as a binary similarity source over `n` elements.
    pub fn membership(&self) -> MembershipSource {
        MembershipSource::new(self.clustering.len(), self.good.iter().copied())
    }
}

fn trivial_report(n: usize, params: &FcParams) -> FcReport {
    FcReport {
        clustering: Clustering::singletons(n),
        queries: 0,
        epsilon: params.epsilon,
        delta: params.delta,
        epsilon_prime: None,
        phase_epsilons: Vec::new(),
        good: Vec::new(),
    }
}

fn bandit_config(slack: f64, delta: f64, scale: f64) -> Result<TbhsConfig> {
    if slack >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "per-pair slack {slack} must be below 0.5; epsilon is too large for this instance"
        )));
    }
    TbhsConfig::new(slack, delta)?.with_radius_scale(scale)
}

/// Runs the threshold bandit once over all `m` pairs with slack
/// `epsilon / (12 m)`, then KwikCluster on the learned high-similarity set.
/// The pivot loop reads only the learned set and never queries the oracle.
pub fn run_kcfc<F, R>(oracle: &mut F, params: &FcParams, rng: &mut R) -> Result<FcReport>
where
    F: Feedback + ?Sized,
    R: Rng + ?Sized,
{
    params.validate()?;
    let (n, m) = (oracle.instance().n(), oracle.instance().m());
    if m == 0 {
        return Ok(trivial_report(n, params));
    }
    let slack = slack_for(params.epsilon, m);
    let config = bandit_config(slack, params.delta, params.radius_scale)?;
    let arms: Vec<PairId> = (0..m).map(PairId).collect();
    let learned = run_tbhs(oracle, &arms, &config)?;
    let source = MembershipSource::new(n, learned.good.iter().copied());
    let clustering = kwikcluster(&source, rng);
    Ok(FcReport {
        clustering,
        queries: learned.pulls_used,
        epsilon: params.epsilon,
        delta: params.delta,
        epsilon_prime: Some(slack),
        phase_epsilons: Vec::new(),
        good: learned.good,
    })
}

/// Sequential variant: each phase runs the threshold bandit only on the
/// pairs between the pivot and the still-unclustered elements, with slack
/// `epsilon / (12 |I|)` and confidence `delta / n`.
pub fn run_kcfc_sequential<F, R>(oracle: &mut F, params: &FcParams, rng: &mut R) -> Result<FcReport>
where
    F: Feedback + ?Sized,
    R: Rng + ?Sized,
{
    params.validate()?;
    let n = oracle.instance().n();
    if n < 2 {
        return Ok(trivial_report(n, params));
    }
    let start = oracle.total_pulls();
    let phase_delta = params.delta / n as f64;
    let mut good = Vec::new();
    let mut phase_epsilons = Vec::new();
    let clustering = pivot_loop(n, rng, |pivot, rest| {
        if rest.is_empty() {
            return Ok(Vec::new());
        }
        let arms: Vec<PairId> = rest
            .iter()
            .map(|&u| pair_index_unchecked(pivot, u, n))
            .collect();
        let slack = slack_for(params.epsilon, arms.len());
        let config = bandit_config(slack, phase_delta, params.radius_scale)?;
        let learned = run_tbhs(oracle, &arms, &config)?;
        phase_epsilons.push(slack);
        let joined = arms
            .iter()
            .map(|e| learned.good.binary_search(e).is_ok())
            .collect();
        good.extend_from_slice(&learned.good);
        Ok(joined)
    })?;
    good.sort_unstable();
    Ok(FcReport {
        clustering,
        queries: oracle.total_pulls() - start,
        epsilon: params.epsilon,
        delta: params.delta,
        epsilon_prime: phase_epsilons.first().copied(),
        phase_epsilons,
        good,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GeneratorSpec, Instance};
    use crate::oracle::Oracle;
    use crate::rng::stream_rng;

    #[test]
    fn single_element_is_free() {
        let inst = Instance::new(1, alloc::vec![]).unwrap();
        let mut o = Oracle::bernoulli(&inst, 0);
        let params = FcParams::new(0.5, 0.1);
        for report in [
            run_kcfc(&mut o, &params, &mut stream_rng(0, 0)).unwrap(),
            run_kcfc_sequential(&mut o, &params, &mut stream_rng(0, 0)).unwrap(),
        ] {
            assert_eq!(report.clustering.labels(), &[0]);
            assert_eq!(report.queries, 0);
        }
    }

    #[test]
    fn parameter_validation() {
        let inst = Instance::new(3, alloc::vec![0.9, 0.1, 0.2]).unwrap();
        let mut o = Oracle::bernoulli(&inst, 0);
        let mut rng = stream_rng(0, 0);
        assert!(run_kcfc(&mut o, &FcParams::new(0.0, 0.1), &mut rng).is_err());
        assert!(run_kcfc(&mut o, &FcParams::new(1.0, 1.0), &mut rng).is_err());
        // eps / (12 m) = 18 / 36 = 0.5 is out of range
        assert!(run_kcfc(&mut o, &FcParams::new(18.0, 0.1), &mut rng).is_err());
        assert_eq!(o.total_pulls(), 0);
    }

    #[test]
    fn noiseless_planted_recovered_by_both_variants() {
        for seed in 0..5 {
            let inst = generate(&GeneratorSpec::planted(8, 2, 0.0, 1.0, 0.0, seed)).unwrap();
            let truth = inst.ground_truth().unwrap().clone();
            let params = FcParams::new(0.5, 0.1);

            let mut o = Oracle::bernoulli(&inst, seed);
            let full = run_kcfc(&mut o, &params, &mut stream_rng(seed, 1)).unwrap();
            assert!(full.clustering.same_partition(&truth));
            assert_eq!(full.queries, o.total_pulls());
            assert_eq!(full.epsilon_prime, Some(0.5 / (12.0 * 28.0)));

            let mut o = Oracle::bernoulli(&inst, seed);
            let seq = run_kcfc_sequential(&mut o, &params, &mut stream_rng(seed, 1)).unwrap();
            assert!(seq.clustering.same_partition(&truth));
            let distinct = o.pulls_report().per_pair.iter().filter(|&&c| c > 0).count();
            assert!(distinct < 28);
        }
    }

    #[test]
    fn sequential_all_zero_queries_every_pair() {
        let inst = Instance::new(6, alloc::vec![0.0; 15]).unwrap();
        let mut o = Oracle::bernoulli(&inst, 3);
        let r = run_kcfc_sequential(&mut o, &FcParams::new(0.5, 0.1), &mut stream_rng(3, 0)).unwrap();
        assert_eq!(r.clustering.num_clusters(), 6);
        assert!(o.pulls_report().per_pair.iter().all(|&c| c > 0));
        // one bandit call per phase with a non-empty incident set
        assert_eq!(r.phase_epsilons.len(), 5);
        assert_eq!(r.phase_epsilons[0], 0.5 / 60.0);
    }
}
