//! The noisy similarity oracle.
//!
//! Pulling pair `e` returns an independent sample with mean `s(e)`. Each pair
//! draws from its own ChaCha8 stream keyed by `(seed, e)`, so the `k`-th
//! reward of a pair is fixed by the seed regardless of how pulls on other
//! pairs are interleaved. [`RewardTape`] exploits this to replay a run with
//! the noise realization held fixed.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::instance::{Instance, PairId};
use crate::rng::stream_rng;

/// Reward distribution around the true similarity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseModel {
    /// Rewards in `{0, 1}` with mean `s(e)`.
    #[default]
    Bernoulli,
    /// `s(e) + N(0, sigma^2)`, not clamped.
    Gaussian { sigma: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Bernoulli => Ok(()),
            NoiseModel::Gaussian { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            NoiseModel::Gaussian { sigma } => Err(Error::InvalidParameter(alloc::format!(
                "gaussian sigma must be positive, got {sigma}"
            ))),
        }
    }

    #[inline]
    fn sample(&self, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            NoiseModel::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseModel::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sigma * z
            }
        }
    }
}

/// Lazily created per-pair reward streams.
#[derive(Debug, Clone)]
struct Streams {
    seed: u64,
    noise: NoiseModel,
    rngs: Vec<Option<ChaCha8Rng>>,
}

impl Streams {
    fn new(m: usize, noise: NoiseModel, seed: u64) -> Self {
        Self {
            seed,
            noise,
            rngs: vec![None; m],
        }
    }

    #[inline]
    fn next(&mut self, e: PairId, mean: f64) -> f64 {
        let seed = self.seed;
        let rng = self.rngs[e.0].get_or_insert_with(|| stream_rng(seed, e.0 as u64));
        self.noise.sample(mean, rng)
    }
}

/// Anything that answers pair queries with noisy rewards.
///
/// Implemented by the accounting [`Oracle`] and by [`TapeReplay`], which
/// re-reads a fixed noise realization.
pub trait Feedback {
    fn instance(&self) -> &Instance;

    fn pull(&mut self, e: PairId) -> Result<f64>;

    /// Pulls `e` exactly `k` times and returns the sum of the rewards.
    /// Either all `k` pulls happen or none do.
    fn pull_many(&mut self, e: PairId, k: u64) -> Result<f64>;

    fn total_pulls(&self) -> u64;
}

/// Pull counts at a point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullsReport {
    pub total: u64,
    pub per_pair: Vec<u64>,
}

/// Stateful stochastic environment over an instance.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    instance: &'a Instance,
    streams: Streams,
    counts: Vec<u64>,
    sums: Vec<f64>,
    total: u64,
    budget: Option<u64>,
}

impl<'a> Oracle<'a> {
    pub fn new(instance: &'a Instance, noise: NoiseModel, seed: u64) -> Result<Self> {
        noise.validate()?;
        let m = instance.m();
        Ok(Self {
            instance,
            streams: Streams::new(m, noise, seed),
            counts: vec![0; m],
            sums: vec![0.0; m],
            total: 0,
            budget: None,
        })
    }

    /// Bernoulli oracle, the default noise model.
    pub fn bernoulli(instance: &'a Instance, seed: u64) -> Self {
        Self::new(instance, NoiseModel::Bernoulli, seed).expect("bernoulli is always valid")
    }

    /// Caps the total number of pulls at `budget`.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn noise(&self) -> NoiseModel {
        self.streams.noise
    }

    pub fn seed(&self) -> u64 {
        self.streams.seed
    }

    pub fn count(&self, e: PairId) -> u64 {
        self.counts[e.0]
    }

    /// Mean of all rewards observed so far for `e`.
    pub fn empirical_mean(&self, e: PairId) -> Result<f64> {
        self.check_pair(e)?;
        match self.counts[e.0] {
            0 => Err(Error::NoSamples(e.0)),
            c => Ok(self.sums[e.0] / c as f64),
        }
    }

    pub fn pulls_report(&self) -> PullsReport {
        PullsReport {
            total: self.total,
            per_pair: self.counts.clone(),
        }
    }

    fn check_pair(&self, e: PairId) -> Result<()> {
        if e.0 >= self.counts.len() {
            return Err(Error::PairOutOfRange {
                index: e.0,
                m: self.counts.len(),
            });
        }
        Ok(())
    }

    fn reserve(&self, k: u64) -> Result<()> {
        match self.budget {
            Some(budget) if self.total.saturating_add(k) > budget => {
                Err(Error::BudgetExhausted { budget })
            }
            _ => Ok(()),
        }
    }
}

impl Feedback for Oracle<'_> {
    fn instance(&self) -> &Instance {
        self.instance
    }

    fn pull(&mut self, e: PairId) -> Result<f64> {
        self.check_pair(e)?;
        self.reserve(1)?;
        let reward = self.streams.next(e, self.instance.sim(e));
        self.counts[e.0] += 1;
        self.sums[e.0] += reward;
        self.total += 1;
        Ok(reward)
    }

    fn pull_many(&mut self, e: PairId, k: u64) -> Result<f64> {
        self.check_pair(e)?;
        self.reserve(k)?;
        let mean = self.instance.sim(e);
        let mut sum = 0.0;
        for _ in 0..k {
            sum += self.streams.next(e, mean);
        }
        self.counts[e.0] += k;
        self.sums[e.0] += sum;
        self.total += k;
        Ok(sum)
    }

    fn total_pulls(&self) -> u64 {
        self.total
    }
}

/// A recorded noise realization: the reward sequences an [`Oracle`] with the
/// same instance, noise model and seed would produce, memoized as prefix
/// sums.
#[derive(Debug, Clone)]
pub struct RewardTape<'a> {
    instance: &'a Instance,
    streams: Streams,
    prefix: Vec<Vec<f64>>,
}

impl<'a> RewardTape<'a> {
    pub fn new(instance: &'a Instance, noise: NoiseModel, seed: u64) -> Result<Self> {
        noise.validate()?;
        let m = instance.m();
        Ok(Self {
            instance,
            streams: Streams::new(m, noise, seed),
            prefix: vec![vec![0.0]; m],
        })
    }

    /// Sum of the first `k` rewards of `e`.
    fn prefix_sum(&mut self, e: PairId, k: u64) -> f64 {
        let k = k as usize;
        let mean = self.instance.sim(e);
        let row = &mut self.prefix[e.0];
        if row.len() <= k {
            row.reserve(k + 1 - row.len());
            while row.len() <= k {
                let last = *row.last().expect("prefix row starts with 0");
                row.push(last + self.streams.next(e, mean));
            }
        }
        row[k]
    }

    /// Starts a fresh pass over the tape with all pull counters at zero.
    pub fn replay(&mut self) -> TapeReplay<'_, 'a> {
        let m = self.instance.m();
        TapeReplay {
            tape: self,
            cursor: vec![0; m],
            total: 0,
        }
    }
}

/// One pass over a [`RewardTape`]; behaves like a fresh unbudgeted oracle.
#[derive(Debug)]
pub struct TapeReplay<'t, 'a> {
    tape: &'t mut RewardTape<'a>,
    cursor: Vec<u64>,
    total: u64,
}

impl Feedback for TapeReplay<'_, '_> {
    fn instance(&self) -> &Instance {
        self.tape.instance
    }

    fn pull(&mut self, e: PairId) -> Result<f64> {
        self.pull_many(e, 1)
    }

    fn pull_many(&mut self, e: PairId, k: u64) -> Result<f64> {
        let m = self.cursor.len();
        if e.0 >= m {
            return Err(Error::PairOutOfRange { index: e.0, m });
        }
        let start = self.cursor[e.0];
        let lo = self.tape.prefix_sum(e, start);
        let hi = self.tape.prefix_sum(e, start + k);
        self.cursor[e.0] += k;
        self.total += k;
        Ok(hi - lo)
    }

    fn total_pulls(&self) -> u64 {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pair_instance(s0: f64, s1: f64, s2: f64) -> Instance {
        Instance::new(3, vec![s0, s1, s2]).unwrap()
    }

    #[test]
    fn degenerate_bernoulli() {
        let inst = two_pair_instance(1.0, 0.0, 0.5);
        let mut o = Oracle::bernoulli(&inst, 1);
        for _ in 0..200 {
            assert_eq!(o.pull(PairId(0)).unwrap(), 1.0);
            assert_eq!(o.pull(PairId(1)).unwrap(), 0.0);
        }
        assert_eq!(o.empirical_mean(PairId(0)).unwrap(), 1.0);
    }

    #[test]
    fn bernoulli_mean_converges() {
        let inst = two_pair_instance(0.7, 0.0, 0.0);
        let mut o = Oracle::bernoulli(&inst, 11);
        let k = 100_000;
        o.pull_many(PairId(0), k).unwrap();
        let tol = 3.0 * libm::sqrt(0.21 / k as f64);
        let mean = o.empirical_mean(PairId(0)).unwrap();
        assert!((mean - 0.7).abs() < tol, "mean {mean}");
    }

    #[test]
    fn empirical_mean_requires_samples() {
        let inst = two_pair_instance(0.3, 0.3, 0.3);
        let o = Oracle::bernoulli(&inst, 0);
        assert_eq!(o.empirical_mean(PairId(2)), Err(Error::NoSamples(2)));
        assert!(matches!(
            o.empirical_mean(PairId(3)),
            Err(Error::PairOutOfRange { .. })
        ));
    }

    #[test]
    fn empirical_mean_is_arithmetic_mean() {
        let inst = two_pair_instance(0.5, 0.5, 0.5);
        let mut o = Oracle::bernoulli(&inst, 5);
        let rewards: Vec<f64> = (0..3).map(|_| o.pull(PairId(1)).unwrap()).collect();
        let want = rewards.iter().sum::<f64>() / 3.0;
        assert_eq!(o.empirical_mean(PairId(1)).unwrap(), want);
    }

    #[test]
    fn pulls_report_accounting() {
        let inst = Instance::new(4, vec![0.5; 6]).unwrap();
        let mut o = Oracle::bernoulli(&inst, 0);
        assert_eq!(
            o.pulls_report(),
            PullsReport {
                total: 0,
                per_pair: vec![0; 6]
            }
        );
        o.pull(PairId(3)).unwrap();
        o.pull(PairId(3)).unwrap();
        let r = o.pulls_report();
        assert_eq!(r.total, 2);
        assert_eq!(r.per_pair[3], 2);
        assert_eq!(r.per_pair.iter().sum::<u64>(), r.total);
    }

    #[test]
    fn budget_is_exact_and_side_effect_free() {
        let inst = two_pair_instance(0.5, 0.5, 0.5);
        let mut o = Oracle::bernoulli(&inst, 9).with_budget(5);
        o.pull_many(PairId(0), 4).unwrap();
        o.pull(PairId(1)).unwrap();
        let before = o.pulls_report();
        assert_eq!(o.pull(PairId(2)), Err(Error::BudgetExhausted { budget: 5 }));
        assert_eq!(o.pull_many(PairId(2), 1), Err(Error::BudgetExhausted { budget: 5 }));
        assert_eq!(o.pulls_report(), before);
        assert_eq!(o.empirical_mean(PairId(2)), Err(Error::NoSamples(2)));
    }

    #[test]
    fn pull_order_does_not_change_pair_sequences() {
        let inst = two_pair_instance(0.4, 0.6, 0.5);
        let mut a = Oracle::bernoulli(&inst, 77);
        let mut b = Oracle::bernoulli(&inst, 77);
        let mut seq_a = Vec::new();
        for _ in 0..50 {
            seq_a.push(a.pull(PairId(0)).unwrap());
            a.pull(PairId(1)).unwrap();
        }
        b.pull_many(PairId(1), 13).unwrap();
        let seq_b: Vec<f64> = (0..50).map(|_| b.pull(PairId(0)).unwrap()).collect();
        assert_eq!(seq_a, seq_b);
    }

    #[test]
    fn gaussian_is_unclamped() {
        let inst = two_pair_instance(1.0, 0.0, 0.5);
        let mut o = Oracle::new(&inst, NoiseModel::Gaussian { sigma: 1.0 }, 3).unwrap();
        let rewards: Vec<f64> = (0..200).map(|_| o.pull(PairId(0)).unwrap()).collect();
        assert!(rewards.iter().any(|&r| r > 1.0));
        assert!(Oracle::new(&inst, NoiseModel::Gaussian { sigma: 0.0 }, 3).is_err());
    }

    #[test]
    fn tape_replays_oracle_realization() {
        let inst = two_pair_instance(0.3, 0.8, 0.5);
        let mut oracle = Oracle::bernoulli(&inst, 21);
        let mut tape = RewardTape::new(&inst, NoiseModel::Bernoulli, 21).unwrap();
        let a = oracle.pull_many(PairId(1), 40).unwrap();
        let b = oracle.pull(PairId(1)).unwrap();
        let c = oracle.pull_many(PairId(0), 7).unwrap();
        for _ in 0..2 {
            let mut replay = tape.replay();
            assert_eq!(replay.pull_many(PairId(1), 40).unwrap(), a);
            assert_eq!(replay.pull(PairId(1)).unwrap(), b);
            assert_eq!(replay.pull_many(PairId(0), 7).unwrap(), c);
            assert_eq!(replay.total_pulls(), 48);
        }
    }
}
