//! Threshold bandit for separating high-similarity pairs from low-similarity
//! pairs around the 0.5 threshold with slack `epsilon`.
//!
//! Every arm is pulled once, then each round pulls the active arm with the
//! largest lower confidence bound and the active arm with the smallest upper
//! confidence bound. An arm whose LCB reaches `0.5 - epsilon` is declared
//! good; an arm whose UCB falls to `0.5 + epsilon` is declared bad. The run
//! ends when no arm is active. With probability at least `1 - delta` every
//! good arm has `s(e) >= 0.5 - epsilon` and every bad arm `s(e) <= 0.5 + epsilon`.
//!
//! Both selection rules are served from ordered sets keyed by the current
//! bounds, so a round costs `O(log m)`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{Error, Result};
use crate::instance::{Instance, PairId};
use crate::offline::THRESHOLD;
use crate::oracle::Feedback;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbhsConfig {
    /// Slack around the threshold, in `(0, 0.5)`.
    pub epsilon: f64,
    /// Failure probability, in `(0, 1)`.
    pub delta: f64,
    /// Multiplier on the Hoeffding radius; 1 for rewards in `[0, 1]`.
    pub radius_scale: f64,
}

impl TbhsConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        let config = Self {
            epsilon,
            delta,
            radius_scale: 1.0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_radius_scale(mut self, scale: f64) -> Result<Self> {
        self.radius_scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "threshold-bandit slack must lie in (0, 0.5), got {}",
                self.epsilon
            )));
        }
        check_delta(self.delta)?;
        if !(self.radius_scale > 0.0 && self.radius_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius scale must be positive, got {}",
                self.radius_scale
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "confidence delta must lie in (0, 1), got {delta}"
        )))
    }
}

/// Anytime confidence radius `scale * sqrt(ln(4 m N^2 / delta) / (2 N))`.
pub fn radius(m: usize, pulls: u64, delta: f64, scale: f64) -> Result<f64> {
    if pulls == 0 {
        return Err(Error::ZeroPulls);
    }
    Ok(radius_unchecked(m, pulls, delta, scale))
}

#[inline]
fn radius_unchecked(m: usize, pulls: u64, delta: f64, scale: f64) -> f64 {
    let k = pulls as f64;
    scale * libm::sqrt(libm::log(4.0 * m as f64 * k * k / delta) / (2.0 * k))
}

/// Running statistics of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmState {
    pub pair: PairId,
    pub pulls: u64,
    pub mean: f64,
    pub rad: f64,
    pub lcb: f64,
    pub ucb: f64,
    sum: f64,
}

impl ArmState {
    fn new(pair: PairId) -> Self {
        Self {
            pair,
            pulls: 0,
            mean: 0.0,
            rad: f64::INFINITY,
            lcb: f64::NEG_INFINITY,
            ucb: f64::INFINITY,
            sum: 0.0,
        }
    }

    fn record(&mut self, reward: f64) {
        self.pulls += 1;
        self.sum += reward;
    }

    fn refresh(&mut self, m: usize, config: &TbhsConfig) {
        self.mean = self.sum / self.pulls as f64;
        self.rad = radius_unchecked(m, self.pulls, config.delta, config.radius_scale);
        self.lcb = self.mean - self.rad;
        self.ucb = self.mean + self.rad;
    }
}

/// Total order on finite bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bound(f64);

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Partition of the input arms into predicted high (`good`) and low (`bad`)
/// similarity pairs, each sorted by pair id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TbhsOutput {
    pub good: Vec<PairId>,
    pub bad: Vec<PairId>,
    pub pulls_used: u64,
    pub rounds: u64,
}

struct ActiveSet {
    // Last element is argmax LCB, ties to the smallest pair id.
    by_lcb: BTreeSet<(Bound, Reverse<PairId>, usize)>,
    // First element is argmin UCB, ties to the smallest pair id.
    by_ucb: BTreeSet<(Bound, PairId, usize)>,
}

impl ActiveSet {
    fn insert(&mut self, i: usize, arm: &ArmState) {
        self.by_lcb.insert((Bound(arm.lcb), Reverse(arm.pair), i));
        self.by_ucb.insert((Bound(arm.ucb), arm.pair, i));
    }

    fn remove(&mut self, i: usize, arm: &ArmState) {
        self.by_lcb.remove(&(Bound(arm.lcb), Reverse(arm.pair), i));
        self.by_ucb.remove(&(Bound(arm.ucb), arm.pair, i));
    }

    fn is_empty(&self) -> bool {
        self.by_lcb.is_empty()
    }

    fn best_lcb(&self) -> Option<usize> {
        self.by_lcb.last().map(|&(_, _, i)| i)
    }

    fn worst_ucb(&self) -> Option<usize> {
        self.by_ucb.first().map(|&(_, _, i)| i)
    }
}

/// Runs the threshold bandit over `arms`, which must be distinct.
pub fn run_tbhs<F>(oracle: &mut F, arms: &[PairId], config: &TbhsConfig) -> Result<TbhsOutput>
where
    F: Feedback + ?Sized,
{
    config.validate()?;
    if arms.is_empty() {
        return Ok(TbhsOutput::default());
    }
    let distinct: BTreeSet<PairId> = arms.iter().copied().collect();
    if distinct.len() != arms.len() {
        return Err(Error::InvalidParameter("threshold-bandit arms must be distinct".into()));
    }

    let m = arms.len();
    let start = oracle.total_pulls();
    let good_line = THRESHOLD - config.epsilon;
    let bad_line = THRESHOLD + config.epsilon;

    let mut states: Vec<ArmState> = Vec::with_capacity(m);
    for &e in arms {
        let mut arm = ArmState::new(e);
        arm.record(oracle.pull(e)?);
        arm.refresh(m, config);
        states.push(arm);
    }
    let mut active = ActiveSet {
        by_lcb: BTreeSet::new(),
        by_ucb: BTreeSet::new(),
    };
    for (i, arm) in states.iter().enumerate() {
        active.insert(i, arm);
    }

    let mut good = Vec::new();
    let mut bad = Vec::new();
    let mut rounds = 0u64;
    while !active.is_empty() {
        rounds += 1;
        let (Some(g), Some(b)) = (active.best_lcb(), active.worst_ucb()) else {
            unreachable!("both orderings hold the same arms");
        };
        active.remove(g, &states[g]);
        if b != g {
            active.remove(b, &states[b]);
        }
        // Both pulls happen even when the two rules pick the same arm.
        let reward_g = oracle.pull(states[g].pair)?;
        let reward_b = oracle.pull(states[b].pair)?;
        states[g].record(reward_g);
        states[b].record(reward_b);
        states[g].refresh(m, config);
        if b != g {
            states[b].refresh(m, config);
        }

        let g_done = states[g].lcb >= good_line;
        if g_done {
            good.push(states[g].pair);
        } else {
            active.insert(g, &states[g]);
        }
        if b == g && g_done {
            continue;
        }
        if states[b].ucb <= bad_line {
            if b == g {
                active.remove(g, &states[g]);
            }
            bad.push(states[b].pair);
        } else if b != g {
            active.insert(b, &states[b]);
        }
    }

    good.sort_unstable();
    bad.sort_unstable();
    Ok(TbhsOutput {
        good,
        bad,
        pulls_used: oracle.total_pulls() - start,
        rounds,
    })
}

/// True iff every classified pair with `s(e) > 0.5 + epsilon` is in `good`
/// and every one with `s(e) < 0.5 - epsilon` is in `bad`.
pub fn containment_check(output: &TbhsOutput, instance: &Instance, epsilon: f64) -> bool {
    let good_ok = output
        .good
        .iter()
        .all(|&e| instance.sim(e) >= THRESHOLD - epsilon);
    let bad_ok = output
        .bad
        .iter()
        .all(|&e| instance.sim(e) <= THRESHOLD + epsilon);
    good_ok && bad_ok
}
