//! Instance-dependent gaps and the theoretical reference values built from
//! them. Nothing here touches an oracle; these quantities need the true
//! similarities and exist to check measured behaviour against theory.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{Instance, PairId};
use crate::offline::THRESHOLD;

/// Distance of each pair from the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    /// `|s(e) - 0.5|` per pair.
    pub deltas: Vec<f64>,
    pub delta_min: f64,
    /// Number of pairs with `s(e) >= 0.5`.
    pub m_g: usize,
}

pub fn gaps(instance: &Instance) -> Result<GapProfile> {
    if instance.m() == 0 {
        return Err(Error::EmptyProfile);
    }
    let deltas: Vec<f64> = instance.sims().iter().map(|s| (s - THRESHOLD).abs()).collect();
    let delta_min = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let m_g = instance.sims().iter().filter(|&&s| s >= THRESHOLD).count();
    Ok(GapProfile {
        deltas,
        delta_min,
        m_g,
    })
}

fn delta_min(instance: &Instance) -> f64 {
    instance
        .sims()
        .iter()
        .map(|s| (s - THRESHOLD).abs())
        .fold(f64::INFINITY, f64::min)
}

/// The pairs within `epsilon` of the threshold (`band`, inclusive), strictly
/// above `0.5 + epsilon`, and strictly below `0.5 - epsilon`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EpsilonBands {
    pub band: Vec<PairId>,
    pub above: Vec<PairId>,
    pub below: Vec<PairId>,
}

pub fn epsilon_bands(instance: &Instance, epsilon: f64) -> EpsilonBands {
    let mut bands = EpsilonBands::default();
    for e in instance.pairs() {
        let s = instance.sim(e);
        if (THRESHOLD - s).abs() <= epsilon {
            bands.band.push(e);
        } else if s > THRESHOLD + epsilon {
            bands.above.push(e);
        } else {
            bands.below.push(e);
        }
    }
    bands
}

/// Slack-adjusted gaps `Delta_e + min{epsilon - Delta_min, epsilon / 2}`.
pub fn tilde_gaps(instance: &Instance, epsilon: f64) -> Vec<f64> {
    let dmin = delta_min(instance);
    let shift = (epsilon - dmin).min(epsilon / 2.0);
    instance
        .sims()
        .iter()
        .map(|s| (s - THRESHOLD).abs() + shift)
        .collect()
}

/// Minimal gap governing the fixed-budget error exponent. For
/// `epsilon < 0.5` the floor is `epsilon / (6 max{1, |band|})`, otherwise
/// `epsilon / (6 m)`. Infinite for an instance without pairs.
pub fn fb_min_gap(instance: &Instance, epsilon: f64) -> f64 {
    let m = instance.m();
    let floor = if epsilon < 0.5 {
        let band = epsilon_bands(instance, epsilon).band.len();
        epsilon / (6.0 * band.max(1) as f64)
    } else {
        epsilon / (6.0 * m as f64)
    };
    instance
        .sims()
        .iter()
        .map(|s| (s - THRESHOLD).abs().max(floor))
        .fold(f64::INFINITY, f64::min)
}

/// Upper bound on the expected number of threshold-bandit pulls at slack
/// `epsilon`: `sum_e k_e + m / (2 max{Delta_min, epsilon/2}^2)` with
/// `k_e = ln((4 c / g^2) ln(5 c / g^2)) / g^2`, `c = sqrt(m / delta)` and
/// `g` the slack-adjusted gap of `e`.
pub fn fc_sample_bound(instance: &Instance, epsilon: f64, delta: f64) -> f64 {
    let m = instance.m();
    if m == 0 {
        return 0.0;
    }
    let c = libm::sqrt(m as f64 / delta);
    let per_arm: f64 = tilde_gaps(instance, epsilon)
        .iter()
        .map(|g| {
            let g2 = g * g;
            libm::log(4.0 * c / g2 * libm::log(5.0 * c / g2)) / g2
        })
        .sum();
    let floor = delta_min(instance).max(epsilon / 2.0);
    per_arm + m as f64 / (2.0 * floor * floor)
}

/// Fixed-budget failure bound `2 n^3 exp(-2 T g^2 / n^2)` with `g` from
/// [`fb_min_gap`], clamped to `[0, 1]`.
pub fn fb_error_bound(instance: &Instance, budget: u64, epsilon: f64) -> f64 {
    let n = instance.n() as f64;
    let g = fb_min_gap(instance, epsilon);
    if g.is_infinite() {
        return 0.0;
    }
    (2.0 * n * n * n * libm::exp(-2.0 * budget as f64 * g * g / (n * n))).min(1.0)
}

/// `cost <= factor * opt + epsilon`.
pub fn success_check(cost: f64, opt: f64, epsilon: f64, factor: f64) -> bool {
    cost <= factor * opt + epsilon
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn three() -> Instance {
        Instance::new(3, vec![0.9, 0.1, 0.55]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn gap_examples() {
        let g = gaps(&three()).unwrap();
        assert!(g.deltas.iter().zip([0.4, 0.4, 0.05]).all(|(a, b)| close(*a, b)));
        assert!(close(g.delta_min, 0.05));
        assert_eq!(g.m_g, 2);
        let half = Instance::new(3, vec![0.5; 3]).unwrap();
        assert_eq!(gaps(&half).unwrap().delta_min, 0.0);
        assert_eq!(gaps(&Instance::new(2, vec![1.0]).unwrap()).unwrap().deltas, vec![0.5]);
        assert_eq!(gaps(&Instance::new(1, vec![]).unwrap()), Err(Error::EmptyProfile));
    }

    #[test]
    fn band_examples() {
        let b = epsilon_bands(&three(), 0.1);
        assert_eq!(b.above, vec![PairId(0)]);
        assert_eq!(b.below, vec![PairId(1)]);
        assert_eq!(b.band, vec![PairId(2)]);
        // 0.75 - 0.5 is exact in binary, so the boundary is hit exactly
        let edge = Instance::new(2, vec![0.75]).unwrap();
        assert_eq!(epsilon_bands(&edge, 0.25).band, vec![PairId(0)]);
        let inner = Instance::new(3, vec![0.01, 0.5, 0.99]).unwrap();
        assert_eq!(epsilon_bands(&inner, 0.499).band.len(), 3);
    }

    #[test]
    fn tilde_gap_examples() {
        let t = tilde_gaps(&three(), 0.2);
        assert!(t.iter().zip([0.5, 0.5, 0.15]).all(|(a, b)| close(*a, b)), "{t:?}");
        // a single pair gets min{eps, Delta + eps / 2}
        let wide = Instance::new(2, vec![0.9]).unwrap();
        assert!(close(tilde_gaps(&wide, 0.2)[0], 0.2));
        let narrow = Instance::new(2, vec![0.55]).unwrap();
        assert!(close(tilde_gaps(&narrow, 0.2)[0], 0.15));
        let degenerate = Instance::new(3, vec![0.5, 0.9, 0.1]).unwrap();
        let t = tilde_gaps(&degenerate, 0.2);
        assert!(close(t[0], 0.1));
    }

    #[test]
    fn fb_min_gap_examples() {
        assert!(close(fb_min_gap(&three(), 0.12), 0.05));
        let half = Instance::new(3, vec![0.5; 3]).unwrap();
        assert!(close(fb_min_gap(&half, 0.3), 1.0 / 60.0));
        // eps >= 0.5 uses eps / (6 m)
        assert!(close(fb_min_gap(&half, 0.6), 0.6 / 18.0));
    }

    #[test]
    fn fb_error_bound_examples() {
        assert_eq!(fb_error_bound(&three(), 0, 0.12), 1.0);
        // 54 exp(-50 / 9), evaluated independently
        let b = fb_error_bound(&three(), 10_000, 0.12);
        assert!(close(b, 0.208_759_687_531_531_56), "{b}");
        let b2 = fb_error_bound(&three(), 20_000, 0.12);
        assert!(b2 < b);
        assert!(close(b2 / 54.0, (b / 54.0) * (b / 54.0)));
    }

    #[test]
    fn fc_sample_bound_examples() {
        // single arm, s = 1: tilde gap = 0.5 + min{-0.1, 0.2} = 0.4
        let one = Instance::new(2, vec![1.0]).unwrap();
        let b = fc_sample_bound(&one, 0.4, 0.25);
        assert!(close(b, 35.322_191_330_230_09), "{b}");
        assert!(b >= 1.0);
        let tight = Instance::new(2, vec![0.5]).unwrap();
        assert!(fc_sample_bound(&tight, 0.01, 0.1).is_finite());
    }

    #[test]
    fn success_examples() {
        assert!(success_check(1.0, 0.2, 0.0, 5.0));
        assert!(!success_check(1.01, 0.2, 0.0, 5.0));
        assert!(success_check(0.3, 0.0, 0.5, 5.0));
    }
}
