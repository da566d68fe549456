//! Correlation-clustering instances: elements `0..n`, one similarity in
//! `[0, 1]` for each unordered pair, stored densely in lexicographic pair
//! order.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Index of an unordered pair `{u, v}` in lexicographic order over `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairId(pub usize);

impl PairId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Number of unordered pairs over `n` elements.
#[inline]
pub const fn pair_count(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

#[inline]
fn row_start(u: usize, n: usize) -> usize {
    u * n - u * (u + 1) / 2
}

/// Index of the pair `{u, v}`. The arguments may be given in either order.
pub fn pair_index(u: usize, v: usize, n: usize) -> Result<PairId> {
    if u == v || u >= n || v >= n {
        return Err(Error::InvalidPair { u, v, n });
    }
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    Ok(PairId(row_start(u, n) + (v - u - 1)))
}

/// Unchecked variant for callers that already hold distinct in-range elements.
#[inline]
pub(crate) fn pair_index_unchecked(u: usize, v: usize, n: usize) -> PairId {
    debug_assert!(u != v && u < n && v < n);
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    PairId(row_start(u, n) + (v - u - 1))
}

/// Inverse of [`pair_index`]; always returns `(u, v)` with `u < v`.
pub fn pair_of(e: PairId, n: usize) -> Result<(usize, usize)> {
    let m = pair_count(n);
    if e.0 >= m {
        return Err(Error::PairOutOfRange { index: e.0, m });
    }
    // Row u holds n-1-u pairs. Solve row_start(u) <= e from the quadratic and
    // correct for rounding.
    let nf = n as f64;
    let disc = (2.0 * nf - 1.0) * (2.0 * nf - 1.0) - 8.0 * e.0 as f64;
    let mut u = libm::floor(((2.0 * nf - 1.0) - libm::sqrt(disc.max(0.0))) / 2.0) as usize;
    u = u.min(n - 2);
    while u > 0 && row_start(u, n) > e.0 {
        u -= 1;
    }
    while u + 1 < n - 1 && row_start(u + 1, n) <= e.0 {
        u += 1;
    }
    let v = e.0 - row_start(u, n) + u + 1;
    Ok((u, v))
}

/// An assignment of a cluster label to every element. Two elements are
/// co-clustered iff their labels are equal; labels need not be contiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    labels: Vec<usize>,
}

impl Clustering {
    pub fn from_labels(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    pub fn singletons(n: usize) -> Self {
        Self { labels: (0..n).collect() }
    }

    pub fn single_cluster(n: usize) -> Self {
        Self { labels: alloc::vec![0; n] }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn same_cluster(&self, u: usize, v: usize) -> bool {
        self.labels[u] == self.labels[v]
    }

    /// Relabels clusters `0, 1, 2, ...` in order of first appearance, which
    /// is the restricted-growth-string form of the partition.
    pub fn canonical(&self) -> Self {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| match map.iter().find(|(old, _)| *old == l) {
                Some(&(_, new)) => new,
                None => {
                    let new = map.len();
                    map.push((l, new));
                    new
                }
            })
            .collect();
        Self { labels }
    }

    pub fn num_clusters(&self) -> usize {
        self.canonical().labels.iter().copied().max().map_or(0, |l| l + 1)
    }

    /// Clusters as sorted member lists, ordered by smallest member.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let canon = self.canonical();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (v, &l) in canon.labels.iter().enumerate() {
            if l == out.len() {
                out.push(Vec::new());
            }
            out[l].push(v);
        }
        out
    }

    /// True iff both clusterings induce the same partition.
    pub fn same_partition(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

/// A dense correlation-clustering instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    sims: Vec<f64>,
    ground_truth: Option<Clustering>,
}

impl Instance {
    /// Validates that `sims` has `n(n-1)/2` entries, each in `[0, 1]`.
    pub fn new(n: usize, sims: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        let m = pair_count(n);
        if sims.len() != m {
            return Err(Error::InvalidInstance(format!(
                "expected {m} similarities for n = {n}, got {}",
                sims.len()
            )));
        }
        if let Some((i, s)) = sims
            .iter()
            .enumerate()
            .find(|(_, s)| !(0.0..=1.0).contains(*s))
        {
            return Err(Error::InvalidInstance(format!(
                "similarity {s} of pair {i} is outside [0, 1]"
            )));
        }
        Ok(Self {
            n,
            sims,
            ground_truth: None,
        })
    }

    pub fn with_ground_truth(mut self, labels: Clustering) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidClustering {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.ground_truth = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sims.len()
    }

    pub fn sims(&self) -> &[f64] {
        &self.sims
    }

    #[inline]
    pub fn sim(&self, e: PairId) -> f64 {
        self.sims[e.0]
    }

    pub fn sim_between(&self, u: usize, v: usize) -> Result<f64> {
        pair_index(u, v, self.n).map(|e| self.sims[e.0])
    }

    pub fn ground_truth(&self) -> Option<&Clustering> {
        self.ground_truth.as_ref()
    }

    pub fn pairs(&self) -> impl Iterator<Item = PairId> {
        (0..self.m()).map(PairId)
    }
}

/// Kind-specific parameters of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// `k` planted clusters. Intra-cluster pairs get `in_mean`, inter-cluster
    /// pairs `out_mean`; each pair is then replaced by `1 - s` with
    /// probability `flip_noise`.
    Planted {
        k: usize,
        flip_noise: f64,
        in_mean: f64,
        out_mean: f64,
    },
    /// Independent uniform similarities on `[lo, hi]`.
    UniformRandom { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn planted(n: usize, k: usize, flip_noise: f64, in_mean: f64, out_mean: f64, seed: u64) -> Self {
        Self {
            n,
            kind: GeneratorKind::Planted {
                k,
                flip_noise,
                in_mean,
                out_mean,
            },
            seed,
        }
    }

    pub fn uniform_random(n: usize, lo: f64, hi: f64, seed: u64) -> Self {
        Self {
            n,
            kind: GeneratorKind::UniformRandom { lo, hi },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        match self.kind {
            GeneratorKind::Planted {
                k,
                flip_noise,
                in_mean,
                out_mean,
            } => {
                if k == 0 || k > self.n {
                    return Err(Error::InvalidSpec(format!(
                        "cluster count k = {k} must lie in 1..={}",
                        self.n
                    )));
                }
                if !(0.0..0.5).contains(&flip_noise) {
                    return Err(Error::InvalidSpec(format!(
                        "flip noise {flip_noise} must lie in [0, 0.5)"
                    )));
                }
                if !unit(in_mean) || !unit(out_mean) {
                    return Err(Error::InvalidSpec("cluster means must lie in [0, 1]".into()));
                }
            }
            GeneratorKind::UniformRandom { lo, hi } => {
                if !unit(lo) || !unit(hi) || lo > hi {
                    return Err(Error::InvalidSpec(format!(
                        "range [{lo}, {hi}] is not a sub-interval of [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds a synthetic instance. The output is a pure function of `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        GeneratorKind::Planted {
            k,
            flip_noise,
            in_mean,
            out_mean,
        } => {
            // Round-robin over a random permutation keeps every cluster
            // non-empty and sizes within one of each other.
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut labels = alloc::vec![0usize; n];
            for (slot, &v) in order.iter().enumerate() {
                labels[v] = slot % k;
            }
            let mut sims = Vec::with_capacity(pair_count(n));
            for u in 0..n {
                for v in u + 1..n {
                    let base = if labels[u] == labels[v] { in_mean } else { out_mean };
                    let flip = rng.random::<f64>() < flip_noise;
                    sims.push(if flip { 1.0 - base } else { base });
                }
            }
            Instance::new(n, sims)?.with_ground_truth(Clustering::from_labels(labels))
        }
        GeneratorKind::UniformRandom { lo, hi } => {
            let sims = (0..pair_count(n))
                .map(|_| if lo == hi { lo } else { rng.random_range(lo..=hi) })
                .collect();
            Instance::new(n, sims)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pair_index_examples() {
        assert_eq!(pair_index(0, 1, 4).unwrap(), PairId(0));
        assert_eq!(pair_index(2, 3, 4).unwrap(), PairId(5));
        assert_eq!(pair_index(1, 3, 4).unwrap(), PairId(4));
        assert_eq!(pair_index(3, 1, 4).unwrap(), PairId(4));
    }

    #[test]
    fn pair_index_matches_enumeration() {
        let n = 4;
        let mut e = 0;
        for u in 0..n {
            for v in u + 1..n {
                assert_eq!(pair_index(u, v, n).unwrap(), PairId(e));
                e += 1;
            }
        }
    }

    #[test]
    fn pair_index_rejects_bad_pairs() {
        assert!(matches!(pair_index(2, 2, 4), Err(Error::InvalidPair { .. })));
        assert!(matches!(pair_index(0, 4, 4), Err(Error::InvalidPair { .. })));
        assert!(matches!(pair_index(5, 1, 4), Err(Error::InvalidPair { .. })));
    }

    #[test]
    fn pair_of_examples() {
        assert_eq!(pair_of(PairId(0), 4).unwrap(), (0, 1));
        assert_eq!(pair_of(PairId(5), 4).unwrap(), (2, 3));
        assert_eq!(pair_of(PairId(4), 4).unwrap(), (1, 3));
        assert!(matches!(pair_of(PairId(6), 4), Err(Error::PairOutOfRange { .. })));
        assert!(pair_of(PairId(0), 1).is_err());
    }

    #[test]
    fn pair_roundtrip_exhaustive_up_to_64() {
        for n in 2..=64 {
            let mut expected = 0;
            for u in 0..n {
                for v in u + 1..n {
                    let e = pair_index(u, v, n).unwrap();
                    assert_eq!(e, PairId(expected));
                    assert_eq!(pair_of(e, n).unwrap(), (u, v));
                    expected += 1;
                }
            }
            assert_eq!(expected, pair_count(n));
        }
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(3, vec![0.0, 0.5, 1.0]).is_ok());
        assert!(Instance::new(3, vec![0.0, 0.5]).is_err());
        assert!(Instance::new(3, vec![0.0, 0.5, 1.5]).is_err());
        assert!(Instance::new(3, vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(Instance::new(0, vec![]).is_err());
        let one = Instance::new(1, vec![]).unwrap();
        assert_eq!(one.m(), 0);
    }

    #[test]
    fn planted_noiseless_forms_cliques() {
        let inst = generate(&GeneratorSpec::planted(4, 2, 0.0, 1.0, 0.0, 3)).unwrap();
        let truth = inst.ground_truth().unwrap().clone();
        assert_eq!(truth.num_clusters(), 2);
        for e in inst.pairs() {
            let (u, v) = pair_of(e, 4).unwrap();
            let want = if truth.same_cluster(u, v) { 1.0 } else { 0.0 };
            assert_eq!(inst.sim(e), want);
        }
    }

    #[test]
    fn degenerate_uniform_range() {
        let inst = generate(&GeneratorSpec::uniform_random(6, 0.5, 0.5, 1)).unwrap();
        assert!(inst.sims().iter().all(|&s| s == 0.5));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::planted(9, 3, 0.2, 0.9, 0.1, 42);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let spec = GeneratorSpec::uniform_random(9, 0.1, 0.9, 42);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn generator_rejects_bad_specs() {
        assert!(generate(&GeneratorSpec::planted(4, 5, 0.0, 1.0, 0.0, 0)).is_err());
        assert!(generate(&GeneratorSpec::planted(4, 0, 0.0, 1.0, 0.0, 0)).is_err());
        assert!(generate(&GeneratorSpec::planted(4, 2, 0.5, 1.0, 0.0, 0)).is_err());
        assert!(generate(&GeneratorSpec::uniform_random(4, 0.6, 0.4, 0)).is_err());
    }

    #[test]
    fn clustering_helpers() {
        let c = Clustering::from_labels(vec![7, 3, 7, 9]);
        assert_eq!(c.canonical().labels(), &[0, 1, 0, 2]);
        assert_eq!(c.num_clusters(), 3);
        assert_eq!(c.clusters(), vec![vec![0, 2], vec![1], vec![3]]);
        assert!(c.same_partition(&Clustering::from_labels(vec![1, 0, 1, 5])));
    }
}
