//! Noise-free building blocks: the clustering cost, the KwikCluster pivot
//! algorithm over any similarity source, Monte-Carlo cost estimation over
//! pivot randomness, and an exhaustive optimum for small instances.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{pair_count, pair_index_unchecked, Clustering, Instance, PairId};

/// Largest `n` accepted by [`brute_force_opt`]; Bell(13) is about 2.8e7.
pub const MAX_EXACT_N: usize = 13;

/// Similarity threshold of the pivot rule; a pair joins only when strictly above.
pub const THRESHOLD: f64 = 0.5;

/// A pair -> value map over the elements `0..n`.
pub trait SimilaritySource {
    fn num_elements(&self) -> usize;

    fn similarity(&self, e: PairId) -> f64;

    #[inline]
    fn similarity_between(&self, u: usize, v: usize) -> f64 {
        self.similarity(pair_index_unchecked(u, v, self.num_elements()))
    }
}

impl SimilaritySource for Instance {
    fn num_elements(&self) -> usize {
        self.n()
    }

    #[inline]
    fn similarity(&self, e: PairId) -> f64 {
        self.sim(e)
    }
}

impl<S: SimilaritySource + ?Sized> SimilaritySource for &S {
    fn num_elements(&self) -> usize {
        (**self).num_elements()
    }

    fn similarity(&self, e: PairId) -> f64 {
        (**self).similarity(e)
    }
}

/// Estimated similarities, e.g. empirical means. Values may leave `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedSimilarity {
    n: usize,
    values: Vec<f64>,
}

impl EstimatedSimilarity {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != pair_count(n) {
            return Err(Error::InvalidInstance(alloc::format!(
                "expected {} estimates for n = {n}, got {}",
                pair_count(n),
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SimilaritySource for EstimatedSimilarity {
    fn num_elements(&self) -> usize {
        self.n
    }

    #[inline]
    fn similarity(&self, e: PairId) -> f64 {
        self.values[e.0]
    }
}

/// Binary similarity: 1 for pairs in a learned high-similarity set, else 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipSource {
    n: usize,
    member: Vec<bool>,
}

impl MembershipSource {
    pub fn new(n: usize, members: impl IntoIterator<Item = PairId>) -> Self {
        let mut member = vec![false; pair_count(n)];
        for e in members {
            member[e.0] = true;
        }
        Self { n, member }
    }

    pub fn contains(&self, e: PairId) -> bool {
        self.member[e.0]
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SimilaritySource for MembershipSource {
    fn num_elements(&self) -> usize {
        self.n
    }

    #[inline]
    fn similarity(&self, e: PairId) -> f64 {
        if self.member[e.0] {
            1.0
        } else {
            0.0
        }
    }
}

/// Correlation-clustering cost: `1 - s` for every co-clustered pair plus `s`
/// for every separated pair.
pub fn cost<S: SimilaritySource + ?Sized>(source: &S, clustering: &Clustering) -> Result<f64> {
    let n = source.num_elements();
    if clustering.len() != n {
        return Err(Error::InvalidClustering {
            expected: n,
            got: clustering.len(),
        });
    }
    let labels = clustering.labels();
    let mut total = 0.0;
    let mut e = 0;
    for u in 0..n {
        for v in u + 1..n {
            let s = source.similarity(PairId(e));
            total += if labels[u] == labels[v] { 1.0 - s } else { s };
            e += 1;
        }
    }
    Ok(total)
}

/// Shared pivot loop. Each phase draws one pivot uniformly from the
/// unclustered elements; `join(pivot, rest)` reports, for each element of
/// `rest` in order, whether it joins the pivot's cluster.
pub(crate) fn pivot_loop<R, F>(n: usize, rng: &mut R, mut join: F) -> Result<Clustering>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &[usize]) -> Result<Vec<bool>>,
{
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut labels = vec![0usize; n];
    let mut label = 0;
    while !remaining.is_empty() {
        let pivot = remaining.swap_remove(rng.random_range(0..remaining.len()));
        let joined = join(pivot, &remaining)?;
        debug_assert_eq!(joined.len(), remaining.len());
        labels[pivot] = label;
        let mut flags = joined.into_iter();
        remaining.retain(|&u| {
            if flags.next().unwrap_or(false) {
                labels[u] = label;
                false
            } else {
                true
            }
        });
        label += 1;
    }
    Ok(Clustering::from_labels(labels))
}

/// KwikCluster: pivot `p` absorbs every unclustered `u` with `s(p, u) > 0.5`.
pub fn kwikcluster<S, R>(source: &S, rng: &mut R) -> Clustering
where
    S: SimilaritySource + ?Sized,
    R: Rng + ?Sized,
{
    pivot_loop(source.num_elements(), rng, |p, rest| {
        Ok(rest
            .iter()
            .map(|&u| source.similarity_between(p, u) > THRESHOLD)
            .collect())
    })
    .expect("the similarity predicate cannot fail")
}

/// Mean and standard error of a cost sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl CostEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let k = samples.len();
        if k == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                trials: 0,
            };
        }
        let mean = samples.iter().sum::<f64>() / k as f64;
        let stderr = if k > 1 {
            let var = samples.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (k - 1) as f64;
            libm::sqrt(var / k as f64)
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            trials: k,
        }
    }
}

/// Evaluates `draw(i)` for `i in 0..trials` and summarizes the true cost.
pub fn estimate_cost<S, F>(truth: &S, trials: usize, mut draw: F) -> Result<CostEstimate>
where
    S: SimilaritySource + ?Sized,
    F: FnMut(usize) -> Result<Clustering>,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let mut samples = Vec::with_capacity(trials);
    for i in 0..trials {
        samples.push(cost(truth, &draw(i)?)?);
    }
    Ok(CostEstimate::from_samples(&samples))
}

/// Monte-Carlo estimate of the true cost of KwikCluster run on `source`,
/// over independent pivot orders drawn from `rng`.
pub fn expected_cost_mc<S, R>(truth: &Instance, source: &S, trials: usize, rng: &mut R) -> Result<CostEstimate>
where
    S: SimilaritySource + ?Sized,
    R: Rng + ?Sized,
{
    if source.num_elements() != truth.n() {
        return Err(Error::InvalidClustering {
            expected: truth.n(),
            got: source.num_elements(),
        });
    }
    estimate_cost(truth, trials, |_| Ok(kwikcluster(source, rng)))
}

/// Optimal clustering found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub opt_value: f64,
    pub witness: Clustering,
}

struct Search<'w> {
    n: usize,
    sim: &'w [f64],
    prune: bool,
    labels: Vec<usize>,
    best_labels: Vec<usize>,
    best: f64,
}

impl Search<'_> {
    #[inline]
    fn s(&self, u: usize, v: usize) -> f64 {
        self.sim[u * self.n + v]
    }

    fn descend(&mut self, i: usize, blocks: usize, partial: f64) {
        if self.prune && partial > self.best {
            return;
        }
        if i == self.n {
            if partial < self.best {
                self.best = partial;
                self.best_labels.copy_from_slice(&self.labels);
            }
            return;
        }
        // Splitting i from everything costs the sum of s(i, j); joining block b
        // adds (1 - 2 s(i, j)) for each j already in b.
        let mut split = 0.0;
        let mut per_block = [0.0f64; MAX_EXACT_N];
        for j in 0..i {
            let s = self.s(i, j);
            split += s;
            per_block[self.labels[j]] += 1.0 - 2.0 * s;
        }
        for (b, &extra) in per_block[..blocks].iter().enumerate() {
            self.labels[i] = b;
            self.descend(i + 1, blocks, partial + split + extra);
        }
        self.labels[i] = blocks;
        self.descend(i + 1, blocks + 1, partial + split);
    }
}

/// Minimum-cost clustering by enumerating every set partition as a
/// restricted growth string. Ties keep the first partition found in
/// lexicographic order.
pub fn brute_force_opt<S: SimilaritySource + ?Sized>(source: &S) -> Result<OptResult> {
    let n = source.num_elements();
    if n > MAX_EXACT_N {
        return Err(Error::InstanceTooLarge { n, max: MAX_EXACT_N });
    }
    if n <= 1 {
        let witness = Clustering::single_cluster(n);
        return Ok(OptResult {
            opt_value: 0.0,
            witness,
        });
    }
    let mut sim = vec![0.0; n * n];
    let mut prune = true;
    for u in 0..n {
        for v in u + 1..n {
            let s = source.similarity_between(u, v);
            prune &= (0.0..=1.0).contains(&s);
            sim[u * n + v] = s;
            sim[v * n + u] = s;
        }
    }
    let mut search = Search {
        n,
        sim: &sim,
        prune,
        labels: vec![0; n],
        best_labels: vec![0; n],
        best: f64::INFINITY,
    };
    search.descend(1, 1, 0.0);
    let witness = Clustering::from_labels(search.best_labels);
    let opt_value = cost(source, &witness)?;
    Ok(OptResult { opt_value, witness })
}
