//! Exhaustive enumeration, baseline estimators, and synthetic draws.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::{self, LossSpec};
use crate::partition::{ClusterLabels, DrawsMatrix};

/// Largest `n` enumerated by default; `B(12) = 4,213,597`.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Relative slack used to collect tied minimizers.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Bell numbers `B(0..=n)` via `B(m+1) = sum_k C(m,k) B(k)`.
pub fn bell_numbers(n: usize) -> Vec<u128> {
    let mut bell = vec![1u128];
    let mut binom = vec![1u128];
    for m in 0..n {
        let next = binom.iter().zip(&bell).map(|(c, b)| c * b).sum();
        bell.push(next);
        let mut row = vec![1u128; m + 2];
        for k in 1..=m {
            row[k] = binom[k - 1] + binom[k];
        }
        binom = row;
    }
    bell
}

/// Every partition of `n` items as a restricted-growth string, in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct Partitions {
    labels: Vec<u32>,
    prefix_max: Vec<u32>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = ClusterLabels;

    fn next(&mut self) -> Option<ClusterLabels> {
        if self.done {
            return None;
        }
        let current = ClusterLabels::from_zero_based_canonical(self.labels.iter().copied());
        let n = self.labels.len();
        match (1..n).rev().find(|&i| self.labels[i] <= self.prefix_max[i - 1]) {
            Some(i) => {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in (i + 1)..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
            }
            None => self.done = true,
        }
        Some(current)
    }
}

pub fn enumerate_partitions(n: usize) -> Result<Partitions> {
    enumerate_partitions_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_partitions_capped(n: usize, cap: usize) -> Result<Partitions> {
    if n == 0 {
        return Err(Error::EmptyLabels);
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    Ok(Partitions {
        labels: vec![0; n],
        prefix_max: vec![0; n],
        done: false,
    })
}

/// Exact minimizers of the estimated expected loss.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// All minimizers, in enumeration order.
    pub minimizers: Vec<ClusterLabels>,
    pub loss: f64,
}

impl BruteForce {
    pub fn contains(&self, labels: &ClusterLabels) -> bool {
        self.minimizers.contains(labels)
    }
}

/// Searches all partitions with at most `max_clusters` clusters.
pub fn brute_force_minimizer(
    draws: &DrawsMatrix,
    spec: &LossSpec,
    max_clusters: usize,
) -> Result<BruteForce> {
    brute_force_minimizer_capped(draws, spec, max_clusters, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_minimizer_capped(
    draws: &DrawsMatrix,
    spec: &LossSpec,
    max_clusters: usize,
    cap: usize,
) -> Result<BruteForce> {
    let objective = losses::objective(spec, draws);
    let scored = enumerate_partitions_capped(draws.n_items(), cap)?
        .filter(|p| p.num_clusters() <= max_clusters)
        .map(|p| objective.evaluate(&p).map(|v| (p, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(minimizer_set(scored))
}

/// Tie set of the smallest values.
pub fn minimizer_set(scored: Vec<(ClusterLabels, f64)>) -> BruteForce {
    let loss = scored
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let slack = TIE_TOLERANCE * loss.abs().max(1.0);
    let minimizers = scored
        .into_iter()
        .filter(|(_, v)| *v <= loss + slack)
        .map(|(p, _)| p)
        .collect();
    BruteForce { minimizers, loss }
}

/// Best partition among the draws themselves; ties go to the lowest draw.
pub fn draws_method(draws: &DrawsMatrix, spec: &LossSpec) -> Result<(ClusterLabels, f64)> {
    let objective = losses::objective(spec, draws);
    let mut best: Option<(ClusterLabels, f64)> = None;
    for candidate in draws.draws() {
        let v = objective.evaluate(&candidate)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((candidate, v));
        }
    }
    best.ok_or(Error::NoDraws)
}

/// Most frequent partition among the draws and its relative frequency.
/// Ties go to the partition that appears first.
pub fn map_estimate(draws: &DrawsMatrix) -> (ClusterLabels, f64) {
    let mut counts: HashMap<ClusterLabels, (usize, usize)> = HashMap::new();
    for (h, d) in draws.draws().enumerate() {
        counts.entry(d).or_insert((0, h)).0 += 1;
    }
    let (labels, (count, _)) = counts
        .into_iter()
        .max_by(|(_, (c1, h1)), (_, (c2, h2))| c1.cmp(c2).then(h2.cmp(h1)))
        .expect("at least one draw");
    (labels, count as f64 / draws.n_draws() as f64)
}

/// Recipe for synthetic posterior draws: label noise around a base
/// partition that assigns items round-robin to `k_true` clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub k_true: usize,
    pub h: usize,
    /// Probability that an item is relabeled uniformly in a draw.
    pub q: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn base_partition(&self) -> ClusterLabels {
        let raw: Vec<usize> = (0..self.n).map(|i| i % self.k_true).collect();
        ClusterLabels::canonicalize(&raw).expect("n >= 1")
    }
}

pub fn synthetic_draws(spec: &SyntheticSpec) -> Result<DrawsMatrix> {
    if spec.n == 0 || spec.k_true == 0 || spec.k_true > spec.n {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k_true <= n, got k_true = {}, n = {}",
            spec.k_true, spec.n
        )));
    }
    if !(0.0..=1.0).contains(&spec.q) {
        return Err(Error::InvalidConfig(format!("noise must lie in [0, 1], got {}", spec.q)));
    }
    if spec.h == 0 {
        return Err(Error::NoDraws);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.k_true as u32;
    let rows: Vec<Vec<u32>> = (0..spec.h)
        .map(|_| {
            (0..spec.n)
                .map(|i| {
                    if rng.gen::<f64>() < spec.q {
                        rng.gen_range(0..k)
                    } else {
                        i as u32 % k
                    }
                })
                .collect()
        })
        .collect();
    DrawsMatrix::from_raw_rows(&rows)
}
