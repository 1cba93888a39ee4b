//! The SALSO search.
//!
//! Each run initializes a partition (sequential allocation with probability
//! `p_sa`, otherwise uniform random labels), sweetens it by greedy
//! one-item-at-a-time reallocation until a full scan changes nothing, then
//! tries up to `max_zealous` zealous updates that destroy one cluster and
//! sequentially reallocate its items, keeping the result only if the
//! expected loss strictly drops. Runs are independent and seeded from
//! `(seed, run_index)`, so results do not depend on the number of workers.
//!
//! Every placement considers the existing clusters plus a new one, unless a
//! new cluster would exceed the cluster limit `k_d`. Ties go to the lowest
//! cluster index, the new cluster being last. One scan costs
//! `O(H k_d k_H n)` for the count-based losses.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::TableCache;
use crate::error::{Error, Result};
use crate::losses::{self, LossSpec, Objective};
use crate::partition::{ClusterLabels, DrawsMatrix};

/// Upper bound on the number of clusters in the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterLimit {
    /// Largest cluster count among the draws.
    #[default]
    Auto,
    /// No limit beyond the number of items.
    Unconstrained,
    Fixed(usize),
}

impl ClusterLimit {
    /// Resolves to a limit in `1..=n`. Fixed limits above `n` are clamped.
    pub fn resolve(self, draws: &DrawsMatrix) -> Result<usize> {
        let n = draws.n_items();
        match self {
            ClusterLimit::Auto => Ok(draws.max_clusters().clamp(1, n)),
            ClusterLimit::Unconstrained => Ok(n),
            ClusterLimit::Fixed(0) => Err(Error::InvalidConfig(
                "maximum number of clusters must be positive".into(),
            )),
            ClusterLimit::Fixed(k) => Ok(k.min(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalsoConfig {
    pub n_runs: usize,
    /// Probability that a run starts with sequential allocation.
    pub p_sa: f64,
    pub max_clusters: ClusterLimit,
    pub max_zealous: usize,
    /// Cap on sweetening scans per sweetening phase.
    pub max_scans: usize,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub n_workers: usize,
}

impl Default for SalsoConfig {
    fn default() -> Self {
        Self {
            n_runs: 16,
            p_sa: 0.5,
            max_clusters: ClusterLimit::Auto,
            max_zealous: 10,
            max_scans: 1000,
            seed: 0,
            n_workers: 0,
        }
    }
}

impl SalsoConfig {
    /// Single run, random initialization, no zealous updates: the search
    /// then behaves like the Rastelli and Friel greedy algorithm.
    pub fn rastelli_friel() -> Self {
        Self {
            n_runs: 1,
            p_sa: 0.0,
            max_zealous: 0,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig("number of runs must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p_sa) {
            return Err(Error::InvalidConfig(format!(
                "p_sa must lie in [0, 1], got {}",
                self.p_sa
            )));
        }
        if self.max_scans == 0 {
            return Err(Error::InvalidConfig("max_scans must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    Sequential,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunDiagnostics {
    pub run_index: usize,
    pub seed: u64,
    pub init: InitMethod,
    pub scans: usize,
    /// A sweetening phase stopped at `max_scans` without converging.
    pub hit_scan_cap: bool,
    pub zealous_attempts: usize,
    pub zealous_accepted: usize,
    pub wall_ms: f64,
    pub loss: f64,
    pub n_clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub labels: ClusterLabels,
    pub loss: f64,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalsoResult {
    pub estimate: ClusterLabels,
    pub expected_loss: f64,
    pub spec: LossSpec,
    /// Resolved cluster limit.
    pub max_clusters: usize,
    pub best_run_index: usize,
    pub runs: Vec<RunDiagnostics>,
}

/// Phase in which an allocation happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Sequential,
    Sweetening,
    Zealous,
}

/// One placement decision, seen just before the item is placed.
pub struct AllocationStep<'s, 'a> {
    pub phase: Phase,
    pub item: usize,
    /// The working partition with `item` unallocated.
    pub cache: &'s TableCache<'a>,
    pub scores: &'s [f64],
    pub chosen: usize,
}

/// Receives every placement decision of a run.
pub trait AllocationObserver {
    fn on_allocation(&mut self, step: &AllocationStep<'_, '_>);
}

/// Observer that ignores everything.
pub struct NoObserver;

impl AllocationObserver for NoObserver {
    fn on_allocation(&mut self, _: &AllocationStep<'_, '_>) {}
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index`, a SplitMix64 finalizer over the master seed.
pub fn run_seed(master: u64, run_index: usize) -> u64 {
    mix64(master ^ GOLDEN_GAMMA.wrapping_mul(run_index as u64 + 1))
}

/// Labels drawn independently and uniformly from `0..k`.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..k as u32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweetenOutcome {
    pub scans: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ZealousOutcome {
    pub attempts: usize,
    pub accepted: usize,
}

/// Mutable state of one run.
pub struct RunState<'a> {
    cache: TableCache<'a>,
    max_clusters: usize,
    rng: ChaCha8Rng,
    perm: Vec<usize>,
    scores: Vec<f64>,
}

impl<'a> RunState<'a> {
    pub fn new(draws: &'a DrawsMatrix, max_clusters: usize, seed: u64) -> Self {
        Self {
            cache: TableCache::new(draws, max_clusters),
            max_clusters,
            rng: ChaCha8Rng::seed_from_u64(seed),
            perm: (0..draws.n_items()).collect(),
            scores: Vec::new(),
        }
    }

    /// Starts from a given complete partition instead of an initializer.
    pub fn with_partition(
        draws: &'a DrawsMatrix,
        max_clusters: usize,
        seed: u64,
        labels: &ClusterLabels,
    ) -> Result<Self> {
        let mut state = Self::new(draws, max_clusters, seed);
        state.cache = TableCache::from_labels(draws, labels, max_clusters)?;
        Ok(state)
    }

    pub fn cache(&self) -> &TableCache<'a> {
        &self.cache
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Canonical labels of the (fully allocated) working partition.
    pub fn labels(&self) -> Option<ClusterLabels> {
        self.cache.labels()
    }

    /// Places an unallocated item at the best-scoring cluster and returns
    /// the chosen index; `n_clusters()` before the call means a new cluster.
    fn place(
        &mut self,
        item: usize,
        phase: Phase,
        objective: &dyn Objective,
        observer: &mut dyn AllocationObserver,
    ) -> usize {
        let q = self.cache.n_clusters();
        let chosen = if q == 0 {
            self.scores.clear();
            self.scores.push(0.0);
            0
        } else {
            let allow_new = q < self.max_clusters;
            objective.allocation_scores(&self.cache, item, allow_new, &mut self.scores);
            argmin(&self.scores)
        };
        observer.on_allocation(&AllocationStep {
            phase,
            item,
            cache: &self.cache,
            scores: &self.scores,
            chosen,
        });
        self.cache.allocate(item, chosen);
        debug_assert!(self.cache.n_clusters() <= self.max_clusters);
        chosen
    }

    /// Allocates every item one at a time in a uniformly random order, each
    /// at the placement minimizing the loss over the items placed so far.
    pub fn initialize_sequential(
        &mut self,
        objective: &dyn Objective,
        observer: &mut dyn AllocationObserver,
    ) {
        debug_assert_eq!(self.cache.n_allocated(), 0);
        let mut perm = std::mem::take(&mut self.perm);
        perm.shuffle(&mut self.rng);
        for &item in &perm {
            self.place(item, Phase::Sequential, objective, observer);
        }
        self.perm = perm;
    }

    /// Draws each label uniformly from `1..=k_d`, then compacts.
    pub fn initialize_random(&mut self) {
        debug_assert_eq!(self.cache.n_allocated(), 0);
        let labels = random_labels(&mut self.rng, self.cache.n_items(), self.max_clusters);
        let canonical = ClusterLabels::from_zero_based(&labels);
        for (item, c) in canonical.zero_based().enumerate() {
            self.cache.allocate(item, c as usize);
        }
    }

    /// Greedy reallocation scans until a full scan leaves the partition
    /// unchanged or `max_scans` scans have run.
    pub fn sweeten(
        &mut self,
        objective: &dyn Objective,
        max_scans: usize,
        observer: &mut dyn AllocationObserver,
    ) -> SweetenOutcome {
        let mut perm = std::mem::take(&mut self.perm);
        let mut outcome = SweetenOutcome {
            scans: max_scans,
            converged: false,
        };
        for scan in 1..=max_scans {
            perm.shuffle(&mut self.rng);
            let mut changed = false;
            for &item in &perm {
                let removal = self
                    .cache
                    .deallocate(item)
                    .expect("sweetening requires a fully allocated partition");
                let fresh = self.cache.n_clusters();
                let chosen = self.place(item, Phase::Sweetening, objective, observer);
                let stayed = if removal.emptied {
                    chosen == fresh
                } else {
                    chosen == removal.from
                };
                changed |= !stayed;
            }
            if !changed {
                outcome = SweetenOutcome {
                    scans: scan,
                    converged: true,
                };
                break;
            }
        }
        debug_assert!(self.cache.is_consistent());
        self.perm = perm;
        outcome
    }

    /// Up to `max_zealous` attempts, over clusters in random order, to
    /// destroy a cluster and reallocate its items sequentially. An attempt
    /// is kept only if it changes the partition and strictly lowers the
    /// objective.
    ///
    /// Targets are snapshotted at phase start; each attempt destroys the
    /// cluster currently holding the smallest item of its snapshot.
    pub fn zealous(
        &mut self,
        objective: &dyn Objective,
        max_zealous: usize,
        observer: &mut dyn AllocationObserver,
    ) -> ZealousOutcome {
        let mut outcome = ZealousOutcome::default();
        if max_zealous == 0 {
            return outcome;
        }
        let mut targets: Vec<u32> = (0..self.cache.n_clusters())
            .map(|c| *self.cache.members(c).iter().min().expect("nonempty cluster"))
            .collect();
        targets.shuffle(&mut self.rng);
        targets.truncate(max_zealous);

        for rep in targets {
            let Some(target) = self.cache.cluster_of(rep as usize) else {
                continue;
            };
            let before_labels = self.cache.labels();
            let before_loss = objective.cached_value(&self.cache);
            let mut items: Vec<usize> = self.cache.members(target).iter().map(|&i| i as usize).collect();
            items.sort_unstable();
            for &i in &items {
                self.cache.deallocate(i).expect("allocated item");
            }
            items.shuffle(&mut self.rng);
            for &i in &items {
                self.place(i, Phase::Zealous, objective, observer);
            }
            outcome.attempts += 1;
            let improved = self.cache.labels() != before_labels
                && objective.cached_value(&self.cache) < before_loss;
            if improved {
                outcome.accepted += 1;
            } else {
                for &i in &items {
                    self.cache.deallocate(i).expect("allocated item");
                }
                let slot = self.cache.n_clusters();
                for &i in &items {
                    self.cache.allocate(i, slot);
                }
                debug_assert_eq!(self.cache.labels(), before_labels);
            }
        }
        debug_assert!(self.cache.is_consistent());
        outcome
    }
}

/// Index of the smallest score; the first one on ties.
fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (j, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = j;
        }
    }
    best
}

/// One run of the search with a prebuilt objective.
pub fn run_once_with(
    draws: &DrawsMatrix,
    objective: &dyn Objective,
    config: &SalsoConfig,
    max_clusters: usize,
    run_index: usize,
    observer: &mut dyn AllocationObserver,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let seed = run_seed(config.seed, run_index);
    let mut state = RunState::new(draws, max_clusters, seed);
    let init = if state.rng.gen::<f64>() < config.p_sa {
        state.initialize_sequential(objective, observer);
        InitMethod::Sequential
    } else {
        state.initialize_random();
        InitMethod::Random
    };
    let mut sweet = state.sweeten(objective, config.max_scans, observer);
    let mut scans = sweet.scans;
    let mut hit_scan_cap = !sweet.converged;
    let zealous = state.zealous(objective, config.max_zealous, observer);
    if zealous.accepted > 0 {
        sweet = state.sweeten(objective, config.max_scans, observer);
        scans += sweet.scans;
        hit_scan_cap |= !sweet.converged;
    }
    let labels = state.labels().expect("fully allocated");
    let loss = objective.evaluate(&labels)?;
    let diagnostics = RunDiagnostics {
        run_index,
        seed,
        init,
        scans,
        hit_scan_cap,
        zealous_attempts: zealous.attempts,
        zealous_accepted: zealous.accepted,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        loss,
        n_clusters: labels.num_clusters(),
    };
    Ok(RunOutcome {
        labels,
        loss,
        diagnostics,
    })
}

/// One run of the search for `spec`.
pub fn run_once(
    draws: &DrawsMatrix,
    spec: &LossSpec,
    config: &SalsoConfig,
    run_index: usize,
) -> Result<RunOutcome> {
    config.validate()?;
    check_spec(draws, spec)?;
    let k = config.max_clusters.resolve(draws)?;
    let objective = losses::objective(spec, draws);
    run_once_with(draws, objective.as_ref(), config, k, run_index, &mut NoObserver)
}

fn check_spec(draws: &DrawsMatrix, spec: &LossSpec) -> Result<()> {
    if spec.kind == crate::LossKind::Omari && draws.n_items() < 2 {
        return Err(Error::TooFewItems {
            loss: "omari",
            min: 2,
            found: draws.n_items(),
        });
    }
    Ok(())
}

/// Runs the search `n_runs` times and returns the best estimate. Ties in
/// loss go to the lowest run index.
pub fn salso(draws: &DrawsMatrix, spec: &LossSpec, config: &SalsoConfig) -> Result<SalsoResult> {
    check_spec(draws, spec)?;
    let objective = losses::objective(spec, draws);
    salso_with(draws, objective.as_ref(), config)
}

/// [`salso`] with a caller-supplied objective.
pub fn salso_with(
    draws: &DrawsMatrix,
    objective: &dyn Objective,
    config: &SalsoConfig,
) -> Result<SalsoResult> {
    config.validate()?;
    let k = config.max_clusters.resolve(draws)?;
    let job = |r: usize| run_once_with(draws, objective, config, k, r, &mut NoObserver);
    let outcomes: Vec<RunOutcome> = if config.n_workers == 1 || config.n_runs == 1 {
        (0..config.n_runs).map(job).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.n_workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| (0..config.n_runs).into_par_iter().map(job).collect::<Result<_>>())?
    };

    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.loss < outcomes[best].loss {
            best = r;
        }
    }
    let estimate = outcomes[best].labels.clone();
    let expected_loss = outcomes[best].loss;
    Ok(SalsoResult {
        estimate,
        expected_loss,
        spec: objective.spec(),
        max_clusters: k,
        best_run_index: best,
        runs: outcomes.into_iter().map(|o| o.diagnostics).collect(),
    })
}
