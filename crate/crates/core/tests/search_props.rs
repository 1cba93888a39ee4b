mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salso_kit::losses::{allocation_scores, objective, Binder, Gvi, MonteCarlo, Objective};
use salso_kit::oracle::{brute_force_minimizer, synthetic_draws, SyntheticSpec};
use salso_kit::salso::{
    random_labels, run_once, run_once_with, AllocationObserver, AllocationStep, InitMethod, NoObserver,
    RunState,
};
use salso_kit::{salso, ClusterLabels, ClusterLimit, DrawsMatrix, LossKind, LossSpec, SalsoConfig};

fn random_draws(rng: &mut ChaCha8Rng, n: usize, h: usize, k: u32) -> DrawsMatrix {
    let raw: Vec<Vec<u32>> = (0..h).map(|_| common::random_labels(rng, n, k)).collect();
    DrawsMatrix::from_raw_rows(&raw).unwrap()
}

fn ties(scores: &[f64]) -> Vec<usize> {
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = scores.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    (0..scores.len()).filter(|&j| scores[j] <= min + 1e-10 * scale).collect()
}

/// Rescores every placement with the generic expected-loss objective and
/// compares tie sets.
struct TieCheck<'o> {
    reference: &'o dyn Objective,
    steps: usize,
    mismatches: usize,
}

impl AllocationObserver for TieCheck<'_> {
    fn on_allocation(&mut self, step: &AllocationStep<'_, '_>) {
        let allow_new = step.scores.len() > step.cache.n_clusters();
        let full = allocation_scores(self.reference, step.cache, step.item, allow_new).unwrap();
        assert_eq!(full.len(), step.scores.len());
        self.steps += 1;
        if ties(&full) != ties(step.scores) {
            self.mismatches += 1;
        }
    }
}

#[test]
fn shortcut_tie_sets_match_full_scores_along_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..12 {
        let n = rng.gen_range(2..=12);
        let h = rng.gen_range(1..=30);
        let draws = random_draws(&mut rng, n, h, 4);
        let (a, b) = (rng.gen_range(0.2..4.0), rng.gen_range(0.2..4.0));
        let k = draws.max_clusters();
        let config = SalsoConfig { seed: trial, ..SalsoConfig::default() };
        let pairs: [(LossSpec, Box<dyn Objective>); 2] = [
            (LossSpec::binder(a, b).unwrap(), Box::new(MonteCarlo::new(&draws, Binder { a, b }))),
            (LossSpec::gvi(a, b).unwrap(), Box::new(MonteCarlo::new(&draws, Gvi::new(a, b)))),
        ];
        for (spec, reference) in &pairs {
            let fast = objective(spec, &draws);
            let mut check = TieCheck { reference: reference.as_ref(), steps: 0, mismatches: 0 };
            for r in 0..4 {
                run_once_with(&draws, fast.as_ref(), &config, k, r, &mut check).unwrap();
            }
            assert!(check.steps > 0);
            assert_eq!(check.mismatches, 0, "{spec:?}");
        }
    }
}

struct FirstMin;

impl AllocationObserver for FirstMin {
    fn on_allocation(&mut self, step: &AllocationStep<'_, '_>) {
        let min = step.scores.iter().copied().fold(f64::INFINITY, f64::min);
        let first = step.scores.iter().position(|&s| s == min).unwrap();
        assert_eq!(step.chosen, first);
        assert!(step.cache.cluster_of(step.item).is_none());
    }
}

#[test]
fn placements_take_the_lowest_index_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = random_draws(&mut rng, 15, 40, 3);
    for spec in [LossSpec::binder(1.0, 1.0).unwrap(), LossSpec::vi(), LossSpec::of(LossKind::Omari)] {
        let obj = objective(&spec, &draws);
        for r in 0..6 {
            run_once_with(&draws, obj.as_ref(), &SalsoConfig::default(), 15, r, &mut FirstMin).unwrap();
        }
    }
}

#[test]
fn sweetening_and_zealous_never_increase_the_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..40 {
        let n = rng.gen_range(3..20);
        let draws = random_draws(&mut rng, n, 25, 4);
        let k = rng.gen_range(1..=n);
        let start = ClusterLabels::canonicalize(&common::random_labels(&mut rng, n, k as u32)).unwrap();
        for spec in [LossSpec::binder(1.0, 2.0).unwrap(), LossSpec::gvi(0.5, 1.0).unwrap(), LossSpec::of(LossKind::Nid)] {
            let obj = objective(&spec, &draws);
            let mut state = RunState::with_partition(&draws, k, rng.gen(), &start).unwrap();
            let before = obj.cached_value(state.cache());
            let sweet = state.sweeten(obj.as_ref(), 1000, &mut NoObserver);
            assert!(sweet.converged);
            let after = obj.cached_value(state.cache());
            assert!(after <= before + 1e-12, "{spec:?}: {before} -> {after}");
            state.zealous(obj.as_ref(), 10, &mut NoObserver);
            let z = obj.cached_value(state.cache());
            assert!(z <= after + 1e-12);
            let labels = state.labels().unwrap();
            assert!(labels.num_clusters() <= k);
            assert!((obj.evaluate(&labels).unwrap() - z).abs() < 1e-9);
        }
    }
}

#[test]
fn zealous_updates_do_get_accepted() {
    // Random starts on clean synthetic data leave spare clusters that
    // sweetening alone cannot always drain.
    let mut accepted = 0;
    for seed in 0..30 {
        let draws = synthetic_draws(&SyntheticSpec { n: 30, k_true: 3, h: 50, q: 0.3, seed }).unwrap();
        let config = SalsoConfig { p_sa: 0.0, max_clusters: ClusterLimit::Fixed(8), ..SalsoConfig::default() };
        let out = run_once(&draws, &LossSpec::vi(), &config, 0).unwrap();
        assert_eq!(out.diagnostics.init, InitMethod::Random);
        accepted += out.diagnostics.zealous_accepted;
    }
    assert!(accepted > 0);
}

#[test]
fn initializer_choice_follows_p_sa() {
    let draws = DrawsMatrix::from_raw_rows(&[vec![1, 2, 2]]).unwrap();
    let config = SalsoConfig { p_sa: 0.3, ..SalsoConfig::default() };
    let trials = 4000;
    let sequential = (0..trials)
        .filter(|&r| {
            run_once(&draws, &LossSpec::vi(), &config, r).unwrap().diagnostics.init == InitMethod::Sequential
        })
        .count() as f64;
    let mean = 0.3 * trials as f64;
    let sd = (trials as f64 * 0.3 * 0.7).sqrt();
    assert!((sequential - mean).abs() < 4.0 * sd, "{sequential}");
}

#[test]
fn random_labels_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let k = 5;
    let draws = 100_000;
    let mut counts = vec![0f64; k];
    for c in random_labels(&mut rng, draws, k) {
        counts[c as usize] += 1.0;
    }
    let expected = draws as f64 / k as f64;
    let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    // 99.9% quantile of chi-square with 4 degrees of freedom.
    assert!(chi2 < 18.47, "{chi2}");
}

#[test]
fn estimates_respect_the_cluster_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let n = rng.gen_range(2..25);
        let draws = random_draws(&mut rng, n, 30, 6);
        let k = rng.gen_range(1..=n);
        let config = SalsoConfig { n_runs: 4, max_clusters: ClusterLimit::Fixed(k), ..SalsoConfig::default() };
        for spec in [LossSpec::binder(1.0, 1.0).unwrap(), LossSpec::vi(), LossSpec::of(LossKind::ViLowerBound)] {
            let r = salso(&draws, &spec, &config).unwrap();
            assert!(r.estimate.num_clusters() <= k);
            assert!(r.runs.iter().all(|d| d.n_clusters <= k));
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let draws = synthetic_draws(&SyntheticSpec { n: 40, k_true: 4, h: 80, q: 0.4, seed: 3 }).unwrap();
    let base = SalsoConfig { n_runs: 8, seed: 77, ..SalsoConfig::default() };
    for spec in [LossSpec::binder(2.0, 1.0).unwrap(), LossSpec::vi()] {
        let one = salso(&draws, &spec, &SalsoConfig { n_workers: 1, ..base.clone() }).unwrap();
        let four = salso(&draws, &spec, &SalsoConfig { n_workers: 4, ..base.clone() }).unwrap();
        assert_eq!(one.estimate, four.estimate);
        assert_eq!(one.expected_loss.to_bits(), four.expected_loss.to_bits());
        assert_eq!(one.best_run_index, four.best_run_index);
        for (x, y) in one.runs.iter().zip(&four.runs) {
            assert_eq!((x.seed, x.init, x.scans, x.loss.to_bits()), (y.seed, y.init, y.scans, y.loss.to_bits()));
        }
    }
}

#[test]
fn more_runs_never_hurt() {
    for seed in 0..15 {
        let draws = synthetic_draws(&SyntheticSpec { n: 25, k_true: 4, h: 60, q: 0.5, seed }).unwrap();
        let one = salso(&draws, &LossSpec::vi(), &SalsoConfig { n_runs: 1, seed, ..SalsoConfig::default() }).unwrap();
        let four = salso(&draws, &LossSpec::vi(), &SalsoConfig { n_runs: 4, seed, ..SalsoConfig::default() }).unwrap();
        assert!(four.expected_loss <= one.expected_loss);
        assert_eq!(four.runs[0].loss.to_bits(), one.runs[0].loss.to_bits());
    }
}

#[test]
fn search_finds_small_global_optima() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..15 {
        let n = rng.gen_range(2..=7);
        let draws = random_draws(&mut rng, n, 20, 3);
        for spec in [LossSpec::binder(1.0, 1.0).unwrap(), LossSpec::vi()] {
            let k = draws.max_clusters();
            let best = brute_force_minimizer(&draws, &spec, k).unwrap();
            let found = salso(&draws, &spec, &SalsoConfig::default()).unwrap();
            assert!(best.contains(&found.estimate), "{spec:?}");
        }
    }
}

#[test]
fn brute_force_ignores_draw_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let draws = random_draws(&mut rng, 6, 15, 3);
        let mut order: Vec<usize> = (0..15).collect();
        order.reverse();
        order.swap(2, 9);
        let shuffled = draws.select(&order).unwrap();
        for spec in [LossSpec::binder(1.0, 1.0).unwrap(), LossSpec::vi(), LossSpec::of(LossKind::Omari)] {
            let a = brute_force_minimizer(&draws, &spec, 6).unwrap();
            let b = brute_force_minimizer(&shuffled, &spec, 6).unwrap();
            assert_eq!(a.minimizers, b.minimizers);
        }
    }
}

#[test]
fn light_noise_is_recovered_by_the_oracle() {
    let spec = SyntheticSpec { n: 8, k_true: 4, h: 100, q: 0.1, seed: 2024 };
    let draws = synthetic_draws(&spec).unwrap();
    let best = brute_force_minimizer(&draws, &LossSpec::binder(1.0, 1.0).unwrap(), 8).unwrap();
    assert_eq!(best.minimizers, vec![spec.base_partition()]);
}

#[test]
fn extreme_weights_force_one_cluster_or_singletons() {
    for seed in 0..5 {
        let draws = synthetic_draws(&SyntheticSpec { n: 10, k_true: 3, h: 100, q: 0.8, seed }).unwrap();
        let config = SalsoConfig { max_clusters: ClusterLimit::Unconstrained, seed, ..SalsoConfig::default() };
        for kind in [LossKind::Binder, LossKind::Gvi] {
            let merge = salso(&draws, &LossSpec::new(kind, 100.0, 1.0).unwrap(), &config).unwrap();
            assert_eq!(merge.estimate.num_clusters(), 1);
            let split = salso(&draws, &LossSpec::new(kind, 0.01, 1.0).unwrap(), &config).unwrap();
            assert_eq!(split.estimate.num_clusters(), 10);
        }
    }
}
