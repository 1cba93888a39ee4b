//! What the search minimizes, and how it scores single-item placements.

use crate::cache::TableCache;
use crate::error::{Error, Result};
use crate::partition::{ClusterLabels, DrawsMatrix, SimilarityMatrix};

use super::stats::{LogTable, TableStats};
use super::{expected_loss, vi_lower_bound, Binder, DrawLoss, Gvi, LossSpec};

/// A criterion the search minimizes over partitions.
///
/// Implementations must rank placements consistently with [`Objective::cached_value`]:
/// the index of the smallest score from `allocation_scores` minimizes the
/// objective over the candidate placements, although scores may differ from
/// objective values by a placement-independent constant.
pub trait Objective: Send + Sync {
    fn spec(&self) -> LossSpec;

    /// Scores for placing the unallocated `item` in each existing cluster,
    /// followed by a new cluster when `allow_new` is set. Only allocated
    /// items are taken into account.
    fn allocation_scores(
        &self,
        cache: &TableCache<'_>,
        item: usize,
        allow_new: bool,
        scores: &mut Vec<f64>,
    );

    /// Objective value of the allocated part of the working partition.
    fn cached_value(&self, cache: &TableCache<'_>) -> f64;

    /// Objective value of a complete partition, computed from scratch.
    fn evaluate(&self, candidate: &ClusterLabels) -> Result<f64>;
}

/// Checked form of [`Objective::allocation_scores`].
pub fn allocation_scores(
    objective: &dyn Objective,
    cache: &TableCache<'_>,
    item: usize,
    allow_new: bool,
) -> Result<Vec<f64>> {
    if cache.cluster_of(item).is_some() {
        return Err(Error::NotDeallocated(item));
    }
    let allow_new = allow_new && cache.n_clusters() < cache.capacity();
    let mut scores = Vec::new();
    objective.allocation_scores(cache, item, allow_new, &mut scores);
    Ok(scores)
}

/// Monte Carlo expected loss of a per-draw loss.
///
/// Placements are scored by the full expected loss: each draw's table
/// summaries are computed once per item, then each placement touches one
/// cell, one row margin and one column margin.
#[derive(Debug)]
pub struct MonteCarlo<'a, L> {
    draws: &'a DrawsMatrix,
    loss: L,
    logs: LogTable,
}

impl<'a, L: DrawLoss> MonteCarlo<'a, L> {
    pub fn new(draws: &'a DrawsMatrix, loss: L) -> Self {
        Self {
            draws,
            loss,
            logs: LogTable::new(draws.n_items()),
        }
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    fn stats(&self, cache: &TableCache<'_>, h: usize) -> TableStats {
        let mut s = TableStats {
            n: cache.n_allocated() as u64,
            ..TableStats::default()
        };
        for c in 0..cache.n_clusters() {
            let x = cache.cluster_size(c) as u32;
            s.cols_sq += x as u64 * x as u64;
            s.cols_xlogx += self.logs.xlogx(x);
        }
        self.add_draw_side(cache, h, &mut s);
        s
    }

    fn add_draw_side(&self, cache: &TableCache<'_>, h: usize, s: &mut TableStats) {
        for (r, &x) in cache.row_sums(h).iter().enumerate() {
            s.rows_sq += x as u64 * x as u64;
            s.rows_xlogx += self.logs.xlogx(x);
            if x > 0 {
                for &m in cache.cell_row(h, r) {
                    s.cells_sq += m as u64 * m as u64;
                    s.cells_xlogx += self.logs.xlogx(m);
                }
            }
        }
    }
}

impl<L: DrawLoss> Objective for MonteCarlo<'_, L> {
    fn spec(&self) -> LossSpec {
        self.loss.spec()
    }

    fn allocation_scores(
        &self,
        cache: &TableCache<'_>,
        item: usize,
        allow_new: bool,
        scores: &mut Vec<f64>,
    ) {
        let q = cache.n_clusters();
        let n_candidates = q + usize::from(allow_new);
        scores.clear();
        scores.resize(n_candidates, 0.0);
        let sizes: Vec<u32> = (0..q).map(|c| cache.cluster_size(c) as u32).collect();
        let mut base = TableStats {
            n: cache.n_allocated() as u64 + 1,
            ..TableStats::default()
        };
        for &x in &sizes {
            base.cols_sq += x as u64 * x as u64;
            base.cols_xlogx += self.logs.xlogx(x);
        }
        for (h, &r) in self.draws.item_labels(item).iter().enumerate() {
            let mut s = base;
            self.add_draw_side(cache, h, &mut s);
            let rs = cache.row_sum(h, r as usize);
            s.rows_sq += 2 * rs as u64 + 1;
            s.rows_xlogx += self.logs.diff(rs + 1);
            let cells = cache.cell_row(h, r as usize);
            for (j, score) in scores.iter_mut().enumerate() {
                let (size, m) = if j < q { (sizes[j], cells[j]) } else { (0, 0) };
                let mut t = s;
                t.cols_sq += 2 * size as u64 + 1;
                t.cols_xlogx += self.logs.diff(size + 1);
                t.cells_sq += 2 * m as u64 + 1;
                t.cells_xlogx += self.logs.diff(m + 1);
                *score += self.loss.loss_from_stats(&t);
            }
        }
        let h = self.draws.n_draws() as f64;
        for score in scores.iter_mut() {
            *score /= h;
        }
    }

    fn cached_value(&self, cache: &TableCache<'_>) -> f64 {
        let sum: f64 = (0..self.draws.n_draws())
            .map(|h| self.loss.loss_from_stats(&self.stats(cache, h)))
            .sum();
        sum / self.draws.n_draws() as f64
    }

    fn evaluate(&self, candidate: &ClusterLabels) -> Result<f64> {
        expected_loss(self.draws, candidate, &self.loss.spec())
    }
}

/// Generalized Binder loss with the count-based placement shortcut: the
/// placement minimizing the expected loss minimizes
/// `b H n_j - (a+b) sum_h n_{c_h j}` over the candidate clusters `j`.
#[derive(Debug)]
pub struct BinderObjective<'a> {
    inner: MonteCarlo<'a, Binder>,
}

impl<'a> BinderObjective<'a> {
    pub fn new(draws: &'a DrawsMatrix, a: f64, b: f64) -> Self {
        Self {
            inner: MonteCarlo::new(draws, Binder { a, b }),
        }
    }
}

impl Objective for BinderObjective<'_> {
    fn spec(&self) -> LossSpec {
        self.inner.spec()
    }

    fn allocation_scores(
        &self,
        cache: &TableCache<'_>,
        item: usize,
        allow_new: bool,
        scores: &mut Vec<f64>,
    ) {
        let q = cache.n_clusters();
        let mut joint = vec![0u64; q];
        for (h, &r) in self.inner.draws.item_labels(item).iter().enumerate() {
            for (acc, &m) in joint.iter_mut().zip(cache.cell_row(h, r as usize)) {
                *acc += m as u64;
            }
        }
        let Binder { a, b } = *self.inner.loss();
        let n_draws = self.inner.draws.n_draws() as u64;
        scores.clear();
        scores.extend(
            joint
                .iter()
                .enumerate()
                .map(|(j, &m)| b * (n_draws * cache.cluster_size(j) as u64) as f64 - (a + b) * m as f64),
        );
        if allow_new {
            scores.push(0.0);
        }
    }

    fn cached_value(&self, cache: &TableCache<'_>) -> f64 {
        self.inner.cached_value(cache)
    }

    fn evaluate(&self, candidate: &ClusterLabels) -> Result<f64> {
        self.inner.evaluate(candidate)
    }
}

/// Generalized VI with the cached-difference shortcut: choose the `j`
/// minimizing `b H f(n_j + 1) - (a+b) sum_h f(n_{c_h j} + 1)` where
/// `f(x) = x log2 x - (x-1) log2 (x-1)` and counts exclude the item.
#[derive(Debug)]
pub struct GviObjective<'a> {
    inner: MonteCarlo<'a, Gvi>,
}

impl<'a> GviObjective<'a> {
    pub fn new(draws: &'a DrawsMatrix, loss: Gvi) -> Self {
        Self {
            inner: MonteCarlo::new(draws, loss),
        }
    }
}

impl Objective for GviObjective<'_> {
    fn spec(&self) -> LossSpec {
        self.inner.spec()
    }

    fn allocation_scores(
        &self,
        cache: &TableCache<'_>,
        item: usize,
        allow_new: bool,
        scores: &mut Vec<f64>,
    ) {
        let q = cache.n_clusters();
        let logs = &self.inner.logs;
        let mut joint = vec![0f64; q];
        for (h, &r) in self.inner.draws.item_labels(item).iter().enumerate() {
            for (acc, &m) in joint.iter_mut().zip(cache.cell_row(h, r as usize)) {
                *acc += logs.diff(m + 1);
            }
        }
        let Gvi { a, b, .. } = *self.inner.loss();
        let n_draws = self.inner.draws.n_draws() as f64;
        scores.clear();
        scores.extend(joint.iter().enumerate().map(|(j, &m)| {
            b * n_draws * logs.diff(cache.cluster_size(j) as u32 + 1) - (a + b) * m
        }));
        if allow_new {
            scores.push(0.0);
        }
    }

    fn cached_value(&self, cache: &TableCache<'_>) -> f64 {
        self.inner.cached_value(cache)
    }

    fn evaluate(&self, candidate: &ClusterLabels) -> Result<f64> {
        self.inner.evaluate(candidate)
    }
}

/// Jensen lower bound of the expected VI, driven by the PSM:
/// `sum_i log2 |T(i)| - 2 sum_i log2 sum_{j in T(i)} pi_ij`.
///
/// Scoring a placement costs `O(|T|^2)` per candidate cluster `T`.
#[derive(Debug)]
pub struct ViLowerBoundObjective {
    psm: SimilarityMatrix,
}

impl ViLowerBoundObjective {
    pub fn new(draws: &DrawsMatrix) -> Self {
        Self {
            psm: SimilarityMatrix::build(draws),
        }
    }

    pub fn psm(&self) -> &SimilarityMatrix {
        &self.psm
    }

    fn within(&self, members: &[u32], i: usize) -> f64 {
        let row = self.psm.row(i);
        members.iter().map(|&k| row[k as usize]).sum()
    }
}

impl Objective for ViLowerBoundObjective {
    fn spec(&self) -> LossSpec {
        LossSpec::of(super::LossKind::ViLowerBound)
    }

    fn allocation_scores(
        &self,
        cache: &TableCache<'_>,
        item: usize,
        allow_new: bool,
        scores: &mut Vec<f64>,
    ) {
        scores.clear();
        let row = self.psm.row(item);
        for c in 0..cache.n_clusters() {
            let members = cache.members(c);
            let t = members.len() as f64;
            let mut delta = (t + 1.0) * (t + 1.0).log2() - t * t.log2();
            let mut log_change = 0.0;
            for &k in members {
                let s = self.within(members, k as usize);
                log_change += (s + row[k as usize]).log2() - s.log2();
            }
            log_change += (1.0 + self.within(members, item)).log2();
            delta -= 2.0 * log_change;
            scores.push(delta);
        }
        if allow_new {
            scores.push(0.0);
        }
    }

    fn cached_value(&self, cache: &TableCache<'_>) -> f64 {
        let mut total = 0.0;
        for c in 0..cache.n_clusters() {
            let members = cache.members(c);
            let t = members.len() as f64;
            total += t * t.log2();
            for &k in members {
                total -= 2.0 * self.within(members, k as usize).log2();
            }
        }
        total
    }

    fn evaluate(&self, candidate: &ClusterLabels) -> Result<f64> {
        if candidate.len() != self.psm.n_items() {
            return Err(Error::LengthMismatch {
                expected: self.psm.n_items(),
                found: candidate.len(),
            });
        }
        Ok(vi_lower_bound(&self.psm, candidate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{objective, LossKind, LOSSES};

    fn argmins(scores: &[f64], tol: f64) -> Vec<usize> {
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let slack = tol * (1.0 + min.abs());
        (0..scores.len()).filter(|&j| scores[j] <= min + slack).collect()
    }

    #[test]
    fn first_item_has_single_forced_placement() {
        let d = DrawsMatrix::from_raw_rows(&[vec![1, 1, 2], vec![1, 2, 2]]).unwrap();
        for entry in LOSSES {
            let obj = objective(&LossSpec::of(entry.kind), &d);
            let cache = TableCache::new(&d, 3);
            let s = allocation_scores(obj.as_ref(), &cache, 1, true).unwrap();
            assert_eq!(s.len(), 1, "{}", entry.name);
        }
    }

    #[test]
    fn scoring_allocated_item_is_logic_error() {
        let d = DrawsMatrix::from_raw_rows(&[vec![1, 1, 2]]).unwrap();
        let obj = objective(&LossSpec::vi(), &d);
        let mut cache = TableCache::new(&d, 3);
        cache.allocate(0, 0);
        assert_eq!(
            allocation_scores(obj.as_ref(), &cache, 0, true),
            Err(Error::NotDeallocated(0))
        );
    }

    #[test]
    fn new_cluster_suppressed_at_capacity() {
        let d = DrawsMatrix::from_raw_rows(&[vec![1, 2, 3]]).unwrap();
        let obj = objective(&LossSpec::binder(1.0, 1.0).unwrap(), &d);
        let mut cache = TableCache::new(&d, 1);
        cache.allocate(0, 0);
        let s = allocation_scores(obj.as_ref(), &cache, 1, true).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn fast_paths_agree_with_generic_scores() {
        let d = DrawsMatrix::from_raw_rows(&[
            vec![1, 1, 2, 2, 3, 3],
            vec![1, 2, 2, 3, 3, 1],
            vec![1, 1, 1, 2, 2, 2],
            vec![1, 2, 1, 2, 1, 2],
        ])
        .unwrap();
        let est = ClusterLabels::canonicalize(&[1, 1, 2, 3, 3, 2]).unwrap();
        for (a, b) in [(1.0, 1.0), (2.5, 0.7), (0.3, 4.0)] {
            for (fast, slow) in [
                (
                    Box::new(BinderObjective::new(&d, a, b)) as Box<dyn Objective>,
                    Box::new(MonteCarlo::new(&d, Binder { a, b })) as Box<dyn Objective>,
                ),
                (
                    Box::new(GviObjective::new(&d, Gvi::new(a, b))),
                    Box::new(MonteCarlo::new(&d, Gvi::new(a, b))),
                ),
            ] {
                for item in 0..6 {
                    let mut cache = TableCache::from_labels(&d, &est, 4).unwrap();
                    cache.deallocate(item).unwrap();
                    let f = allocation_scores(fast.as_ref(), &cache, item, true).unwrap();
                    let s = allocation_scores(slow.as_ref(), &cache, item, true).unwrap();
                    assert_eq!(argmins(&f, 1e-9), argmins(&s, 1e-9));
                }
            }
        }
    }

    #[test]
    fn cached_value_matches_evaluate() {
        let d = DrawsMatrix::from_raw_rows(&[vec![1, 1, 2, 2, 3], vec![1, 2, 2, 3, 3], vec![1, 1, 1, 1, 2]])
            .unwrap();
        let est = ClusterLabels::canonicalize(&[1, 2, 2, 1, 3]).unwrap();
        let cache = TableCache::from_labels(&d, &est, 5).unwrap();
        for entry in LOSSES {
            let spec = if entry.kind.is_weighted() {
                LossSpec::new(entry.kind, 1.7, 0.4).unwrap()
            } else {
                LossSpec::of(entry.kind)
            };
            let obj = objective(&spec, &d);
            let cached = obj.cached_value(&cache);
            let fresh = obj.evaluate(&est).unwrap();
            assert!((cached - fresh).abs() < 1e-12, "{}: {cached} vs {fresh}", entry.name);
        }
    }

    #[test]
    fn vilb_scores_are_objective_differences() {
        let d = DrawsMatrix::from_raw_rows(&[vec![1, 1, 2, 2, 3], vec![1, 2, 2, 3, 3], vec![1, 1, 1, 1, 2]])
            .unwrap();
        let est = ClusterLabels::canonicalize(&[1, 2, 2, 1, 3]).unwrap();
        let obj = ViLowerBoundObjective::new(&d);
        assert_eq!(obj.spec().kind, LossKind::ViLowerBound);
        for item in 0..5 {
            let mut cache = TableCache::from_labels(&d, &est, 5).unwrap();
            cache.deallocate(item).unwrap();
            let base = obj.cached_value(&cache);
            let mut scores = Vec::new();
            obj.allocation_scores(&cache, item, true, &mut scores);
            for (j, s) in scores.iter().enumerate() {
                let mut c = cache.clone();
                c.allocate(item, j);
                assert!((obj.cached_value(&c) - base - s).abs() < 1e-9);
            }
        }
    }

}
