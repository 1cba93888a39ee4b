//! Partition representations: canonical label vectors, the matrix of
//! posterior draws, contingency tables between two partitions, and the
//! posterior similarity matrix.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};

/// A partition of `n` items as a 1-based label vector in canonical
/// (restricted-growth) form: item 0 has label 1 and every later label is at
/// most one more than the largest label seen before it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ClusterLabels(Vec<u32>);

impl ClusterLabels {
    /// Relabels `raw` by order of first appearance.
    ///
    /// Any integer-like label type is accepted, including 0-based and
    /// negative labels. Two inputs describe the same partition exactly when
    /// their canonical forms are equal.
    pub fn canonicalize<T: Copy + Eq + Hash>(raw: &[T]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyLabels);
        }
        let mut map: HashMap<T, u32> = HashMap::with_capacity(16);
        let labels = raw
            .iter()
            .map(|x| {
                let next = map.len() as u32 + 1;
                *map.entry(*x).or_insert(next)
            })
            .collect();
        Ok(Self(labels))
    }

    /// Builds from zero-based labels that are already in restricted-growth
    /// order. Only checked in debug builds.
    pub(crate) fn from_zero_based_canonical(labels: impl IntoIterator<Item = u32>) -> Self {
        let v: Vec<u32> = labels.into_iter().map(|x| x + 1).collect();
        debug_assert!(is_restricted_growth(&v));
        Self(v)
    }

    /// Canonicalizes zero-based labels of any shape.
    pub(crate) fn from_zero_based(labels: &[u32]) -> Self {
        let mut map = vec![u32::MAX; labels.len()];
        let mut next = 0u32;
        let v = labels
            .iter()
            .map(|&x| {
                let slot = &mut map[x as usize];
                if *slot == u32::MAX {
                    next += 1;
                    *slot = next;
                }
                *slot
            })
            .collect();
        Self(v)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of clusters, i.e. the largest canonical label.
    pub fn num_clusters(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    /// Zero-based label of each item.
    pub fn zero_based(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|x| x - 1)
    }

    /// True when items `i` and `j` share a cluster.
    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.0[i] == self.0[j]
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }
}

impl fmt::Display for ClusterLabels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn is_restricted_growth(labels: &[u32]) -> bool {
    let mut max = 0;
    for &x in labels {
        if x == 0 || x > max + 1 {
            return false;
        }
        max = max.max(x);
    }
    true
}

/// Number of clusters in a canonical partition.
pub fn num_clusters(labels: &ClusterLabels) -> usize {
    labels.num_clusters()
}

/// `H` posterior draws over a common set of `n` items.
///
/// Labels are stored zero-based and canonical, both draw-major (one
/// contiguous row per draw) and item-major (one contiguous column per item)
/// so that the search can walk all draws for a single item cheaply.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawsMatrix {
    n_items: usize,
    n_draws: usize,
    by_draw: Vec<u32>,
    by_item: Vec<u32>,
    n_clusters: Vec<u32>,
    max_clusters: usize,
}

impl DrawsMatrix {
    pub fn new(rows: &[ClusterLabels]) -> Result<Self> {
        let first = rows.first().ok_or(Error::NoDraws)?;
        let n_items = first.len();
        let n_draws = rows.len();
        let mut by_draw = Vec::with_capacity(n_items * n_draws);
        let mut n_clusters = Vec::with_capacity(n_draws);
        for (h, row) in rows.iter().enumerate() {
            if row.len() != n_items {
                return Err(Error::RaggedDraws {
                    row: h,
                    expected: n_items,
                    found: row.len(),
                });
            }
            by_draw.extend(row.zero_based());
            n_clusters.push(row.num_clusters() as u32);
        }
        let mut by_item = vec![0; n_items * n_draws];
        for h in 0..n_draws {
            for i in 0..n_items {
                by_item[i * n_draws + h] = by_draw[h * n_items + i];
            }
        }
        let max_clusters = n_clusters.iter().copied().max().unwrap_or(0) as usize;
        Ok(Self {
            n_items,
            n_draws,
            by_draw,
            by_item,
            n_clusters,
            max_clusters,
        })
    }

    /// Canonicalizes each raw row and builds the matrix.
    pub fn from_raw_rows<T: Copy + Eq + Hash>(rows: &[Vec<T>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| ClusterLabels::canonicalize(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(&rows)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    /// Largest cluster count over all draws (`k_H`).
    pub fn max_clusters(&self) -> usize {
        self.max_clusters
    }

    pub fn n_clusters(&self, draw: usize) -> usize {
        self.n_clusters[draw] as usize
    }

    /// Zero-based labels of one draw.
    pub fn row(&self, draw: usize) -> &[u32] {
        &self.by_draw[draw * self.n_items..(draw + 1) * self.n_items]
    }

    /// Zero-based labels of one item across all draws.
    pub fn item_labels(&self, item: usize) -> &[u32] {
        &self.by_item[item * self.n_draws..(item + 1) * self.n_draws]
    }

    pub fn label(&self, draw: usize, item: usize) -> u32 {
        self.by_draw[draw * self.n_items + item]
    }

    pub fn draw(&self, draw: usize) -> ClusterLabels {
        ClusterLabels::from_zero_based_canonical(self.row(draw).iter().copied())
    }

    pub fn draws(&self) -> impl Iterator<Item = ClusterLabels> + '_ {
        (0..self.n_draws).map(|h| self.draw(h))
    }

    /// Keeps only the given draws, in the given order.
    pub fn select(&self, draws: &[usize]) -> Result<Self> {
        let rows: Vec<_> = draws.iter().map(|&h| self.draw(h)).collect();
        Self::new(&rows)
    }
}

/// Destination of a single-item move within a contingency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveTarget {
    Existing(usize),
    New,
}

/// Counts `n_ij = |S_i ∩ T_j|` between a reference partition (rows) and an
/// estimate (columns), with both margins.
///
/// Columns may be transiently empty after [`ContingencyTable::apply_move`];
/// [`ContingencyTable::compact_column`] removes them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    n_rows: usize,
    n_cols: usize,
    counts: Vec<u32>,
    row_sums: Vec<u32>,
    col_sums: Vec<u32>,
    total: u32,
}

impl ContingencyTable {
    /// Table of `truth` (rows) against `estimate` (columns).
    pub fn build(truth: &ClusterLabels, estimate: &ClusterLabels) -> Result<Self> {
        if truth.len() != estimate.len() {
            return Err(Error::LengthMismatch {
                expected: truth.len(),
                found: estimate.len(),
            });
        }
        Ok(Self::from_zero_based(
            truth.zero_based(),
            estimate.zero_based(),
            truth.num_clusters(),
            estimate.num_clusters(),
        ))
    }

    pub(crate) fn from_zero_based(
        truth: impl Iterator<Item = u32>,
        estimate: impl Iterator<Item = u32>,
        n_rows: usize,
        n_cols: usize,
    ) -> Self {
        let mut t = Self::zeros(n_rows, n_cols);
        for (r, c) in truth.zip(estimate) {
            let (r, c) = (r as usize, c as usize);
            t.counts[r * n_cols + c] += 1;
            t.row_sums[r] += 1;
            t.col_sums[c] += 1;
            t.total += 1;
        }
        t
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            counts: vec![0; n_rows * n_cols],
            row_sums: vec![0; n_rows],
            col_sums: vec![0; n_cols],
            total: 0,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.counts[row * self.n_cols + col]
    }

    pub fn row_sums(&self) -> &[u32] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u32] {
        &self.col_sums
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    /// Cell counts in row-major order.
    pub fn cells(&self) -> &[u32] {
        &self.counts
    }

    /// Adds one item to cell `(row, col)`; used when assembling tables cell
    /// by cell.
    pub(crate) fn increment(&mut self, row: usize, col: usize) {
        self.counts[row * self.n_cols + col] += 1;
        self.row_sums[row] += 1;
        self.col_sums[col] += 1;
        self.total += 1;
    }

    fn push_column(&mut self) {
        let old = self.n_cols;
        let new = old + 1;
        let mut counts = vec![0; self.n_rows * new];
        for r in 0..self.n_rows {
            counts[r * new..r * new + old].copy_from_slice(&self.counts[r * old..(r + 1) * old]);
        }
        self.counts = counts;
        self.col_sums.push(0);
        self.n_cols = new;
    }

    /// Moves one item of reference cluster `row` from column `from` to
    /// `to`, touching exactly four counts. Returns the destination column.
    pub fn apply_move(&mut self, row: usize, from: usize, to: MoveTarget) -> Result<usize> {
        if row >= self.n_rows || from >= self.n_cols || self.get(row, from) == 0 {
            return Err(Error::EmptyCell { row, col: from });
        }
        let to = match to {
            MoveTarget::Existing(j) => {
                if j >= self.n_cols {
                    return Err(Error::InvalidConfig(format!(
                        "column {j} out of range for {} columns",
                        self.n_cols
                    )));
                }
                j
            }
            MoveTarget::New => {
                self.push_column();
                self.n_cols - 1
            }
        };
        let w = self.n_cols;
        self.counts[row * w + from] -= 1;
        self.counts[row * w + to] += 1;
        self.col_sums[from] -= 1;
        self.col_sums[to] += 1;
        debug_assert!(self.is_consistent());
        Ok(to)
    }

    /// Removes the empty column `col` by moving the last column into its
    /// slot. Returns the former index of the relocated column, if any.
    pub fn compact_column(&mut self, col: usize) -> Result<Option<usize>> {
        if col >= self.n_cols || self.col_sums[col] != 0 {
            return Err(Error::InvalidConfig(format!(
                "column {col} is not an empty column"
            )));
        }
        let old = self.n_cols;
        let last = old - 1;
        let mut counts = Vec::with_capacity(self.n_rows * last);
        for r in 0..self.n_rows {
            for c in 0..last {
                let src = if c == col { last } else { c };
                counts.push(self.counts[r * old + src]);
            }
        }
        self.counts = counts;
        self.col_sums.swap(col, last);
        self.col_sums.pop();
        self.n_cols = last;
        Ok((col != last).then_some(last))
    }

    /// Margins and total agree with the cells.
    pub fn is_consistent(&self) -> bool {
        let rows_ok = (0..self.n_rows).all(|r| {
            self.counts[r * self.n_cols..(r + 1) * self.n_cols]
                .iter()
                .sum::<u32>()
                == self.row_sums[r]
        });
        let cols_ok = (0..self.n_cols)
            .all(|c| (0..self.n_rows).map(|r| self.get(r, c)).sum::<u32>() == self.col_sums[c]);
        rows_ok && cols_ok && self.counts.iter().sum::<u32>() == self.total
    }
}

/// Pairwise co-clustering frequencies over the draws (the PSM).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    n_draws: usize,
    counts: Vec<u32>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn build(draws: &DrawsMatrix) -> Self {
        let n = draws.n_items();
        let mut counts = vec![0u32; n * n];
        for h in 0..draws.n_draws() {
            let row = draws.row(h);
            for i in 0..n {
                counts[i * n + i] += 1;
                for j in (i + 1)..n {
                    if row[i] == row[j] {
                        counts[i * n + j] += 1;
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                counts[j * n + i] = counts[i * n + j];
            }
        }
        let h = draws.n_draws() as f64;
        let values = counts.iter().map(|&c| c as f64 / h).collect();
        Self {
            n,
            n_draws: draws.n_draws(),
            counts,
            values,
        }
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Number of draws in which items `i` and `j` share a cluster.
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}
