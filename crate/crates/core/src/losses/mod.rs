//! Partition loss functions and the Monte Carlo expected-loss machinery.
//!
//! Every loss here is a function of a contingency table between a draw
//! (rows, the "truth") and a candidate estimate (columns). All of them only
//! need a handful of table summaries, collected in [`TableStats`], which is
//! what lets the search score a candidate placement from four updated counts.
//!
//! Entropies use the binary logarithm and the convention `0 log 0 = 0`.

mod objective;
mod registry;
mod stats;

pub use objective::{
    allocation_scores, BinderObjective, GviObjective, MonteCarlo, Objective, ViLowerBoundObjective,
};
pub use registry::{draw_loss, lookup, objective, LossEntry, LOSSES};
pub use stats::{xlog2x, LogTable, TableStats};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{ClusterLabels, ContingencyTable, DrawsMatrix, SimilarityMatrix};

/// Identifies a loss function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// Generalized Binder loss, n-invariant scale.
    Binder,
    /// One minus the adjusted Rand index.
    Omari,
    /// Variation of information.
    Vi,
    /// Generalized variation of information.
    Gvi,
    /// Normalized variation of information.
    Nvi,
    /// Normalized information distance.
    Nid,
    /// Information distance.
    Id,
    /// Jensen lower bound of the expected VI, evaluated on the PSM.
    #[serde(rename = "vi-lb")]
    ViLowerBound,
    /// 0-1 loss; its expected-loss minimizer over the draws is the MAP.
    ZeroOne,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Binder => "binder",
            LossKind::Omari => "omari",
            LossKind::Vi => "vi",
            LossKind::Gvi => "gvi",
            LossKind::Nvi => "nvi",
            LossKind::Nid => "nid",
            LossKind::Id => "id",
            LossKind::ViLowerBound => "vi-lb",
            LossKind::ZeroOne => "zero-one",
        }
    }

    /// True when the weights `a` and `b` change the loss.
    pub fn is_weighted(self) -> bool {
        matches!(self, LossKind::Binder | LossKind::Gvi)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A loss together with its weights.
///
/// `a` is the cost of splitting items that belong together and `b` the cost
/// of merging items that belong apart. Unweighted losses carry `a = b = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub a: f64,
    pub b: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind, a: f64, b: f64) -> Result<Self> {
        check_weight("a", a)?;
        check_weight("b", b)?;
        let (a, b) = if kind.is_weighted() { (a, b) } else { (1.0, 1.0) };
        Ok(Self { kind, a, b })
    }

    /// Unweighted spec of the given kind.
    pub fn of(kind: LossKind) -> Self {
        Self { kind, a: 1.0, b: 1.0 }
    }

    pub fn binder(a: f64, b: f64) -> Result<Self> {
        Self::new(LossKind::Binder, a, b)
    }

    pub fn gvi(a: f64, b: f64) -> Result<Self> {
        Self::new(LossKind::Gvi, a, b)
    }

    pub fn vi() -> Self {
        Self::of(LossKind::Vi)
    }

    /// Looks the loss up by name and attaches the weights.
    pub fn parse(name: &str, a: f64, b: f64) -> Result<Self> {
        Self::new(lookup(name)?.kind, a, b)
    }
}

fn check_weight(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight { name, value })
    }
}

/// Entropies (bits) of the two partitions in a table and their mutual
/// information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySummary {
    pub h_rho: f64,
    pub h_rhohat: f64,
    pub h_joint: f64,
    pub mutual_info: f64,
}

impl EntropySummary {
    /// `H(rho | rhohat)`.
    pub fn conditional_rho(&self) -> f64 {
        self.h_joint - self.h_rhohat
    }

    /// `H(rhohat | rho)`.
    pub fn conditional_rhohat(&self) -> f64 {
        self.h_joint - self.h_rho
    }
}

pub fn entropy_summary(table: &ContingencyTable) -> EntropySummary {
    TableStats::from_table(table).entropies()
}

/// Generalized Binder loss on the n-invariant scale, i.e. `2/n^2` times the
/// pairwise-misclassification cost.
pub fn binder_loss(table: &ContingencyTable, a: f64, b: f64) -> f64 {
    TableStats::from_table(table).binder(a, b)
}

/// Generalized variation of information in bits; VI when `a = b = 1`.
pub fn gvi_loss(table: &ContingencyTable, a: f64, b: f64) -> f64 {
    TableStats::from_table(table).gvi(a, b)
}

/// NVI, NID and ID of one table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoDistances {
    pub nvi: f64,
    pub nid: f64,
    pub id: f64,
}

pub fn info_distance_losses(table: &ContingencyTable) -> InfoDistances {
    let s = TableStats::from_table(table);
    InfoDistances {
        nvi: s.nvi(),
        nid: s.nid(),
        id: s.id(),
    }
}

/// One minus the adjusted Rand index. May exceed 1.
pub fn omari_loss(table: &ContingencyTable) -> Result<f64> {
    if table.total() < 2 {
        return Err(Error::TooFewItems {
            loss: "omari",
            min: 2,
            found: table.total() as usize,
        });
    }
    Ok(TableStats::from_table(table).omari())
}

/// Monte Carlo estimate of the posterior expected loss of `candidate`: the
/// mean of `L(draw, candidate)` over the draws, summed in draw order.
pub fn expected_loss(draws: &DrawsMatrix, candidate: &ClusterLabels, spec: &LossSpec) -> Result<f64> {
    check_len(draws, candidate)?;
    if spec.kind == LossKind::Omari && draws.n_items() < 2 {
        return Err(Error::TooFewItems {
            loss: "omari",
            min: 2,
            found: draws.n_items(),
        });
    }
    let loss = draw_loss(spec)?;
    let k = candidate.num_clusters();
    let sum: f64 = (0..draws.n_draws())
        .map(|h| {
            let table = ContingencyTable::from_zero_based(
                draws.row(h).iter().copied(),
                candidate.zero_based(),
                draws.n_clusters(h),
                k,
            );
            loss.loss_from_stats(&TableStats::from_table(&table))
        })
        .sum();
    Ok(sum / draws.n_draws() as f64)
}

fn check_len(draws: &DrawsMatrix, candidate: &ClusterLabels) -> Result<()> {
    if candidate.len() != draws.n_items() {
        return Err(Error::LengthMismatch {
            expected: draws.n_items(),
            found: candidate.len(),
        });
    }
    Ok(())
}

/// Two criteria that rank candidates for the expected VI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViCriteria {
    /// `sum_i log2 |T(i)| - 2 E[sum_i log2 n(c_i, chat_i)]`, estimated over
    /// the draws. Equals `n (E[VI] + E[H(rho)] - log2 n)`.
    pub exact: f64,
    /// Same expression with the expectation moved inside the logarithm and
    /// replaced by PSM row sums; never larger than `exact`.
    pub lower_bound: f64,
}

pub fn vi_criteria(
    draws: &DrawsMatrix,
    psm: &SimilarityMatrix,
    candidate: &ClusterLabels,
) -> Result<ViCriteria> {
    check_len(draws, candidate)?;
    if psm.n_items() != candidate.len() {
        return Err(Error::LengthMismatch {
            expected: psm.n_items(),
            found: candidate.len(),
        });
    }
    let k = candidate.num_clusters();
    let mut cells_sum = 0.0;
    let mut cols_xlogx = 0.0;
    for h in 0..draws.n_draws() {
        let table = ContingencyTable::from_zero_based(
            draws.row(h).iter().copied(),
            candidate.zero_based(),
            draws.n_clusters(h),
            k,
        );
        let s = TableStats::from_table(&table);
        cells_sum += s.cells_xlogx;
        cols_xlogx = s.cols_xlogx;
    }
    let exact = cols_xlogx - 2.0 * cells_sum / draws.n_draws() as f64;
    Ok(ViCriteria {
        exact,
        lower_bound: vi_lower_bound(psm, candidate),
    })
}

pub(crate) fn vi_lower_bound(psm: &SimilarityMatrix, candidate: &ClusterLabels) -> f64 {
    let labels = candidate.as_slice();
    let n = labels.len();
    let mut sizes = vec![0u32; candidate.num_clusters()];
    for &c in labels {
        sizes[c as usize - 1] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let row = psm.row(i);
        let s: f64 = (0..n)
            .filter(|&j| labels[j] == labels[i])
            .map(|j| row[j])
            .sum();
        total += (sizes[labels[i] as usize - 1] as f64).log2() - 2.0 * s.log2();
    }
    total
}

/// Criteria evaluated directly on the posterior similarity matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsmCriterion {
    /// `sum_{i<j} 1{same}(pi_ij - b/(a+b))`, to be maximized.
    LauGreen { a: f64, b: f64 },
    /// `sum_i sum_j (A_ij - pi_ij)^2`, to be minimized.
    LeastSquares,
}

pub fn psm_criterion(
    psm: &SimilarityMatrix,
    candidate: &ClusterLabels,
    criterion: PsmCriterion,
) -> Result<f64> {
    let n = psm.n_items();
    if candidate.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: candidate.len(),
        });
    }
    let value = match criterion {
        PsmCriterion::LauGreen { a, b } => {
            check_weight("a", a)?;
            check_weight("b", b)?;
            let threshold = b / (a + b);
            let mut total = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if candidate.same_cluster(i, j) {
                        total += psm.get(i, j) - threshold;
                    }
                }
            }
            total
        }
        PsmCriterion::LeastSquares => {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let adj = if candidate.same_cluster(i, j) { 1.0 } else { 0.0 };
                    let d = adj - psm.get(i, j);
                    total += d * d;
                }
            }
            total
        }
    };
    Ok(value)
}

/// A loss between one draw and a candidate, computed from table summaries.
pub trait DrawLoss: Send + Sync + fmt::Debug {
    fn spec(&self) -> LossSpec;

    fn loss_from_stats(&self, stats: &TableStats) -> f64;

    fn loss(&self, table: &ContingencyTable) -> f64 {
        self.loss_from_stats(&TableStats::from_table(table))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Binder {
    pub a: f64,
    pub b: f64,
}

impl DrawLoss for Binder {
    fn spec(&self) -> LossSpec {
        LossSpec {
            kind: LossKind::Binder,
            a: self.a,
            b: self.b,
        }
    }

    fn loss_from_stats(&self, stats: &TableStats) -> f64 {
        stats.binder(self.a, self.b)
    }
}

/// GVI; reports itself as VI when built through [`Gvi::vi`].
#[derive(Debug, Clone, Copy)]
pub struct Gvi {
    pub a: f64,
    pub b: f64,
    kind: LossKind,
}

impl Gvi {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            kind: LossKind::Gvi,
        }
    }

    pub fn vi() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            kind: LossKind::Vi,
        }
    }
}

impl DrawLoss for Gvi {
    fn spec(&self) -> LossSpec {
        LossSpec {
            kind: self.kind,
            a: self.a,
            b: self.b,
        }
    }

    fn loss_from_stats(&self, stats: &TableStats) -> f64 {
        stats.gvi(self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Omari;

impl DrawLoss for Omari {
    fn spec(&self) -> LossSpec {
        LossSpec::of(LossKind::Omari)
    }

    fn loss_from_stats(&self, stats: &TableStats) -> f64 {
        stats.omari()
    }
}

/// NVI, NID or ID, selected by kind.
#[derive(Debug, Clone, Copy)]
pub struct InfoDistance(pub LossKind);

impl DrawLoss for InfoDistance {
    fn spec(&self) -> LossSpec {
        LossSpec::of(self.0)
    }

    fn loss_from_stats(&self, stats: &TableStats) -> f64 {
        match self.0 {
            LossKind::Nvi => stats.nvi(),
            LossKind::Nid => stats.nid(),
            _ => stats.id(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroOne;

impl DrawLoss for ZeroOne {
    fn spec(&self) -> LossSpec {
        LossSpec::of(LossKind::ZeroOne)
    }

    fn loss_from_stats(&self, stats: &TableStats) -> f64 {
        if stats.same_partition() {
            0.0
        } else {
            1.0
        }
    }
}
