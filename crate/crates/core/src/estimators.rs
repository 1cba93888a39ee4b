//! Point estimators selectable by name.

use crate::error::{Error, Result};
use crate::losses::{LossKind, LossSpec};
use crate::oracle;
use crate::partition::DrawsMatrix;
use crate::salso::{self, SalsoConfig, SalsoResult};

pub trait Estimator: Send + Sync {
    fn name(&self) -> &'static str;

    fn estimate(&self, draws: &DrawsMatrix, spec: &LossSpec, config: &SalsoConfig) -> Result<SalsoResult>;
}

/// The SALSO search.
pub struct Salso;

impl Estimator for Salso {
    fn name(&self) -> &'static str {
        "salso"
    }

    fn estimate(&self, draws: &DrawsMatrix, spec: &LossSpec, config: &SalsoConfig) -> Result<SalsoResult> {
        salso::salso(draws, spec, config)
    }
}

/// Best draw under the loss, among draws within the cluster limit.
pub struct DrawsMethod;

impl Estimator for DrawsMethod {
    fn name(&self) -> &'static str {
        "draws"
    }

    fn estimate(&self, draws: &DrawsMatrix, spec: &LossSpec, config: &SalsoConfig) -> Result<SalsoResult> {
        let k = config.max_clusters.resolve(draws)?;
        let (estimate, expected_loss) = if draws.max_clusters() <= k {
            oracle::draws_method(draws, spec)?
        } else {
            // Candidates are restricted, the loss is still averaged over every draw.
            let objective = crate::losses::objective(spec, draws);
            let mut best = None;
            for candidate in draws.draws().filter(|d| d.num_clusters() <= k) {
                let v = objective.evaluate(&candidate)?;
                if best.as_ref().is_none_or(|(_, b)| v < *b) {
                    best = Some((candidate, v));
                }
            }
            best.ok_or_else(|| {
                Error::InvalidConfig(format!("no draw has at most {k} clusters"))
            })?
        };
        Ok(SalsoResult {
            estimate,
            expected_loss,
            spec: *spec,
            max_clusters: k,
            best_run_index: 0,
            runs: Vec::new(),
        })
    }
}

/// Most frequent draw; its expected 0-1 loss is one minus its frequency.
pub struct Map;

impl Estimator for Map {
    fn name(&self) -> &'static str {
        "map"
    }

    fn estimate(&self, draws: &DrawsMatrix, _spec: &LossSpec, config: &SalsoConfig) -> Result<SalsoResult> {
        let k = config.max_clusters.resolve(draws)?;
        let (estimate, freq) = if draws.max_clusters() <= k {
            oracle::map_estimate(draws)
        } else {
            let keep: Vec<usize> = (0..draws.n_draws()).filter(|&h| draws.n_clusters(h) <= k).collect();
            if keep.is_empty() {
                return Err(Error::InvalidConfig(format!("no draw has at most {k} clusters")));
            }
            let (labels, _) = oracle::map_estimate(&draws.select(&keep)?);
            let count = draws.draws().filter(|d| *d == labels).count();
            (labels, count as f64 / draws.n_draws() as f64)
        };
        Ok(SalsoResult {
            estimate,
            expected_loss: 1.0 - freq,
            spec: LossSpec::of(LossKind::ZeroOne),
            max_clusters: k,
            best_run_index: 0,
            runs: Vec::new(),
        })
    }
}

pub static ESTIMATORS: &[&str] = &["salso", "draws", "map"];

pub fn estimator(name: &str) -> Result<Box<dyn Estimator>> {
    match name {
        "salso" => Ok(Box::new(Salso)),
        "draws" => Ok(Box::new(DrawsMethod)),
        "map" => Ok(Box::new(Map)),
        other => Err(Error::Usage(format!("unknown estimator '{other}'"))),
    }
}
