//! Head-to-head comparison of two search configurations on synthetic draws.
//!
//! Each scenario draws a fresh synthetic posterior; both methods run with
//! the same seed and the one reaching the lower expected loss wins. Equal
//! losses count for neither side.

use std::io::{self, Write};
use std::time::Instant;

use salso_kit::oracle::{synthetic_draws, SyntheticSpec};
use salso_kit::salso::run_seed;
use salso_kit::{salso, LossSpec, SalsoConfig};

use crate::CliError;

pub struct Method {
    pub name: String,
    pub config: SalsoConfig,
}

pub struct Battery {
    pub scenarios: usize,
    pub n: usize,
    pub k_true: usize,
    pub h: usize,
    pub q: f64,
    pub seed: u64,
}

impl Battery {
    pub fn scenario(&self, i: usize) -> SyntheticSpec {
        SyntheticSpec {
            n: self.n,
            k_true: self.k_true,
            h: self.h,
            q: self.q,
            seed: run_seed(self.seed, i),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub loss: String,
    pub method_a: String,
    pub method_b: String,
    pub prop_a_better: f64,
    pub prop_b_better: f64,
    pub mean_ms_a: f64,
    pub mean_ms_b: f64,
}

const HEADER: &str = "loss,method_a,method_b,prop_a_better,prop_b_better,mean_ms_a,mean_ms_b";

/// One row per loss; an empty battery yields no rows.
pub fn run(
    battery: &Battery,
    losses: &[LossSpec],
    a: &Method,
    b: &Method,
) -> Result<Vec<BenchRow>, CliError> {
    if battery.scenarios == 0 {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(losses.len());
    for spec in losses {
        let (mut wins_a, mut wins_b) = (0usize, 0usize);
        let (mut ms_a, mut ms_b) = (0.0, 0.0);
        for i in 0..battery.scenarios {
            let scenario = battery.scenario(i);
            let draws = synthetic_draws(&scenario)?;
            let timed = |m: &Method| -> Result<(f64, f64), CliError> {
                let config = SalsoConfig {
                    seed: scenario.seed,
                    ..m.config.clone()
                };
                let start = Instant::now();
                let r = salso(&draws, spec, &config)?;
                Ok((r.expected_loss, start.elapsed().as_secs_f64() * 1e3))
            };
            let (loss_a, t_a) = timed(a)?;
            let (loss_b, t_b) = timed(b)?;
            ms_a += t_a;
            ms_b += t_b;
            if loss_a < loss_b {
                wins_a += 1;
            } else if loss_b < loss_a {
                wins_b += 1;
            }
        }
        let s = battery.scenarios as f64;
        rows.push(BenchRow {
            loss: spec.kind.name().to_string(),
            method_a: a.name.clone(),
            method_b: b.name.clone(),
            prop_a_better: wins_a as f64 / s,
            prop_b_better: wins_b as f64 / s,
            mean_ms_a: ms_a / s,
            mean_ms_b: ms_b / s,
        });
    }
    Ok(rows)
}

pub fn write_csv(out: &mut dyn Write, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.3},{:.3}",
            r.loss, r.method_a, r.method_b, r.prop_a_better, r.prop_b_better, r.mean_ms_a, r.mean_ms_b
        )?;
    }
    Ok(())
}
