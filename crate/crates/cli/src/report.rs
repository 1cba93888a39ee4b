//! JSON and CSV renderings of an estimate.

use std::io::{self, Write};
use std::str::FromStr;

use salso_kit::salso::RunDiagnostics;
use salso_kit::SalsoResult;
use serde_json::{json, Map, Number, Value};

/// Everything reported about one `estimate` invocation.
pub struct Report<'a> {
    pub estimator: &'a str,
    pub result: &'a SalsoResult,
    pub seed: u64,
    pub wall_ms: f64,
    /// Leave out wall-clock fields so repeated runs compare byte for byte.
    pub timings: bool,
}

/// A float with 17 significant digits, which round-trips every `f64`.
/// Non-finite values become `null`.
pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    Number::from_str(&text).map(Value::Number).unwrap_or(Value::Null)
}

fn run_json(d: &RunDiagnostics, timings: bool) -> Value {
    let mut m = Map::new();
    m.insert("run_index".into(), json!(d.run_index));
    m.insert("seed".into(), json!(d.seed));
    m.insert("init".into(), json!(d.init));
    m.insert("scans".into(), json!(d.scans));
    m.insert("hit_scan_cap".into(), json!(d.hit_scan_cap));
    m.insert("zealous_attempts".into(), json!(d.zealous_attempts));
    m.insert("zealous_accepted".into(), json!(d.zealous_accepted));
    m.insert("loss".into(), float(d.loss));
    m.insert("n_clusters".into(), json!(d.n_clusters));
    if timings {
        m.insert("wall_ms".into(), float(d.wall_ms));
    }
    Value::Object(m)
}

impl Report<'_> {
    pub fn to_json(&self) -> Value {
        let r = self.result;
        let mut m = Map::new();
        m.insert("estimator".into(), json!(self.estimator));
        m.insert("labels".into(), json!(r.estimate.as_slice()));
        m.insert("n_clusters".into(), json!(r.estimate.num_clusters()));
        m.insert("expected_loss".into(), float(r.expected_loss));
        m.insert(
            "loss".into(),
            json!({ "kind": r.spec.kind.name(), "a": float(r.spec.a), "b": float(r.spec.b) }),
        );
        m.insert("n_runs".into(), json!(r.runs.len()));
        m.insert("best_run_index".into(), json!(r.best_run_index));
        m.insert("seed".into(), json!(self.seed));
        m.insert("k_d_resolved".into(), json!(r.max_clusters));
        if self.timings {
            m.insert("wall_ms".into(), float(self.wall_ms));
        }
        let runs = r.runs.iter().map(|d| run_json(d, self.timings)).collect();
        m.insert("runs".into(), Value::Array(runs));
        Value::Object(m)
    }

    pub fn write_json(&self, out: &mut dyn Write) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)
    }

    /// Labels one per line, then a `#`-prefixed summary line.
    pub fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let r = self.result;
        for label in r.estimate.as_slice() {
            writeln!(out, "{label}")?;
        }
        write!(
            out,
            "# estimator={} n_clusters={} expected_loss={:.16e} loss={} a={} b={} n_runs={} best_run_index={} seed={} k_d_resolved={}",
            self.estimator,
            r.estimate.num_clusters(),
            r.expected_loss,
            r.spec.kind.name(),
            r.spec.a,
            r.spec.b,
            r.runs.len(),
            r.best_run_index,
            self.seed,
            r.max_clusters,
        )?;
        if self.timings {
            write!(out, " wall_ms={:.3}", self.wall_ms)?;
        }
        writeln!(out)
    }
}
