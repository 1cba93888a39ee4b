use crate::partition::ContingencyTable;

use super::EntropySummary;

/// `x log2 x`, with `0 log 0 = 0`.
pub fn xlog2x(x: u32) -> f64 {
    if x <= 1 {
        0.0
    } else {
        let x = x as f64;
        x * x.log2()
    }
}

/// Sufficient summaries of a contingency table for every supported loss.
///
/// `*_sq` are sums of squared counts and `*_xlogx` sums of `x log2 x` over
/// the row margins, column margins and cells. A table grows by one item in
/// cell `(r, j)` by bumping each summary with the increment for one count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TableStats {
    pub n: u64,
    pub rows_sq: u64,
    pub cols_sq: u64,
    pub cells_sq: u64,
    pub rows_xlogx: f64,
    pub cols_xlogx: f64,
    pub cells_xlogx: f64,
}

impl TableStats {
    pub fn from_table(table: &ContingencyTable) -> Self {
        let mut s = Self {
            n: table.total() as u64,
            ..Self::default()
        };
        for &x in table.row_sums() {
            s.rows_sq += x as u64 * x as u64;
            s.rows_xlogx += xlog2x(x);
        }
        for &x in table.col_sums() {
            s.cols_sq += x as u64 * x as u64;
            s.cols_xlogx += xlog2x(x);
        }
        for &x in table.cells() {
            s.cells_sq += x as u64 * x as u64;
            s.cells_xlogx += xlog2x(x);
        }
        s
    }

    /// `H(rho | rhohat)`: information in the draw not explained by the
    /// candidate.
    pub fn cond_rho(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        ((self.cols_xlogx - self.cells_xlogx) / self.n as f64).max(0.0)
    }

    /// `H(rhohat | rho)`.
    pub fn cond_rhohat(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        ((self.rows_xlogx - self.cells_xlogx) / self.n as f64).max(0.0)
    }

    pub fn entropies(&self) -> EntropySummary {
        if self.n == 0 {
            return EntropySummary {
                h_rho: 0.0,
                h_rhohat: 0.0,
                h_joint: 0.0,
                mutual_info: 0.0,
            };
        }
        let n = self.n as f64;
        let log_n = n.log2();
        let h_rho = (log_n - self.rows_xlogx / n).max(0.0);
        let h_rhohat = (log_n - self.cols_xlogx / n).max(0.0);
        let h_joint = (log_n - self.cells_xlogx / n).max(0.0);
        EntropySummary {
            h_rho,
            h_rhohat,
            h_joint,
            mutual_info: h_rho + h_rhohat - h_joint,
        }
    }

    pub fn binder(&self, a: f64, b: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let split = (self.rows_sq - self.cells_sq) as f64;
        let merged = (self.cols_sq - self.cells_sq) as f64;
        let n = self.n as f64;
        (a * split + b * merged) / (n * n)
    }

    pub fn gvi(&self, a: f64, b: f64) -> f64 {
        b * self.cond_rho() + a * self.cond_rhohat()
    }

    pub fn vi(&self) -> f64 {
        self.cond_rho() + self.cond_rhohat()
    }

    pub fn id(&self) -> f64 {
        self.cond_rho().max(self.cond_rhohat())
    }

    pub fn nvi(&self) -> f64 {
        let h_joint = self.entropies().h_joint;
        if h_joint <= 0.0 {
            0.0
        } else {
            (self.vi() / h_joint).min(1.0)
        }
    }

    pub fn nid(&self) -> f64 {
        let e = self.entropies();
        let m = e.h_rho.max(e.h_rhohat);
        if m <= 0.0 {
            0.0
        } else {
            (self.id() / m).min(1.0)
        }
    }

    pub fn omari(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let pairs = |sq: u64| (sq - self.n) as f64 / 2.0;
        let total = n * (n - 1.0) / 2.0;
        let (rows, cols, cells) = (pairs(self.rows_sq), pairs(self.cols_sq), pairs(self.cells_sq));
        let expected = rows * cols / total;
        let denom = 0.5 * (rows + cols) - expected;
        if denom == 0.0 {
            return 0.0;
        }
        1.0 - (cells - expected) / denom
    }

    /// True when the table is a permutation matrix up to empty rows and
    /// columns, i.e. both partitions agree.
    pub fn same_partition(&self) -> bool {
        self.rows_sq == self.cells_sq && self.cols_sq == self.cells_sq
    }
}

/// Lookup tables of `x log2 x` and its first difference
/// `f(x) = x log2 x - (x-1) log2 (x-1)` for counts up to `n + 1`.
#[derive(Debug, Clone)]
pub struct LogTable {
    xlogx: Vec<f64>,
    diff: Vec<f64>,
}

impl LogTable {
    pub fn new(n: usize) -> Self {
        let xlogx: Vec<f64> = (0..=n as u32 + 1).map(xlog2x).collect();
        let diff = (0..xlogx.len())
            .map(|x| if x == 0 { 0.0 } else { xlogx[x] - xlogx[x - 1] })
            .collect();
        Self { xlogx, diff }
    }

    #[inline]
    pub fn xlogx(&self, x: u32) -> f64 {
        self.xlogx[x as usize]
    }

    /// Increase of `x log2 x` when a count goes from `x - 1` to `x`.
    #[inline]
    pub fn diff(&self, x: u32) -> f64 {
        self.diff[x as usize]
    }
}
