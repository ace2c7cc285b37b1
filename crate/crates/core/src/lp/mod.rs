//! Sparse linear programs and a bounded revised simplex solver.
//!
//! Problems are always minimizations:
//!
//! ```text
//! min  c'x + offset
//! s.t. a_i x (<= | >= | =) b_i   for every row i
//!      lo <= x <= hi
//! ```
//!
//! Rows are stored row-major (CSR). Bounds may be infinite, coefficients may
//! not.

mod lu;
pub mod mps;
mod scaling;
mod simplex;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub costs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Constant added to the objective.
    pub objective_offset: f64,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("coefficient {what} is not finite")]
    NonFinite { what: String },
    #[error("variable {var} has lower bound {lo} above upper bound {hi}")]
    CrossedBounds { var: usize, lo: f64, hi: f64 },
    #[error("inconsistent dimensions: {0}")]
    Dimensions(String),
}

impl Default for LinearProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self {
            costs: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            objective_offset: 0.0,
            row_ptr: alloc::vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.senses.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.values.len()
    }

    /// Adds a column and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.costs.len() - 1
    }

    /// Adds a row and returns its index. Repeated columns are summed and
    /// zero coefficients dropped; entries are stored sorted by column.
    pub fn add_row(&mut self, terms: &[(usize, f64)], sense: RowSense, rhs: f64) -> usize {
        let mut sorted: Vec<(usize, f64)> = terms.to_vec();
        sorted.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
        for (c, v) in sorted {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        for (c, v) in merged {
            if v != 0.0 {
                self.col_idx.push(c);
                self.values.push(v);
            }
        }
        self.row_ptr.push(self.col_idx.len());
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.senses.len() - 1
    }

    /// Column indices and coefficients of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    /// Row activity `a_i x`.
    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for ((&lo, &hi), &v) in self.lower.iter().zip(&self.upper).zip(x) {
            worst = worst.max(lo - v).max(v - hi);
        }
        for i in 0..self.num_rows() {
            let act = self.row_activity(i, x);
            let v = match self.senses[i] {
                RowSense::Le => act - self.rhs[i],
                RowSense::Ge => self.rhs[i] - act,
                RowSense::Eq => (act - self.rhs[i]).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Column-major copy of the constraint matrix as `(col_ptr, row_idx, values)`.
    pub fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let n = self.num_vars();
        let mut counts = alloc::vec![0usize; n + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = alloc::vec![0usize; self.col_idx.len()];
        let mut vals = alloc::vec![0.0; self.col_idx.len()];
        for i in 0..self.num_rows() {
            let (cols, vs) = self.row(i);
            for (&c, &v) in cols.iter().zip(vs) {
                let p = next[c];
                row_idx[p] = i;
                vals[p] = v;
                next[c] += 1;
            }
        }
        (col_ptr, row_idx, vals)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let m = self.num_rows();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimensions("bound vectors".into()));
        }
        if self.rhs.len() != m || self.row_ptr.len() != m + 1 {
            return Err(LpError::Dimensions("row vectors".into()));
        }
        if self.col_idx.len() != self.values.len() || self.row_ptr[m] != self.values.len() {
            return Err(LpError::Dimensions("matrix storage".into()));
        }
        if let Some(&c) = self.col_idx.iter().find(|&&c| c >= n) {
            return Err(LpError::Dimensions(alloc::format!("column index {c} >= {n}")));
        }
        if !self.objective_offset.is_finite() {
            return Err(LpError::NonFinite {
                what: "objective offset".into(),
            });
        }
        if let Some(j) = self.costs.iter().position(|c| !c.is_finite()) {
            return Err(LpError::NonFinite {
                what: alloc::format!("cost of variable {j}"),
            });
        }
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFinite {
                what: alloc::format!("matrix entry {k}"),
            });
        }
        if let Some(i) = self.rhs.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFinite {
                what: alloc::format!("right-hand side of row {i}"),
            });
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(LpError::CrossedBounds { var: j, lo, hi });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    /// Primal values; the last iterate when not optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals (objective sensitivity to the right-hand side), when optimal.
    pub duals: Option<Vec<f64>>,
    /// Reduced costs of the columns, when optimal.
    pub reduced_costs: Option<Vec<f64>>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Primal and dual feasibility tolerance on the scaled problem.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Geometric row/column scaling before the solve.
    pub scaling: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 2_000_000,
            scaling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] LpError),
    #[error(
        "singular basis at iteration {iteration}: pivot {pivot:e} at factor step {step} \
         (largest basis entry {max_entry:e}, condition estimate >= {condition:e})"
    )]
    SingularBasis {
        iteration: usize,
        step: usize,
        pivot: f64,
        max_entry: f64,
        condition: f64,
    },
    #[error("numerical trouble at iteration {iteration}: {reason}")]
    Numerical { iteration: usize, reason: String },
}

/// Solves `lp` with a two-phase bounded revised simplex method.
///
/// Identical inputs produce identical outputs.
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<Solution, SolveError> {
    lp.validate()?;
    simplex::solve(lp, opts)
}
