//! Bounded two-phase revised primal simplex.
//!
//! Every row gets a slack `s_i` with `a_i x + s_i = b_i`; the slack bounds
//! encode the row sense. Phase one minimizes the sum of bound violations of
//! the basic variables starting from the all-slack basis, phase two minimizes
//! the true objective. Pricing is Dantzig's rule with a switch to Bland's rule
//! after a run of degenerate pivots; the ratio test is Harris' two-pass test.

use alloc::vec;
use alloc::vec::Vec;

use super::lu::{BasisInverse, Eta, LuFactors, SparseCol};
use super::scaling::Scaling;
use super::{LinearProgram, RowSense, Solution, SolveError, SolveOptions, Status};

const NONE: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_LIMIT: usize = 50;
const MAX_CLEANUPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Done,
    Infeasible,
    Unbounded,
    IterationLimit,
}

enum Step {
    Flip(f64),
    Pivot { pos: usize, theta: f64, bound: f64 },
    Unbounded,
}

struct Simplex {
    m: usize,
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    slack_rows: Vec<usize>,
    ones: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    inv: BasisInverse,
    tol: f64,
    iterations: usize,
    max_iterations: usize,
    bland: bool,
    degenerate_run: usize,
}

pub(crate) fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let m = lp.num_rows();
    let n = lp.num_vars();
    let scale = if opts.scaling {
        Scaling::compute(lp)
    } else {
        Scaling::identity(m, n)
    };

    let (col_ptr, row_idx, mut vals) = lp.to_csc();
    for j in 0..n {
        for p in col_ptr[j]..col_ptr[j + 1] {
            vals[p] *= scale.row[row_idx[p]] * scale.col[j];
        }
    }
    let mut cost = vec![0.0; n + m];
    let mut lo = vec![0.0; n + m];
    let mut hi = vec![0.0; n + m];
    for j in 0..n {
        cost[j] = lp.costs[j] * scale.col[j] / scale.obj;
        let k = scale.col[j] * scale.rhs;
        lo[j] = lp.lower[j] / k;
        hi[j] = lp.upper[j] / k;
    }
    for i in 0..m {
        let (l, h) = match lp.senses[i] {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Ge => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => (0.0, 0.0),
        };
        lo[n + i] = l;
        hi[n + i] = h;
    }
    let b: Vec<f64> = (0..m).map(|i| lp.rhs[i] * scale.row[i] / scale.rhs).collect();

    let mut s = Simplex {
        m,
        n,
        col_ptr,
        row_idx,
        vals,
        slack_rows: (0..m).collect(),
        ones: vec![1.0; m],
        cost,
        lo,
        hi,
        b,
        x: vec![0.0; n + m],
        basis: (n..n + m).collect(),
        pos: (0..n + m).map(|j| if j >= n { j - n } else { NONE }).collect(),
        inv: BasisInverse::new(LuFactors::factorize(0, &[]).expect("empty basis")),
        tol: opts.tolerance,
        iterations: 0,
        max_iterations: opts.max_iterations,
        bland: false,
        degenerate_run: 0,
    };
    for j in 0..n {
        s.x[j] = if s.lo[j].is_finite() {
            s.lo[j]
        } else if s.hi[j].is_finite() {
            s.hi[j]
        } else {
            0.0
        };
    }
    s.refactor()?;
    s.recompute_primal();

    let status = s.optimize()?;
    log::debug!(
        "simplex: {m} rows, {n} cols, {} iterations, status {status:?}",
        s.iterations
    );

    let mut x: Vec<f64> = (0..n)
        .map(|j| s.x[j] * scale.col[j] * scale.rhs)
        .collect();
    let (duals, reduced_costs) = if status == Status::Optimal {
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(lp.lower[j], lp.upper[j]);
        }
        let y = s.duals(Phase::Two);
        let d: Vec<f64> = (0..n)
            .map(|j| scale.obj * s.reduced_cost(j, &y, Phase::Two) / scale.col[j])
            .collect();
        let y: Vec<f64> = (0..m).map(|i| scale.obj * scale.row[i] * y[i]).collect();
        (Some(y), Some(d))
    } else {
        (None, None)
    };
    Ok(Solution {
        status,
        objective: lp.objective_value(&x),
        x,
        duals,
        reduced_costs,
        iterations: s.iterations,
    })
}

impl Simplex {
    fn col(&self, j: usize) -> (&[usize], &[f64]) {
        if j < self.n {
            let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
            (&self.row_idx[s..e], &self.vals[s..e])
        } else {
            let i = j - self.n;
            (&self.slack_rows[i..i + 1], &self.ones[i..i + 1])
        }
    }

    fn refactor(&mut self) -> Result<(), SolveError> {
        let result = {
            let cols: Vec<SparseCol<'_>> = self
                .basis
                .iter()
                .map(|&j| {
                    let (rows, vals) = self.col(j);
                    SparseCol { rows, vals }
                })
                .collect();
            LuFactors::factorize(self.m, &cols)
        };
        match result {
            Ok(lu) => {
                self.inv = BasisInverse::new(lu);
                Ok(())
            }
            Err(e) => Err(SolveError::SingularBasis {
                iteration: self.iterations,
                step: e.step,
                pivot: e.pivot,
                max_entry: e.max_entry,
                condition: if e.pivot > 0.0 {
                    e.max_entry / e.pivot
                } else {
                    f64::INFINITY
                },
            }),
        }
    }

    fn recompute_primal(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.n + self.m {
            if self.pos[j] != NONE || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                rhs[r] -= v * xj;
            }
        }
        let mut z = vec![0.0; self.m];
        self.inv.ftran(&mut rhs, &mut z);
        for (i, &j) in self.basis.iter().enumerate() {
            self.x[j] = z[i];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        if self.x[j] < self.lo[j] - self.tol {
            self.lo[j] - self.x[j]
        } else if self.x[j] > self.hi[j] + self.tol {
            self.x[j] - self.hi[j]
        } else {
            0.0
        }
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| self.infeasibility(j))
            .fold(0.0, f64::max)
    }

    fn basic_cost(&self, j: usize, phase: Phase) -> f64 {
        match phase {
            Phase::Two => self.cost[j],
            Phase::One => {
                if self.x[j] < self.lo[j] - self.tol {
                    -1.0
                } else if self.x[j] > self.hi[j] + self.tol {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn duals(&self, phase: Phase) -> Vec<f64> {
        let mut c: Vec<f64> = self.basis.iter().map(|&j| self.basic_cost(j, phase)).collect();
        let mut y = vec![0.0; self.m];
        self.inv.btran(&mut c, &mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase: Phase) -> f64 {
        let c = match phase {
            Phase::One => 0.0,
            Phase::Two => self.cost[j],
        };
        let (rows, vals) = self.col(j);
        c - rows.iter().zip(vals).map(|(&r, &v)| y[r] * v).sum::<f64>()
    }

    /// Entering column and its reduced cost, or `None` at optimality.
    fn price(&self, y: &[f64], phase: Phase) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONE || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.reduced_cost(j, y, phase);
            let eligible = (d < -self.tol && self.x[j] < self.hi[j])
                || (d > self.tol && self.x[j] > self.lo[j]);
            if !eligible {
                continue;
            }
            if self.bland {
                return Some((j, d));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, d));
            }
        }
        best
    }

    /// Bound that basic variable `j` runs into when moving at `rate` per unit
    /// step, if any.
    fn blocking_bound(&self, j: usize, rate: f64, phase: Phase) -> Option<f64> {
        let xj = self.x[j];
        if rate < 0.0 {
            if phase == Phase::One && xj > self.hi[j] + self.tol {
                Some(self.hi[j])
            } else if phase == Phase::One && xj < self.lo[j] - self.tol {
                None
            } else if self.lo[j].is_finite() {
                Some(self.lo[j])
            } else {
                None
            }
        } else if phase == Phase::One && xj < self.lo[j] - self.tol {
            Some(self.lo[j])
        } else if phase == Phase::One && xj > self.hi[j] + self.tol {
            None
        } else if self.hi[j].is_finite() {
            Some(self.hi[j])
        } else {
            None
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], phase: Phase) -> Step {
        let range = self.hi[q] - self.lo[q];
        let tol = if self.bland { 0.0 } else { self.tol };
        let mut theta_max = f64::INFINITY;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let j = self.basis[i];
            let rate = -dir * a;
            if let Some(bound) = self.blocking_bound(j, rate, phase) {
                let limit = ((bound - self.x[j]) / rate).max(0.0) + tol / rate.abs();
                theta_max = theta_max.min(limit);
            }
        }
        if theta_max == f64::INFINITY && range == f64::INFINITY {
            return Step::Unbounded;
        }
        if range <= theta_max {
            return Step::Flip(range);
        }
        let mut chosen: Option<(usize, f64, f64)> = None;
        let mut chosen_key = (0.0f64, 0usize);
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let j = self.basis[i];
            let rate = -dir * a;
            let Some(bound) = self.blocking_bound(j, rate, phase) else {
                continue;
            };
            let ratio = ((bound - self.x[j]) / rate).max(0.0);
            if ratio > theta_max {
                continue;
            }
            let better = match chosen {
                None => true,
                Some(_) if self.bland => j < chosen_key.1,
                Some(_) => a.abs() > chosen_key.0 || (a.abs() == chosen_key.0 && j < chosen_key.1),
            };
            if better {
                chosen = Some((i, ratio, bound));
                chosen_key = (a.abs(), j);
            }
        }
        match chosen {
            Some((pos, theta, bound)) => Step::Pivot { pos, theta, bound },
            None => Step::Flip(range),
        }
    }

    fn optimize(&mut self) -> Result<Status, SolveError> {
        let mut cleanups = 0;
        loop {
            match self.run(Phase::One)? {
                Outcome::Done => {}
                Outcome::Infeasible => return Ok(Status::Infeasible),
                Outcome::IterationLimit => return Ok(Status::IterationLimit),
                Outcome::Unbounded => {
                    return Err(SolveError::Numerical {
                        iteration: self.iterations,
                        reason: "unbounded ray while minimizing infeasibility".into(),
                    })
                }
            }
            match self.run(Phase::Two)? {
                Outcome::Done => {}
                Outcome::Unbounded => return Ok(Status::Unbounded),
                Outcome::IterationLimit => return Ok(Status::IterationLimit),
                Outcome::Infeasible => unreachable!("phase two never reports infeasibility"),
            }
            self.refactor()?;
            self.recompute_primal();
            if self.max_primal_infeasibility() == 0.0 || cleanups >= MAX_CLEANUPS {
                return Ok(Status::Optimal);
            }
            cleanups += 1;
        }
    }

    fn run(&mut self, phase: Phase) -> Result<Outcome, SolveError> {
        self.bland = false;
        self.degenerate_run = 0;
        let mut confirmed = false;
        let mut alpha = vec![0.0; self.m];
        let mut work = vec![0.0; self.m];
        loop {
            if phase == Phase::One && self.max_primal_infeasibility() == 0.0 {
                return Ok(Outcome::Done);
            }
            let y = self.duals(phase);
            let Some((q, d)) = self.price(&y, phase) else {
                if !confirmed && !self.inv.etas.is_empty() {
                    // Re-price on a fresh factorization before trusting optimality.
                    self.refactor()?;
                    self.recompute_primal();
                    confirmed = true;
                    continue;
                }
                return Ok(match phase {
                    Phase::One => Outcome::Infeasible,
                    Phase::Two => Outcome::Done,
                });
            };
            confirmed = false;
            if self.iterations >= self.max_iterations {
                return Ok(Outcome::IterationLimit);
            }
            self.iterations += 1;

            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            work.iter_mut().for_each(|w| *w = 0.0);
            {
                let (rows, vals) = self.col(q);
                for (&r, &v) in rows.iter().zip(vals) {
                    work[r] = v;
                }
            }
            self.inv.ftran(&mut work, &mut alpha);

            let theta = match self.ratio_test(q, dir, &alpha, phase) {
                Step::Unbounded => return Ok(Outcome::Unbounded),
                Step::Flip(range) => {
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                    for (i, &a) in alpha.iter().enumerate() {
                        if a != 0.0 {
                            self.x[self.basis[i]] -= dir * range * a;
                        }
                    }
                    range
                }
                Step::Pivot { pos, theta, bound } => {
                    self.x[q] += dir * theta;
                    if theta != 0.0 {
                        for (i, &a) in alpha.iter().enumerate() {
                            if a != 0.0 {
                                self.x[self.basis[i]] -= dir * theta * a;
                            }
                        }
                    }
                    let leaving = self.basis[pos];
                    self.x[leaving] = bound;
                    self.pos[leaving] = NONE;
                    self.basis[pos] = q;
                    self.pos[q] = pos;
                    self.inv.push(Eta::new(pos, &alpha));
                    if self.inv.wants_refactor(REFACTOR_EVERY) {
                        self.refactor()?;
                        self.recompute_primal();
                    }
                    theta
                }
            };

            if theta * d.abs() <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
        }
    }
}
