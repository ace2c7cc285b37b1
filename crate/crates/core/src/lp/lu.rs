//! Sparse left-looking LU factorization of a simplex basis with a product-form
//! eta file for updates between refactorizations.
//!
//! Step `k` of the factorization pivots basis column `pcol[k]` on row
//! `prow[k]`. `L` column `k` holds the multipliers for rows pivoted after step
//! `k`; `U` column `k` holds entries on earlier steps plus the diagonal.

use alloc::vec;
use alloc::vec::Vec;

const NONE: usize = usize::MAX;
const DROP_TOL: f64 = 1e-14;
/// Threshold partial pivoting: accept any candidate within this factor of the
/// largest magnitude, preferring rows that appear in the fewest columns.
const PIVOT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Singular {
    pub step: usize,
    pub pivot: f64,
    pub max_entry: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LuFactors {
    m: usize,
    prow: Vec<usize>,
    pcol: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    pub min_pivot: f64,
    pub max_pivot: f64,
}

/// A sparse column given as parallel row/value slices.
pub(crate) struct SparseCol<'a> {
    pub rows: &'a [usize],
    pub vals: &'a [f64],
}

impl LuFactors {
    /// Factorizes the `m x m` matrix whose columns are `cols`.
    pub(crate) fn factorize(m: usize, cols: &[SparseCol<'_>]) -> Result<Self, Singular> {
        debug_assert_eq!(cols.len(), m);
        // Sparse columns first: slack singletons pivot immediately.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&c| cols[c].rows.len());

        let mut row_count = vec![0usize; m];
        let mut max_entry: f64 = 0.0;
        for c in cols {
            for (&r, &v) in c.rows.iter().zip(c.vals) {
                row_count[r] += 1;
                max_entry = max_entry.max(v.abs());
            }
        }

        let mut f = LuFactors {
            m,
            prow: Vec::with_capacity(m),
            pcol: Vec::with_capacity(m),
            l_ptr: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_ptr: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            min_pivot: f64::INFINITY,
            max_pivot: 0.0,
        };

        let mut pinv = vec![NONE; m];
        let mut x = vec![0.0; m];
        let mut mark = vec![0usize; m];
        let mut generation = 0usize;
        let mut reach: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for k in 0..m {
            let col = &cols[order[k]];
            generation += 1;
            reach.clear();
            // Depth-first search through L to find the nonzero pattern of
            // L \ col in topological order (reverse postorder).
            for &start in col.rows {
                if mark[start] == generation {
                    continue;
                }
                mark[start] = generation;
                stack.push((start, 0));
                while let Some(&(node, next)) = stack.last() {
                    let step = pinv[node];
                    let mut child = NONE;
                    let mut cursor = next;
                    if step != NONE {
                        let (s, e) = (f.l_ptr[step], f.l_ptr[step + 1]);
                        while s + cursor < e {
                            let c = f.l_idx[s + cursor];
                            cursor += 1;
                            if mark[c] != generation {
                                child = c;
                                break;
                            }
                        }
                    }
                    if child != NONE {
                        let top = stack.len() - 1;
                        stack[top].1 = cursor;
                        mark[child] = generation;
                        stack.push((child, 0));
                    } else {
                        stack.pop();
                        reach.push(node);
                    }
                }
            }
            for (&r, &v) in col.rows.iter().zip(col.vals) {
                x[r] = v;
            }
            for &node in reach.iter().rev() {
                let step = pinv[node];
                if step == NONE {
                    continue;
                }
                let xv = x[node];
                if xv == 0.0 {
                    continue;
                }
                for p in f.l_ptr[step]..f.l_ptr[step + 1] {
                    x[f.l_idx[p]] -= f.l_val[p] * xv;
                }
            }

            let mut best_abs: f64 = 0.0;
            for &node in &reach {
                if pinv[node] == NONE {
                    best_abs = best_abs.max(x[node].abs());
                }
            }
            if best_abs <= 1e-11 * max_entry.max(1.0) {
                return Err(Singular {
                    step: k,
                    pivot: best_abs,
                    max_entry,
                });
            }
            let mut pivot_row = NONE;
            for &node in reach.iter().rev() {
                if pinv[node] != NONE || x[node].abs() < PIVOT_THRESHOLD * best_abs {
                    continue;
                }
                if pivot_row == NONE
                    || row_count[node] < row_count[pivot_row]
                    || (row_count[node] == row_count[pivot_row] && node < pivot_row)
                {
                    pivot_row = node;
                }
            }
            let pivot = x[pivot_row];
            f.min_pivot = f.min_pivot.min(pivot.abs());
            f.max_pivot = f.max_pivot.max(pivot.abs());

            for &node in reach.iter().rev() {
                let v = x[node];
                let step = pinv[node];
                if step != NONE {
                    if v.abs() > DROP_TOL {
                        f.u_idx.push(step);
                        f.u_val.push(v);
                    }
                } else if node != pivot_row {
                    let l = v / pivot;
                    if l.abs() > DROP_TOL {
                        f.l_idx.push(node);
                        f.l_val.push(l);
                    }
                }
            }
            for &node in &reach {
                x[node] = 0.0;
            }
            pinv[pivot_row] = k;
            f.prow.push(pivot_row);
            f.pcol.push(order[k]);
            f.u_diag.push(pivot);
            f.l_ptr.push(f.l_idx.len());
            f.u_ptr.push(f.u_idx.len());
        }
        Ok(f)
    }

    pub(crate) fn nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.m
    }

    /// Solves `B z = b`. `b` is indexed by row and is overwritten as scratch;
    /// `z` is indexed by basis position.
    pub(crate) fn solve(&self, b: &mut [f64], z: &mut [f64]) {
        let m = self.m;
        let mut w = vec![0.0; m];
        for k in 0..m {
            let v = b[self.prow[k]];
            w[k] = v;
            if v != 0.0 {
                for p in self.l_ptr[k]..self.l_ptr[k + 1] {
                    b[self.l_idx[p]] -= self.l_val[p] * v;
                }
            }
        }
        for k in (0..m).rev() {
            let v = w[k] / self.u_diag[k];
            w[k] = v;
            if v != 0.0 {
                for p in self.u_ptr[k]..self.u_ptr[k + 1] {
                    w[self.u_idx[p]] -= self.u_val[p] * v;
                }
            }
        }
        for k in 0..m {
            z[self.pcol[k]] = w[k];
        }
    }

    /// Solves `B' y = c`. `c` is indexed by basis position, `y` by row.
    pub(crate) fn solve_transpose(&self, c: &[f64], y: &mut [f64]) {
        let m = self.m;
        let mut g = vec![0.0; m];
        for k in 0..m {
            let mut v = c[self.pcol[k]];
            for p in self.u_ptr[k]..self.u_ptr[k + 1] {
                v -= self.u_val[p] * g[self.u_idx[p]];
            }
            g[k] = v / self.u_diag[k];
        }
        for k in (0..m).rev() {
            let mut v = g[k];
            for p in self.l_ptr[k]..self.l_ptr[k + 1] {
                v -= self.l_val[p] * y[self.l_idx[p]];
            }
            y[self.prow[k]] = v;
        }
    }
}

/// One basis change: position `pos` replaced by a column whose representation
/// in the previous basis is `alpha` (pivot entry `pivot`, others sparse).
#[derive(Debug, Clone)]
pub(crate) struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Eta {
    pub(crate) fn new(pos: usize, alpha: &[f64]) -> Self {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                idx.push(i);
                val.push(a);
            }
        }
        Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        }
    }

    pub(crate) fn nnz(&self) -> usize {
        self.idx.len() + 1
    }

    fn apply(&self, z: &mut [f64]) {
        let zr = z[self.pos] / self.pivot;
        z[self.pos] = zr;
        if zr != 0.0 {
            for (&i, &a) in self.idx.iter().zip(&self.val) {
                z[i] -= a * zr;
            }
        }
    }

    fn apply_transpose(&self, c: &mut [f64]) {
        let mut v = c[self.pos];
        for (&i, &a) in self.idx.iter().zip(&self.val) {
            v -= a * c[i];
        }
        c[self.pos] = v / self.pivot;
    }
}

/// Basis inverse represented as an LU factorization followed by an eta file.
#[derive(Debug, Clone)]
pub(crate) struct BasisInverse {
    pub lu: LuFactors,
    pub etas: Vec<Eta>,
    eta_nnz: usize,
}

impl BasisInverse {
    pub(crate) fn new(lu: LuFactors) -> Self {
        BasisInverse {
            lu,
            etas: Vec::new(),
            eta_nnz: 0,
        }
    }

    pub(crate) fn push(&mut self, eta: Eta) {
        self.eta_nnz += eta.nnz();
        self.etas.push(eta);
    }

    /// True when the eta file has grown enough that refactoring pays off.
    pub(crate) fn wants_refactor(&self, max_updates: usize) -> bool {
        self.etas.len() >= max_updates || self.eta_nnz > 2 * self.lu.nnz() + 1000
    }

    pub(crate) fn ftran(&self, b: &mut [f64], z: &mut [f64]) {
        self.lu.solve(b, z);
        for eta in &self.etas {
            eta.apply(z);
        }
    }

    pub(crate) fn btran(&self, c: &mut [f64], y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            eta.apply_transpose(c);
        }
        self.lu.solve_transpose(c, y);
    }
}
