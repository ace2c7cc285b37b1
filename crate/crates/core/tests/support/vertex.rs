//! Random small LPs and a brute-force vertex-enumeration oracle.
//!
//! Every generated LP has `x >= 0` and no other bounds, so its feasible set
//! is pointed: it is empty, or has a vertex, and an optimum (if any) is
//! attained at a vertex. Unboundedness is decided on the recession cone
//! normalized by `sum(d) = 1`, which is a polytope.

#![allow(dead_code)]

use gridplan_core::lp::{LinearProgram, RowSense, Status};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

pub struct DenseLp {
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub senses: Vec<RowSense>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl DenseLp {
    pub fn to_lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for &c in &self.c {
            lp.add_var(c, 0.0, f64::INFINITY);
        }
        for (i, row) in self.a.iter().enumerate() {
            let terms: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
            lp.add_row(&terms, self.senses[i], self.b[i]);
        }
        lp
    }
}

/// LP with 1..=8 variables and 1..=8 rows, integer data in [-5, 5] for the
/// matrix and costs and [-10, 10] for right-hand sides.
pub fn random_lp(rng: &mut ChaCha8Rng) -> DenseLp {
    let n = rng.random_range(1..=8);
    let m = rng.random_range(1..=8);
    let density: f64 = rng.random_range(0.3..1.0);
    let mut a = vec![vec![0.0; n]; m];
    for row in &mut a {
        for v in row.iter_mut() {
            if rng.random_bool(density) {
                *v = rng.random_range(-5..=5) as f64;
            }
        }
    }
    let senses = (0..m)
        .map(|_| match rng.random_range(0..10) {
            0..=4 => RowSense::Le,
            5..=8 => RowSense::Ge,
            _ => RowSense::Eq,
        })
        .collect();
    let b = (0..m).map(|_| rng.random_range(-10..=10) as f64).collect();
    let c = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
    DenseLp { n, a, senses, b, c }
}

/// Solves the square system `m x = r` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k].abs() < 1e-10 {
            return None;
        }
        m.swap(k, p);
        r.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                r[i] -= f * r[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (r[k] - s) / m[k][k];
    }
    Some(x)
}

fn feasible(a: &[Vec<f64>], senses: &[RowSense], b: &[f64], x: &[f64]) -> bool {
    if x.iter().any(|&v| v < -EPS) {
        return false;
    }
    a.iter().zip(senses).zip(b).all(|((row, s), &bi)| {
        let act: f64 = row.iter().zip(x).map(|(p, q)| p * q).sum();
        let tol = EPS * (1.0 + bi.abs());
        match s {
            RowSense::Le => act <= bi + tol,
            RowSense::Ge => act >= bi - tol,
            RowSense::Eq => (act - bi).abs() <= tol,
        }
    })
}

/// Calls `f` with every `k`-subset of `0..n`.
fn subsets(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Minimum of `c x` over the vertices of `{a x (sense) b, x >= 0}`, or `None`
/// when there is no vertex (empty set).
fn min_over_vertices(a: &[Vec<f64>], senses: &[RowSense], b: &[f64], c: &[f64]) -> Option<f64> {
    let n = c.len();
    let eq: Vec<usize> = (0..a.len()).filter(|&i| senses[i] == RowSense::Eq).collect();
    // Candidate tight constraints: inequality rows, then the bounds x_j >= 0.
    let ineq: Vec<usize> = (0..a.len()).filter(|&i| senses[i] != RowSense::Eq).collect();
    let cand = ineq.len() + n;
    let mut best: Option<f64> = None;
    let eq_take = eq.len().min(n);
    let mut visit = |eq_rows: &[usize], extra: &[usize]| {
        let mut m = Vec::with_capacity(n);
        let mut r = Vec::with_capacity(n);
        for &i in eq_rows {
            m.push(a[i].clone());
            r.push(b[i]);
        }
        for &k in extra {
            if k < ineq.len() {
                m.push(a[ineq[k]].clone());
                r.push(b[ineq[k]]);
            } else {
                let mut e = vec![0.0; n];
                e[k - ineq.len()] = 1.0;
                m.push(e);
                r.push(0.0);
            }
        }
        if let Some(x) = solve_square(m, r) {
            if feasible(a, senses, b, &x) {
                let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(v, |bv: f64| bv.min(v)));
            }
        }
    };
    // With more equalities than variables, try every n-subset of them.
    subsets(eq.len(), eq_take, &mut |es: &[usize]| {
        let eq_rows: Vec<usize> = es.iter().map(|&k| eq[k]).collect();
        subsets(cand, n - eq_take, &mut |extra: &[usize]| visit(&eq_rows, extra));
    });
    best
}

/// Status and optimal objective by vertex enumeration.
pub fn oracle(lp: &DenseLp) -> (Status, Option<f64>) {
    let Some(best) = min_over_vertices(&lp.a, &lp.senses, &lp.b, &lp.c) else {
        return (Status::Infeasible, None);
    };
    // Recession cone with sum(d) = 1.
    let mut a: Vec<Vec<f64>> = lp.a.clone();
    let mut senses = lp.senses.clone();
    let mut b = vec![0.0; a.len()];
    a.push(vec![1.0; lp.n]);
    senses.push(RowSense::Eq);
    b.push(1.0);
    if let Some(ray) = min_over_vertices(&a, &senses, &b, &lp.c) {
        if ray < -1e-9 {
            return (Status::Unbounded, None);
        }
    }
    (Status::Optimal, Some(best))
}
