//! Geometric row/column scaling with power-of-two factors, so that scaling
//! and unscaling are exact in floating point.

use alloc::vec;
use alloc::vec::Vec;

use super::LinearProgram;

const PASSES: usize = 6;

#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    /// Multiplies row `i`.
    pub row: Vec<f64>,
    /// Multiplies column `j` (the variable is divided by it).
    pub col: Vec<f64>,
    /// Divides every cost.
    pub obj: f64,
    /// Divides every variable and right-hand side.
    pub rhs: f64,
}

fn pow2_near(v: f64) -> f64 {
    if !(v > 0.0) || !v.is_finite() {
        return 1.0;
    }
    libm::exp2(libm::round(libm::log2(v)))
}

impl Scaling {
    pub(crate) fn identity(m: usize, n: usize) -> Self {
        Scaling {
            row: vec![1.0; m],
            col: vec![1.0; n],
            obj: 1.0,
            rhs: 1.0,
        }
    }

    pub(crate) fn compute(lp: &LinearProgram) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut s = Self::identity(m, n);
        for _ in 0..PASSES {
            let mut cmin = vec![f64::INFINITY; n];
            let mut cmax = vec![0.0f64; n];
            for i in 0..m {
                let (cols, vals) = lp.row(i);
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for (&c, &v) in cols.iter().zip(vals) {
                    let a = (v * s.col[c]).abs();
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
                if hi > 0.0 {
                    s.row[i] = pow2_near(1.0 / libm::sqrt(lo * hi));
                }
                for (&c, &v) in cols.iter().zip(vals) {
                    let a = (v * s.row[i]).abs();
                    cmin[c] = cmin[c].min(a);
                    cmax[c] = cmax[c].max(a);
                }
            }
            for j in 0..n {
                if cmax[j] > 0.0 {
                    s.col[j] = pow2_near(1.0 / libm::sqrt(cmin[j] * cmax[j]));
                }
            }
        }
        let cmax = lp
            .costs
            .iter()
            .zip(&s.col)
            .map(|(c, k)| (c * k).abs())
            .fold(0.0f64, f64::max);
        s.obj = pow2_near(cmax.max(1.0));
        let mut bmax = lp
            .rhs
            .iter()
            .zip(&s.row)
            .map(|(b, r)| (b * r).abs())
            .fold(0.0f64, f64::max);
        for j in 0..n {
            for b in [lp.lower[j], lp.upper[j]] {
                if b.is_finite() {
                    bmax = bmax.max((b / s.col[j]).abs());
                }
            }
        }
        s.rhs = pow2_near(bmax.max(1.0));
        s
    }
}
