mod support;

use std::time::Instant;

use gridplan_core::lp::{solve, LinearProgram, RowSense, SolveOptions, Status};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::vertex::{oracle, random_lp};

#[test]
fn matches_vertex_enumeration_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let start = Instant::now();
    let mut counts = [0usize; 3];
    for case in 0..1000 {
        let dense = random_lp(&mut rng);
        let lp = dense.to_lp();
        let (status, value) = oracle(&dense);
        let sol = solve(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, status, "case {case}");
        match status {
            Status::Optimal => {
                counts[0] += 1;
                let v = value.unwrap();
                assert!(
                    (sol.objective - v).abs() <= 1e-6 * v.abs().max(1.0),
                    "case {case}: {} vs {v}",
                    sol.objective
                );
                assert!(lp.max_violation(&sol.x) <= 1e-7);
            }
            Status::Infeasible => counts[1] += 1,
            _ => counts[2] += 1,
        }
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
    // The generator must exercise every outcome.
    assert!(counts.iter().all(|&c| c > 50), "{counts:?}");
}

/// Checks primal feasibility, dual sign conditions and complementary
/// slackness of an optimal solution.
fn kkt_residuals(lp: &LinearProgram, x: &[f64], y: &[f64], d: &[f64]) -> (f64, f64, f64) {
    let primal = lp.max_violation(x);
    let mut dual: f64 = 0.0;
    let mut comp: f64 = 0.0;
    for i in 0..lp.num_rows() {
        let slack = lp.row_activity(i, x) - lp.rhs[i];
        match lp.senses[i] {
            RowSense::Le => dual = dual.max(y[i]),
            RowSense::Ge => dual = dual.max(-y[i]),
            RowSense::Eq => {}
        }
        comp = comp.max((y[i] * slack).abs());
    }
    for j in 0..lp.num_vars() {
        let (row_idx, vals): (Vec<usize>, Vec<f64>) = (0..lp.num_rows())
            .flat_map(|i| {
                let (c, v) = lp.row(i);
                c.iter()
                    .zip(v)
                    .filter(|(&cj, _)| cj == j)
                    .map(move |(_, &v)| (i, v))
                    .collect::<Vec<_>>()
            })
            .unzip();
        let reduced = lp.costs[j] - row_idx.iter().zip(&vals).map(|(&i, v)| y[i] * v).sum::<f64>();
        assert!((reduced - d[j]).abs() <= 1e-7 * (1.0 + reduced.abs()));
        let at_lo = (x[j] - lp.lower[j]).abs() <= 1e-9;
        let at_hi = (x[j] - lp.upper[j]).abs() <= 1e-9;
        let viol = match (at_lo, at_hi) {
            (true, true) => 0.0,
            (true, false) => (-reduced).max(0.0),
            (false, true) => reduced.max(0.0),
            (false, false) => reduced.abs(),
        };
        dual = dual.max(viol);
        let gap = (x[j] - lp.lower[j]).abs().min((lp.upper[j] - x[j]).abs());
        if gap.is_finite() {
            comp = comp.max((reduced * gap).abs());
        }
    }
    (primal, dual, comp)
}

fn sparse_lp(seed: u64, n: usize, m: usize) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lp = LinearProgram::new();
    // A feasible point to build consistent right-hand sides around.
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
    for _ in 0..n {
        let lo = if rng.random_bool(0.1) { f64::NEG_INFINITY } else { 0.0 };
        let hi = if rng.random_bool(0.3) { 5.0 + rng.random_range(0.0..5.0) } else { f64::INFINITY };
        lp.add_var(rng.random_range(-3.0..10.0), lo, hi);
    }
    for _ in 0..m {
        let k = rng.random_range(2..6);
        let terms: Vec<(usize, f64)> = (0..k)
            .map(|_| (rng.random_range(0..n), rng.random_range(-4.0..4.0)))
            .collect();
        let act: f64 = terms.iter().map(|&(j, v)| v * x0[j]).sum();
        let (sense, rhs) = match rng.random_range(0..3) {
            0 => (RowSense::Le, act + rng.random_range(0.0..2.0)),
            1 => (RowSense::Ge, act - rng.random_range(0.0..2.0)),
            _ => (RowSense::Eq, act),
        };
        lp.add_row(&terms, sense, rhs);
    }
    // Keep the free variables bounded in the objective direction.
    let sum: Vec<(usize, f64)> = (0..n).map(|j| (j, 1.0)).collect();
    let total: f64 = x0.iter().sum();
    lp.add_row(&sum, RowSense::Le, total + 10.0);
    let neg: Vec<(usize, f64)> = (0..n).map(|j| (j, 1.0)).collect();
    lp.add_row(&neg, RowSense::Ge, -10.0 * n as f64);
    lp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_solutions_satisfy_kkt(seed in any::<u64>(), n in 5usize..60, m in 3usize..60) {
        let lp = sparse_lp(seed, n, m);
        let sol = solve(&lp, &SolveOptions::default()).unwrap();
        if sol.status == Status::Optimal {
            let (p, d, c) = kkt_residuals(
                &lp,
                &sol.x,
                sol.duals.as_ref().unwrap(),
                sol.reduced_costs.as_ref().unwrap(),
            );
            prop_assert!(p <= 1e-7, "primal {}", p);
            prop_assert!(d <= 1e-7, "dual {}", d);
            prop_assert!(c <= 1e-7, "complementarity {}", c);
            let obj = lp.objective_value(&sol.x);
            prop_assert!((obj - sol.objective).abs() <= 1e-12 * (1.0 + obj.abs()));
        }
    }

    #[test]
    fn solving_is_deterministic(seed in any::<u64>()) {
        let lp = sparse_lp(seed, 30, 25);
        let a = solve(&lp, &SolveOptions::default()).unwrap();
        let b = solve(&lp.clone(), &SolveOptions::default()).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn scaling_does_not_change_the_optimum(seed in any::<u64>()) {
        let lp = sparse_lp(seed, 20, 15);
        let a = solve(&lp, &SolveOptions::default()).unwrap();
        let b = solve(&lp, &SolveOptions { scaling: false, ..Default::default() }).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == Status::Optimal {
            prop_assert!((a.objective - b.objective).abs() <= 1e-7 * (1.0 + a.objective.abs()));
        }
    }
}

#[test]
fn textbook_examples() {
    // min x + y s.t. x + 2y >= 4 has vertices (4, 0) and (0, 2).
    let mut lp = LinearProgram::new();
    lp.add_var(1.0, 0.0, f64::INFINITY);
    lp.add_var(1.0, 0.0, f64::INFINITY);
    lp.add_row(&[(0, 1.0), (1, 2.0)], RowSense::Ge, 4.0);
    let s = solve(&lp, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.x[0]).abs() < 1e-9 && (s.x[1] - 2.0).abs() < 1e-9);
    assert!((s.objective - 2.0).abs() < 1e-9);

    let mut lp = LinearProgram::new();
    lp.add_var(0.0, 3.0, f64::INFINITY);
    lp.add_row(&[(0, 1.0)], RowSense::Le, 2.0);
    assert_eq!(solve(&lp, &SolveOptions::default()).unwrap().status, Status::Infeasible);
}

#[test]
fn singular_basis_is_not_reported_on_dependent_rows() {
    // Duplicate equality rows make the slack-free basis rank deficient; the
    // solver must still find the optimum.
    let mut lp = LinearProgram::new();
    lp.add_var(1.0, 0.0, f64::INFINITY);
    lp.add_var(2.0, 0.0, f64::INFINITY);
    for _ in 0..3 {
        lp.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Eq, 3.0);
    }
    let s = solve(&lp, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.objective - 3.0).abs() < 1e-9);
}
