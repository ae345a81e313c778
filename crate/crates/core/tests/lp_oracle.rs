//! Simplex results against brute-force vertex enumeration.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use totp3::{solve_lp, LpOptions, LpProblem, LpStatus};

/// Solves the n×n system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let w = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= w * a[col][c];
            }
            b[r] -= w * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(len: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if len < k {
        return vec![];
    }
    let mut out = subsets(len - 1, k);
    for mut s in subsets(len - 1, k - 1) {
        s.push(len - 1);
        out.push(s);
    }
    out
}

/// Best objective over all vertices of a bounded polytope, `None` if empty.
fn vertex_optimum(c: &[f64], rows: &[Vec<f64>], b: &[f64], lb: &[f64], ub: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().cloned().zip(b.iter().copied()).collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        planes.push((e.clone(), ub[i]));
        e[i] = -1.0;
        planes.push((e, -lb[i]));
    }
    let mut best: Option<f64> = None;
    for set in subsets(planes.len(), n) {
        let a = set.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs = set.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, rhs) else { continue };
        let feasible = planes
            .iter()
            .all(|(row, bi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9);
        if feasible {
            let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

/// Cost, rows, right-hand side, lower and upper bounds.
type RandomLp = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>, Vec<f64>);

fn random_lp() -> impl Strategy<Value = RandomLp> {
    (2usize..=4, 1usize..=6).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, n), m),
            prop::collection::vec(-2.0..6.0f64, m),
            prop::collection::vec(-4.0..0.0f64, n),
            prop::collection::vec(0.5..4.0f64, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn simplex_matches_vertex_enumeration((c, rows, b, lb, ub) in random_lp()) {
        let lp = LpProblem::from_rows(c.clone(), &rows, b.clone(), lb.clone(), ub.clone()).unwrap();
        let sol = solve_lp(&lp, &LpOptions::default()).unwrap();
        match vertex_optimum(&c, &rows, &b, &lb, &ub) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - best).abs() <= 1e-7 * (1.0 + best.abs()),
                    "simplex {} vs enumeration {}", sol.objective, best);
                prop_assert!(lp.max_violation(&sol.x) <= 1e-8);
            }
        }
    }

    #[test]
    fn optimum_bounds_every_feasible_point(
        (c, rows, b, lb, ub) in random_lp(),
        probes in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 4), 20),
    ) {
        let lp = LpProblem::from_rows(c.clone(), &rows, b, lb.clone(), ub.clone()).unwrap();
        let sol = solve_lp(&lp, &LpOptions::default()).unwrap();
        prop_assume!(sol.status == LpStatus::Optimal);
        for p in probes {
            let x: Vec<f64> = (0..c.len()).map(|i| lb[i] + p[i] * (ub[i] - lb[i])).collect();
            if lp.max_violation(&x) == 0.0 {
                prop_assert!(sol.objective <= lp.objective(&x) + 1e-9);
            }
        }
    }

    #[test]
    fn solves_are_repeatable((c, rows, b, lb, ub) in random_lp()) {
        let lp = LpProblem::from_rows(c, &rows, b, lb, ub).unwrap();
        let first = solve_lp(&lp, &LpOptions::default()).unwrap();
        let again = solve_lp(&lp, &LpOptions::default()).unwrap();
        prop_assert_eq!(first.status, again.status);
        prop_assert_eq!(first.iterations, again.iterations);
        prop_assert!(first.x.iter().zip(&again.x).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
