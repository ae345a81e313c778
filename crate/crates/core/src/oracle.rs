//! Brute-force dynamic program over a lattice of squared speeds.
//!
//! Only meant for small instances: the reference optimum that the SLP gap is
//! measured against. With jerk limits a state is a pair `(x_k, x_{k+1})`, so
//! the cost grows as `O(N·L³)`.

use crate::error::{Error, Infeasibility, Result};
use crate::kinematics::segment_time;
use crate::problem::PlanningProblem;
use crate::verify::Checker;

pub const MAX_SEGMENTS: usize = 20;
pub const MAX_LEVELS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpConfig {
    /// Lattice levels per interior grid point.
    pub levels: usize,
    pub jerk: bool,
    /// Lowest level as a fraction of the velocity cap.
    pub floor_ratio: f64,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            levels: 200,
            jerk: true,
            floor_ratio: 1e-4,
        }
    }
}

/// Candidate squared speeds per grid point, ascending. Endpoints carry only
/// their fixed value.
#[derive(Debug, Clone, PartialEq)]
pub struct DpGrid {
    pub levels: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    pub duration: f64,
    pub x: Vec<f64>,
}

/// Geometric levels from `floor_ratio` times the smallest interior cap up to
/// the velocity cap at each point.
pub fn dp_grid(problem: &PlanningProblem, levels: usize, floor_ratio: f64) -> Result<DpGrid> {
    if levels < 2 {
        return Err(Error::Invalid("lattice needs at least 2 levels".into()));
    }
    if !(floor_ratio > 0.0 && floor_ratio < 1.0) {
        return Err(Error::Invalid("floor ratio must lie in (0, 1)".into()));
    }
    let last = problem.grid().len() - 1;
    let caps: Vec<f64> = (1..last).map(|k| problem.velocity_cap(k)).collect();
    if let Some(i) = caps.iter().position(|c| !c.is_finite()) {
        return Err(Error::Invalid(format!(
            "no velocity cap at k={}; the lattice needs a finite top level",
            i + 1
        )));
    }
    let lo = floor_ratio * caps.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(last + 1);
    out.push(vec![problem.x_start()]);
    for &cap in &caps {
        let ratio = cap / lo;
        let mut row: Vec<f64> = (0..levels)
            .map(|i| lo * ratio.powf(i as f64 / (levels - 1) as f64))
            .collect();
        row[levels - 1] = cap;
        out.push(row);
    }
    out.push(vec![problem.x_end()]);
    Ok(DpGrid { levels: out })
}

fn lattice_infeasible() -> Error {
    Error::Infeasible(Infeasibility {
        kind: None,
        k: 0,
        joint: None,
        detail: "no feasible path on this lattice".into(),
    })
}

/// Minimum traversal time over the lattice, with transitions checked
/// against the exact limits (true jerk, not its linearization).
pub fn dp_optimal_time(problem: &PlanningProblem, config: &DpConfig) -> Result<DpSolution> {
    let n_seg = problem.segments();
    if n_seg > MAX_SEGMENTS {
        return Err(Error::Invalid(format!(
            "oracle supports at most {MAX_SEGMENTS} segments, got {n_seg}"
        )));
    }
    if config.levels > MAX_LEVELS {
        return Err(Error::Invalid(format!(
            "oracle supports at most {MAX_LEVELS} levels, got {}",
            config.levels
        )));
    }
    let lattice = dp_grid(problem, config.levels, config.floor_ratio)?;
    let checker = Checker::new(problem, 0.0);
    let deltas = problem.grid().deltas();
    let lv = &lattice.levels;

    // Feasible (x_k, x_{k+1}) pairs with their segment times.
    let seg: Vec<Vec<Vec<f64>>> = (0..n_seg)
        .map(|k| {
            lv[k]
                .iter()
                .map(|&a| {
                    lv[k + 1]
                        .iter()
                        .map(|&b| {
                            let t = segment_time(deltas[k], a, b);
                            if t.is_finite() && checker.second_order_ok(k, a, b) {
                                t
                            } else {
                                f64::INFINITY
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let x = if config.jerk && problem.jerk_limited() {
        pair_dp(&checker, lv, &seg)?
    } else {
        single_dp(lv, &seg)?
    };
    let duration = x
        .windows(2)
        .zip(deltas)
        .map(|(w, &d)| segment_time(d, w[0], w[1]))
        .sum();
    Ok(DpSolution { duration, x })
}

fn single_dp(lv: &[Vec<f64>], seg: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    let n_seg = seg.len();
    let mut cost = vec![0.0f64; 1];
    let mut parent: Vec<Vec<usize>> = Vec::with_capacity(n_seg);
    for k in 0..n_seg {
        let mut next = vec![f64::INFINITY; lv[k + 1].len()];
        let mut back = vec![usize::MAX; lv[k + 1].len()];
        for (i, &c) in cost.iter().enumerate() {
            if !c.is_finite() {
                continue;
            }
            for (j, &t) in seg[k][i].iter().enumerate() {
                let total = c + t;
                if total < next[j] {
                    next[j] = total;
                    back[j] = i;
                }
            }
        }
        cost = next;
        parent.push(back);
    }
    if !cost[0].is_finite() {
        return Err(lattice_infeasible());
    }
    let mut idx = vec![0usize; n_seg + 1];
    for k in (0..n_seg).rev() {
        idx[k] = parent[k][idx[k + 1]];
    }
    Ok(idx.iter().enumerate().map(|(k, &i)| lv[k][i]).collect())
}

fn pair_dp(checker: &Checker, lv: &[Vec<f64>], seg: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    let n_seg = seg.len();
    // cost[i][j]: best time with (x_k, x_{k+1}) = (lv[k][i], lv[k+1][j]).
    let mut cost: Vec<Vec<f64>> = seg[0].clone();
    // parent[k][j][l] = i for the transition into (x_{k+1}, x_{k+2}).
    let mut parent: Vec<Vec<Vec<u32>>> = Vec::with_capacity(n_seg - 1);
    for k in 0..n_seg - 1 {
        let (na, nb, nc) = (lv[k].len(), lv[k + 1].len(), lv[k + 2].len());
        let mut next = vec![vec![f64::INFINITY; nc]; nb];
        let mut back = vec![vec![u32::MAX; nc]; nb];
        for i in 0..na {
            for j in 0..nb {
                let c = cost[i][j];
                if !c.is_finite() {
                    continue;
                }
                for l in 0..nc {
                    let t = seg[k + 1][j][l];
                    if !t.is_finite() {
                        continue;
                    }
                    let total = c + t;
                    if total < next[j][l] && checker.jerk_ok(k, [lv[k][i], lv[k + 1][j], lv[k + 2][l]]) {
                        next[j][l] = total;
                        back[j][l] = i as u32;
                    }
                }
            }
        }
        cost = next;
        parent.push(back);
    }
    // Final state (x_{N−1}, x_N): x_N has a single level.
    let (mut best_j, mut best) = (usize::MAX, f64::INFINITY);
    for (j, row) in cost.iter().enumerate() {
        if row[0] < best {
            best = row[0];
            best_j = j;
        }
    }
    if !best.is_finite() {
        return Err(lattice_infeasible());
    }
    let mut idx = vec![0usize; n_seg + 1];
    idx[n_seg - 1] = best_j;
    for k in (0..n_seg - 1).rev() {
        idx[k] = parent[k][idx[k + 1]][idx[k + 2]] as usize;
    }
    Ok(idx.iter().enumerate().map(|(k, &i)| lv[k][i]).collect())
}
