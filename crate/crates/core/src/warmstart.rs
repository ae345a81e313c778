//! Second-order warm start by interval propagation.
//!
//! A backward pass computes, for every grid point, the interval of squared
//! speeds from which the fixed end speed is still reachable. A forward pass
//! then greedily takes the largest admissible value at each point.

use crate::constraints::{acceleration_rows, torque_rows, SecondOrderBlock};
use crate::error::{Error, Infeasibility, Result};
use crate::problem::PlanningProblem;

/// Closed interval of admissible `x_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachableInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ReachableInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// One row `a·x_k + b·x_{k+1} ≤ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRow {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `x_k` is known, solve for `x_{k+1}`.
    Forward,
    /// `x_{k+1}` is known, solve for `x_k`.
    Backward,
}

const FEAS_TOL: f64 = 1e-12;
const SNAP_TOL: f64 = 1e-10;

/// Image of `known` under the pair rows, intersected with `bounds` on the
/// unknown side. `None` when empty.
pub fn step_interval(
    rows: &[PairRow],
    known: ReachableInterval,
    bounds: ReachableInterval,
    direction: Direction,
) -> Option<ReachableInterval> {
    // Orient every row as `p·known + r·unknown ≤ c`.
    let oriented: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|row| match direction {
            Direction::Forward => (row.a, row.b, row.c),
            Direction::Backward => (row.b, row.a, row.c),
        })
        .collect();
    if known.lo == known.hi {
        return fixed_image(&oriented, known.lo, bounds);
    }
    polygon_projection(&oriented, known, bounds)
}

/// Half-line intersection for a single known value.
fn fixed_image(rows: &[(f64, f64, f64)], v: f64, bounds: ReachableInterval) -> Option<ReachableInterval> {
    let mut lo = bounds.lo;
    let mut hi = bounds.hi;
    for &(p, r, c) in rows {
        let rest = c - p * v;
        if r > 0.0 {
            hi = hi.min(rest / r);
        } else if r < 0.0 {
            lo = lo.max(rest / r);
        } else if rest < -FEAS_TOL * (1.0 + c.abs() + (p * v).abs()) {
            return None;
        }
    }
    if lo <= hi {
        Some(ReachableInterval { lo, hi })
    } else if lo - hi <= SNAP_TOL * (1.0 + hi.abs()) {
        // Apart by rounding only.
        Some(ReachableInterval::point(hi))
    } else {
        None
    }
}

/// Exact projection of the polygon `{(u, w) : u ∈ known, w ∈ bounds, rows}`
/// onto `w` by enumerating its vertices.
fn polygon_projection(
    rows: &[(f64, f64, f64)],
    known: ReachableInterval,
    bounds: ReachableInterval,
) -> Option<ReachableInterval> {
    // Half-planes p·u + r·w ≤ c, box included.
    let mut planes: Vec<(f64, f64, f64)> = rows.to_vec();
    planes.push((1.0, 0.0, known.hi));
    planes.push((-1.0, 0.0, -known.lo));
    if bounds.hi.is_finite() {
        planes.push((0.0, 1.0, bounds.hi));
    }
    planes.push((0.0, -1.0, -bounds.lo));

    let feasible = |u: f64, w: f64| {
        planes.iter().all(|&(p, r, c)| {
            let scale = 1.0 + c.abs() + (p * u).abs() + (r * w).abs();
            p * u + r * w <= c + FEAS_TOL * scale
        })
    };

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let (p1, r1, c1) = planes[i];
            let (p2, r2, c2) = planes[j];
            let det = p1 * r2 - p2 * r1;
            let norm = (p1.abs() + r1.abs()) * (p2.abs() + r2.abs());
            if det.abs() <= 1e-14 * norm {
                continue;
            }
            let u = (c1 * r2 - c2 * r1) / det;
            let w = (p1 * c2 - p2 * c1) / det;
            if feasible(u, w) {
                lo = lo.min(w);
                hi = hi.max(w);
            }
        }
    }
    if lo > hi {
        return None;
    }
    if !bounds.hi.is_finite() {
        // Unbounded above: the polygon is unbounded along +w iff some
        // feasible vertex can slide up without hitting a row.
        let blocked = rows.iter().any(|&(_, r, _)| r > 0.0);
        if !blocked {
            hi = f64::INFINITY;
        }
    }
    Some(ReachableInterval {
        lo: lo.max(bounds.lo),
        hi: hi.min(bounds.hi),
    })
}

/// Pair rows for segment `k` in `a·x_k + b·x_{k+1} ≤ c` form.
fn segment_rows(blocks: &[SecondOrderBlock], k: usize) -> Vec<PairRow> {
    let mut rows = Vec::new();
    for block in blocks.iter().filter(|b| b.k == k) {
        for j in 0..block.alpha0.len() {
            rows.push(PairRow {
                a: block.alpha0[j],
                b: block.alpha1[j],
                c: block.beta_upper[j],
            });
            rows.push(PairRow {
                a: -block.alpha0[j],
                b: -block.alpha1[j],
                c: block.beta_lower[j],
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub x: Vec<f64>,
    /// Backward (controllable) intervals per grid point.
    pub controllable: Vec<ReachableInterval>,
}

/// Greedy second-order profile, ignoring jerk limits.
pub fn warm_start(problem: &PlanningProblem) -> Result<WarmStart> {
    let grid = problem.grid();
    let points = grid.len();
    let last = points - 1;
    let mut blocks = acceleration_rows(problem.samples(), grid, problem.limits());
    if problem.has_dynamics() {
        blocks.extend(torque_rows(problem.coeffs(), grid, problem.limits())?);
    }
    let rows: Vec<Vec<PairRow>> = (0..last).map(|k| segment_rows(&blocks, k)).collect();

    let bounds = |k: usize| {
        if k == 0 {
            ReachableInterval::point(problem.x_start())
        } else if k == last {
            ReachableInterval::point(problem.x_end())
        } else {
            ReachableInterval::new(0.0, problem.velocity_cap(k))
        }
    };
    let empty = |k: usize, detail: &str| {
        Error::Infeasible(Infeasibility {
            kind: None,
            k,
            joint: None,
            detail: detail.to_string(),
        })
    };

    let mut controllable = vec![ReachableInterval::point(0.0); points];
    controllable[last] = bounds(last);
    for k in (0..last).rev() {
        let mut set = step_interval(&rows[k], controllable[k + 1], bounds(k), Direction::Backward)
            .ok_or_else(|| empty(k, "no second-order feasible speed reaches the end state"))?;
        // Pull the top in slightly so the forward pass cannot overshoot it.
        if set.hi > set.lo {
            set.hi = (set.hi - SNAP_TOL * set.hi.abs()).max(set.lo);
        }
        controllable[k] = set;
    }

    let mut x = vec![0.0; points];
    x[0] = problem.x_start();
    for k in 0..last {
        let reach = step_interval(&rows[k], ReachableInterval::point(x[k]), bounds(k + 1), Direction::Forward)
            .ok_or_else(|| empty(k + 1, "forward pass left the reachable set"))?;
        let target = controllable[k + 1];
        let hi = reach.hi.min(target.hi);
        if !hi.is_finite() {
            return Err(Error::Invalid(format!(
                "squared speed at k={} is unbounded; the path does not move there",
                k + 1
            )));
        }
        x[k + 1] = if k + 1 == last {
            problem.x_end()
        } else if hi >= reach.lo.max(target.lo) {
            hi
        } else {
            // Rounding left the two intervals just apart; stay reachable.
            reach.hi.min(target.lo.max(reach.lo))
        };
    }
    Ok(WarmStart { x, controllable })
}

/// Small constant profile under the velocity caps, used when propagation
/// fails.
pub fn fallback_profile(problem: &PlanningProblem, x_floor: f64) -> Vec<f64> {
    let points = problem.grid().len();
    let mut x: Vec<f64> = (0..points)
        .map(|k| (x_floor * 1e6).min(problem.velocity_cap(k)))
        .collect();
    problem.pin_boundary(&mut x);
    x
}
