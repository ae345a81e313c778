//! Direct feasibility check of a profile against every original limit.
//!
//! Jerk is evaluated with the true time base, never the linearization.

use crate::constraints::RowKind;
use crate::error::{Error, Result};
use crate::kinematics::{window_acceleration, window_jerk, window_torque};
use crate::problem::PlanningProblem;

/// Relative tolerance on every limit.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Violation {
    pub kind: RowKind,
    pub k: usize,
    pub joint: usize,
    /// The offending quantity (joint velocity, acceleration, torque or jerk;
    /// the squared speed itself when it is negative).
    pub value: f64,
    pub limit: f64,
    /// `(|value| − limit) / limit`.
    pub excess: f64,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest relative excess for one row family, `0` when clean.
    pub fn max_excess(&self, kind: RowKind) -> f64 {
        self.violations
            .iter()
            .filter(|v| v.kind == kind)
            .fold(0.0, |m, v| m.max(v.excess))
    }

    pub fn worst(&self) -> Option<&Violation> {
        self.violations.iter().max_by(|a, b| a.excess.total_cmp(&b.excess))
    }
}

/// Local limit checks shared by [`verify_profile`] and the lattice oracle.
pub(crate) struct Checker<'a> {
    problem: &'a PlanningProblem,
    tol: f64,
}

impl<'a> Checker<'a> {
    pub(crate) fn new(problem: &'a PlanningProblem, tol: f64) -> Self {
        Self { problem, tol }
    }

    fn push(&self, out: &mut Vec<Violation>, kind: RowKind, k: usize, joint: usize, value: f64, limit: f64) {
        if value.abs() > limit * (1.0 + self.tol) || value.is_nan() {
            out.push(Violation {
                kind,
                k,
                joint,
                value,
                limit,
                excess: (value.abs() - limit) / limit,
            });
        }
    }

    pub(crate) fn velocity(&self, k: usize, x: f64, out: &mut Vec<Violation>) {
        if x < 0.0 {
            out.push(Violation {
                kind: RowKind::Velocity,
                k,
                joint: 0,
                value: x,
                limit: 0.0,
                excess: -x,
            });
            return;
        }
        let p = self.problem;
        let speed = x.sqrt();
        for (j, (&dq, &max)) in p.samples().dq()[k].iter().zip(&p.limits().qd_max).enumerate() {
            self.push(out, RowKind::Velocity, k, j, dq * speed, max);
        }
    }

    /// Acceleration and torque on segment `k` (forward form).
    pub(crate) fn second_order(&self, k: usize, xa: f64, xb: f64, out: &mut Vec<Violation>) {
        let p = self.problem;
        let deltas = p.grid().deltas();
        for (j, &max) in p.limits().qdd_max.iter().enumerate() {
            let qdd = window_acceleration(p.samples(), deltas, k, j, xa, xb);
            self.push(out, RowKind::Acceleration, k, j, qdd, max);
        }
        if let Some(tau_max) = &p.limits().tau_max {
            for (j, &max) in tau_max.iter().enumerate() {
                let tau = window_torque(p.coeffs(), deltas, k, j, xa, xb);
                self.push(out, RowKind::Torque, k, j, tau, max);
            }
        }
    }

    pub(crate) fn jerk(&self, k: usize, window: [f64; 3], out: &mut Vec<Violation>) {
        let p = self.problem;
        if let Some(jerk_max) = &p.limits().jerk_max {
            for (j, &max) in jerk_max.iter().enumerate() {
                let jerk = window_jerk(p.samples(), p.grid().deltas(), k, j, window);
                self.push(out, RowKind::Jerk, k, j, jerk, max);
            }
        }
    }

    pub(crate) fn second_order_ok(&self, k: usize, xa: f64, xb: f64) -> bool {
        let mut out = Vec::new();
        self.second_order(k, xa, xb, &mut out);
        out.is_empty()
    }

    pub(crate) fn jerk_ok(&self, k: usize, window: [f64; 3]) -> bool {
        let mut out = Vec::new();
        self.jerk(k, window, &mut out);
        out.is_empty()
    }
}

/// Checks `x` (length `N + 1`) against all velocity, acceleration, torque
/// and jerk limits at relative tolerance `tol`.
pub fn verify_profile(problem: &PlanningProblem, x: &[f64], tol: f64) -> Result<ViolationReport> {
    verify_orders(problem, x, tol, true)
}

/// As [`verify_profile`], optionally skipping the jerk limits.
pub fn verify_orders(
    problem: &PlanningProblem,
    x: &[f64],
    tol: f64,
    check_jerk: bool,
) -> Result<ViolationReport> {
    let points = problem.grid().len();
    if x.len() != points {
        return Err(Error::Dimension(format!(
            "profile has {} points, grid has {points}",
            x.len()
        )));
    }
    let checker = Checker::new(problem, tol);
    let mut violations = Vec::new();
    for (k, &xk) in x.iter().enumerate() {
        checker.velocity(k, xk, &mut violations);
    }
    if violations.iter().any(|v| v.limit == 0.0) || x.iter().any(|v| v.is_nan()) {
        // Negative or undefined squared speeds: higher orders are meaningless.
        return Ok(ViolationReport { violations });
    }
    for k in 0..points - 1 {
        checker.second_order(k, x[k], x[k + 1], &mut violations);
    }
    if check_jerk {
        for k in 0..points - 2 {
            checker.jerk(k, [x[k], x[k + 1], x[k + 2]], &mut violations);
        }
    }
    Ok(ViolationReport { violations })
}
