//! End-to-end pipeline: warm start, SLP, trajectory and metrics.
//!
//! The greedy warm start is first polished by an SLP run without jerk rows.
//! That problem is convex, so the polished profile is the second-order
//! optimum; the jerk-limited run then starts from it.

use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, trajectory, TrajectoryMetrics, TrajectoryResult};
use crate::problem::PlanningProblem;
use crate::slp::{slp_solve, true_cost, SlpConfig, SlpReport, SlpStatus, SquaredSpeedProfile};
use crate::warmstart::{fallback_profile, warm_start};

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub warm_start: Vec<f64>,
    /// Duration of the warm start, `NaN` if it stalls.
    pub warm_start_duration: f64,
    pub used_fallback: bool,
    /// Optimum without jerk limits; equal to `profile` when none are set.
    pub second_order: Vec<f64>,
    pub second_order_duration: f64,
    pub profile: SquaredSpeedProfile,
    pub report: SlpReport,
    /// Present unless the instance is infeasible.
    pub trajectory: Option<TrajectoryResult>,
    pub metrics: Option<TrajectoryMetrics>,
}

impl PlanOutcome {
    pub fn status(&self) -> SlpStatus {
        self.report.status
    }

    pub fn duration(&self) -> f64 {
        self.report.final_t
    }
}

pub fn plan(problem: &PlanningProblem, config: &SlpConfig) -> Result<PlanOutcome> {
    let (nominal, used_fallback) = match warm_start(problem) {
        Ok(ws) => (ws.x, false),
        Err(Error::Infeasible(why)) => {
            log::warn!("second-order propagation failed {why}; using a constant nominal");
            (fallback_profile(problem, config.x_floor), true)
        }
        Err(e) => return Err(e),
    };
    let warm_start_duration = true_cost(&nominal, problem.grid()).map_or(f64::NAN, |f| 2.0 * f);
    let polished = slp_solve(&problem.without_jerk(), &nominal, config)?;
    let (second_order, second_order_duration) = if polished.report.status == SlpStatus::Infeasible {
        (nominal.clone(), f64::NAN)
    } else {
        (polished.profile.x.clone(), polished.report.final_t)
    };
    let outcome = if problem.jerk_limited() {
        slp_solve(problem, &second_order, config)?
    } else {
        polished
    };
    let (trajectory, metrics) = if outcome.report.status == SlpStatus::Infeasible {
        (None, None)
    } else {
        let traj = trajectory(problem, &outcome.profile.x)?;
        let metrics = compute_metrics(&traj);
        (Some(traj), Some(metrics))
    };
    log::info!(
        "plan {}: T={:.6} after {} iterations (warm start T={:.6})",
        outcome.report.status,
        outcome.report.final_t,
        outcome.report.iterations,
        warm_start_duration
    );
    Ok(PlanOutcome {
        warm_start: nominal,
        warm_start_duration,
        used_fallback,
        second_order,
        second_order_duration,
        profile: outcome.profile,
        report: outcome.report,
        trajectory,
        metrics,
    })
}
