//! Timestamped joint trajectories and quality metrics from a profile.

use crate::error::{Error, Result};
use crate::kinematics::{
    joint_acceleration, joint_jerk, joint_torque, joint_velocity, path_acceleration_backward,
    segment_time,
};
use crate::problem::PlanningProblem;

/// Per-grid-point trajectory. Series are indexed `[k][joint]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub qd: Vec<Vec<f64>>,
    /// Forward difference form, backward at the last point.
    pub qdd: Vec<Vec<f64>>,
    /// `NaN` at the last two points, where no jerk is defined.
    pub jerk: Vec<Vec<f64>>,
    /// Absent for kinematic models.
    pub tau: Option<Vec<Vec<f64>>>,
}

impl TrajectoryResult {
    pub fn duration(&self) -> f64 {
        *self.t.last().unwrap_or(&0.0)
    }

    pub fn dof(&self) -> usize {
        self.q.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JointMetrics {
    /// `sqrt(mean τ²)` in N·m; `None` without dynamics.
    pub rms_torque: Option<f64>,
    /// `max |τ·q̇|` in W; `None` without dynamics.
    pub peak_power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectoryMetrics {
    pub duration_s: f64,
    pub per_joint: Vec<JointMetrics>,
}

/// Cumulative times `t_k` with `Δt_k = 2Δ_k / (√x_k + √x_{k+1})`.
pub fn timestamps(x: &[f64], deltas: &[f64]) -> Result<Vec<f64>> {
    if x.len() != deltas.len() + 1 {
        return Err(Error::Dimension(format!(
            "profile has {} points for {} segments",
            x.len(),
            deltas.len()
        )));
    }
    let mut t = Vec::with_capacity(x.len());
    t.push(0.0);
    for (k, &d) in deltas.iter().enumerate() {
        let dt = segment_time(d, x[k], x[k + 1]);
        if !dt.is_finite() {
            return Err(Error::Domain(format!(
                "segment {k} has zero speed at both ends"
            )));
        }
        t.push(t[k] + dt);
    }
    Ok(t)
}

pub fn trajectory(problem: &PlanningProblem, x: &[f64]) -> Result<TrajectoryResult> {
    let grid = problem.grid();
    let samples = problem.samples();
    let deltas = grid.deltas();
    let t = timestamps(x, deltas)?;
    let points = x.len();
    let last = points - 1;
    let n = problem.dof();

    let mut qd = Vec::with_capacity(points);
    let mut qdd = Vec::with_capacity(points);
    let mut jerk = Vec::with_capacity(points);
    for k in 0..points {
        qd.push((0..n).map(|j| joint_velocity(samples, x, k, j)).collect());
        qdd.push(
            (0..n)
                .map(|j| {
                    if k < last {
                        joint_acceleration(samples, x, deltas, k, j)
                    } else {
                        samples.ddq()[k][j] * x[k]
                            + samples.dq()[k][j] * path_acceleration_backward(x, deltas, k)
                    }
                })
                .collect(),
        );
        jerk.push(
            (0..n)
                .map(|j| {
                    if k + 2 <= last {
                        joint_jerk(samples, x, deltas, k, j)
                    } else {
                        f64::NAN
                    }
                })
                .collect(),
        );
    }
    let tau = problem.has_dynamics().then(|| {
        let coeffs = problem.coeffs();
        (0..points)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        if k < last {
                            joint_torque(coeffs, x, deltas, k, j)
                        } else {
                            coeffs.m[k][j] * path_acceleration_backward(x, deltas, k)
                                + coeffs.c[k][j] * x[k]
                                + coeffs.g[k][j]
                        }
                    })
                    .collect()
            })
            .collect()
    });
    Ok(TrajectoryResult {
        s: grid.s().to_vec(),
        t,
        x: x.to_vec(),
        q: samples.q().to_vec(),
        qd,
        qdd,
        jerk,
        tau,
    })
}

pub fn compute_metrics(traj: &TrajectoryResult) -> TrajectoryMetrics {
    let n = traj.dof();
    let per_joint = (0..n)
        .map(|j| match &traj.tau {
            None => JointMetrics {
                rms_torque: None,
                peak_power: None,
            },
            Some(tau) => {
                let sq: f64 = tau.iter().map(|row| row[j] * row[j]).sum();
                let peak = tau
                    .iter()
                    .zip(&traj.qd)
                    .fold(0.0f64, |m, (tau, qd)| m.max((tau[j] * qd[j]).abs()));
                JointMetrics {
                    rms_torque: Some((sq / tau.len() as f64).sqrt()),
                    peak_power: Some(peak),
                }
            }
        })
        .collect();
    TrajectoryMetrics {
        duration_s: traj.duration(),
        per_joint,
    }
}
