//! Fixed benchmark instances.

use totp3::path::{fit_spline, sample_path, Parameterization};
use totp3::{DynamicsModel, Limits, PathGrid, PlanningProblem, TwoLinkParams};

/// Seven-joint kinematic arm moving through five waypoints.
pub fn seven_joint(n_segments: usize, jerk: bool) -> PlanningProblem {
    let pts: Vec<Vec<f64>> = (0..5)
        .map(|i| (0..7).map(|j| 1.5 * ((i * 7 + j) as f64 * 0.9).sin()).collect())
        .collect();
    let path = fit_spline(&pts, Parameterization::ChordLength).expect("waypoints are distinct");
    let grid = PathGrid::uniform(n_segments).expect("enough segments");
    let samples = sample_path(&path, &grid);
    let limits = Limits {
        qd_max: vec![1.7, 1.7, 1.7, 2.2, 2.6, 2.6, 3.1],
        qdd_max: vec![8.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
        jerk_max: jerk.then(|| vec![60.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0]),
        tau_max: None,
    };
    PlanningProblem::from_model(grid, samples, &DynamicsModel::KinematicOnly, limits).expect("valid limits")
}

/// Planar two-link arm with torque limits.
pub fn two_link(n_segments: usize) -> PlanningProblem {
    let pts = vec![vec![0.0, 0.2], vec![0.7, -0.4], vec![1.2, 0.5]];
    let path = fit_spline(&pts, Parameterization::ChordLength).expect("waypoints are distinct");
    let grid = PathGrid::uniform(n_segments).expect("enough segments");
    let samples = sample_path(&path, &grid);
    let arm = TwoLinkParams {
        masses: [2.0, 1.5],
        lengths: [0.8, 0.6],
        com: [0.4, 0.3],
        inertias: [0.12, 0.05],
        gravity: 9.81,
    };
    let limits = Limits {
        qd_max: vec![2.0, 2.5],
        qdd_max: vec![6.0, 8.0],
        jerk_max: Some(vec![100.0, 100.0]),
        tau_max: Some(vec![60.0, 18.0]),
    };
    PlanningProblem::from_model(grid, samples, &DynamicsModel::TwoLinkPlanar(arm), limits).expect("valid limits")
}
