//! Instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use totp3::path::{fit_spline, sample_path, Parameterization};
use totp3::{DynamicsModel, Limits, PathGrid, PlanningProblem, TwoLinkParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    KinematicSingle,
    KinematicTriple,
    TwoLink,
}

pub struct Instance {
    pub name: String,
    pub family: Family,
    pub problem: PlanningProblem,
}

pub fn arm() -> TwoLinkParams {
    TwoLinkParams {
        masses: [2.0, 1.5],
        lengths: [0.8, 0.6],
        com: [0.4, 0.3],
        inertias: [0.12, 0.05],
        gravity: 9.81,
    }
}

fn waypoints(rng: &mut ChaCha8Rng, dof: usize, count: usize, span: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![(0..dof).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>()];
    for _ in 1..count {
        let prev = pts.last().unwrap().clone();
        pts.push(prev.iter().map(|p| p + rng.random_range(-span..span)).collect());
    }
    pts
}

pub fn instance(family: Family, seed: u64, n_segments: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dof, model) = match family {
        Family::KinematicSingle => (1, DynamicsModel::KinematicOnly),
        Family::KinematicTriple => (3, DynamicsModel::KinematicOnly),
        Family::TwoLink => (2, DynamicsModel::TwoLinkPlanar(arm())),
    };
    let count = rng.random_range(3..=5);
    let pts = waypoints(&mut rng, dof, count, 1.2);
    let path = fit_spline(&pts, Parameterization::ChordLength).unwrap();
    let grid = PathGrid::uniform(n_segments).unwrap();
    let samples = sample_path(&path, &grid);
    let qd_max: Vec<f64> = (0..dof).map(|_| rng.random_range(1.0..3.0)).collect();
    let qdd_max: Vec<f64> = (0..dof).map(|_| rng.random_range(2.0..8.0)).collect();
    let jerk_max: Vec<f64> = (0..dof).map(|_| rng.random_range(10.0..40.0)).collect();
    let tau_max = (family == Family::TwoLink).then(|| vec![rng.random_range(45.0..70.0), rng.random_range(12.0..20.0)]);
    let limits = Limits {
        qd_max,
        qdd_max,
        jerk_max: Some(jerk_max),
        tau_max,
    };
    Instance {
        name: format!("{family:?}#{seed}"),
        family,
        problem: PlanningProblem::from_model(grid, samples, &model, limits).unwrap(),
    }
}

/// Randomized corpus covering all three families.
pub fn corpus(per_family: usize, n_segments: usize) -> Vec<Instance> {
    let mut out = Vec::new();
    for family in [Family::KinematicSingle, Family::KinematicTriple, Family::TwoLink] {
        for i in 0..per_family {
            out.push(instance(family, 1000 + i as u64, n_segments));
        }
    }
    out
}
