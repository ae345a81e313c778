//! Robot dynamics projected onto the path.
//!
//! Along a path `q(s)` the rigid-body torque collapses to
//! `τ = m(s) s̈ + c(s) ṡ² + g(s)` with
//! `m = M(q) q′`, `c = M(q) q″ + C(q, q′) q′` and `g = g(q)`. The Coriolis
//! term factors this way because `C(q, ·)` is linear in its velocity argument.

use nalgebra::{Matrix2, Vector2};

use crate::error::{ensure_finite, Error, Result};
use crate::path::PathSamples;

/// Planar two-link arm with revolute joints.
///
/// `q[0]` is measured from the horizontal, `q[1]` relative to link 1.
/// Gravity points along −y in the plane of motion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TwoLinkParams {
    /// Link masses (kg).
    pub masses: [f64; 2],
    /// Link lengths (m).
    pub lengths: [f64; 2],
    /// Distance from each joint to its link's center of mass (m).
    pub com: [f64; 2],
    /// Link inertias about their centers of mass (kg·m²).
    pub inertias: [f64; 2],
    /// Gravitational acceleration (m/s²), any sign.
    pub gravity: f64,
}

impl TwoLinkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = self
            .masses
            .iter()
            .chain(&self.lengths)
            .chain(&self.com)
            .chain(&self.inertias)
            .all(|&v| v.is_finite() && v > 0.0);
        if !positive || !self.gravity.is_finite() {
            return Err(Error::Invalid(
                "two-link masses, lengths, com offsets and inertias must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn mass_matrix(&self, q: [f64; 2]) -> Matrix2<f64> {
        let [m1, m2] = self.masses;
        let [l1, _] = self.lengths;
        let [r1, r2] = self.com;
        let [i1, i2] = self.inertias;
        let cos2 = q[1].cos();
        let m11 = i1 + i2 + m1 * r1 * r1 + m2 * (l1 * l1 + r2 * r2 + 2.0 * l1 * r2 * cos2);
        let m12 = i2 + m2 * (r2 * r2 + l1 * r2 * cos2);
        let m22 = i2 + m2 * r2 * r2;
        Matrix2::new(m11, m12, m12, m22)
    }

    /// Coriolis/centrifugal matrix, linear in `qd`.
    pub fn coriolis_matrix(&self, q: [f64; 2], qd: [f64; 2]) -> Matrix2<f64> {
        let h = self.masses[1] * self.lengths[0] * self.com[1] * q[1].sin();
        Matrix2::new(-h * qd[1], -h * (qd[0] + qd[1]), h * qd[0], 0.0)
    }

    pub fn gravity_torque(&self, q: [f64; 2]) -> Vector2<f64> {
        let [m1, m2] = self.masses;
        let [l1, _] = self.lengths;
        let [r1, r2] = self.com;
        let g = self.gravity;
        let c12 = (q[0] + q[1]).cos();
        Vector2::new(
            (m1 * r1 + m2 * l1) * g * q[0].cos() + m2 * r2 * g * c12,
            m2 * r2 * g * c12,
        )
    }
}

/// `τ = M(q) q̈ + C(q, q̇) q̇ + g(q)` for the planar two-link arm.
pub fn two_link_inverse_dynamics(
    q: [f64; 2],
    qd: [f64; 2],
    qdd: [f64; 2],
    params: &TwoLinkParams,
) -> [f64; 2] {
    let tau = params.mass_matrix(q) * Vector2::from(qdd)
        + params.coriolis_matrix(q, qd) * Vector2::from(qd)
        + params.gravity_torque(q);
    [tau[0], tau[1]]
}

/// Path-projected coefficients `m_k`, `c_k`, `g_k` for `k = 0..=N`.
///
/// Empty for kinematic-only models, in which case torque rows are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathDynamicsCoefficients {
    pub m: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
}

impl PathDynamicsCoefficients {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    /// Checks shape against `len` grid points and `dof` joints.
    pub fn validate(&self, len: usize, dof: usize) -> Result<()> {
        for (name, rows) in [("m", &self.m), ("c", &self.c), ("g", &self.g)] {
            if rows.len() != len {
                return Err(Error::Dimension(format!(
                    "coefficient {name} has {} entries, grid has {len} points",
                    rows.len()
                )));
            }
            for row in rows {
                if row.len() != dof {
                    return Err(Error::Dimension(format!(
                        "coefficient {name} has {} joints, path has {dof}",
                        row.len()
                    )));
                }
                ensure_finite(row, "dynamics coefficients")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsModel {
    KinematicOnly,
    TwoLinkPlanar(TwoLinkParams),
    /// Externally computed coefficients, one entry per grid point.
    Tabulated(PathDynamicsCoefficients),
}

impl DynamicsModel {
    pub fn is_kinematic(&self) -> bool {
        matches!(self, DynamicsModel::KinematicOnly)
    }
}

pub fn compute_dynamics_coeffs(
    model: &DynamicsModel,
    samples: &PathSamples,
) -> Result<PathDynamicsCoefficients> {
    match model {
        DynamicsModel::KinematicOnly => Ok(PathDynamicsCoefficients::empty()),
        DynamicsModel::Tabulated(coeffs) => {
            coeffs.validate(samples.len(), samples.dof())?;
            Ok(coeffs.clone())
        }
        DynamicsModel::TwoLinkPlanar(params) => {
            params.validate()?;
            if samples.dof() != 2 {
                return Err(Error::Dimension(format!(
                    "two-link model needs a 2-joint path, got {} joints",
                    samples.dof()
                )));
            }
            let mut out = PathDynamicsCoefficients {
                m: Vec::with_capacity(samples.len()),
                c: Vec::with_capacity(samples.len()),
                g: Vec::with_capacity(samples.len()),
            };
            for k in 0..samples.len() {
                let q = [samples.q()[k][0], samples.q()[k][1]];
                let dq = Vector2::new(samples.dq()[k][0], samples.dq()[k][1]);
                let ddq = Vector2::new(samples.ddq()[k][0], samples.ddq()[k][1]);
                let mass = params.mass_matrix(q);
                let m = mass * dq;
                let c = mass * ddq + params.coriolis_matrix(q, [dq[0], dq[1]]) * dq;
                let g = params.gravity_torque(q);
                out.m.push(vec![m[0], m[1]]);
                out.c.push(vec![c[0], c[1]]);
                out.g.push(vec![g[0], g[1]]);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arm(gravity: f64) -> TwoLinkParams {
        TwoLinkParams {
            masses: [2.0, 1.5],
            lengths: [0.8, 0.6],
            com: [0.4, 0.3],
            inertias: [0.12, 0.05],
            gravity,
        }
    }

    #[test]
    fn rest_without_gravity_is_torque_free() {
        let tau = two_link_inverse_dynamics([0.3, -1.1], [0.0; 2], [0.0; 2], &arm(0.0));
        assert_eq!(tau, [0.0, 0.0]);
    }

    #[test]
    fn static_gravity_torque() {
        // Hand statics with both links horizontal:
        // joint 2 holds m2 g r2 = 1.5·9.81·0.3,
        // joint 1 holds g (m1 r1 + m2 (l1 + r2)) = 9.81 (0.8 + 1.65).
        let tau = two_link_inverse_dynamics([0.0, 0.0], [0.0; 2], [0.0; 2], &arm(9.81));
        assert!((tau[1] - 4.4145).abs() < 1e-12);
        assert!((tau[0] - 24.0345).abs() < 1e-12);
        // Arm pointing straight up carries no gravity torque.
        let up = two_link_inverse_dynamics(
            [std::f64::consts::FRAC_PI_2, 0.0],
            [0.0; 2],
            [0.0; 2],
            &arm(9.81),
        );
        assert!(up[0].abs() < 1e-12 && up[1].abs() < 1e-12);
    }

    #[test]
    fn kinematic_model_has_no_coefficients() {
        let samples =
            PathSamples::from_raw(vec![vec![0.0]; 4], vec![vec![1.0]; 4], vec![vec![0.0]; 4])
                .unwrap();
        let coeffs = compute_dynamics_coeffs(&DynamicsModel::KinematicOnly, &samples).unwrap();
        assert!(coeffs.is_empty());
    }

    #[test]
    fn frozen_path_without_gravity_is_zero() {
        let samples = PathSamples::from_raw(
            vec![vec![0.4, 0.9]; 5],
            vec![vec![0.0, 0.0]; 5],
            vec![vec![0.0, 0.0]; 5],
        )
        .unwrap();
        let coeffs =
            compute_dynamics_coeffs(&DynamicsModel::TwoLinkPlanar(arm(0.0)), &samples).unwrap();
        for k in 0..5 {
            for j in 0..2 {
                assert_eq!(coeffs.m[k][j], 0.0);
                assert_eq!(coeffs.c[k][j], 0.0);
                assert_eq!(coeffs.g[k][j], 0.0);
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let one_joint =
            PathSamples::from_raw(vec![vec![0.0]; 4], vec![vec![1.0]; 4], vec![vec![0.0]; 4])
                .unwrap();
        assert!(matches!(
            compute_dynamics_coeffs(&DynamicsModel::TwoLinkPlanar(arm(9.81)), &one_joint),
            Err(Error::Dimension(_))
        ));
        let table = PathDynamicsCoefficients {
            m: vec![vec![1.0]; 3],
            c: vec![vec![0.0]; 3],
            g: vec![vec![0.0]; 3],
        };
        assert!(matches!(
            compute_dynamics_coeffs(&DynamicsModel::Tabulated(table), &one_joint),
            Err(Error::Dimension(_))
        ));
        let mut bad = arm(9.81);
        bad.masses[0] = 0.0;
        assert!(bad.validate().is_err());
    }
}
