//! Linear inequality rows in the squared-speed variables `x_k = ṡ_k²`.
//!
//! First-order rows bound a single `x_k`, second-order rows couple
//! `(x_k, x_{k+1})` and linearized third-order rows couple
//! `(x_k, x_{k+1}, x_{k+2})`. [`stack_blocks`] turns them into `A x ≤ b` over
//! the free variables `x_1..x_{N−1}`, folding the fixed endpoints into `b`.

mod jerk;

pub use jerk::{
    h_eval, jerk_numerator_coeffs, jerk_rows, linearize_h, JerkBlock, JerkLinearization,
    JerkNumerator,
};

use crate::dynamics::PathDynamicsCoefficients;
use crate::error::{Error, Infeasibility, Result};
use crate::path::{PathGrid, PathSamples};

pub use crate::error::RowKind;

/// Joint limits. Every present vector is elementwise positive.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Limits {
    /// rad/s
    pub qd_max: Vec<f64>,
    /// rad/s²
    pub qdd_max: Vec<f64>,
    /// rad/s³; `None` disables third-order rows.
    #[serde(default)]
    pub jerk_max: Option<Vec<f64>>,
    /// N·m; required iff the model carries dynamics.
    #[serde(default)]
    pub tau_max: Option<Vec<f64>>,
}

impl Limits {
    pub fn validate(&self, dof: usize, has_dynamics: bool) -> Result<()> {
        let check = |name: &str, v: &[f64]| -> Result<()> {
            if v.len() != dof {
                return Err(Error::Dimension(format!(
                    "{name} has {} entries, path has {dof} joints",
                    v.len()
                )));
            }
            if v.iter().any(|&l| !(l > 0.0) || l.is_nan()) {
                return Err(Error::Invalid(format!("{name} must be strictly positive")));
            }
            Ok(())
        };
        check("qd_max", &self.qd_max)?;
        check("qdd_max", &self.qdd_max)?;
        if let Some(j) = &self.jerk_max {
            check("jerk_max", j)?;
        }
        match (&self.tau_max, has_dynamics) {
            (Some(t), true) => check("tau_max", t)?,
            (None, true) => {
                return Err(Error::Invalid("tau_max is required for a dynamic model".into()))
            }
            (Some(_), false) => {
                return Err(Error::Invalid(
                    "tau_max given for a kinematic-only model".into(),
                ))
            }
            (None, false) => {}
        }
        Ok(())
    }

    /// Same limits with the jerk bound scaled by `factor`.
    pub fn with_jerk_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        if let Some(j) = &mut out.jerk_max {
            j.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `+row ≤ bound`
    Upper,
    /// `−row ≤ bound`
    Lower,
}

/// Where a stacked row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct RowTag {
    pub kind: RowKind,
    pub k: usize,
    pub joint: usize,
    pub side: Side,
}

/// `ω_k ∘ x_k ≤ ν_k` at an interior grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityBlock {
    pub k: usize,
    pub omega: Vec<f64>,
    pub nu: Vec<f64>,
}

/// Two-sided rows `α⁰ x_k + α¹ x_{k+1} ≤ β⁺` and `−(α⁰ x_k + α¹ x_{k+1}) ≤ β⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderBlock {
    pub kind: RowKind,
    pub k: usize,
    pub alpha0: Vec<f64>,
    pub alpha1: Vec<f64>,
    pub beta_upper: Vec<f64>,
    pub beta_lower: Vec<f64>,
}

pub fn velocity_rows(samples: &PathSamples, limits: &Limits) -> Vec<VelocityBlock> {
    let nu: Vec<f64> = limits.qd_max.iter().map(|v| v * v).collect();
    (1..samples.len() - 1)
        .map(|k| VelocityBlock {
            k,
            omega: samples.dq()[k].iter().map(|d| d * d).collect(),
            nu: nu.clone(),
        })
        .collect()
}

pub fn acceleration_rows(
    samples: &PathSamples,
    grid: &PathGrid,
    limits: &Limits,
) -> Vec<SecondOrderBlock> {
    grid.deltas()
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let half = 1.0 / (2.0 * delta);
            let dq = &samples.dq()[k];
            let ddq = &samples.ddq()[k];
            SecondOrderBlock {
                kind: RowKind::Acceleration,
                k,
                alpha0: dq.iter().zip(ddq).map(|(d1, d2)| d2 - d1 * half).collect(),
                alpha1: dq.iter().map(|d1| d1 * half).collect(),
                beta_upper: limits.qdd_max.clone(),
                beta_lower: limits.qdd_max.clone(),
            }
        })
        .collect()
}

pub fn torque_rows(
    coeffs: &PathDynamicsCoefficients,
    grid: &PathGrid,
    limits: &Limits,
) -> Result<Vec<SecondOrderBlock>> {
    let tau_max = limits
        .tau_max
        .as_ref()
        .ok_or_else(|| Error::Invalid("torque rows need tau_max".into()))?;
    if coeffs.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "dynamics coefficients have {} points, grid has {}",
            coeffs.len(),
            grid.len()
        )));
    }
    Ok(grid
        .deltas()
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let half = 1.0 / (2.0 * delta);
            let (m, c, g) = (&coeffs.m[k], &coeffs.c[k], &coeffs.g[k]);
            SecondOrderBlock {
                kind: RowKind::Torque,
                k,
                alpha0: c.iter().zip(m).map(|(c, m)| c - m * half).collect(),
                alpha1: m.iter().map(|m| m * half).collect(),
                beta_upper: tau_max.iter().zip(g).map(|(t, g)| t - g).collect(),
                beta_lower: tau_max.iter().zip(g).map(|(t, g)| t + g).collect(),
            }
        })
        .collect())
}

/// All rows of one linear program.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintBlocks {
    pub first_order: Vec<VelocityBlock>,
    pub second_order: Vec<SecondOrderBlock>,
    pub third_order: Vec<JerkBlock>,
}

/// A single row in global grid indexing: `Σ coeffs[i] · x_{first+i} ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRow {
    pub tag: RowTag,
    pub first: usize,
    pub width: usize,
    pub coeffs: [f64; 3],
    pub rhs: f64,
}

impl LinearRow {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (0..self.width).map(|i| self.coeffs[i] * x[self.first + i]).sum()
    }
}

impl ConstraintBlocks {
    /// Expands every block into single rows, in stacking order: velocity,
    /// then second order (acceleration before torque at equal `k`), then jerk.
    pub fn rows(&self) -> Vec<LinearRow> {
        let mut rows = Vec::new();
        for block in &self.first_order {
            for (joint, (&w, &nu)) in block.omega.iter().zip(&block.nu).enumerate() {
                rows.push(LinearRow {
                    tag: RowTag {
                        kind: RowKind::Velocity,
                        k: block.k,
                        joint,
                        side: Side::Upper,
                    },
                    first: block.k,
                    width: 1,
                    coeffs: [w, 0.0, 0.0],
                    rhs: nu,
                });
            }
        }
        let mut second: Vec<&SecondOrderBlock> = self.second_order.iter().collect();
        second.sort_by_key(|b| (b.k, b.kind == RowKind::Torque));
        for block in second {
            for joint in 0..block.alpha0.len() {
                let (a0, a1) = (block.alpha0[joint], block.alpha1[joint]);
                for (side, sign, rhs) in [
                    (Side::Upper, 1.0, block.beta_upper[joint]),
                    (Side::Lower, -1.0, block.beta_lower[joint]),
                ] {
                    rows.push(LinearRow {
                        tag: RowTag {
                            kind: block.kind,
                            k: block.k,
                            joint,
                            side,
                        },
                        first: block.k,
                        width: 2,
                        coeffs: [sign * a0, sign * a1, 0.0],
                        rhs,
                    });
                }
            }
        }
        for block in &self.third_order {
            for joint in 0..block.eta.len() {
                for (side, gamma) in [
                    (Side::Upper, &block.gamma_upper),
                    (Side::Lower, &block.gamma_lower),
                ] {
                    rows.push(LinearRow {
                        tag: RowTag {
                            kind: RowKind::Jerk,
                            k: block.k,
                            joint,
                            side,
                        },
                        first: block.k,
                        width: 3,
                        coeffs: [gamma[0][joint], gamma[1][joint], gamma[2][joint]],
                        rhs: block.eta[joint],
                    });
                }
            }
        }
        rows
    }
}

/// `A x ≤ b` over the free variables `x_1..x_{N−1}`; column `i` is `x_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedRows {
    /// Row-major, `tags.len() × n_free`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub tags: Vec<RowTag>,
    pub n_free: usize,
}

impl StackedRows {
    pub fn n_rows(&self) -> usize {
        self.tags.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n_free..(i + 1) * self.n_free]
    }

    /// Rows with no free variable left whose constant part is already
    /// violated, e.g. a static gravity torque above its limit.
    pub fn static_violations(&self, tol: f64) -> Vec<(RowTag, f64)> {
        (0..self.n_rows())
            .filter(|&i| self.row(i).iter().all(|&a| a == 0.0) && self.b[i] < -tol)
            .map(|i| (self.tags[i], -self.b[i]))
            .collect()
    }

    /// First static violation as an error, if any.
    pub fn precheck(&self, tol: f64) -> Result<()> {
        match self.static_violations(tol).first() {
            None => Ok(()),
            Some((tag, excess)) => Err(Error::Infeasible(Infeasibility {
                kind: Some(tag.kind),
                k: tag.k,
                joint: Some(tag.joint),
                detail: format!("row cannot be satisfied by any speed (excess {excess:e})"),
            })),
        }
    }
}

/// Stacks rows over `n_points = N + 1` grid points with fixed endpoint
/// values `x_0` and `x_N` moved to the right-hand side.
pub fn stack_blocks(
    blocks: &ConstraintBlocks,
    n_points: usize,
    x_start: f64,
    x_end: f64,
) -> Result<StackedRows> {
    if n_points < 3 {
        return Err(Error::Dimension(format!("need at least 3 grid points, got {n_points}")));
    }
    let last = n_points - 1;
    let n_free = n_points - 2;
    let rows = blocks.rows();
    let mut a = vec![0.0; rows.len() * n_free];
    let mut b = Vec::with_capacity(rows.len());
    let mut tags = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.first + row.width > n_points {
            return Err(Error::Dimension(format!(
                "row {:?} reaches past grid point {last}",
                row.tag
            )));
        }
        let mut rhs = row.rhs;
        for i in 0..row.width {
            let idx = row.first + i;
            let coef = row.coeffs[i];
            if idx == 0 {
                rhs -= coef * x_start;
            } else if idx == last {
                rhs -= coef * x_end;
            } else {
                a[r * n_free + idx - 1] += coef;
            }
        }
        b.push(rhs);
        tags.push(row.tag);
    }
    Ok(StackedRows { a, b, tags, n_free })
}

/// Assembles every row family for `nominal` (used only for the jerk
/// linearization). `coeffs` may be empty for kinematic models.
pub fn assemble(
    samples: &PathSamples,
    coeffs: &PathDynamicsCoefficients,
    grid: &PathGrid,
    limits: &Limits,
    nominal: Option<&[f64]>,
    x_floor: f64,
) -> Result<ConstraintBlocks> {
    let mut blocks = ConstraintBlocks {
        first_order: velocity_rows(samples, limits),
        second_order: acceleration_rows(samples, grid, limits),
        third_order: Vec::new(),
    };
    if !coeffs.is_empty() {
        blocks.second_order.extend(torque_rows(coeffs, grid, limits)?);
    }
    if let (Some(jerk_max), Some(nominal)) = (&limits.jerk_max, nominal) {
        blocks.third_order = jerk_rows(samples, grid, jerk_max, nominal, x_floor)?;
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinematic(dq: f64, ddq: f64, n_points: usize) -> PathSamples {
        PathSamples::from_raw(
            vec![vec![0.0]; n_points],
            vec![vec![dq]; n_points],
            vec![vec![ddq]; n_points],
        )
        .unwrap()
    }

    fn limits(qd: f64, qdd: f64) -> Limits {
        Limits {
            qd_max: vec![qd],
            qdd_max: vec![qdd],
            jerk_max: None,
            tau_max: None,
        }
    }

    #[test]
    fn velocity_row_arithmetic() {
        let samples = PathSamples::from_raw(
            vec![vec![0.0, 0.0]; 4],
            vec![vec![2.0, -1.0]; 4],
            vec![vec![0.0, 0.0]; 4],
        )
        .unwrap();
        let lim = Limits {
            qd_max: vec![2.0, 2.0],
            qdd_max: vec![1.0, 1.0],
            jerk_max: None,
            tau_max: None,
        };
        let rows = velocity_rows(&samples, &lim);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].k, 1);
        assert_eq!(rows[0].omega, vec![4.0, 1.0]);
        assert_eq!(rows[0].nu, vec![4.0, 4.0]);
        let cap = rows[0]
            .omega
            .iter()
            .zip(&rows[0].nu)
            .map(|(w, n)| n / w)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(cap, 1.0);
    }

    #[test]
    fn acceleration_row_coefficients() {
        let grid = PathGrid::from_values(vec![0.0, 0.5, 0.75, 1.0]).unwrap();
        let rows = acceleration_rows(&kinematic(1.0, 0.0, 4), &grid, &limits(1.0, 3.0));
        assert_eq!(rows.len(), 3);
        // Δ_0 = 0.5: |x_1 − x_0| ≤ 3.
        assert_eq!((rows[0].alpha0[0], rows[0].alpha1[0]), (-1.0, 1.0));
        assert_eq!(rows[0].beta_upper[0], 3.0);

        let rows = acceleration_rows(&kinematic(0.0, 1.0, 4), &grid, &limits(1.0, 3.0));
        assert_eq!((rows[1].alpha0[0], rows[1].alpha1[0]), (1.0, 0.0));
    }

    #[test]
    fn torque_rows_fold_gravity() {
        let grid = PathGrid::from_values(vec![0.0, 0.5, 0.75, 1.0]).unwrap();
        let coeffs = PathDynamicsCoefficients {
            m: vec![vec![1.0]; 4],
            c: vec![vec![0.0]; 4],
            g: vec![vec![0.5]; 4],
        };
        let mut lim = limits(1.0, 1.0);
        assert!(torque_rows(&coeffs, &grid, &lim).is_err());
        lim.tau_max = Some(vec![2.0]);
        let rows = torque_rows(&coeffs, &grid, &lim).unwrap();
        assert_eq!((rows[0].alpha0[0], rows[0].alpha1[0]), (-1.0, 1.0));
        assert_eq!((rows[0].beta_upper[0], rows[0].beta_lower[0]), (1.5, 2.5));
    }

    #[test]
    fn static_torque_violation_is_flagged() {
        let grid = PathGrid::uniform(4).unwrap();
        let coeffs = PathDynamicsCoefficients {
            m: vec![vec![0.0]; 5],
            c: vec![vec![0.0]; 5],
            g: vec![vec![3.0]; 5],
        };
        let mut lim = limits(1.0, 1.0);
        lim.tau_max = Some(vec![2.0]);
        let samples = kinematic(1.0, 0.0, 5);
        let blocks = assemble(&samples, &coeffs, &grid, &lim, None, 1e-9).unwrap();
        let stacked = stack_blocks(&blocks, 5, 0.0, 0.0).unwrap();
        let violations = stacked.static_violations(1e-9);
        assert!(!violations.is_empty());
        assert!(violations
            .iter()
            .all(|(t, _)| t.kind == RowKind::Torque && t.side == Side::Upper));
        match stacked.precheck(1e-9) {
            Err(Error::Infeasible(info)) => {
                assert_eq!(info.kind, Some(RowKind::Torque));
                assert_eq!(info.k, 0);
                assert_eq!(info.joint, Some(0));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn stacking_layout_and_folding() {
        let grid = PathGrid::uniform(4).unwrap();
        let samples = kinematic(1.0, 0.0, 5);
        let mut lim = limits(1.0, 1.0);
        lim.jerk_max = Some(vec![10.0]);
        let nominal = [0.0, 0.5, 0.5, 0.5, 0.0];
        let coeffs = PathDynamicsCoefficients::empty();
        let blocks = assemble(&samples, &coeffs, &grid, &lim, Some(&nominal), 1e-9).unwrap();
        assert_eq!(blocks.first_order.len(), 3);
        assert_eq!(blocks.second_order.len(), 4);
        assert_eq!(blocks.third_order.len(), 3);

        let stacked = stack_blocks(&blocks, 5, 0.0, 0.0).unwrap();
        assert_eq!(stacked.n_free, 3);
        assert_eq!(stacked.n_rows(), 3 + 8 + 6);
        for i in 0..stacked.n_rows() {
            let nz = stacked.row(i).iter().filter(|&&a| a != 0.0).count();
            assert!(nz <= 3);
        }
        // Zero endpoints: b equals the raw right-hand sides.
        let raw: Vec<f64> = blocks.rows().iter().map(|r| r.rhs).collect();
        assert_eq!(stacked.b, raw);

        // Nonzero start: first acceleration row carries β_0 − α⁰_0 x_0.
        let stacked = stack_blocks(&blocks, 5, 0.2, 0.0).unwrap();
        let first_acc = stacked
            .tags
            .iter()
            .position(|t| t.kind == RowKind::Acceleration)
            .unwrap();
        let block = &blocks.second_order[0];
        assert_eq!(
            stacked.b[first_acc],
            block.beta_upper[0] - block.alpha0[0] * 0.2
        );
        // Last acceleration row keeps only α⁰_{N−1} on x_{N−1}.
        let last_acc = stacked
            .tags
            .iter()
            .rposition(|t| t.kind == RowKind::Acceleration && t.side == Side::Upper)
            .unwrap();
        assert_eq!(stacked.row(last_acc), &[0.0, 0.0, blocks.second_order[3].alpha0[0]]);
    }

    #[test]
    fn limits_validation() {
        let mut lim = limits(1.0, 1.0);
        assert!(lim.validate(1, false).is_ok());
        assert!(lim.validate(2, false).is_err());
        assert!(lim.validate(1, true).is_err());
        lim.tau_max = Some(vec![1.0]);
        assert!(lim.validate(1, false).is_err());
        assert!(lim.validate(1, true).is_ok());
        lim.jerk_max = Some(vec![0.0]);
        assert!(lim.validate(1, true).is_err());
    }
}
