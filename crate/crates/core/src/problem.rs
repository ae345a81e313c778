//! A validated planning instance: geometry, dynamics, limits and boundary speeds.

use crate::constraints::Limits;
use crate::dynamics::{compute_dynamics_coeffs, DynamicsModel, PathDynamicsCoefficients};
use crate::error::{Error, Result};
use crate::path::{PathGrid, PathSamples};

#[derive(Debug, Clone, PartialEq)]
pub struct PlanningProblem {
    grid: PathGrid,
    samples: PathSamples,
    coeffs: PathDynamicsCoefficients,
    limits: Limits,
    x_start: f64,
    x_end: f64,
}

impl PlanningProblem {
    /// Rest-to-rest problem. `coeffs` is empty for kinematic models.
    pub fn new(
        grid: PathGrid,
        samples: PathSamples,
        coeffs: PathDynamicsCoefficients,
        limits: Limits,
    ) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "samples have {} points, grid has {}",
                samples.len(),
                grid.len()
            )));
        }
        if !coeffs.is_empty() {
            coeffs.validate(grid.len(), samples.dof())?;
        }
        limits.validate(samples.dof(), !coeffs.is_empty())?;
        Ok(Self {
            grid,
            samples,
            coeffs,
            limits,
            x_start: 0.0,
            x_end: 0.0,
        })
    }

    pub fn from_model(
        grid: PathGrid,
        samples: PathSamples,
        model: &DynamicsModel,
        limits: Limits,
    ) -> Result<Self> {
        let coeffs = compute_dynamics_coeffs(model, &samples)?;
        Self::new(grid, samples, coeffs, limits)
    }

    /// Fixes nonzero boundary squared speeds `x_0`, `x_N`.
    pub fn with_boundary(mut self, x_start: f64, x_end: f64) -> Result<Self> {
        for (name, v) in [("x_start", x_start), ("x_end", x_end)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite and nonnegative")));
            }
        }
        self.x_start = x_start;
        self.x_end = x_end;
        Ok(self)
    }

    pub fn with_limits(&self, limits: Limits) -> Result<Self> {
        limits.validate(self.dof(), self.has_dynamics())?;
        Ok(Self {
            limits,
            ..self.clone()
        })
    }

    /// Same problem with third-order limits removed.
    pub fn without_jerk(&self) -> Self {
        let mut out = self.clone();
        out.limits.jerk_max = None;
        out
    }

    pub fn grid(&self) -> &PathGrid {
        &self.grid
    }

    pub fn samples(&self) -> &PathSamples {
        &self.samples
    }

    pub fn coeffs(&self) -> &PathDynamicsCoefficients {
        &self.coeffs
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn dof(&self) -> usize {
        self.samples.dof()
    }

    /// Number of segments `N`.
    pub fn segments(&self) -> usize {
        self.grid.segments()
    }

    pub fn has_dynamics(&self) -> bool {
        !self.coeffs.is_empty()
    }

    pub fn jerk_limited(&self) -> bool {
        self.limits.jerk_max.is_some()
    }

    /// Largest `x_k` allowed by the velocity limits alone; infinite when the
    /// path does not move at `k`.
    pub fn velocity_cap(&self, k: usize) -> f64 {
        self.samples.dq()[k]
            .iter()
            .zip(&self.limits.qd_max)
            .filter(|(d, _)| **d != 0.0)
            .map(|(d, v)| (v / d) * (v / d))
            .fold(f64::INFINITY, f64::min)
    }

    /// Replaces the endpoints of `x` with the fixed boundary values.
    pub(crate) fn pin_boundary(&self, x: &mut [f64]) {
        let last = x.len() - 1;
        x[0] = self.x_start;
        x[last] = self.x_end;
    }
}
