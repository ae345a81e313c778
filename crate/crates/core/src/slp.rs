//! Sequential linear programming over the squared-speed profile.
//!
//! Each iteration linearizes the traversal-time cost and the jerk time base
//! around the current profile `x̄`, solves the resulting LP and, by default,
//! accepts the step only if the true cost decreases inside a box trust
//! region. Because the jerk rows are built from a global under-estimator of
//! the time base, every LP-feasible point satisfies the true jerk limits.

use crate::constraints::{assemble, jerk_rows, stack_blocks, ConstraintBlocks};
use crate::error::{Error, Infeasibility, Result};
use crate::kinematics::{joint_jerk, segment_time};
use crate::lp::{solve_lp, LpOptions, LpProblem, LpStatus};
use crate::path::PathGrid;
use crate::problem::PlanningProblem;
use crate::verify::{verify_profile, ViolationReport, VERIFY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrustRegion {
    pub enabled: bool,
    /// Defaults to the largest interior value of the starting profile.
    pub initial_radius: Option<f64>,
    pub shrink: f64,
    pub expand: f64,
    pub min_radius: f64,
}

impl Default for TrustRegion {
    fn default() -> Self {
        Self {
            enabled: true,
            initial_radius: None,
            shrink: 0.5,
            expand: 1.5,
            min_radius: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlpConfig {
    /// Convergence threshold on the step ∞-norm.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Lower bound on interior squared speeds.
    pub x_floor: f64,
    /// Upper bound on interior squared speeds where no limit caps them.
    pub x_cap: f64,
    pub trust_region: TrustRegion,
    pub lp: LpOptions,
    /// Keep every accepted profile in the report.
    pub record_iterates: bool,
}

impl Default for SlpConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_iters: 100,
            x_floor: 1e-9,
            x_cap: 1e8,
            trust_region: TrustRegion::default(),
            lp: LpOptions::default(),
            record_iterates: false,
        }
    }
}

impl SlpConfig {
    pub fn validate(&self) -> Result<()> {
        let tr = &self.trust_region;
        let positive = [self.epsilon, self.x_floor, self.x_cap, tr.shrink, tr.expand, tr.min_radius]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.max_iters == 0 {
            return Err(Error::Invalid("planner settings must be positive".into()));
        }
        if !(tr.shrink < 1.0 && tr.expand > 1.0) {
            return Err(Error::Invalid("trust region needs shrink < 1 < expand".into()));
        }
        if let Some(r) = tr.initial_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Invalid("initial trust radius must be positive".into()));
            }
        }
        if self.x_floor >= self.x_cap {
            return Err(Error::Invalid("x_floor must be below x_cap".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlpStatus {
    Converged,
    MaxIters,
    Infeasible,
}

impl std::fmt::Display for SlpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SlpStatus::Converged => "converged",
            SlpStatus::MaxIters => "max_iters",
            SlpStatus::Infeasible => "infeasible",
        })
    }
}

/// How the first feasible profile was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    /// The nominal profile was already feasible.
    Nominal,
    /// Uniformly scaled down until the jerk limits held.
    Scaled,
    /// One LP solve with rows linearized at the scaled nominal.
    Restored,
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// True cost of the candidate.
    pub f: f64,
    /// Candidate duration, `2f`.
    #[serde(rename = "T")]
    pub t: f64,
    pub step_norm: f64,
    /// Trust radius used for this LP.
    pub rho: f64,
    pub lp_status: LpStatus,
    pub lp_iterations: usize,
    pub accepted: bool,
    /// Largest relative limit excess of the candidate, `0` when feasible.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlpReport {
    pub status: SlpStatus,
    pub iterations: usize,
    pub start: Option<StartKind>,
    pub records: Vec<IterationRecord>,
    /// Cost of the starting profile followed by each accepted step.
    pub accepted_costs: Vec<f64>,
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
    pub final_f: f64,
    #[serde(rename = "final_T")]
    pub final_t: f64,
    pub diagnostic: Option<String>,
}

/// Squared-speed profile `x_k = ṡ_k²` on the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredSpeedProfile {
    pub x: Vec<f64>,
}

impl SquaredSpeedProfile {
    /// Traversal time `T = 2 f(x)`.
    pub fn duration(&self, grid: &PathGrid) -> Result<f64> {
        Ok(2.0 * true_cost(&self.x, grid)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlpOutcome {
    pub profile: SquaredSpeedProfile,
    pub report: SlpReport,
}

/// `f(x) = Σ Δ_i / (√x_i + √x_{i+1})`; the traversal time is `2f`.
pub fn true_cost(x: &[f64], grid: &PathGrid) -> Result<f64> {
    if x.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "profile has {} points, grid has {}",
            x.len(),
            grid.len()
        )));
    }
    let mut f = 0.0;
    for (i, &delta) in grid.deltas().iter().enumerate() {
        let (a, b) = (x[i], x[i + 1]);
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::Domain(format!("negative squared speed near k={i}")));
        }
        let denom = a.sqrt() + b.sqrt();
        if denom == 0.0 {
            return Err(Error::Domain(format!(
                "segment {i} has zero speed at both ends; traversal time is unbounded"
            )));
        }
        f += delta / denom;
    }
    Ok(f)
}

/// Total traversal time `Σ Δt_k`, equal to `2f`.
pub fn duration(x: &[f64], grid: &PathGrid) -> Result<f64> {
    true_cost(x, grid)?;
    Ok(grid
        .deltas()
        .iter()
        .enumerate()
        .map(|(i, &d)| segment_time(d, x[i], x[i + 1]))
        .sum())
}

/// Gradient of [`true_cost`] with respect to the interior values
/// `x_1..x_{N−1}`. Endpoints may be zero; interior entries must be positive.
pub fn linearize_cost(x: &[f64], grid: &PathGrid) -> Result<Vec<f64>> {
    if x.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "profile has {} points, grid has {}",
            x.len(),
            grid.len()
        )));
    }
    let deltas = grid.deltas();
    let last = x.len() - 1;
    (1..last)
        .map(|k| {
            if !(x[k] > 0.0) || !x[k].is_finite() {
                return Err(Error::Domain(format!(
                    "cost linearization needs x_{k} > 0, got {}",
                    x[k]
                )));
            }
            let r = x[k].sqrt();
            let left = r + x[k - 1].max(0.0).sqrt();
            let right = r + x[k + 1].max(0.0).sqrt();
            Ok(-deltas[k - 1] / (2.0 * r * left * left) - deltas[k] / (2.0 * r * right * right))
        })
        .collect()
}

/// Largest `|jerk| / q⃛max` over the profile.
fn jerk_ratio(problem: &PlanningProblem, x: &[f64]) -> f64 {
    let Some(jerk_max) = &problem.limits().jerk_max else {
        return 0.0;
    };
    let deltas = problem.grid().deltas();
    let mut worst: f64 = 0.0;
    for k in 0..x.len() - 2 {
        for (j, &max) in jerk_max.iter().enumerate() {
            worst = worst.max(joint_jerk(problem.samples(), x, deltas, k, j).abs() / max);
        }
    }
    worst
}

fn worst_excess(report: &ViolationReport) -> f64 {
    report.worst().map_or(0.0, |v| v.excess)
}

fn describe(report: &ViolationReport) -> String {
    match report.worst() {
        Some(v) => format!(
            "{} limit exceeded at k={} joint {} ({:.3e} vs {:.3e})",
            v.kind, v.k, v.joint, v.value, v.limit
        ),
        None => "no violation".into(),
    }
}

struct Lp<'a> {
    problem: &'a PlanningProblem,
    base: ConstraintBlocks,
    config: &'a SlpConfig,
}

impl Lp<'_> {
    /// LP linearized at `nominal` with interior bounds `lb..ub`; returns the
    /// full candidate profile.
    fn solve(&self, nominal: &[f64], lb: Vec<f64>, ub: Vec<f64>) -> Result<(LpStatus, usize, Vec<f64>)> {
        let p = self.problem;
        let points = nominal.len();
        let last = points - 1;
        let x_floor = self.config.x_floor;
        let mut blocks = self.base.clone();
        if let Some(jerk_max) = &p.limits().jerk_max {
            blocks.third_order = jerk_rows(p.samples(), p.grid(), jerk_max, nominal, x_floor)?;
        }
        let stacked = stack_blocks(&blocks, points, p.x_start(), p.x_end())?;
        let clamped: Vec<f64> = nominal
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == 0 || i == last { v } else { v.max(x_floor) })
            .collect();
        let c = linearize_cost(&clamped, p.grid())?;
        let lp = LpProblem::new(c, stacked.a, stacked.b, lb, ub)?;
        let sol = solve_lp(&lp, &self.config.lp)?;
        let mut x = nominal.to_vec();
        if sol.status == LpStatus::Optimal {
            x[1..last].copy_from_slice(&sol.x);
        }
        Ok((sol.status, sol.iterations, x))
    }
}

/// Runs the SLP from `nominal` (length `N + 1`, typically the second-order
/// warm start).
///
/// Every accepted iterate, and therefore the returned profile, passes
/// [`verify_profile`]. When no feasible starting profile can be found the
/// report status is [`SlpStatus::Infeasible`] and the nominal is returned.
pub fn slp_solve(problem: &PlanningProblem, nominal: &[f64], config: &SlpConfig) -> Result<SlpOutcome> {
    config.validate()?;
    let grid = problem.grid();
    let points = grid.len();
    if nominal.len() != points {
        return Err(Error::Dimension(format!(
            "nominal profile has {} points, grid has {points}",
            nominal.len()
        )));
    }
    if nominal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("nominal profile contains non-finite entries".into()));
    }
    let last = points - 1;
    let base = assemble(problem.samples(), problem.coeffs(), grid, problem.limits(), None, config.x_floor)?;
    stack_blocks(&base, points, problem.x_start(), problem.x_end())?.precheck(1e-12)?;
    let lp = Lp { problem, base, config };

    let mut report = SlpReport {
        status: SlpStatus::Infeasible,
        iterations: 0,
        start: None,
        records: Vec::new(),
        accepted_costs: Vec::new(),
        iterates: Vec::new(),
        final_f: f64::NAN,
        final_t: f64::NAN,
        diagnostic: None,
    };

    let mut x: Vec<f64> = nominal.iter().map(|v| v.max(0.0)).collect();
    problem.pin_boundary(&mut x);

    // Feasible start.
    let mut start = StartKind::Nominal;
    let ratio = jerk_ratio(problem, &x);
    if ratio > 1.0 {
        // Jerk scales with x^{3/2}.
        let lambda = ratio.powf(-2.0 / 3.0) * 0.999;
        x[1..last].iter_mut().for_each(|v| *v *= lambda);
        start = StartKind::Scaled;
    }
    let check = verify_profile(problem, &x, VERIFY_TOL)?;
    if !check.is_feasible() || true_cost(&x, grid).is_err() {
        let lb = vec![config.x_floor; points - 2];
        let ub = vec![config.x_cap; points - 2];
        let (status, iters, candidate) = lp.solve(&x, lb, ub)?;
        let restored = status == LpStatus::Optimal
            && verify_profile(problem, &candidate, VERIFY_TOL)?.is_feasible()
            && true_cost(&candidate, grid).is_ok();
        if !restored {
            let detail = if status == LpStatus::Optimal {
                describe(&verify_profile(problem, &candidate, VERIFY_TOL)?)
            } else {
                format!("restoration LP {status} after {iters} pivots; start: {}", describe(&check))
            };
            report.diagnostic = Some(detail);
            return Ok(SlpOutcome {
                profile: SquaredSpeedProfile { x },
                report,
            });
        }
        x = candidate;
        start = StartKind::Restored;
    }
    report.start = Some(start);

    let mut f = true_cost(&x, grid)?;
    report.accepted_costs.push(f);
    if config.record_iterates {
        report.iterates.push(x.clone());
    }
    let tr = config.trust_region;
    let mut rho = tr
        .initial_radius
        .unwrap_or_else(|| x[1..last].iter().fold(0.0f64, |m, &v| m.max(v)))
        .max(tr.min_radius);
    report.status = SlpStatus::MaxIters;

    for iter in 1..=config.max_iters {
        report.iterations = iter;
        let (lb, ub): (Vec<f64>, Vec<f64>) = x[1..last]
            .iter()
            .map(|&v| {
                let (lo, hi) = if tr.enabled {
                    ((v - rho).max(config.x_floor), (v + rho).min(config.x_cap))
                } else {
                    (config.x_floor, config.x_cap)
                };
                (lo.min(v), hi.max(v))
            })
            .unzip();
        let (status, lp_iterations, candidate) = lp.solve(&x, lb, ub)?;

        let mut record = IterationRecord {
            iter,
            f: f64::NAN,
            t: f64::NAN,
            step_norm: f64::NAN,
            rho,
            lp_status: status,
            lp_iterations,
            accepted: false,
            violation: f64::NAN,
        };
        if status != LpStatus::Optimal {
            log::debug!("iter {iter}: LP {status}");
            report.records.push(record);
            if tr.enabled {
                rho *= tr.shrink;
                if rho < tr.min_radius {
                    report.status = SlpStatus::Converged;
                    break;
                }
                continue;
            }
            report.status = SlpStatus::Infeasible;
            report.diagnostic = Some(format!("LP {status} at iteration {iter}"));
            break;
        }

        let step = candidate
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let new_f = true_cost(&candidate, grid).unwrap_or(f64::INFINITY);
        let violation = worst_excess(&verify_profile(problem, &candidate, VERIFY_TOL)?);
        record.f = new_f;
        record.t = 2.0 * new_f;
        record.step_norm = step;
        record.violation = violation;

        let accept = if tr.enabled {
            new_f < f && violation == 0.0
        } else {
            new_f.is_finite()
        };
        record.accepted = accept;
        log::debug!(
            "iter {iter}: f={new_f:.12} step={step:.3e} rho={rho:.3e} accepted={accept}"
        );
        report.records.push(record);

        if accept {
            x = candidate;
            f = new_f;
            report.accepted_costs.push(f);
            if config.record_iterates {
                report.iterates.push(x.clone());
            }
            rho = rho.max(tr.expand * step);
        } else if tr.enabled {
            rho *= tr.shrink;
        }
        if step < config.epsilon {
            report.status = SlpStatus::Converged;
            break;
        }
        if tr.enabled && rho < tr.min_radius {
            report.status = SlpStatus::Converged;
            break;
        }
    }

    report.final_f = f;
    report.final_t = 2.0 * f;
    Ok(SlpOutcome {
        profile: SquaredSpeedProfile { x },
        report,
    })
}

/// Infeasibility error carrying the report diagnostic.
pub fn infeasible_error(report: &SlpReport) -> Error {
    Error::Infeasible(Infeasibility {
        kind: None,
        k: 0,
        joint: None,
        detail: report
            .diagnostic
            .clone()
            .unwrap_or_else(|| "no feasible profile found".into()),
    })
}
