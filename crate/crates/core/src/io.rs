//! File formats: path and robot JSON inputs, trajectory CSV, metrics JSON
//! and the JSON-lines iteration log.

use std::io::{Read, Write};
use std::path::Path;

use crate::constraints::Limits;
use crate::dynamics::{DynamicsModel, PathDynamicsCoefficients, TwoLinkParams};
use crate::error::{Error, Result};
use crate::metrics::{JointMetrics, TrajectoryResult};
use crate::path::{fit_spline, sample_path, Parameterization, PathGrid, PathSamples};
use crate::planner::PlanOutcome;
use crate::slp::{IterationRecord, SlpStatus, StartKind};

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Path input: either waypoints to spline, or raw samples on an explicit grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    /// Joint count.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoints: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameterization: Option<Parameterization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dq: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ddq: Option<Vec<Vec<f64>>>,
}

impl PathSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text, "path file")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_file(path)?)
    }

    /// Grid and samples. `n_segments` applies to waypoint paths only; raw
    /// samples keep their own grid.
    pub fn discretize(&self, n_segments: usize) -> Result<(PathGrid, PathSamples)> {
        let (grid, samples) = match (&self.waypoints, &self.s, &self.q, &self.dq, &self.ddq) {
            (Some(waypoints), None, None, None, None) => {
                let path = fit_spline(waypoints, self.parameterization.unwrap_or_default())?;
                let grid = PathGrid::uniform(n_segments)?;
                let samples = sample_path(&path, &grid);
                (grid, samples)
            }
            (None, Some(s), Some(q), Some(dq), Some(ddq)) => {
                let grid = PathGrid::from_values(s.clone())?;
                let samples = PathSamples::from_raw(q.clone(), dq.clone(), ddq.clone())?;
                if samples.len() != grid.len() {
                    return Err(Error::Dimension(format!(
                        "{} samples for {} grid points",
                        samples.len(),
                        grid.len()
                    )));
                }
                (grid, samples)
            }
            _ => {
                return Err(Error::Parse(
                    "path file needs either \"waypoints\" or all of \"s\", \"q\", \"dq\", \"ddq\"".into(),
                ))
            }
        };
        if samples.dof() != self.n {
            return Err(Error::Dimension(format!(
                "path declares n={} but has {} joints",
                self.n,
                samples.dof()
            )));
        }
        Ok((grid, samples))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Kinematic,
    TwoLink(TwoLinkParams),
    Tabulated {
        m: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        g: Vec<Vec<f64>>,
    },
}

/// Optional planner settings carried in the robot file.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSettings {
    pub n_segments: Option<usize>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    pub trust_region: Option<bool>,
    pub x_start: Option<f64>,
    pub x_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RobotSpec {
    #[serde(flatten)]
    pub model: ModelSpec,
    pub limits: Limits,
    #[serde(default)]
    pub planner: PlannerSettings,
}

impl RobotSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text, "robot file")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_file(path)?)
    }

    pub fn dynamics_model(&self) -> DynamicsModel {
        match &self.model {
            ModelSpec::Kinematic => DynamicsModel::KinematicOnly,
            ModelSpec::TwoLink(params) => DynamicsModel::TwoLinkPlanar(*params),
            ModelSpec::Tabulated { m, c, g } => DynamicsModel::Tabulated(PathDynamicsCoefficients {
                m: m.clone(),
                c: c.clone(),
                g: g.clone(),
            }),
        }
    }
}

/// Shortest round-trip representation; `NaN` and `inf` spelled out.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn trajectory_header(dof: usize, with_tau: bool) -> Vec<String> {
    let mut header: Vec<String> = ["k", "s", "t", "x"].iter().map(|s| s.to_string()).collect();
    for j in 0..dof {
        header.extend([format!("q_{j}"), format!("qd_{j}"), format!("qdd_{j}"), format!("jerk_{j}")]);
        if with_tau {
            header.push(format!("tau_{j}"));
        }
    }
    header
}

pub fn write_trajectory_csv<W: Write>(traj: &TrajectoryResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dof = traj.dof();
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(trajectory_header(dof, traj.tau.is_some())).map_err(csv_err)?;
    for k in 0..traj.x.len() {
        let mut row = vec![k.to_string(), fmt_f64(traj.s[k]), fmt_f64(traj.t[k]), fmt_f64(traj.x[k])];
        for j in 0..dof {
            row.extend([
                fmt_f64(traj.q[k][j]),
                fmt_f64(traj.qd[k][j]),
                fmt_f64(traj.qdd[k][j]),
                fmt_f64(traj.jerk[k][j]),
            ]);
            if let Some(tau) = &traj.tau {
                row.push(fmt_f64(tau[k][j]));
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns of a numeric CSV, by header name.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<CsvTable> {
    let mut r = csv::Reader::from_reader(input);
    let parse_err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    let header: Vec<String> = r.headers().map_err(parse_err)?.iter().map(str::to_string).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(parse_err)?;
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("csv row {}: bad number {field:?}", line + 2)))?;
            columns[i].push(v);
        }
    }
    Ok(CsvTable { header, columns })
}

/// Solver section of the metrics document.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverSummary {
    pub status: String,
    pub iterations: usize,
    pub start: Option<String>,
    pub jerk_limited: bool,
    pub warm_start_duration_s: Option<f64>,
    pub used_fallback: bool,
    pub accepted_costs: Vec<f64>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsDocument {
    pub duration_s: Option<f64>,
    /// Cost `f = T / 2`.
    pub f: Option<f64>,
    pub per_joint: Vec<JointMetrics>,
    pub solver: SolverSummary,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl MetricsDocument {
    pub fn from_outcome(outcome: &PlanOutcome, jerk_limited: bool) -> Self {
        let report = &outcome.report;
        let feasible = report.status != SlpStatus::Infeasible;
        Self {
            duration_s: outcome.metrics.as_ref().map(|m| m.duration_s),
            f: if feasible { finite(report.final_f) } else { None },
            per_joint: outcome
                .metrics
                .as_ref()
                .map(|m| m.per_joint.clone())
                .unwrap_or_default(),
            solver: SolverSummary {
                status: report.status.to_string(),
                iterations: report.iterations,
                start: report.start.map(|s| {
                    match s {
                        StartKind::Nominal => "nominal",
                        StartKind::Scaled => "scaled",
                        StartKind::Restored => "restored",
                    }
                    .to_string()
                }),
                jerk_limited,
                warm_start_duration_s: finite(outcome.warm_start_duration),
                used_fallback: outcome.used_fallback,
                accepted_costs: report.accepted_costs.clone(),
                diagnostic: report.diagnostic.clone(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}

/// One JSON object per line.
pub fn iteration_log(records: &[IterationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}
