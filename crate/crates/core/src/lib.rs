//! Jerk-limited time-optimal path parameterization.
//!
//! Given a joint-space path `q(s)`, the planner finds the squared path speed
//! `x_k = ṡ²` at each grid point that minimizes traversal time subject to
//! velocity, acceleration, torque and jerk limits. Jerk makes the problem
//! nonconvex; it is solved as a sequence of linear programs whose jerk rows
//! use a conservative linearization, so every iterate is truly feasible.
//!
//! ```
//! use totp3::{plan, Limits, PathGrid, PlanningProblem, SlpConfig, DynamicsModel};
//! use totp3::path::{fit_spline, sample_path, Parameterization};
//!
//! let path = fit_spline(&[vec![0.0], vec![1.0]], Parameterization::Uniform).unwrap();
//! let grid = PathGrid::uniform(10).unwrap();
//! let samples = sample_path(&path, &grid);
//! let limits = Limits {
//!     qd_max: vec![1.0],
//!     qdd_max: vec![1.0],
//!     jerk_max: Some(vec![5.0]),
//!     tau_max: None,
//! };
//! let problem =
//!     PlanningProblem::from_model(grid, samples, &DynamicsModel::KinematicOnly, limits).unwrap();
//! let outcome = plan(&problem, &SlpConfig::default()).unwrap();
//! assert!(outcome.duration() > 2.0);
//! ```

// NaN must fail these checks, and dense kernels read best indexed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constraints;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod lp;
pub mod metrics;
pub mod oracle;
pub mod path;
pub mod planner;
pub mod problem;
pub mod slp;
pub mod verify;
pub mod warmstart;

pub use constraints::{Limits, RowKind};
pub use dynamics::{DynamicsModel, PathDynamicsCoefficients, TwoLinkParams};
pub use error::{Error, Infeasibility, Result};
pub use lp::{solve_lp, LpOptions, LpProblem, LpSolution, LpSolver, LpStatus};
pub use metrics::{compute_metrics, trajectory, JointMetrics, TrajectoryMetrics, TrajectoryResult};
pub use oracle::{dp_optimal_time, DpConfig, DpSolution};
pub use path::{JointPath, Parameterization, PathGrid, PathSamples};
pub use planner::{plan, PlanOutcome};
pub use problem::PlanningProblem;
pub use slp::{
    slp_solve, true_cost, SlpConfig, SlpOutcome, SlpReport, SlpStatus, SquaredSpeedProfile,
    TrustRegion,
};
pub use verify::{verify_profile, ViolationReport, VERIFY_TOL};
pub use warmstart::{warm_start, WarmStart};
