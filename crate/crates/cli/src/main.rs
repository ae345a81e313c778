//! `totp3` command-line front end.
//!
//! Exit codes: 0 converged, 1 error or malformed input, 2 infeasible,
//! 3 iteration limit reached.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use totp3::io::{fmt_f64, iteration_log, write_trajectory_csv, MetricsDocument, PathSpec, RobotSpec};
use totp3::path::DEFAULT_SEGMENTS;
use totp3::{
    dp_optimal_time, plan, DpConfig, Error, JointMetrics, PlanOutcome, PlanningProblem, SlpConfig,
    SlpStatus,
};

#[derive(Parser)]
#[command(name = "totp3", version, about = "Jerk-limited time-optimal path parameterization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Args)]
struct Inputs {
    /// Path JSON (waypoints or raw samples).
    path_file: PathBuf,
    /// Robot JSON (model, limits, optional planner settings).
    robot_file: PathBuf,
    #[arg(long)]
    n_segments: Option<usize>,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum)]
    trust_region: Option<Switch>,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one trajectory and write its CSV, metrics and iteration log.
    Plan {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        solver: SolverFlags,
        /// Defaults to on when the robot file sets `jerk_max`.
        #[arg(long, value_enum)]
        jerk_limit: Option<Switch>,
        #[arg(long, default_value = "totp3")]
        out_prefix: PathBuf,
    },
    /// Plan once without jerk limits and once per sweep value.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        solver: SolverFlags,
        /// Jerk limits in rad/s³, applied to every joint.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        jerk_sweep: Vec<f64>,
        #[arg(long, default_value = "totp3")]
        out_prefix: PathBuf,
    },
    /// Lattice dynamic program on a small instance.
    Oracle {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 200)]
        levels: usize,
        #[arg(long, value_enum, default_value = "on")]
        jerk: Switch,
        #[arg(long, default_value = "totp3")]
        out_prefix: PathBuf,
    },
}

fn status_code(status: SlpStatus) -> u8 {
    match status {
        SlpStatus::Converged => 0,
        SlpStatus::Infeasible => 2,
        SlpStatus::MaxIters => 3,
    }
}

fn error_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) => 2,
        _ => 1,
    }
}

struct Setup {
    problem: PlanningProblem,
    config: SlpConfig,
}

fn setup(inputs: &Inputs, solver: Option<&SolverFlags>) -> totp3::Result<Setup> {
    let robot = RobotSpec::load(&inputs.robot_file)?;
    let path = PathSpec::load(&inputs.path_file)?;
    let settings = &robot.planner;
    let n_segments = inputs.n_segments.or(settings.n_segments).unwrap_or(DEFAULT_SEGMENTS);
    let (grid, samples) = path.discretize(n_segments)?;
    let mut problem =
        PlanningProblem::from_model(grid, samples, &robot.dynamics_model(), robot.limits.clone())?;
    if settings.x_start.is_some() || settings.x_end.is_some() {
        problem = problem.with_boundary(settings.x_start.unwrap_or(0.0), settings.x_end.unwrap_or(0.0))?;
    }

    let mut config = SlpConfig::default();
    let flags = solver.map_or((None, None, None), |f| (f.epsilon, f.max_iters, f.trust_region));
    if let Some(eps) = flags.0.or(settings.epsilon) {
        config.epsilon = eps;
    }
    if let Some(iters) = flags.1.or(settings.max_iters) {
        config.max_iters = iters;
    }
    if let Some(on) = flags.2.map(Switch::is_on).or(settings.trust_region) {
        config.trust_region.enabled = on;
    }
    config.validate()?;
    Ok(Setup { problem, config })
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(ext);
    PathBuf::from(name)
}

fn write_file(path: &Path, contents: &[u8]) -> totp3::Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn cmd_plan(
    inputs: &Inputs,
    solver: &SolverFlags,
    jerk_limit: Option<Switch>,
    prefix: &Path,
) -> totp3::Result<u8> {
    let Setup { mut problem, config } = setup(inputs, Some(solver))?;
    match jerk_limit {
        Some(Switch::Off) => problem = problem.without_jerk(),
        Some(Switch::On) if !problem.jerk_limited() => {
            return Err(Error::Invalid("--jerk-limit on needs jerk_max in the robot file".into()));
        }
        _ => {}
    }
    let outcome = plan(&problem, &config)?;

    if let Some(traj) = &outcome.trajectory {
        let mut csv = Vec::new();
        write_trajectory_csv(traj, &mut csv)?;
        write_file(&with_extension(prefix, ".traj.csv"), &csv)?;
    }
    let doc = MetricsDocument::from_outcome(&outcome, problem.jerk_limited());
    write_file(&with_extension(prefix, ".metrics.json"), doc.to_json().as_bytes())?;
    write_file(&with_extension(prefix, ".iters.log"), iteration_log(&outcome.report.records).as_bytes())?;

    println!(
        "{} T={} iterations={}",
        outcome.status(),
        fmt_f64(outcome.duration()),
        outcome.report.iterations
    );
    if let Some(why) = &outcome.report.diagnostic {
        eprintln!("{why}");
    }
    Ok(status_code(outcome.status()))
}

#[derive(serde::Serialize)]
struct CompareRow {
    /// `None` for the run without jerk limits.
    jerk_limit: Option<f64>,
    status: String,
    iterations: usize,
    duration_s: Option<f64>,
    /// Duration over the baseline duration.
    ratio: Option<f64>,
    per_joint: Vec<JointMetrics>,
}

fn compare_row(jerk_limit: Option<f64>, outcome: &PlanOutcome, baseline: Option<f64>) -> CompareRow {
    let duration = outcome.metrics.as_ref().map(|m| m.duration_s);
    CompareRow {
        jerk_limit,
        status: outcome.status().to_string(),
        iterations: outcome.report.iterations,
        duration_s: duration,
        ratio: duration.zip(baseline).map(|(d, b)| d / b),
        per_joint: outcome.metrics.as_ref().map(|m| m.per_joint.clone()).unwrap_or_default(),
    }
}

fn compare_csv(rows: &[CompareRow], dof: usize) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut header = vec!["jerk_limit".to_string(), "status".into(), "iterations".into(), "duration_s".into(), "ratio".into()];
    for j in 0..dof {
        header.push(format!("rms_torque_{j}"));
        header.push(format!("peak_power_{j}"));
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut fields = vec![
            opt(row.jerk_limit),
            row.status.clone(),
            row.iterations.to_string(),
            opt(row.duration_s),
            opt(row.ratio),
        ];
        for j in 0..dof {
            let m = row.per_joint.get(j);
            fields.push(opt(m.and_then(|m| m.rms_torque)));
            fields.push(opt(m.and_then(|m| m.peak_power)));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn cmd_compare(inputs: &Inputs, solver: &SolverFlags, sweep: &[f64], prefix: &Path) -> totp3::Result<u8> {
    let Setup { problem, config } = setup(inputs, Some(solver))?;
    let dof = problem.dof();
    let mut problems = vec![problem.without_jerk()];
    for &v in sweep {
        let mut limits = problem.limits().clone();
        limits.jerk_max = Some(vec![v; dof]);
        problems.push(problem.with_limits(limits)?);
    }

    let outcomes: Vec<totp3::Result<PlanOutcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = problems.iter().map(|p| s.spawn(|| plan(p, &config))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("planning thread panicked"))
            .collect()
    });
    let outcomes = outcomes.into_iter().collect::<totp3::Result<Vec<_>>>()?;

    let baseline = outcomes[0].metrics.as_ref().map(|m| m.duration_s);
    let labels = std::iter::once(None).chain(sweep.iter().copied().map(Some));
    let rows: Vec<CompareRow> = labels
        .zip(&outcomes)
        .map(|(limit, outcome)| compare_row(limit, outcome, baseline))
        .collect();

    let mut json = serde_json::to_string_pretty(&rows).expect("rows serialize");
    json.push('\n');
    write_file(&with_extension(prefix, ".compare.json"), json.as_bytes())?;
    write_file(&with_extension(prefix, ".compare.csv"), compare_csv(&rows, dof).as_bytes())?;

    for row in &rows {
        println!(
            "jerk_limit={} {} T={} ratio={}",
            row.jerk_limit.map_or("none".into(), fmt_f64),
            row.status,
            row.duration_s.map_or("-".into(), fmt_f64),
            row.ratio.map_or("-".into(), fmt_f64)
        );
    }
    Ok(outcomes.iter().map(|o| status_code(o.status())).max().unwrap_or(0))
}

fn cmd_oracle(inputs: &Inputs, levels: usize, jerk: Switch, prefix: &Path) -> totp3::Result<u8> {
    let Setup { problem, .. } = setup(inputs, None)?;
    let config = DpConfig {
        levels,
        jerk: jerk.is_on(),
        ..DpConfig::default()
    };
    let sol = dp_optimal_time(&problem, &config)?;
    let mut csv = String::from("k,s,x\n");
    for (k, (s, x)) in problem.grid().s().iter().zip(&sol.x).enumerate() {
        csv.push_str(&format!("{k},{},{}\n", fmt_f64(*s), fmt_f64(*x)));
    }
    write_file(&with_extension(prefix, ".dp.csv"), csv.as_bytes())?;
    println!("T*={}", fmt_f64(sol.duration));
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TOTP3_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan {
            inputs,
            solver,
            jerk_limit,
            out_prefix,
        } => cmd_plan(inputs, solver, *jerk_limit, out_prefix),
        Command::Compare {
            inputs,
            solver,
            jerk_sweep,
            out_prefix,
        } => cmd_compare(inputs, solver, jerk_sweep, out_prefix),
        Command::Oracle {
            inputs,
            levels,
            jerk,
            out_prefix,
        } => cmd_oracle(inputs, *levels, *jerk, out_prefix),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
