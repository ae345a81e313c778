//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{corpus, instance, Family, Instance};
use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use totp3::constraints::linearize_h;
use totp3::io::{iteration_log, write_trajectory_csv, MetricsDocument};
use totp3::path::{fit_spline, sample_path, Parameterization};
use totp3::*;

const CORPUS_PER_FAMILY: usize = 7;
const CORPUS_SEGMENTS: usize = 30;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Time base written out directly from its definition.
fn h_reference(x: [f64; 3], d: [f64; 2]) -> f64 {
    d[1] / (x[2].sqrt() + x[1].sqrt()) + d[0] / (x[1].sqrt() + x[0].sqrt())
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for i in 0..10_000 {
        // Alternate uniform and log-uniform draws to cover both ends of the box.
        let draw = |rng: &mut ChaCha8Rng| {
            if i % 2 == 0 {
                rng.random_range(1e-6..1e3)
            } else {
                log_uniform(rng, 1e-6, 1e3)
            }
        };
        let d = [draw(&mut rng), draw(&mut rng)];
        let nominal = [draw(&mut rng), draw(&mut rng), draw(&mut rng)];
        let x = [draw(&mut rng), draw(&mut rng), draw(&mut rng)];
        let lin = linearize_h(nominal, d).expect("positive nominal");
        let gap = lin.eval(x) - h_reference(x, d);
        worst = worst.max(gap);
        if gap > 1e-12 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures == 0 && elapsed < Duration::from_secs(1),
        format!("10000 triples, {failures} above h + 1e-12, worst gap {worst:.3e}, {elapsed:?}"),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut min_eig = f64::INFINITY;
    let mut worst_grad = 0.0f64;
    for _ in 0..1000 {
        let d = [rng.random_range(0.02..0.5), rng.random_range(0.02..0.5)];
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.1..10.0));
        let grad = |p: [f64; 3]| linearize_h(p, d).expect("positive point").slopes;

        let g = grad(x);
        for i in 0..3 {
            let e = 1e-6 * x[i];
            let mut hi = x;
            let mut lo = x;
            hi[i] += e;
            lo[i] -= e;
            let fd = (h_reference(hi, d) - h_reference(lo, d)) / (2.0 * e);
            worst_grad = worst_grad.max((fd - g[i]).abs() / g[i].abs().max(1e-12));
        }

        // Central differences of the gradient with one Richardson step.
        let column = |i: usize, e: f64| {
            let mut hi = x;
            let mut lo = x;
            hi[i] += e;
            lo[i] -= e;
            let (gh, gl) = (grad(hi), grad(lo));
            [0, 1, 2].map(|r| (gh[r] - gl[r]) / (2.0 * e))
        };
        let mut hess = Matrix3::zeros();
        for i in 0..3 {
            let e = 1e-3 * x[i];
            let (c1, c2) = (column(i, e), column(i, e / 2.0));
            for r in 0..3 {
                hess[(r, i)] = (4.0 * c2[r] - c1[r]) / 3.0;
            }
        }
        let sym = (hess + hess.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym).eigenvalues.min();
        min_eig = min_eig.min(eig);
    }
    let elapsed = start.elapsed();
    verdict(
        min_eig >= -1e-8 && worst_grad <= 1e-6 && elapsed < Duration::from_secs(5),
        format!("1000 points, min eigenvalue {min_eig:.3e}, worst gradient rel err {worst_grad:.3e}, {elapsed:?}"),
    )
}

fn criterion_3(insts: &[Instance]) -> Verdict {
    let config = SlpConfig {
        record_iterates: true,
        ..SlpConfig::default()
    };
    let mut checked = 0;
    let mut bad = Vec::new();
    for inst in insts {
        let out = plan(&inst.problem, &config).expect("plan");
        for x in &out.report.iterates {
            checked += 1;
            let report = verify_profile(&inst.problem, x, VERIFY_TOL).expect("verify");
            if !report.is_feasible() {
                bad.push(inst.name.clone());
            }
        }
    }
    verdict(
        bad.is_empty() && insts.len() >= 20,
        format!("{} instances, {checked} accepted iterates, {} violating {:?}", insts.len(), bad.len(), bad),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    for seed in 0..10u64 {
        let inst = instance(Family::KinematicSingle, 2000 + seed, 8);
        // Tightened so the jerk rows bind on every instance.
        let limits = inst.problem.limits().with_jerk_scaled(0.25);
        let problem = inst.problem.with_limits(limits).expect("limits");
        let out = plan(&problem, &SlpConfig::default()).expect("plan");
        let t = out.duration();
        let on = dp_optimal_time(&problem, &DpConfig { levels: 200, jerk: true, floor_ratio: 1e-4 }).expect("dp");
        let off = dp_optimal_time(&problem, &DpConfig { levels: 200, jerk: false, floor_ratio: 1e-4 }).expect("dp");
        let ratio = t / on.duration;
        worst_ratio = worst_ratio.max(ratio);
        println!(
            "    {:<22} T_slp={t:.6} T_dp={:.6} ratio={ratio:.4} T_dp_off={:.6}",
            inst.name, on.duration, off.duration
        );
        if t > 1.02 * on.duration || t < off.duration - 1e-9 {
            failures.push(inst.name);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!("10 instances N=8 L=200, worst T_slp/T_dp {worst_ratio:.4}, failing {failures:?}, {elapsed:?}"),
    )
}

fn criterion_5(insts: &[Instance]) -> Verdict {
    let mut worst = 0.0f64;
    for inst in insts {
        let mut limits = inst.problem.limits().clone();
        limits.jerk_max = Some(vec![1e12; inst.problem.dof()]);
        let problem = inst.problem.with_limits(limits).expect("limits");
        let out = plan(&problem, &SlpConfig::default()).expect("plan");
        let rel = (out.duration() - out.second_order_duration).abs() / out.second_order_duration;
        worst = worst.max(rel);
    }
    verdict(worst <= 1e-3, format!("{} instances, worst relative gap {worst:.3e}", insts.len()))
}

fn criterion_6(insts: &[Instance]) -> Verdict {
    let mut failures = Vec::new();
    for inst in insts {
        let durations: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&f| {
                let problem = inst.problem.with_limits(inst.problem.limits().with_jerk_scaled(f)).expect("limits");
                plan(&problem, &SlpConfig::default()).expect("plan").duration()
            })
            .collect();
        if durations.windows(2).any(|w| w[1] < w[0]) {
            failures.push(format!("{} {:?}", inst.name, durations));
        }
    }
    verdict(failures.is_empty(), format!("{} instances, non-monotone {failures:?}", insts.len()))
}

fn criterion_7(insts: &[Instance]) -> Verdict {
    let mut failures = Vec::new();
    let mut max_iters = 0;
    for inst in insts {
        let out = plan(&inst.problem, &SlpConfig::default()).expect("plan");
        max_iters = max_iters.max(out.report.iterations);
        let monotone = out.report.accepted_costs.windows(2).all(|w| w[1] <= w[0]);
        if out.status() != SlpStatus::Converged || out.report.iterations > 100 || !monotone {
            failures.push(inst.name.clone());
        }
    }
    verdict(
        failures.is_empty(),
        format!("{} instances, most iterations {max_iters}, failing {failures:?}", insts.len()),
    )
}

/// Tightest jerk scale from a fixed ladder whose duration stays within 10%
/// of the unconstrained one.
fn scaled_within_ten_percent(problem: &PlanningProblem, free: f64) -> (f64, PlanOutcome) {
    let mut best = None;
    for factor in [8.0, 4.0, 2.0, 1.0, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12] {
        let p = problem.with_limits(problem.limits().with_jerk_scaled(factor)).expect("limits");
        let out = plan(&p, &SlpConfig::default()).expect("plan");
        if out.duration() > 1.10 * free {
            break;
        }
        best = Some((factor, out));
    }
    best.expect("even relaxed limits inflate the duration by more than 10%")
}

fn criterion_8() -> Verdict {
    let mut wins = 0;
    let mut pairs = 0;
    println!("    instance               scale inflation joint peak_jerk    peak_free");
    for i in 0..10u64 {
        let inst = instance(Family::TwoLink, 3000 + i, CORPUS_SEGMENTS);
        let free = plan(&inst.problem.without_jerk(), &SlpConfig::default()).expect("plan");
        let (factor, limited) = scaled_within_ten_percent(&inst.problem, free.duration());
        let inflation = limited.duration() / free.duration() - 1.0;
        let (pl, pf) = (limited.metrics.expect("metrics"), free.metrics.expect("metrics"));
        for j in 0..inst.problem.dof() {
            let a = pl.per_joint[j].peak_power.expect("dynamic model");
            let b = pf.per_joint[j].peak_power.expect("dynamic model");
            pairs += 1;
            if a <= b {
                wins += 1;
            }
            println!(
                "    {:<22} {factor:<5} {:>8.3}% {j:>5} {a:<12.5} {b:<12.5}",
                inst.name,
                100.0 * inflation
            );
        }
    }
    verdict(2 * wins > pairs, format!("peak power not above the unconstrained value on {wins}/{pairs} pairs"))
}

fn seven_joint_problem(n_segments: usize) -> PlanningProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..7).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let path = fit_spline(&pts, Parameterization::ChordLength).expect("spline");
    let grid = PathGrid::uniform(n_segments).expect("grid");
    let samples = sample_path(&path, &grid);
    let limits = Limits {
        qd_max: vec![1.7, 1.7, 1.7, 2.2, 2.6, 2.6, 3.1],
        qdd_max: vec![8.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
        jerk_max: Some(vec![60.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0]),
        tau_max: None,
    };
    PlanningProblem::from_model(grid, samples, &DynamicsModel::KinematicOnly, limits).expect("problem")
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let problem = seven_joint_problem(50);
    let out = plan(&problem, &SlpConfig::default()).expect("plan");
    let elapsed = start.elapsed();
    verdict(
        out.status() == SlpStatus::Converged && elapsed < Duration::from_secs(1),
        format!("N=50 n=7 {} in {} iterations, T={:.4}, {elapsed:?}", out.status(), out.report.iterations, out.duration()),
    )
}

fn artifacts(problem: &PlanningProblem) -> Vec<u8> {
    let out = plan(problem, &SlpConfig::default()).expect("plan");
    let mut bytes = Vec::new();
    write_trajectory_csv(out.trajectory.as_ref().expect("trajectory"), &mut bytes).expect("csv");
    bytes.extend(MetricsDocument::from_outcome(&out, problem.jerk_limited()).to_json().into_bytes());
    bytes.extend(iteration_log(&out.report.records).into_bytes());
    bytes
}

fn criterion_10(insts: &[Instance]) -> Verdict {
    let mut differing = Vec::new();
    for inst in insts.iter().step_by(3) {
        let first = artifacts(&inst.problem);
        let again: Vec<Vec<u8>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..2).map(|_| s.spawn(|| artifacts(&inst.problem))).collect();
            handles.into_iter().map(|h| h.join().expect("thread")).collect()
        });
        if again.iter().any(|b| *b != first) {
            differing.push(inst.name.clone());
        }
    }
    verdict(differing.is_empty(), format!("3 runs per instance, differing {differing:?}"))
}

type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn main() {
    let insts = corpus(CORPUS_PER_FAMILY, CORPUS_SEGMENTS);
    let criteria: Vec<(&str, Check)> = vec![
        ("conservative under-estimator", Box::new(criterion_1)),
        ("convexity of the time base", Box::new(criterion_2)),
        ("every accepted iterate truly feasible", Box::new(|| criterion_3(&insts))),
        ("gap to the lattice optimum", Box::new(criterion_4)),
        ("inactive jerk limits", Box::new(|| criterion_5(&insts))),
        ("jerk-limit monotonicity", Box::new(|| criterion_6(&insts))),
        ("convergence", Box::new(|| criterion_7(&insts))),
        ("peak power direction", Box::new(criterion_8)),
        ("performance envelope", Box::new(criterion_9)),
        ("determinism", Box::new(|| criterion_10(&insts))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
