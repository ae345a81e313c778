//! Dense linear programs `min cᵀx  s.t.  A x ≤ b,  lb ≤ x ≤ ub`.
//!
//! The built-in solver is a bounded-variable revised simplex working on the
//! inequality form directly: the basis is the square matrix of constraints
//! active at the current vertex (rows of `A` or variable bounds), so its size
//! is the number of variables rather than the number of rows. That suits the
//! planner's programs, which have a few dozen variables and hundreds of rows.
//!
//! Phase 1 minimizes a single artificial slack `t` shared by all rows.
//! Pricing is Dantzig's rule, switching permanently to Bland's rule after a
//! run of degenerate pivots, which guarantees termination.

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    c: Vec<f64>,
    /// Row-major `n_rows × n_cols`.
    a: Vec<f64>,
    b: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
}

impl LpProblem {
    pub fn new(c: Vec<f64>, a: Vec<f64>, b: Vec<f64>, lb: Vec<f64>, ub: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if lb.len() != n || ub.len() != n {
            return Err(Error::Dimension(format!(
                "bounds have lengths {}/{}, cost has {n}",
                lb.len(),
                ub.len()
            )));
        }
        if a.len() != b.len() * n {
            return Err(Error::Dimension(format!(
                "constraint matrix has {} entries, expected {}×{n}",
                a.len(),
                b.len()
            )));
        }
        ensure_finite(&c, "cost")?;
        ensure_finite(&a, "constraint matrix")?;
        ensure_finite(&b, "right-hand side")?;
        for j in 0..n {
            if lb[j].is_nan() || ub[j].is_nan() || lb[j] > ub[j] || lb[j] == f64::INFINITY || ub[j] == f64::NEG_INFINITY {
                return Err(Error::Invalid(format!(
                    "variable {j} has invalid bounds [{}, {}]",
                    lb[j], ub[j]
                )));
            }
        }
        Ok(Self { c, a, b, lb, ub })
    }

    pub fn from_rows(
        c: Vec<f64>,
        rows: &[Vec<f64>],
        b: Vec<f64>,
        lb: Vec<f64>,
        ub: Vec<f64>,
    ) -> Result<Self> {
        let n = c.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Dimension(format!("row {bad} has wrong length")));
        }
        Self::new(c, rows.concat(), b, lb, ub)
    }

    pub fn n_cols(&self) -> usize {
        self.c.len()
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_cols();
        &self.a[i * n..(i + 1) * n]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lb(&self) -> &[f64] {
        &self.lb
    }

    pub fn ub(&self) -> &[f64] {
        &self.ub
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Largest constraint violation with each row scaled to unit ∞-norm.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows() {
            let row = self.row(i);
            let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lhs: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
            let excess = lhs - self.b[i];
            worst = worst.max(if scale > 0.0 { excess / scale } else { excess });
        }
        for j in 0..self.n_cols() {
            worst = worst.max(self.lb[j] - x[j]).max(x[j] - self.ub[j]);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Feasibility tolerance on rows scaled to unit ∞-norm and on bounds.
    pub feas_tol: f64,
    /// Optimality tolerance on multipliers, relative to `‖c‖∞`.
    pub opt_tol: f64,
    pub max_iters: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            max_iters: 50_000,
            bland_after: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Seam for swapping in another LP backend.
pub trait LpSolver {
    fn solve(&self, problem: &LpProblem, options: &LpOptions) -> Result<LpSolution>;
}

/// The built-in active-set revised simplex.
#[derive(Debug, Clone, Copy, Default)]
pub struct RevisedSimplex;

impl LpSolver for RevisedSimplex {
    fn solve(&self, problem: &LpProblem, options: &LpOptions) -> Result<LpSolution> {
        Ok(solve_impl(problem, options))
    }
}

pub fn solve_lp(problem: &LpProblem, options: &LpOptions) -> Result<LpSolution> {
    RevisedSimplex.solve(problem, options)
}

const REFACTOR_EVERY: usize = 64;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cons {
    Row(usize),
    Lower(usize),
    Upper(usize),
    /// Temporary equality fixing a free variable; never re-enters once left.
    Pin(usize),
    /// `t ≥ 0` for the phase-1 slack.
    AuxLower,
}

/// Scaled, presolved copy of the problem.
struct Prepared {
    n: usize,
    rows: Vec<f64>,
    b: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
}

impl Prepared {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }
}

enum Presolve {
    Ready(Prepared),
    Infeasible,
}

fn presolve(p: &LpProblem, tol: f64) -> Presolve {
    let n = p.n_cols();
    let mut lb = p.lb.clone();
    let mut ub = p.ub.clone();
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..p.n_rows() {
        let row = p.row(i);
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            if p.b[i] < -tol {
                return Presolve::Infeasible;
            }
            continue;
        }
        let rhs = p.b[i] / scale;
        let mut nonzeros = row.iter().enumerate().filter(|(_, &v)| v != 0.0);
        let (j, &v) = nonzeros.next().unwrap();
        if nonzeros.next().is_none() {
            // Singleton row: a bound on x_j.
            let bound = rhs / (v / scale);
            if v > 0.0 {
                ub[j] = ub[j].min(bound);
            } else {
                lb[j] = lb[j].max(bound);
            }
            continue;
        }
        rows.extend(row.iter().map(|v| v / scale));
        b.push(rhs);
    }
    for j in 0..n {
        if lb[j] > ub[j] {
            let gap = (lb[j] - ub[j]) / 1f64.max(lb[j].abs().max(ub[j].abs()));
            if gap > tol {
                return Presolve::Infeasible;
            }
            ub[j] = lb[j];
        }
    }
    Presolve::Ready(Prepared { n, rows, b, lb, ub })
}

fn solve_impl(p: &LpProblem, opts: &LpOptions) -> LpSolution {
    let n = p.n_cols();
    let prepared = match presolve(p, opts.feas_tol) {
        Presolve::Ready(prep) => prep,
        Presolve::Infeasible => {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
                iterations: 0,
            }
        }
    };

    let mut engine = Engine::start(&prepared, opts);
    let mut status = LpStatus::Optimal;

    if engine.aux {
        let mut cost = vec![0.0; n + 1];
        cost[n] = 1.0;
        status = engine.run(&cost);
        if status == LpStatus::Optimal {
            if engine.x[n] > opts.feas_tol {
                status = LpStatus::Infeasible;
            } else {
                engine.leave_phase_one();
            }
        }
    }

    if status == LpStatus::Optimal {
        let scale = p.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            let cost: Vec<f64> = p.c.iter().map(|c| c / scale).collect();
            status = engine.run(&cost);
        }
    }

    let mut x = engine.x;
    x.truncate(n);
    if status == LpStatus::Optimal {
        for j in 0..n {
            x[j] = x[j].clamp(prepared.lb[j], prepared.ub[j]);
        }
    }
    LpSolution {
        status,
        objective: p.objective(&x),
        x,
        iterations: engine.iterations,
    }
}

struct Engine<'a> {
    p: &'a Prepared,
    opts: &'a LpOptions,
    aux: bool,
    dim: usize,
    x: Vec<f64>,
    active: Vec<Cons>,
    row_active: Vec<bool>,
    lower_active: Vec<bool>,
    upper_active: Vec<bool>,
    aux_active: bool,
    /// Row-major inverse of the active-constraint matrix; column `r`
    /// belongs to `active[r]`.
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
}

impl<'a> Engine<'a> {
    fn start(p: &'a Prepared, opts: &'a LpOptions) -> Self {
        let n = p.n;
        let m = p.m();
        let mut x = vec![0.0; n];
        let mut active = Vec::with_capacity(n + 1);
        let mut lower_active = vec![false; n];
        let mut upper_active = vec![false; n];
        for j in 0..n {
            if p.lb[j].is_finite() {
                x[j] = p.lb[j];
                active.push(Cons::Lower(j));
                lower_active[j] = true;
            } else if p.ub[j].is_finite() {
                x[j] = p.ub[j];
                active.push(Cons::Upper(j));
                upper_active[j] = true;
            } else {
                active.push(Cons::Pin(j));
            }
        }

        let mut worst = (0.0, None);
        for i in 0..m {
            let lhs: f64 = p.row(i).iter().zip(&x).map(|(a, x)| a * x).sum();
            let excess = lhs - p.b[i];
            if excess > worst.0 {
                worst = (excess, Some(i));
            }
        }
        let mut row_active = vec![false; m];
        let aux = worst.0 > opts.feas_tol;
        if aux {
            let i = worst.1.unwrap();
            x.push(worst.0);
            active.push(Cons::Row(i));
            row_active[i] = true;
        }

        let dim = active.len();
        let mut engine = Self {
            p,
            opts,
            aux,
            dim,
            x,
            active,
            row_active,
            lower_active,
            upper_active,
            aux_active: false,
            binv: Vec::new(),
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
            bland: false,
        };
        engine.refactor(false);
        engine
    }

    fn key(&self, c: Cons) -> usize {
        let (m, n) = (self.p.m(), self.p.n);
        match c {
            Cons::Row(i) => i,
            Cons::Lower(j) => m + 2 * j,
            Cons::Upper(j) => m + 2 * j + 1,
            Cons::AuxLower => m + 2 * n,
            Cons::Pin(j) => m + 2 * n + 1 + j,
        }
    }

    /// `normal(c) · v` in the current dimension.
    fn dot(&self, c: Cons, v: &[f64]) -> f64 {
        let n = self.p.n;
        match c {
            Cons::Row(i) => {
                let s: f64 = self.p.row(i).iter().zip(v).map(|(a, v)| a * v).sum();
                if self.aux {
                    s - v[n]
                } else {
                    s
                }
            }
            Cons::Lower(j) => -v[j],
            Cons::Upper(j) | Cons::Pin(j) => v[j],
            Cons::AuxLower => -v[n],
        }
    }

    fn normal(&self, c: Cons) -> Vec<f64> {
        let n = self.p.n;
        let mut out = vec![0.0; self.dim];
        match c {
            Cons::Row(i) => {
                out[..n].copy_from_slice(self.p.row(i));
                if self.aux {
                    out[n] = -1.0;
                }
            }
            Cons::Lower(j) => out[j] = -1.0,
            Cons::Upper(j) | Cons::Pin(j) => out[j] = 1.0,
            Cons::AuxLower => out[n] = -1.0,
        }
        out
    }

    fn rhs(&self, c: Cons) -> f64 {
        match c {
            Cons::Row(i) => self.p.b[i],
            Cons::Lower(j) => -self.p.lb[j],
            Cons::Upper(j) => self.p.ub[j],
            Cons::Pin(_) | Cons::AuxLower => 0.0,
        }
    }

    fn set_active(&mut self, c: Cons, on: bool) {
        match c {
            Cons::Row(i) => self.row_active[i] = on,
            Cons::Lower(j) => self.lower_active[j] = on,
            Cons::Upper(j) => self.upper_active[j] = on,
            Cons::AuxLower => self.aux_active = on,
            Cons::Pin(_) => {}
        }
    }

    /// Rebuilds `B⁻¹` from scratch; optionally re-solves `B x = rhs` to
    /// remove drift.
    fn refactor(&mut self, resolve_x: bool) {
        let dim = self.dim;
        let mut b = Vec::with_capacity(dim * dim);
        for &c in &self.active {
            b.extend(self.normal(c));
        }
        self.binv = invert(&b, dim).expect("active constraint matrix is nonsingular");
        if resolve_x {
            let rhs: Vec<f64> = self.active.iter().map(|&c| self.rhs(c)).collect();
            for i in 0..dim {
                self.x[i] = (0..dim).map(|r| self.binv[i * dim + r] * rhs[r]).sum();
            }
        }
        self.since_refactor = 0;
    }

    fn run(&mut self, cost: &[f64]) -> LpStatus {
        let dim = self.dim;
        let opt_tol = self.opts.opt_tol;
        let mut col = vec![0.0; dim];
        let mut d = vec![0.0; dim];
        loop {
            if self.iterations >= self.opts.max_iters {
                return LpStatus::IterationLimit;
            }

            // Multipliers: Bᵀ λ = −c.
            let mut leaving: Option<(usize, f64, f64)> = None;
            for r in 0..dim {
                let lambda: f64 = -(0..dim).map(|i| self.binv[i * dim + r] * cost[i]).sum::<f64>();
                let c = self.active[r];
                let (eligible, score, sign) = match c {
                    Cons::Pin(_) => (lambda.abs() > opt_tol, -lambda.abs(), if lambda < 0.0 { -1.0 } else { 1.0 }),
                    _ => (lambda < -opt_tol, lambda, -1.0),
                };
                if !eligible {
                    continue;
                }
                let better = match leaving {
                    None => true,
                    Some((best, best_score, _)) => {
                        if self.bland {
                            self.key(c) < self.key(self.active[best])
                        } else {
                            score < best_score
                        }
                    }
                };
                if better {
                    leaving = Some((r, score, sign));
                }
            }
            let Some((r, _, sign)) = leaving else {
                return LpStatus::Optimal;
            };

            for i in 0..dim {
                col[i] = self.binv[i * dim + r];
            }
            let norm = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..dim {
                d[i] = sign * col[i] / norm;
            }

            // Ratio test over inactive constraints.
            let mut entering: Option<(Cons, f64, f64)> = None;
            let mut consider = |c: Cons, rate: f64, slack: f64, this: &Self| {
                if rate <= PIVOT_TOL {
                    return;
                }
                let step = slack.max(0.0) / rate;
                let better = match entering {
                    None => true,
                    Some((best, best_step, best_rate)) => {
                        let tie = (step - best_step).abs() <= 1e-12 * (1.0 + best_step);
                        if tie {
                            if this.bland {
                                this.key(c) < this.key(best)
                            } else {
                                rate > best_rate
                            }
                        } else {
                            step < best_step
                        }
                    }
                };
                if better {
                    entering = Some((c, step, rate));
                }
            };
            for i in 0..self.p.m() {
                if self.row_active[i] {
                    continue;
                }
                let c = Cons::Row(i);
                let rate = self.dot(c, &d);
                if rate > PIVOT_TOL {
                    let slack = self.p.b[i] - self.dot(c, &self.x);
                    consider(c, rate, slack, self);
                }
            }
            for j in 0..self.p.n {
                if !self.lower_active[j] && self.p.lb[j].is_finite() {
                    consider(Cons::Lower(j), -d[j], self.x[j] - self.p.lb[j], self);
                }
                if !self.upper_active[j] && self.p.ub[j].is_finite() {
                    consider(Cons::Upper(j), d[j], self.p.ub[j] - self.x[j], self);
                }
            }
            if self.aux && !self.aux_active {
                let n = self.p.n;
                consider(Cons::AuxLower, -d[n], self.x[n], self);
            }

            let Some((enter, step, _)) = entering else {
                return LpStatus::Unbounded;
            };

            for i in 0..dim {
                self.x[i] += step * d[i];
            }
            if step <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > self.opts.bland_after {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }

            let old = self.active[r];
            self.set_active(old, false);
            self.set_active(enter, true);
            self.active[r] = enter;
            self.iterations += 1;
            self.since_refactor += 1;

            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor(true);
            } else {
                // Replace row r of B by the entering normal.
                let w: Vec<f64> = (0..dim)
                    .map(|k| {
                        for i in 0..dim {
                            col[i] = self.binv[i * dim + k];
                        }
                        self.dot(enter, &col)
                    })
                    .collect();
                let pivot = w[r];
                for i in 0..dim {
                    self.binv[i * dim + r] /= pivot;
                }
                for k in 0..dim {
                    if k == r || w[k] == 0.0 {
                        continue;
                    }
                    for i in 0..dim {
                        self.binv[i * dim + k] -= w[k] * self.binv[i * dim + r];
                    }
                }
            }
        }
    }

    /// Drops the phase-1 slack, leaving a vertex of the original problem.
    fn leave_phase_one(&mut self) {
        let n = self.p.n;
        let dim = self.dim;
        let drop_pos = match self.active.iter().position(|&c| c == Cons::AuxLower) {
            Some(pos) => pos,
            None => {
                // `t ≥ 0` is tight but not in the basis: remove the active
                // constraint that `−e_t` would replace with the largest pivot.
                (0..dim)
                    .max_by(|&a, &b| {
                        self.binv[n * dim + a]
                            .abs()
                            .total_cmp(&self.binv[n * dim + b].abs())
                    })
                    .unwrap()
            }
        };
        let removed = self.active.remove(drop_pos);
        self.set_active(removed, false);
        self.aux = false;
        self.aux_active = false;
        self.dim = n;
        self.x.truncate(n);
        self.refactor(true);
        self.degenerate_run = 0;
    }
}

/// Gauss–Jordan inverse with partial pivoting of a row-major `n × n` matrix.
fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs()))?;
        let pivot = m[pivot_row * n + col];
        if pivot.abs() < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
                inv.swap(col * n + k, pivot_row * n + k);
            }
        }
        let scale = 1.0 / pivot;
        for k in 0..n {
            m[col * n + k] *= scale;
            inv[col * n + k] *= scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                m[row * n + k] -= f * m[col * n + k];
                inv[row * n + k] -= f * inv[col * n + k];
            }
        }
    }
    Some(inv)
}
