//! Jerk rows and the conservative linearization of their time base.
//!
//! With `x = ṡ²`, the jerk at grid point `k` is
//! `(j⁰_k x_k + j¹_k x_{k+1} + j²_k x_{k+2}) / h_k(x_k, x_{k+1}, x_{k+2})`
//! where `h_k = Δ_{k+1}/(√x_{k+2}+√x_{k+1}) + Δ_k/(√x_{k+1}+√x_k)`.
//! `h_k` is convex on the nonnegative orthant, so its tangent plane at any
//! nominal point bounds it from below. Replacing `h_k` by that plane in
//! `|numerator| ≤ q⃛max h_k` gives linear rows whose feasible set lies inside
//! the true jerk-feasible set.

use crate::error::{Error, Result};
use crate::path::{PathGrid, PathSamples};

/// Numerator coefficients of the jerk at grid point `k`, one entry per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JerkNumerator {
    pub k: usize,
    pub j0: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
}

/// `q̈_{k+1} − q̈_k` expanded in `(x_k, x_{k+1}, x_{k+2})` for one joint.
fn numerator_terms(dq0: f64, ddq0: f64, dq1: f64, ddq1: f64, d0: f64, d1: f64) -> (f64, f64, f64) {
    let (two_d0, two_d1) = (2.0 * d0, 2.0 * d1);
    (
        -ddq0 + dq0 / two_d0,
        ddq1 - dq1 / two_d1 - dq0 / two_d0,
        dq1 / two_d1,
    )
}

pub fn jerk_numerator_coeffs(samples: &PathSamples, grid: &PathGrid) -> Vec<JerkNumerator> {
    let deltas = grid.deltas();
    let n = samples.dof();
    let segments = grid.segments();
    (0..segments.saturating_sub(1))
        .map(|k| {
            let (dq0, ddq0) = (&samples.dq()[k], &samples.ddq()[k]);
            let (dq1, ddq1) = (&samples.dq()[k + 1], &samples.ddq()[k + 1]);
            let mut num = JerkNumerator {
                k,
                j0: Vec::with_capacity(n),
                j1: Vec::with_capacity(n),
                j2: Vec::with_capacity(n),
            };
            for j in 0..n {
                let (j0, j1, j2) =
                    numerator_terms(dq0[j], ddq0[j], dq1[j], ddq1[j], deltas[k], deltas[k + 1]);
                num.j0.push(j0);
                num.j1.push(j1);
                num.j2.push(j2);
            }
            num
        })
        .collect()
}

/// Evaluates `h_k` on a window `(x_k, x_{k+1}, x_{k+2})` with `(Δ_k, Δ_{k+1})`.
pub fn h_eval(window: [f64; 3], deltas: [f64; 2]) -> Result<f64> {
    if window.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Domain(format!("negative squared speed in {window:?}")));
    }
    let [a, b, c] = window.map(f64::sqrt);
    if a + b == 0.0 || b + c == 0.0 {
        return Err(Error::Domain(
            "time base undefined: adjacent squared speeds are both zero".into(),
        ));
    }
    Ok(deltas[1] / (c + b) + deltas[0] / (b + a))
}

/// Affine lower bound `h̄ + h̄⁰ x_k + h̄¹ x_{k+1} + h̄² x_{k+2}` of `h_k`,
/// tangent at the nominal window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JerkLinearization {
    pub offset: f64,
    pub slopes: [f64; 3],
}

impl JerkLinearization {
    pub fn eval(&self, window: [f64; 3]) -> f64 {
        self.offset
            + self.slopes[0] * window[0]
            + self.slopes[1] * window[1]
            + self.slopes[2] * window[2]
    }
}

/// Analytic gradient of `h_k`. Entries flagged in `skip` are left at zero and
/// may be zero in `window`; every other entry must be positive.
fn h_gradient(window: [f64; 3], deltas: [f64; 2], skip: [bool; 3]) -> [f64; 3] {
    let [a, b, c] = window.map(f64::sqrt);
    let left = a + b;
    let right = b + c;
    let mut grad = [0.0; 3];
    if !skip[0] {
        grad[0] = -deltas[0] / (2.0 * a * left * left);
    }
    if !skip[1] {
        grad[1] = -deltas[0] / (2.0 * b * left * left) - deltas[1] / (2.0 * b * right * right);
    }
    if !skip[2] {
        grad[2] = -deltas[1] / (2.0 * c * right * right);
    }
    grad
}

pub fn linearize_h(nominal: [f64; 3], deltas: [f64; 2]) -> Result<JerkLinearization> {
    if nominal.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "linearization point must be strictly positive, got {nominal:?}"
        )));
    }
    linearize_h_partial(nominal, deltas, [false; 3])
}

/// Tangent plane of `h_k` restricted to the coordinates not flagged in
/// `pinned`. Pinned coordinates are fixed constants (rest boundaries at
/// zero, where the full gradient is singular) and get a zero slope.
pub(crate) fn linearize_h_partial(
    nominal: [f64; 3],
    deltas: [f64; 2],
    pinned: [bool; 3],
) -> Result<JerkLinearization> {
    for i in 0..3 {
        if !pinned[i] && !(nominal[i] > 0.0) {
            return Err(Error::Domain(format!(
                "linearization point must be strictly positive, got {nominal:?}"
            )));
        }
    }
    let value = h_eval(nominal, deltas)?;
    let slopes = h_gradient(nominal, deltas, pinned);
    let offset = value - slopes[0] * nominal[0] - slopes[1] * nominal[1] - slopes[2] * nominal[2];
    Ok(JerkLinearization { offset, slopes })
}

/// Linearized jerk rows at grid point `k` for both signs.
///
/// Upper side: `( j − q⃛max h̄ⁱ)·x ≤ q⃛max h̄`; lower side:
/// `(−j − q⃛max h̄ⁱ)·x ≤ q⃛max h̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct JerkBlock {
    pub k: usize,
    pub gamma_upper: [Vec<f64>; 3],
    pub gamma_lower: [Vec<f64>; 3],
    pub eta: Vec<f64>,
    pub linearization: JerkLinearization,
}

/// Builds linearized jerk rows around `nominal` (length `N + 1`).
///
/// Interior nominal values are clamped to `x_floor`. Endpoints are fixed
/// boundary values; a zero endpoint enters the tangent plane as a constant.
pub fn jerk_rows(
    samples: &PathSamples,
    grid: &PathGrid,
    jerk_max: &[f64],
    nominal: &[f64],
    x_floor: f64,
) -> Result<Vec<JerkBlock>> {
    let points = grid.len();
    if nominal.len() != points {
        return Err(Error::Dimension(format!(
            "nominal profile has {} points, grid has {points}",
            nominal.len()
        )));
    }
    let last = points - 1;
    let clamped: Vec<f64> = nominal
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == 0 || i == last { v } else { v.max(x_floor) })
        .collect();
    let deltas = grid.deltas();
    let n = samples.dof();

    jerk_numerator_coeffs(samples, grid)
        .into_iter()
        .map(|num| {
            let k = num.k;
            let window = [clamped[k], clamped[k + 1], clamped[k + 2]];
            let pinned = [
                k == 0 && window[0] == 0.0,
                false,
                k + 2 == last && window[2] == 0.0,
            ];
            let lin = linearize_h_partial(window, [deltas[k], deltas[k + 1]], pinned)?;
            let coeffs = [&num.j0, &num.j1, &num.j2];
            let gamma_upper =
                std::array::from_fn(|i| (0..n).map(|j| coeffs[i][j] - jerk_max[j] * lin.slopes[i]).collect());
            let gamma_lower =
                std::array::from_fn(|i| (0..n).map(|j| -coeffs[i][j] - jerk_max[j] * lin.slopes[i]).collect());
            let eta = (0..n).map(|j| jerk_max[j] * lin.offset).collect();
            Ok(JerkBlock {
                k,
                gamma_upper,
                gamma_lower,
                eta,
                linearization: lin,
            })
        })
        .collect()
}
