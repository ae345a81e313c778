//! Joint quantities recovered from a squared-speed profile `x_k = ṡ_k²`.
//!
//! These are the formulas every constraint row is built from. Verification,
//! the lattice oracle and trajectory export all call into this module so
//! there is a single definition of velocity, acceleration, torque and jerk
//! on the grid. The `window_*` forms take the few profile values they need
//! explicitly; the slice forms index into a whole profile.

use crate::dynamics::PathDynamicsCoefficients;
use crate::path::PathSamples;

/// Forward-difference path acceleration `s̈_k = (x_{k+1} − x_k) / (2Δ_k)`.
#[inline]
pub fn path_acceleration(x: &[f64], deltas: &[f64], k: usize) -> f64 {
    (x[k + 1] - x[k]) / (2.0 * deltas[k])
}

/// Backward-difference path acceleration at `k ≥ 1`.
#[inline]
pub fn path_acceleration_backward(x: &[f64], deltas: &[f64], k: usize) -> f64 {
    (x[k] - x[k - 1]) / (2.0 * deltas[k - 1])
}

/// `q̇ = q′ ṡ`.
#[inline]
pub fn joint_velocity(samples: &PathSamples, x: &[f64], k: usize, joint: usize) -> f64 {
    samples.dq()[k][joint] * x[k].max(0.0).sqrt()
}

/// `q̈_k = q″_k x_k + q′_k s̈_k` with `s̈_k` from `(x_k, x_{k+1})`.
#[inline]
pub fn window_acceleration(
    samples: &PathSamples,
    deltas: &[f64],
    k: usize,
    joint: usize,
    xa: f64,
    xb: f64,
) -> f64 {
    let sdd = (xb - xa) / (2.0 * deltas[k]);
    samples.ddq()[k][joint] * xa + samples.dq()[k][joint] * sdd
}

/// Forward-form joint acceleration (`k < N`).
#[inline]
pub fn joint_acceleration(
    samples: &PathSamples,
    x: &[f64],
    deltas: &[f64],
    k: usize,
    joint: usize,
) -> f64 {
    window_acceleration(samples, deltas, k, joint, x[k], x[k + 1])
}

/// `τ_k = m_k s̈_k + c_k x_k + g_k` with `s̈_k` from `(x_k, x_{k+1})`.
#[inline]
pub fn window_torque(
    coeffs: &PathDynamicsCoefficients,
    deltas: &[f64],
    k: usize,
    joint: usize,
    xa: f64,
    xb: f64,
) -> f64 {
    let sdd = (xb - xa) / (2.0 * deltas[k]);
    coeffs.m[k][joint] * sdd + coeffs.c[k][joint] * xa + coeffs.g[k][joint]
}

/// Forward-form joint torque (`k < N`).
#[inline]
pub fn joint_torque(
    coeffs: &PathDynamicsCoefficients,
    x: &[f64],
    deltas: &[f64],
    k: usize,
    joint: usize,
) -> f64 {
    window_torque(coeffs, deltas, k, joint, x[k], x[k + 1])
}

/// Time to traverse a segment of length `delta` at constant path acceleration.
#[inline]
pub fn segment_time(delta: f64, xa: f64, xb: f64) -> f64 {
    2.0 * delta / (xa.sqrt() + xb.sqrt())
}

/// `½(Δt_k + Δt_{k+1})` for the window `(x_k, x_{k+1}, x_{k+2})`.
///
/// Infinite when an adjacent pair of speeds is zero.
#[inline]
pub fn window_time_base(window: [f64; 3], d0: f64, d1: f64) -> f64 {
    let [a, b, c] = window.map(|v| v.max(0.0).sqrt());
    d1 / (c + b) + d0 / (b + a)
}

#[inline]
pub fn jerk_time_base(x: &[f64], deltas: &[f64], k: usize) -> f64 {
    window_time_base([x[k], x[k + 1], x[k + 2]], deltas[k], deltas[k + 1])
}

/// Jerk as the change in acceleration between adjacent grid points,
/// `(q̈_{k+1} − q̈_k) / ½(Δt_k + Δt_{k+1})`, for `k ≤ N − 2`.
///
/// An infinitely slow window (zero speed on an adjacent pair) has zero jerk.
pub fn window_jerk(
    samples: &PathSamples,
    deltas: &[f64],
    k: usize,
    joint: usize,
    window: [f64; 3],
) -> f64 {
    let numerator = window_acceleration(samples, deltas, k + 1, joint, window[1], window[2])
        - window_acceleration(samples, deltas, k, joint, window[0], window[1]);
    let base = window_time_base(window, deltas[k], deltas[k + 1]);
    if base.is_infinite() {
        0.0
    } else {
        numerator / base
    }
}

pub fn joint_jerk(samples: &PathSamples, x: &[f64], deltas: &[f64], k: usize, joint: usize) -> f64 {
    window_jerk(samples, deltas, k, joint, [x[k], x[k + 1], x[k + 2]])
}
