//! Acceptance ratios of the two Metropolis-Hastings generators for a
//! single-coordinate move `x -> y`.
//!
//! With `dU = U(y) - U(x)`:
//!
//! * `s_M1 = exp(-(dU)_+ / T)`, in `(0, 1]`;
//! * `s_M2 = exp((-dU)_+ / T)`, in `[1, inf)`;
//! * `ŝ_M2 = exp(((x_i - y_i) dU/dx_i(x) / T)_+)`, the linearised `s_M2`;
//! * `g / T = (U(x) - U(y) - dU/dx_i(x) (x_i - y_i)) / T`.
//!
//! Everything is formed in log space and exponentiated last.

use crate::error::Result;
use crate::potential::TargetPotential;
use crate::proposal::CoordinateMove;

fn pos(v: f64) -> f64 {
    v.max(0.0)
}

/// `log(mu(y) / mu(x)) = -(U(y) - U(x)) / T`.
pub fn log_density_ratio(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    Ok(-target.delta(x, mv)? / target.temperature())
}

pub fn log_s_m1(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    Ok(-pos(target.delta(x, mv)?) / target.temperature())
}

pub fn log_s_m2(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    Ok(pos(-target.delta(x, mv)?) / target.temperature())
}

pub fn log_s_hat_m2(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    let g = target.partial(x, mv.coord)?;
    Ok(pos(-mv.displacement(x) * g / target.temperature()))
}

pub fn s_m1(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    Ok(log_s_m1(target, x, mv)?.exp())
}

pub fn s_m2(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    Ok(log_s_m2(target, x, mv)?.exp())
}

pub fn s_hat_m2(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    Ok(log_s_hat_m2(target, x, mv)?.exp())
}

/// First-order Taylor remainder of `U / T` along the move.
pub fn taylor_remainder_g(target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    let du = target.delta(x, mv)?;
    let g = target.partial(x, mv.coord)?;
    Ok((-du + g * mv.displacement(x)) / target.temperature())
}
