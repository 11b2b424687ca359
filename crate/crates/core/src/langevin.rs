//! Euler-Maruyama reference for the limiting diffusion
//!
//! ```text
//! dX = -grad U(X) / (2 T d) dt + d^{-1/2} dW,
//! ```
//!
//! and for the standard Langevin diffusion `dY = -grad U(Y) dtau + sqrt(2T) dW`
//! read through the clock `tau(t) = t / (2 T d)`. The two agree in law.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensemble::{EnsembleSource, ObservedEnsemble};
use crate::error::{Error, Result};
use crate::par::map_paths;
use crate::potential::TargetPotential;
use crate::rng::{domain, stream_rng};
use crate::simulate::check_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SdeVariant {
    /// The time-rescaled diffusion directly.
    #[default]
    Rescaled,
    /// Standard Langevin observed at `tau(t) = t / (2 T d)`.
    StandardWithClock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub dt: f64,
    pub variant: SdeVariant,
}

impl SdeConfig {
    pub fn new(dt: f64, variant: SdeVariant) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config(format!("time step must be > 0, got {dt}")));
        }
        Ok(Self { dt, variant })
    }

    /// `dt = 1e-3 min(1, 2 T d)`.
    pub fn default_for(target: &TargetPotential) -> Self {
        let scale = (2.0 * target.temperature() * target.dim() as f64).min(1.0);
        Self {
            dt: 1e-3 * scale,
            variant: SdeVariant::Rescaled,
        }
    }
}

/// One step of the rescaled diffusion: `x - grad U(x) dt / (2 T d) + increment / sqrt(d)`,
/// with `increment ~ N(0, dt I)` supplied by the caller.
pub fn em_step(target: &TargetPotential, x: &[f64], dt: f64, increment: &[f64]) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    let (drift, noise) = rescaled_coefficients(target, dt);
    step_in_place(target, &mut y, &mut vec![0.0; x.len()], drift, noise, increment, 0)?;
    Ok(y)
}

/// One step of the standard diffusion over clock time `dtau`:
/// `x - grad U(x) dtau + sqrt(2T) increment`, `increment ~ N(0, dtau I)`.
pub fn em_step_standard(target: &TargetPotential, x: &[f64], dtau: f64, increment: &[f64]) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    let (drift, noise) = standard_coefficients(target, dtau);
    step_in_place(target, &mut y, &mut vec![0.0; x.len()], drift, noise, increment, 0)?;
    Ok(y)
}

fn finish(x: &[f64], step: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration { step })
    }
}

fn fill_gradient(target: &TargetPotential, x: &[f64], grad: &mut [f64], step: usize) -> Result<()> {
    for (i, g) in grad.iter_mut().enumerate() {
        *g = target.partial(x, i).map_err(|_| Error::Integration { step })?;
    }
    Ok(())
}

/// `x += -drift * grad U(x) + noise * inc`, in place.
fn step_in_place(
    target: &TargetPotential,
    x: &mut [f64],
    grad: &mut [f64],
    drift: f64,
    noise: f64,
    inc: &[f64],
    step: usize,
) -> Result<()> {
    fill_gradient(target, x, grad, step)?;
    for ((xi, g), w) in x.iter_mut().zip(grad.iter()).zip(inc) {
        *xi += -g * drift + noise * w;
    }
    finish(x, step)
}

fn rescaled_coefficients(target: &TargetPotential, dt: f64) -> (f64, f64) {
    let d = target.dim() as f64;
    (dt / (2.0 * target.temperature() * d), d.sqrt().recip())
}

fn standard_coefficients(target: &TargetPotential, dtau: f64) -> (f64, f64) {
    (dtau, (2.0 * target.temperature()).sqrt())
}

/// Euler-Maruyama ensemble observed at `obs_grid` (macroscopic time). Grid
/// points are snapped to the nearest multiple of `dt`.
pub fn simulate_langevin(
    target: &TargetPotential,
    x0: &[f64],
    obs_grid: &[f64],
    n_paths: usize,
    config: SdeConfig,
    master_seed: u64,
) -> Result<ObservedEnsemble> {
    check_grid(obs_grid)?;
    if n_paths == 0 {
        return Err(Error::usage("need at least one path"));
    }
    if x0.len() != target.dim() {
        return Err(Error::usage("initial state dimension mismatch"));
    }
    let d = target.dim();
    let dt = config.dt;
    let steps: Vec<usize> = obs_grid.iter().map(|t| (t / dt).round() as usize).collect();
    let dtau = dt / (2.0 * target.temperature() * d as f64);
    let ((drift, noise), sd) = match config.variant {
        SdeVariant::Rescaled => (rescaled_coefficients(target, dt), dt.sqrt()),
        SdeVariant::StandardWithClock => (standard_coefficients(target, dtau), dtau.sqrt()),
    };
    let rows = map_paths(n_paths, |p| {
        let mut rng = stream_rng(master_seed, domain::LANGEVIN, p as u64);
        let mut out = vec![0.0; steps.len() * d];
        let mut x = x0.to_vec();
        let mut inc = vec![0.0; d];
        let mut grad = vec![0.0; d];
        let mut done = 0usize;
        for (k, &target_step) in steps.iter().enumerate() {
            while done < target_step {
                inc.iter_mut().for_each(|w| *w = sd * rng.sample::<f64, _>(StandardNormal));
                step_in_place(target, &mut x, &mut grad, drift, noise, &inc, done)?;
                done += 1;
            }
            out[k * d..(k + 1) * d].copy_from_slice(&x);
        }
        Ok(out)
    })?;
    Ok(ObservedEnsemble::new(
        EnsembleSource::Langevin {
            dt,
            variant: config.variant,
        },
        obs_grid.to_vec(),
        d,
        n_paths,
        rows.concat(),
        master_seed,
    ))
}
