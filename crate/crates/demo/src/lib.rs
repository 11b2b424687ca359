//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations, each returning a flat `Float64Array`:
//!
//! * [`paths`]: rescaled jump paths next to Euler-Maruyama paths of the
//!   limiting diffusion, for a 1-d target;
//! * [`moment_errors`]: sup-over-grid drift and volatility errors of the
//!   scaled generator moments against their limits, per `eps`;
//! * [`geometry`]: `d_mu(Q, mix(alpha))` along `alpha` and `d_mu(Q, R)` for
//!   random reversible `R`.
//!
//! The plain-Rust functions return [`mhjump::Result`]; the `js_*` wrappers
//! convert errors into JavaScript exceptions.

use mhjump::finite::{d_mu, make_m1, make_m2, mix, random_chain, random_reversible};
use mhjump::harness::moment_report;
use mhjump::langevin::{simulate_langevin, SdeConfig, SdeVariant};
use mhjump::quadrature::QuadOptions;
use mhjump::rng::{domain, stream_rng};
use mhjump::simulate::JumpSimulator;
use mhjump::{Builtin, Error, GeneratorKind, ProposalSpec, Result, TargetPotential};
use wasm_bindgen::prelude::*;

/// `eps` grid for [`moment_errors`].
pub const EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Number of `alpha` values in [`geometry`], evenly spaced on `[0, 1]`.
pub const ALPHA_STEPS: usize = 21;

fn target(potential: &str, dim: usize) -> Result<TargetPotential> {
    let params: &[f64] = if potential == "double_well" { &[2.0] } else { &[] };
    TargetPotential::builtin(Builtin::from_name(potential, params)?, dim, 1.0)
}

/// `n_paths` jump paths, then `n_paths` Langevin paths, each sampled at
/// `t = t_end * k / points` for `k = 0..=points`.
#[allow(clippy::too_many_arguments)]
pub fn paths(
    kind: &str,
    potential: &str,
    epsilon: f64,
    x0: f64,
    t_end: f64,
    points: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if points == 0 || n_paths == 0 || t_end.is_nan() || t_end <= 0.0 {
        return Err(Error::Usage("need points >= 1, n_paths >= 1 and t_end > 0".into()));
    }
    let kind: GeneratorKind = kind.parse()?;
    let target = target(potential, 1)?;
    let proposal = ProposalSpec::new(1, epsilon)?;
    let sim = JumpSimulator::new(kind, &target, &proposal)?;
    let grid: Vec<f64> = (1..=points).map(|k| t_end * k as f64 / points as f64).collect();
    let mut out = Vec::with_capacity(2 * n_paths * (points + 1));
    for p in 0..n_paths {
        let mut rng = stream_rng(seed, domain::JUMP, p as u64);
        let path = sim.simulate_path(&[x0], t_end / epsilon, &mut rng)?;
        out.push(x0);
        out.extend(grid.iter().map(|t| path.state_at(t / epsilon)[0]));
    }
    let dt = (t_end / points as f64 / 20.0).min(1e-3);
    let reference = simulate_langevin(&target, &[x0], &grid, n_paths, SdeConfig::new(dt, SdeVariant::Rescaled)?, seed)?;
    for p in 0..n_paths {
        out.push(x0);
        out.extend((0..points).map(|g| reference.state(p, g)[0]));
    }
    Ok(out)
}

/// Rows `[eps, drift error, volatility error]` for each of [`EPSILONS`],
/// sup over `xs` of the gap between scaled moments and their limits.
pub fn moment_errors(kind: &str, potential: &str, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::Usage("need at least one point".into()));
    }
    let kind: GeneratorKind = kind.parse()?;
    let target = target(potential, 1)?;
    let points: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let opts = QuadOptions {
        abs_tol: 1e-11,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let r = moment_report(kind, &target, &points, 0, &EPSILONS, opts)?;
    Ok(EPSILONS
        .iter()
        .zip(&r.sup_errors)
        .flat_map(|(&eps, s)| [eps, s[0], s[1]])
        .collect())
}

/// `[d_mu(Q, M1), d_mu(Q, mix(alpha_j)) for j < ALPHA_STEPS, d_mu(Q, R_k) for k < draws]`
/// for a random chain on `states` states.
pub fn geometry(states: usize, draws: usize, seed: u64) -> Result<Vec<f64>> {
    if states < 2 {
        return Err(Error::Usage("need at least two states".into()));
    }
    let chain = random_chain(states, &mut stream_rng(seed, domain::AUX, 0));
    let q = chain.rates();
    let (m1, m2) = (make_m1(&chain), make_m2(&chain));
    let mut out = vec![d_mu(&chain, q, &m1)?];
    for j in 0..ALPHA_STEPS {
        let alpha = j as f64 / (ALPHA_STEPS - 1) as f64;
        out.push(d_mu(&chain, q, &mix(&m1, &m2, alpha)?)?);
    }
    let mut rng = stream_rng(seed, domain::AUX, 1);
    for _ in 0..draws {
        out.push(d_mu(&chain, q, &random_reversible(&chain, &mut rng))?);
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = paths)]
#[allow(clippy::too_many_arguments)]
pub fn js_paths(
    kind: &str,
    potential: &str,
    epsilon: f64,
    x0: f64,
    t_end: f64,
    points: usize,
    n_paths: usize,
    seed: u32,
) -> std::result::Result<Vec<f64>, JsError> {
    js(paths(kind, potential, epsilon, x0, t_end, points, n_paths, seed as u64))
}

#[wasm_bindgen(js_name = momentErrors)]
pub fn js_moment_errors(kind: &str, potential: &str, xs: &[f64]) -> std::result::Result<Vec<f64>, JsError> {
    js(moment_errors(kind, potential, xs))
}

#[wasm_bindgen(js_name = geometry)]
pub fn js_geometry(states: usize, draws: usize, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(geometry(states, draws, seed as u64))
}
