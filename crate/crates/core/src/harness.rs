//! Numerical checks of the small-`eps` behaviour of the jump generators.
//!
//! All generator integrals are one-dimensional: a move changes a single
//! coordinate `i`, so with `z = y_i - x_i`
//!
//! ```text
//! (1/eps) int z^k M(x, y) dy = (1/eps) (1/d) int z^k s(i, x, x_i + z) phi_eps(z) dz.
//! ```
//!
//! Integrals are taken in the standardised variable `u = z / sqrt(eps)` on
//! `[-12, 12]`, split at the kinks of `s` (sign changes of `dU`) and at the
//! support edges of test functions. The mass outside the window is bounded
//! by the tilted envelope `exp(theta |z|) phi_eps(z)` and added to the
//! reported error.

use std::io::{self, Write};

use rand::Rng;
use statrs::function::gamma::gamma;

use crate::ensemble::ObservedEnsemble;
use crate::error::{Error, Result};
use crate::kernel::{log_acceptance, GeneratorKind};
use crate::par::map_grid;
use crate::potential::TargetPotential;
use crate::proposal::{CoordinateMove, ProposalSpec};
use crate::quadrature::{integrate, integrate_with, Estimate, QuadOptions};
use crate::rng::{domain, stream_rng};
use crate::stats::{ks_critical_95, ks_scale, ks_statistic, loglog_slope, Moments};
use crate::acceptance::{s_hat_m2, s_m2, taylor_remainder_g};

/// Half-width of the integration window in units of `sqrt(eps)`.
pub const WINDOW: f64 = 12.0;

/// Required absolute accuracy of each generator moment.
pub const MOMENT_TOL: f64 = 1e-10;

const SCAN_POINTS: usize = 480;

fn std_phi(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `int_{|u| > WINDOW} |u|^k exp(a |u|) phi(u) du` for `a >= 0`.
fn envelope_tail(k: i32, a: f64) -> Result<f64> {
    let hi = WINDOW.max(a) + 40.0;
    let est = integrate(
        |u| u.powi(k) * (a * u - 0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        WINDOW,
        hi,
        QuadOptions::absolute(1e-300),
    )
    .or_else(|_| integrate(|u| u.powi(k) * (a * u).exp() * std_phi(u), WINDOW, hi, QuadOptions::default()))?;
    Ok(2.0 * (est.value + est.error))
}

/// Points in `(-WINDOW, WINDOW)` (standardised units) where `dU` along
/// coordinate `i` changes sign, plus the origin.
fn kinks(target: &TargetPotential, x: &[f64], i: usize, sd: f64) -> Result<Vec<f64>> {
    let du = |u: f64| target.delta(x, CoordinateMove::by(x, i, sd * u));
    let mut out = vec![0.0];
    let step = 2.0 * WINDOW / SCAN_POINTS as f64;
    let mut prev_u = -WINDOW;
    let mut prev = du(prev_u)?;
    for j in 1..=SCAN_POINTS {
        let u = -WINDOW + j as f64 * step;
        let cur = du(u)?;
        if prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0) && !(prev_u < 0.0 && u > 0.0) {
            let (mut a, mut b, mut fa) = (prev_u, u, prev);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = du(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev_u = u;
        prev = cur;
    }
    Ok(out)
}

fn acceptance(kind: GeneratorKind, target: &TargetPotential, x: &[f64], i: usize, z: f64) -> Result<f64> {
    Ok(log_acceptance(kind, target, x, CoordinateMove::by(x, i, z))?.exp())
}

/// `sup s / exp(theta |z|)` is at most one for every kind; this is the
/// standardised tilt `theta sqrt(eps)` of the envelope.
fn envelope_rate(target: &TargetPotential, kind: GeneratorKind, sd: f64) -> f64 {
    match kind {
        GeneratorKind::M1 => 0.0,
        _ => target.tilt() * sd,
    }
}

/// `(1/eps) int (y_i - x_i)^k M^eps(x, y) dy` by adaptive quadrature.
pub fn generator_moment(
    kind: GeneratorKind,
    target: &TargetPotential,
    proposal: &ProposalSpec,
    x: &[f64],
    i: usize,
    k: u32,
    opts: QuadOptions,
) -> Result<Estimate> {
    kind.validate()?;
    if !(1..=3).contains(&k) {
        return Err(Error::usage(format!("moment order must be 1, 2 or 3, got {k}")));
    }
    if proposal.dim() != target.dim() {
        return Err(Error::usage("proposal and target dimensions differ"));
    }
    if i >= target.dim() {
        return Err(Error::usage(format!("coordinate {i} out of range")));
    }
    let eps = proposal.epsilon();
    let sd = eps.sqrt();
    let d = target.dim() as f64;
    // (1/eps) (1/d) int z^k s phi_eps dz = eps^{k/2 - 1} / d int u^k s phi du
    let scale = eps.powf(0.5 * k as f64 - 1.0) / d;
    let inner = QuadOptions {
        abs_tol: opts.abs_tol / scale,
        ..opts
    };
    let breaks = kinks(target, x, i, sd)?;
    let est = integrate_with(
        |u| Ok(u.powi(k as i32) * acceptance(kind, target, x, i, sd * u)? * std_phi(u)),
        -WINDOW,
        WINDOW,
        &breaks,
        inner,
    )?;
    let tail = envelope_tail(k as i32, envelope_rate(target, kind, sd))?;
    Ok(Estimate {
        value: scale * est.value,
        error: scale * (est.error + tail),
    })
}

/// Limits of the first three scaled moments: `-dU/dx_i / (2 T d)`, `1/d`, `0`.
pub fn moment_limits(target: &TargetPotential, x: &[f64], i: usize) -> Result<[f64; 3]> {
    let d = target.dim() as f64;
    let g = target.partial(x, i)?;
    Ok([-g / (2.0 * target.temperature() * d), 1.0 / d, 0.0])
}

/// Scaled generator moments over a grid of points and of `eps` values.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub kind: GeneratorKind,
    pub coord: usize,
    pub epsilons: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// `values[e][p][k - 1]` for `epsilons[e]`, `points[p]`.
    pub values: Vec<Vec<[Estimate; 3]>>,
    /// `limits[p][k - 1]`.
    pub limits: Vec<[f64; 3]>,
    /// Largest `|value - limit|` over the points, per `eps` and order.
    pub sup_errors: Vec<[f64; 3]>,
    /// Log-log slope of `sup_errors` against `eps`, per order.
    pub slopes: [f64; 3],
}

impl MomentReport {
    pub fn max_quadrature_error(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .flatten()
            .map(|e| e.error)
            .fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<ReportRow> {
        let names = ["drift", "volatility", "third"];
        let mut rows = Vec::new();
        for (e, &eps) in self.epsilons.iter().enumerate() {
            for (p, point) in self.points.iter().enumerate() {
                for (k, name) in names.iter().enumerate() {
                    rows.push(ReportRow {
                        epsilon: eps,
                        quantity: format!("{name}[{}]@{}", self.coord, fmt_point(point)),
                        value: self.values[e][p][k].value,
                        error: self.values[e][p][k].error,
                        target: self.limits[p][k],
                        slope: self.slopes[k],
                    });
                }
            }
        }
        rows
    }
}

fn fmt_point(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";")
}

pub fn moment_report(
    kind: GeneratorKind,
    target: &TargetPotential,
    points: &[Vec<f64>],
    coord: usize,
    epsilons: &[f64],
    opts: QuadOptions,
) -> Result<MomentReport> {
    if points.is_empty() || epsilons.is_empty() {
        return Err(Error::usage("moment report needs at least one point and one eps"));
    }
    let limits = points
        .iter()
        .map(|x| moment_limits(target, x, coord))
        .collect::<Result<Vec<_>>>()?;
    let values = map_grid(epsilons.len(), |e| {
        let proposal = ProposalSpec::new(target.dim(), epsilons[e])?;
        points
            .iter()
            .map(|x| {
                let m = |k| generator_moment(kind, target, &proposal, x, coord, k, opts);
                Ok([m(1)?, m(2)?, m(3)?])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let sup_errors: Vec<[f64; 3]> = values
        .iter()
        .map(|row| {
            let mut s = [0.0_f64; 3];
            for (p, v) in row.iter().enumerate() {
                for k in 0..3 {
                    s[k] = s[k].max((v[k].value - limits[p][k]).abs());
                }
            }
            s
        })
        .collect();
    let slopes = [0, 1, 2].map(|k| loglog_slope(epsilons, &sup_errors.iter().map(|s| s[k]).collect::<Vec<_>>()));
    Ok(MomentReport {
        kind,
        coord,
        epsilons: epsilons.to_vec(),
        points: points.to_vec(),
        values,
        limits,
        sup_errors,
        slopes,
    })
}

/// `E|Z|^k` for `Z ~ N(0, eps)`.
pub fn gaussian_abs_moment(k: u32, eps: f64) -> f64 {
    let k = k as f64;
    (2.0 * eps).powf(0.5 * k) * gamma(0.5 * (k + 1.0)) / std::f64::consts::PI.sqrt()
}

/// `E[exp(t |Z|) |Z|^k]` for `Z ~ N(0, eps)`.
pub fn folded_normal_moment(t: f64, k: u32, eps: f64) -> Result<Estimate> {
    if k > 4 {
        return Err(Error::usage(format!("folded moment order must be at most 4, got {k}")));
    }
    if !(t.is_finite() && eps.is_finite() && eps > 0.0) {
        return Err(Error::usage("folded moment needs finite t and eps > 0"));
    }
    // 2 eps^{k/2} int_0^inf u^k exp(t sqrt(eps) u) phi(u) du: the tilted
    // Gaussian is centred at a = t sqrt(eps).
    let a = t * eps.sqrt();
    let hi = a.max(0.0) + 40.0;
    let centre = a.clamp(0.0, hi);
    let est = integrate_with(
        |u| Ok(u.powi(k as i32) * (a * u - 0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()),
        0.0,
        hi,
        &[centre],
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-13,
            max_intervals: 4000,
        },
    )?;
    let scale = 2.0 * eps.powf(0.5 * k as f64);
    Ok(Estimate {
        value: scale * est.value,
        error: scale * est.error,
    })
}

/// Outcome of the `|s_M2 - ŝ_M2| <= c1 exp((M/T)|D|) D^2` check.
#[derive(Debug, Clone, PartialEq)]
pub struct SBoundReport {
    /// `1.5 * max |g / T| / D^2` over the fitting sample.
    pub c1: f64,
    pub scales: Vec<f64>,
    /// Largest `|s - ŝ| / (exp((M/T)|D|) D^2)` per displacement scale.
    pub max_ratio: Vec<f64>,
}

impl SBoundReport {
    pub fn passed(&self) -> bool {
        self.max_ratio.iter().all(|&r| r.is_finite() && r <= self.c1)
    }

    pub fn to_rows(&self) -> Vec<ReportRow> {
        self.scales
            .iter()
            .zip(&self.max_ratio)
            .map(|(&s, &r)| ReportRow {
                epsilon: s,
                quantity: "s_bound_ratio".into(),
                value: r,
                error: 0.0,
                target: self.c1,
                slope: f64::NAN,
            })
            .collect()
    }
}

/// Pairs used to fit `c1` before checking.
pub const C1_FIT_PAIRS: usize = 10_000;

/// Box used to draw base points: the target's domain clipped to `[-3, 3]`.
fn sample_region(target: &TargetPotential) -> (f64, f64) {
    match target.domain() {
        Some(b) => (b.lo.max(-3.0), b.hi.min(3.0)),
        None => (-3.0, 3.0),
    }
}

fn random_pair<R: Rng + ?Sized>(target: &TargetPotential, rng: &mut R, delta: f64) -> (Vec<f64>, CoordinateMove) {
    let (lo, hi) = sample_region(target);
    let x: Vec<f64> = (0..target.dim()).map(|_| rng.random_range(lo..hi)).collect();
    let i = rng.random_range(0..target.dim());
    let signed = if rng.random::<bool>() { delta } else { -delta };
    let mv = CoordinateMove::by(&x, i, signed);
    (x, mv)
}

pub fn s_bound_check(target: &TargetPotential, n_pairs: usize, scales: &[f64], seed: u64) -> Result<SBoundReport> {
    if scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(Error::usage("displacement scales must be positive"));
    }
    let max_scale = scales.iter().copied().fold(0.0, f64::max);
    let mut rng = stream_rng(seed, domain::AUX, 0);
    let mut worst_g = 0.0_f64;
    for _ in 0..C1_FIT_PAIRS {
        let delta = max_scale * (1.0 - rng.random::<f64>());
        let (x, mv) = random_pair(target, &mut rng, delta);
        let g = taylor_remainder_g(target, &x, mv)?;
        worst_g = worst_g.max(g.abs() / (delta * delta));
    }
    let c1 = 1.5 * worst_g;
    let tilt = target.tilt();
    let max_ratio = scales
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            let mut rng = stream_rng(seed, domain::AUX, 1 + j as u64);
            let mut worst = 0.0_f64;
            for _ in 0..n_pairs {
                let (x, mv) = random_pair(target, &mut rng, delta);
                let gap = (s_m2(target, &x, mv)? - s_hat_m2(target, &x, mv)?).abs();
                worst = worst.max(gap / ((tilt * delta).exp() * delta * delta));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SBoundReport {
        c1,
        scales: scales.to_vec(),
        max_ratio,
    })
}

/// One-dimensional factor of a test function, localised by the C^2 bump
/// `b(u) = (1 - u^2)^3` on `|u| < 1`, `u = (v - centre) / radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BumpShape {
    /// `b(u)`
    Bump,
    /// `v b(u)`
    Linear,
    /// `v^2 b(u)`
    Quadratic,
}

/// `f(x) = prod_j h(x_j)` with the same factor `h` in every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub shape: BumpShape,
    pub centre: f64,
    pub radius: f64,
}

impl TestFunction {
    pub fn new(shape: BumpShape, centre: f64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0 && centre.is_finite()) {
            return Err(Error::config("test function needs a finite centre and a positive radius"));
        }
        Ok(Self { shape, centre, radius })
    }

    /// The three shapes on a common support.
    pub fn library(centre: f64, radius: f64) -> Result<Vec<Self>> {
        [BumpShape::Bump, BumpShape::Linear, BumpShape::Quadratic]
            .into_iter()
            .map(|s| Self::new(s, centre, radius))
            .collect()
    }

    /// `(h, h', h'')` at `v`.
    pub fn factor(&self, v: f64) -> (f64, f64, f64) {
        let r = self.radius;
        let u = (v - self.centre) / r;
        if u.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let w = 1.0 - u * u;
        let b = w * w * w;
        let b1 = -6.0 * u * w * w / r;
        let b2 = (-6.0 * w * w + 24.0 * u * u * w) / (r * r);
        let (p, p1, p2) = match self.shape {
            BumpShape::Bump => (1.0, 0.0, 0.0),
            BumpShape::Linear => (v, 1.0, 0.0),
            BumpShape::Quadratic => (v * v, 2.0 * v, 2.0),
        };
        (p * b, p1 * b + p * b1, p2 * b + 2.0 * p1 * b1 + p * b2)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.factor(v).0).product()
    }

    /// Bound on `|h|`.
    fn factor_sup(&self) -> f64 {
        let far = self.centre.abs() + self.radius;
        match self.shape {
            BumpShape::Bump => 1.0,
            BumpShape::Linear => far,
            BumpShape::Quadratic => far * far,
        }
    }

    /// Edges of the support of `h`.
    fn edges(&self) -> [f64; 2] {
        [self.centre - self.radius, self.centre + self.radius]
    }
}

/// `(1/eps) M^eps f(x) = (1/eps) sum_i (1/d) int (f(y) - f(x)) s phi_eps dz`.
pub fn scaled_generator_action(
    kind: GeneratorKind,
    target: &TargetPotential,
    proposal: &ProposalSpec,
    f: &TestFunction,
    x: &[f64],
    opts: QuadOptions,
) -> Result<Estimate> {
    kind.validate()?;
    if proposal.dim() != target.dim() {
        return Err(Error::usage("proposal and target dimensions differ"));
    }
    let eps = proposal.epsilon();
    let sd = eps.sqrt();
    let d = target.dim();
    let scale = 1.0 / (eps * d as f64);
    let inner = QuadOptions {
        abs_tol: opts.abs_tol / (scale * d as f64),
        ..opts
    };
    let factors: Vec<f64> = x.iter().map(|&v| f.factor(v).0).collect();
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for i in 0..d {
        let others: f64 = factors.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product();
        if others == 0.0 {
            continue;
        }
        let hx = factors[i];
        let mut breaks = kinks(target, x, i, sd)?;
        breaks.extend(f.edges().iter().map(|e| (e - x[i]) / sd));
        let est = integrate_with(
            |u| {
                let df = f.factor(x[i] + sd * u).0 - hx;
                if df == 0.0 {
                    return Ok(0.0);
                }
                Ok(df * acceptance(kind, target, x, i, sd * u)? * std_phi(u))
            },
            -WINDOW,
            WINDOW,
            &breaks,
            inner,
        )?;
        let tail = 2.0 * f.factor_sup() * envelope_tail(0, envelope_rate(target, kind, sd))?;
        total.value += scale * others * est.value;
        total.error += scale * others.abs() * (est.error + tail);
    }
    Ok(total)
}

/// Generator of the limiting diffusion,
/// `Gf = (1/d) sum_i [-dU/dx_i / (2T) df/dx_i + (1/2) d^2f/dx_i^2]`.
pub fn limit_generator(target: &TargetPotential, f: &TestFunction, x: &[f64]) -> Result<f64> {
    let d = target.dim();
    let parts: Vec<(f64, f64, f64)> = x.iter().map(|&v| f.factor(v)).collect();
    let mut acc = 0.0;
    for i in 0..d {
        let others: f64 = parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.0).product();
        let (_, h1, h2) = parts[i];
        let g = target.partial(x, i)?;
        acc += others * (-g / (2.0 * target.temperature()) * h1 + 0.5 * h2);
    }
    Ok(acc / d as f64)
}

/// Sup over a point grid of `|(1/eps) M^eps f - Gf|`, per `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub kind: GeneratorKind,
    pub function: TestFunction,
    pub epsilons: Vec<f64>,
    pub sup_gap: Vec<f64>,
    pub max_quadrature_error: Vec<f64>,
    pub slope: f64,
}

impl ProbeReport {
    pub fn to_rows(&self) -> Vec<ReportRow> {
        self.epsilons
            .iter()
            .enumerate()
            .map(|(e, &eps)| ReportRow {
                epsilon: eps,
                quantity: format!("generator_gap[{:?}]", self.function.shape).to_lowercase(),
                value: self.sup_gap[e],
                error: self.max_quadrature_error[e],
                target: 0.0,
                slope: self.slope,
            })
            .collect()
    }
}

pub fn generator_convergence_probe(
    kind: GeneratorKind,
    target: &TargetPotential,
    f: &TestFunction,
    points: &[Vec<f64>],
    epsilons: &[f64],
    opts: QuadOptions,
) -> Result<ProbeReport> {
    if points.is_empty() || epsilons.is_empty() {
        return Err(Error::usage("generator probe needs at least one point and one eps"));
    }
    let limits = points
        .iter()
        .map(|x| limit_generator(target, f, x))
        .collect::<Result<Vec<_>>>()?;
    let per_eps = map_grid(epsilons.len(), |e| {
        let proposal = ProposalSpec::new(target.dim(), epsilons[e])?;
        let mut gap = 0.0_f64;
        let mut err = 0.0_f64;
        for (x, &lim) in points.iter().zip(&limits) {
            let est = scaled_generator_action(kind, target, &proposal, f, x, opts)?;
            gap = gap.max((est.value - lim).abs());
            err = err.max(est.error);
        }
        Ok((gap, err))
    })?;
    let sup_gap: Vec<f64> = per_eps.iter().map(|p| p.0).collect();
    Ok(ProbeReport {
        kind,
        function: *f,
        slope: loglog_slope(epsilons, &sup_gap),
        epsilons: epsilons.to_vec(),
        max_quadrature_error: per_eps.iter().map(|p| p.1).collect(),
        sup_gap,
    })
}

/// Discrepancy between two ensembles at one observation time and coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalGap {
    pub time: f64,
    pub coord: usize,
    pub ks: f64,
    pub ks_critical: f64,
    pub mean_gap: f64,
    pub mean_se: f64,
    pub var_gap: f64,
    pub var_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub n_paths: usize,
    pub gaps: Vec<MarginalGap>,
}

impl ConvergenceReport {
    pub fn max_ks(&self) -> f64 {
        self.gaps.iter().map(|g| g.ks).fold(0.0, f64::max)
    }

    /// Fluctuation scale `sqrt(2 / n)` of the KS statistic.
    pub fn ks_noise(&self) -> f64 {
        ks_scale(self.n_paths, self.n_paths)
    }

    pub fn gap_at(&self, time: f64, coord: usize) -> Option<&MarginalGap> {
        self.gaps.iter().find(|g| g.time == time && g.coord == coord)
    }
}

/// Per-time, per-coordinate KS distance and moment gaps.
pub fn compare_ensembles(jump: &ObservedEnsemble, reference: &ObservedEnsemble) -> Result<ConvergenceReport> {
    if jump.obs_grid() != reference.obs_grid() {
        return Err(Error::usage("ensembles have different observation grids"));
    }
    if jump.dim() != reference.dim() {
        return Err(Error::usage(format!(
            "ensemble dimensions differ: {} vs {}",
            jump.dim(),
            reference.dim()
        )));
    }
    if jump.n_paths() != reference.n_paths() {
        return Err(Error::usage(format!(
            "ensemble path counts differ: {} vs {}",
            jump.n_paths(),
            reference.n_paths()
        )));
    }
    let n = jump.n_paths();
    let mut gaps = Vec::with_capacity(jump.obs_grid().len() * jump.dim());
    for (g, &time) in jump.obs_grid().iter().enumerate() {
        for coord in 0..jump.dim() {
            let a = jump.marginal(g, coord);
            let b = reference.marginal(g, coord);
            let (ma, mb) = (Moments::from_slice(&a), Moments::from_slice(&b));
            gaps.push(MarginalGap {
                time,
                coord,
                ks: ks_statistic(&a, &b),
                ks_critical: ks_critical_95(n, n),
                mean_gap: ma.mean() - mb.mean(),
                mean_se: ma.std_error().hypot(mb.std_error()),
                var_gap: ma.variance() - mb.variance(),
                var_se: ma.variance_std_error().hypot(mb.variance_std_error()),
            });
        }
    }
    Ok(ConvergenceReport { n_paths: n, gaps })
}

/// Whether KS distances shrink as `eps` shrinks, allowing each step to
/// rise by at most `factor` times the KS noise scale. Input pairs are
/// `(eps, ks)` in any order.
pub fn ks_decreases_with_epsilon(points: &[(f64, f64)], noise: f64, factor: f64) -> bool {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    sorted.windows(2).all(|w| w[1].1 <= w[0].1 + factor * noise)
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub epsilon: f64,
    pub quantity: String,
    pub value: f64,
    pub error: f64,
    pub target: f64,
    pub slope: f64,
}

pub const REPORT_HEADER: &str = "epsilon,quantity,value,error,target,slope";

pub fn write_report_csv<W: Write>(rows: &[ReportRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{},{:e},{:e},{:e},{:e}",
            r.epsilon, r.quantity, r.value, r.error, r.target, r.slope
        )?;
    }
    Ok(())
}
