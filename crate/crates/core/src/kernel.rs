//! Rate kernels `M1^eps`, `M2^eps`, their mixtures, and the thinning scheme
//! used to simulate them.
//!
//! Along coordinate `i` the rate density of a move by `z` is
//! `(1/d) s(i, x, x_i + z) phi_eps(z)` with `s = s_M1`, `s_M2`, or
//! `alpha s_M1 + (1 - alpha) s_M2`.
//!
//! # Thinning
//!
//! Write `theta = M / T`. By the mean value theorem `s_M2 <= exp(theta |z|)`,
//! and `s_M1 <= 1`. Candidates are drawn from the coordinate density
//!
//! ```text
//! p(z) = [alpha phi(z) + (1 - alpha) exp(theta |z|) phi(z)] / B,
//! B    = alpha + (1 - alpha) Lambda,   Lambda = E[exp(theta |Z|)],
//! ```
//!
//! at total rate `B`, and accepted with probability
//!
//! ```text
//! a(z) = [alpha s_M1 + (1 - alpha) s_M2] / [alpha + (1 - alpha) exp(theta |z|)] <= 1.
//! ```
//!
//! The accepted rate is `B p(z) a(z) = phi(z) s(z)`, exactly the target
//! kernel. `alpha = 1` is plain Gaussian proposals with `a = s_M1`;
//! `alpha = 0` is the tilted kernel with `a = s_M2 exp(-theta |z|)`.
//!
//! The tilted part `exp(theta |z|) phi_eps(z) / Lambda` splits by sign into
//! two halves. On `z > 0`, `exp(theta z) phi_eps(z) = exp(eps theta^2 / 2)
//! phi_eps(z - eps theta)`, so each half is a normal with mean
//! `± eps theta` truncated to its own side, and
//! `Lambda = 2 exp(eps theta^2 / 2) Phi(theta sqrt(eps))`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::acceptance::{log_s_m1, log_s_m2};
use crate::error::{Error, Result};
use crate::potential::TargetPotential;
use crate::proposal::{CoordinateMove, ProposalSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    M1,
    M2,
    /// `alpha M1 + (1 - alpha) M2`.
    Mix(f64),
}

impl GeneratorKind {
    pub fn mix(alpha: f64) -> Result<Self> {
        let kind = GeneratorKind::Mix(alpha);
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorKind::Mix(a) if !(0.0..=1.0).contains(&a) => {
                Err(Error::config(format!("mixture weight must lie in [0, 1], got {a}")))
            }
            _ => Ok(()),
        }
    }

    /// Weight on `M1`.
    pub fn alpha(&self) -> f64 {
        match *self {
            GeneratorKind::M1 => 1.0,
            GeneratorKind::M2 => 0.0,
            GeneratorKind::Mix(a) => a,
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::M1 => write!(f, "m1"),
            GeneratorKind::M2 => write!(f, "m2"),
            GeneratorKind::Mix(a) => write!(f, "mix:{a}"),
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    /// Accepts `m1`, `m2`, `mix:<alpha>` and `mix(<alpha>)`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "m1" => return Ok(GeneratorKind::M1),
            "m2" => return Ok(GeneratorKind::M2),
            _ => {}
        }
        let alpha = lower
            .strip_prefix("mix:")
            .or_else(|| lower.strip_prefix("mix(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| Error::config(format!("unknown generator kind '{s}'")))?;
        let alpha: f64 = alpha
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad mixture weight in '{s}'")))?;
        GeneratorKind::mix(alpha)
    }
}

/// `log(e^a + e^b)`.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log(alpha e^a + (1 - alpha) e^b)`, exact at the endpoints.
fn log_mix(alpha: f64, a: f64, b: f64) -> f64 {
    if alpha >= 1.0 {
        a
    } else if alpha <= 0.0 {
        b
    } else {
        log_add_exp(alpha.ln() + a, (1.0 - alpha).ln() + b)
    }
}

/// `log s(i, x, y_i)` for the kernel of `kind`.
pub fn log_acceptance(kind: GeneratorKind, target: &TargetPotential, x: &[f64], mv: CoordinateMove) -> Result<f64> {
    match kind {
        GeneratorKind::M1 => log_s_m1(target, x, mv),
        GeneratorKind::M2 => log_s_m2(target, x, mv),
        GeneratorKind::Mix(a) => Ok(log_mix(a, log_s_m1(target, x, mv)?, log_s_m2(target, x, mv)?)),
    }
}

/// `log((1/d) s(i, x, y_i) phi_eps(y_i - x_i))`.
pub fn log_rate_density(
    kind: GeneratorKind,
    target: &TargetPotential,
    proposal: &ProposalSpec,
    x: &[f64],
    mv: CoordinateMove,
) -> Result<f64> {
    let s = log_acceptance(kind, target, x, mv)?;
    Ok(s + proposal.log_coordinate_density(mv.displacement(x)))
}

pub fn rate_density(
    kind: GeneratorKind,
    target: &TargetPotential,
    proposal: &ProposalSpec,
    x: &[f64],
    mv: CoordinateMove,
) -> Result<f64> {
    Ok(log_rate_density(kind, target, proposal, x, mv)?.exp())
}

/// Standard normal CDF.
pub(crate) fn std_normal_cdf(a: f64) -> f64 {
    0.5 * erfc(-a / std::f64::consts::SQRT_2)
}

/// The tilted coordinate density `exp(theta |z|) phi_eps(z) / Lambda(eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominatingKernel {
    epsilon: f64,
    tilt: f64,
    log_total_rate: f64,
    /// Weights of the `z < 0` and `z > 0` halves.
    pub weights: [f64; 2],
    /// Means of the two shifted normals before truncation.
    pub means: [f64; 2],
}

/// Largest `eps theta^2 / 2` accepted before `Lambda` is deemed unusable.
const MAX_TILT_EXPONENT: f64 = 600.0;

impl DominatingKernel {
    pub fn new(epsilon: f64, tilt: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::config(format!("kernel variance must be > 0, got {epsilon}")));
        }
        if !(tilt.is_finite() && tilt >= 0.0) {
            return Err(Error::config(format!("kernel tilt must be finite and >= 0, got {tilt}")));
        }
        let exponent = 0.5 * epsilon * tilt * tilt;
        if exponent > MAX_TILT_EXPONENT {
            return Err(Error::config(format!(
                "dominating rate exp(eps theta^2 / 2) overflows: eps = {epsilon}, theta = {tilt}"
            )));
        }
        let log_total_rate = if tilt == 0.0 {
            0.0
        } else {
            std::f64::consts::LN_2 + exponent + std_normal_cdf(tilt * epsilon.sqrt()).ln()
        };
        Ok(Self {
            epsilon,
            tilt,
            log_total_rate,
            weights: [0.5, 0.5],
            means: [-epsilon * tilt, epsilon * tilt],
        })
    }

    /// Kernel for `theta = M / T` of `target` and the proposal variance.
    pub fn build(target: &TargetPotential, proposal: &ProposalSpec) -> Result<Self> {
        Self::new(proposal.epsilon(), target.tilt())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    /// `log Lambda(eps)`.
    pub fn log_total_rate(&self) -> f64 {
        self.log_total_rate
    }

    /// `Lambda(eps) = E[exp(theta |Z|)]`, `Z ~ N(0, eps)`.
    pub fn total_rate(&self) -> f64 {
        self.log_total_rate.exp()
    }

    pub fn log_density(&self, z: f64) -> f64 {
        self.tilt * z.abs() + crate::proposal::log_normal_density(z, self.epsilon) - self.log_total_rate
    }

    pub fn density(&self, z: f64) -> f64 {
        self.log_density(z).exp()
    }

    /// Exact draw: a fair sign, then a normal with mean `eps theta` and
    /// variance `eps` truncated to the positive half line. The truncation
    /// point sits at or below the mean, so the rejection loop accepts with
    /// probability at least one half.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sd = self.epsilon.sqrt();
        if self.tilt == 0.0 {
            let w: f64 = rng.sample(StandardNormal);
            return sd * w;
        }
        let negative = rng.random::<bool>();
        let lower = -self.tilt * sd;
        let w = loop {
            let w: f64 = rng.sample(StandardNormal);
            if w > lower {
                break w;
            }
        };
        let z = self.epsilon * self.tilt + sd * w;
        if negative {
            -z
        } else {
            z
        }
    }
}

/// Upper bound on `∫ M(x, y) dy`, uniform in `x`.
pub fn total_rate_bound_with(kind: GeneratorKind, kernel: &DominatingKernel) -> f64 {
    let a = kind.alpha();
    a + (1.0 - a) * kernel.total_rate()
}

pub fn total_rate_bound(kind: GeneratorKind, target: &TargetPotential, proposal: &ProposalSpec) -> Result<f64> {
    kind.validate()?;
    Ok(total_rate_bound_with(kind, &DominatingKernel::build(target, proposal)?))
}

/// Slack allowed above zero before a log acceptance counts as a violation.
const THINNING_SLACK: f64 = 1e-10;

/// `log a(z)` for a candidate move, see the module docs.
///
/// A value meaningfully above zero means the declared gradient bound is
/// wrong; that is reported as [`Error::ThinningViolation`].
pub fn thinning_accept_logprob(
    kind: GeneratorKind,
    target: &TargetPotential,
    x: &[f64],
    mv: CoordinateMove,
) -> Result<f64> {
    let alpha = kind.alpha();
    let tilt_term = target.tilt() * mv.displacement(x).abs();
    let lp = match kind {
        GeneratorKind::M1 => log_s_m1(target, x, mv)?,
        GeneratorKind::M2 => log_s_m2(target, x, mv)? - tilt_term,
        GeneratorKind::Mix(_) => {
            let num = log_mix(alpha, log_s_m1(target, x, mv)?, log_s_m2(target, x, mv)?);
            num - log_mix(alpha, 0.0, tilt_term)
        }
    };
    if lp > THINNING_SLACK * (1.0 + tilt_term) || lp.is_nan() {
        return Err(Error::ThinningViolation {
            x: x.to_vec(),
            coord: mv.coord,
            new_value: mv.new_value,
            log_prob: lp,
        });
    }
    Ok(lp.min(0.0))
}

/// Candidate generator for the thinning scheme of one kind.
#[derive(Debug, Clone, Copy)]
pub struct CandidateKernel {
    kind: GeneratorKind,
    kernel: DominatingKernel,
    plain_weight: f64,
    total_rate: f64,
}

impl CandidateKernel {
    pub fn new(kind: GeneratorKind, target: &TargetPotential, proposal: &ProposalSpec) -> Result<Self> {
        kind.validate()?;
        let kernel = DominatingKernel::build(target, proposal)?;
        let total_rate = total_rate_bound_with(kind, &kernel);
        Ok(Self {
            kind,
            kernel,
            plain_weight: kind.alpha() / total_rate,
            total_rate,
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn dominating(&self) -> &DominatingKernel {
        &self.kernel
    }

    /// `B`, the rate of candidate events.
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Density `p(z)` of one candidate displacement.
    pub fn density(&self, z: f64) -> f64 {
        let plain = crate::proposal::normal_density(z, self.kernel.epsilon());
        self.plain_weight * plain + (1.0 - self.plain_weight) * self.kernel.density(z)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.plain_weight >= 1.0 || (self.plain_weight > 0.0 && rng.random::<f64>() < self.plain_weight) {
            let w: f64 = rng.sample(StandardNormal);
            self.kernel.epsilon().sqrt() * w
        } else {
            self.kernel.sample(rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const KINDS: [GeneratorKind; 3] = [GeneratorKind::M1, GeneratorKind::M2, GeneratorKind::Mix(0.5)];

    #[test]
    fn kind_parsing() {
        assert_eq!("m1".parse::<GeneratorKind>().unwrap(), GeneratorKind::M1);
        assert_eq!("M2".parse::<GeneratorKind>().unwrap(), GeneratorKind::M2);
        assert_eq!("mix:0.25".parse::<GeneratorKind>().unwrap(), GeneratorKind::Mix(0.25));
        assert_eq!("mix(0.5)".parse::<GeneratorKind>().unwrap(), GeneratorKind::Mix(0.5));
        assert!("mix:1.5".parse::<GeneratorKind>().is_err());
        assert!("m3".parse::<GeneratorKind>().is_err());
        for k in KINDS {
            assert_eq!(k.to_string().parse::<GeneratorKind>().unwrap(), k);
        }
    }

    #[test]
    fn constant_potential_rates_equal_proposal() {
        let t = TargetPotential::constant(2, 1.0).unwrap();
        let p = ProposalSpec::new(2, 0.3).unwrap();
        for kind in [GeneratorKind::M1, GeneratorKind::M2, GeneratorKind::Mix(0.3)] {
            for z in [-1.0, -0.1, 0.0, 0.4] {
                let mv = CoordinateMove::by(&[0.2, -0.4], 1, z);
                let r = rate_density(kind, &t, &p, &[0.2, -0.4], mv).unwrap();
                let q = 0.5 * crate::proposal::normal_density(z, 0.3);
                assert!((r - q).abs() < 1e-14 * q);
            }
        }
    }

    #[test]
    fn mixture_rate_is_average() {
        let t = TargetPotential::double_well(1, 1.0, 2.0).unwrap();
        let p = ProposalSpec::new(1, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = [rng.random_range(-3.0..3.0)];
            let mv = CoordinateMove::new(0, rng.random_range(-3.0..3.0));
            let m1 = rate_density(GeneratorKind::M1, &t, &p, &x, mv).unwrap();
            let m2 = rate_density(GeneratorKind::M2, &t, &p, &x, mv).unwrap();
            let mix = rate_density(GeneratorKind::Mix(0.5), &t, &p, &x, mv).unwrap();
            assert!((mix - 0.5 * (m1 + m2)).abs() < 1e-13 * mix);
        }
    }

    #[test]
    fn product_identity() {
        // M1 M2 = Q^2 s_m1 s_m2, with Q = (1/d) phi.
        let t = TargetPotential::log_cosh(1, 0.7, vec![0.3]).unwrap();
        let p = ProposalSpec::new(1, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x = [rng.random_range(-3.0..3.0)];
            let mv = CoordinateMove::new(0, rng.random_range(-3.0..3.0));
            let m1 = rate_density(GeneratorKind::M1, &t, &p, &x, mv).unwrap();
            let m2 = rate_density(GeneratorKind::M2, &t, &p, &x, mv).unwrap();
            let du = t.potential().value(&mv.apply(&x)) - t.potential().value(&x);
            let q = crate::proposal::normal_density(mv.displacement(&x), 0.2);
            let s1 = (-(du.max(0.0)) / 0.7).exp();
            let s2 = ((-du).max(0.0) / 0.7).exp();
            assert!((m1 * m2 - q * q * s1 * s2).abs() < 1e-12 * m1 * m2);
        }
    }

    #[test]
    fn pointwise_ordering_and_detailed_balance() {
        let t = TargetPotential::double_well(2, 0.9, 2.0).unwrap();
        let p = ProposalSpec::new(2, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..2000 {
            let x = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
            let mv = CoordinateMove::new(rng.random_range(0..2), rng.random_range(-4.0..4.0));
            let q = p.log_coordinate_density(mv.displacement(&x));
            let l1 = log_rate_density(GeneratorKind::M1, &t, &p, &x, mv).unwrap();
            let l2 = log_rate_density(GeneratorKind::M2, &t, &p, &x, mv).unwrap();
            assert!(l1 <= q && q <= l2);
            let y = mv.apply(&x);
            let back = mv.reverse(&x);
            for kind in KINDS {
                let lhs = -t.energy(&x).unwrap() / 0.9 + log_rate_density(kind, &t, &p, &x, mv).unwrap();
                let rhs = -t.energy(&y).unwrap() / 0.9 + log_rate_density(kind, &t, &p, &y, back).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
            }
        }
    }

    #[test]
    fn untilted_kernel_is_plain_gaussian() {
        let k = DominatingKernel::new(0.4, 0.0).unwrap();
        assert_eq!(k.total_rate(), 1.0);
        let z = 0.3;
        assert!((k.density(z) - crate::proposal::normal_density(z, 0.4)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rate_against_integration() {
        // Lambda(0.01) with theta = 1 against a trapezoid sum of
        // exp(|z|) phi_0.01(z) on a fine grid.
        let k = DominatingKernel::new(0.01, 1.0).unwrap();
        let closed = 2.0 * 0.005f64.exp() * std_normal_cdf(0.1);
        assert!((k.total_rate() - closed).abs() < 1e-15);
        let h = 1e-5;
        let n: i64 = 200_000;
        let mut sum = 0.0;
        for j in -n..=n {
            let z = j as f64 * h;
            let w = if j.abs() == n { 0.5 } else { 1.0 };
            sum += w * (z.abs()).exp() * crate::proposal::normal_density(z, 0.01);
        }
        assert!((sum * h - closed).abs() < 1e-8, "{} vs {closed}", sum * h);
        assert!(k.total_rate() >= 1.0);
        assert!(DominatingKernel::new(1e-8, 1.0).unwrap().total_rate() - 1.0 < 1e-3);
    }

    #[test]
    fn rate_monte_carlo() {
        let k = DominatingKernel::new(0.01, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let w: f64 = rng.sample(StandardNormal);
            let v = (0.1 * w).abs().exp();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - k.total_rate()).abs() < 3.0 * se, "{mean} vs {}", k.total_rate());
    }

    #[test]
    fn overflow_is_a_config_error() {
        assert!(matches!(DominatingKernel::new(10.0, 20.0), Err(Error::Config(_))));
    }

    #[test]
    fn total_rate_bounds() {
        let p = ProposalSpec::new(1, 0.1).unwrap();
        let t = TargetPotential::double_well(1, 1.0, 2.0).unwrap();
        assert_eq!(total_rate_bound(GeneratorKind::M1, &t, &p).unwrap(), 1.0);
        let c = TargetPotential::constant(1, 1.0).unwrap();
        assert_eq!(total_rate_bound(GeneratorKind::M2, &c, &p).unwrap(), 1.0);
        let k = DominatingKernel::new(0.1, 1.0).unwrap();
        let lam = k.total_rate();
        let mix = total_rate_bound_with(GeneratorKind::Mix(0.25), &k);
        assert!((mix - (0.25 + 0.75 * lam)).abs() < 1e-15);
        assert!(total_rate_bound(GeneratorKind::Mix(2.0), &t, &p).is_err());
    }

    #[test]
    fn accept_logprob_examples() {
        let c = TargetPotential::new(crate::potential::Builtin::Constant { level: 0.0 }, 1, 1.0, 2.0).unwrap();
        let mv = CoordinateMove::new(0, 0.7);
        let lp = thinning_accept_logprob(GeneratorKind::M2, &c, &[0.2], mv).unwrap();
        assert!((lp + 2.0 * 0.5).abs() < 1e-14);
        let q = TargetPotential::quadratic(1, 1.0).unwrap();
        let lp = thinning_accept_logprob(GeneratorKind::M1, &q, &[0.0], CoordinateMove::new(0, 1.0)).unwrap();
        assert!((lp + 0.5).abs() < 1e-15);
    }

    #[test]
    fn understated_bound_is_reported() {
        // True gradient 1, declared 0.1.
        let t = TargetPotential::new(crate::potential::Builtin::Linear { slope: vec![1.0] }, 1, 1.0, 0.1);
        let t = t.unwrap();
        let err = thinning_accept_logprob(GeneratorKind::M2, &t, &[0.0], CoordinateMove::new(0, -1.0));
        assert!(matches!(err, Err(Error::ThinningViolation { coord: 0, .. })));
    }

    #[test]
    fn accept_probabilities_are_valid() {
        let t = TargetPotential::double_well(1, 0.5, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for kind in [GeneratorKind::M1, GeneratorKind::M2, GeneratorKind::Mix(0.2), GeneratorKind::Mix(0.8)] {
            for _ in 0..5000 {
                let x = [rng.random_range(-6.0..6.0)];
                let mv = CoordinateMove::new(0, rng.random_range(-6.0..6.0));
                let lp = thinning_accept_logprob(kind, &t, &x, mv).unwrap();
                assert!(lp <= 0.0);
            }
        }
    }

    #[test]
    fn accepted_rate_reproduces_kernel() {
        // B p(z) a(z) == (1/d) phi(z) s(z) * d on one coordinate.
        let t = TargetPotential::double_well(1, 1.0, 2.0).unwrap();
        let p = ProposalSpec::new(1, 0.2).unwrap();
        let x = [0.6];
        for kind in [GeneratorKind::M1, GeneratorKind::M2, GeneratorKind::Mix(0.3)] {
            let cand = CandidateKernel::new(kind, &t, &p).unwrap();
            for z in [-1.2, -0.3, 0.05, 0.4, 1.5] {
                let mv = CoordinateMove::by(&x, 0, z);
                let accepted = cand.total_rate() * cand.density(z) * thinning_accept_logprob(kind, &t, &x, mv).unwrap().exp();
                let exact = rate_density(kind, &t, &p, &x, mv).unwrap();
                assert!((accepted - exact).abs() < 1e-12 * exact, "{kind} z={z}: {accepted} vs {exact}");
            }
        }
    }
}
