//! Gibbs targets `mu(x) ∝ exp(-U(x)/T)` on `R^d`.
//!
//! A [`TargetPotential`] bundles the potential with its temperature and a
//! declared bound `M` on every partial derivative. The bound is not a hint:
//! the M2 dominating kernel is built from `M/T`, so every gradient evaluation
//! checks it and a violation is an error.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::proposal::CoordinateMove;

/// A differentiable potential `U: R^d -> R`.
pub trait Potential: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> f64;

    /// `dU/dx_i` at `x`.
    fn partial(&self, x: &[f64], i: usize) -> f64;

    /// `U(y) - U(x)` where `y` is `x` with coordinate `i` replaced.
    ///
    /// Separable potentials override this so that the difference is formed
    /// from one coordinate term and `delta(x -> y) == -delta(y -> x)` holds
    /// bit for bit.
    fn coordinate_delta(&self, x: &[f64], i: usize, new_value: f64) -> f64 {
        let mut y = x.to_vec();
        y[i] = new_value;
        self.value(&y) - self.value(x)
    }
}

/// Coordinatewise potentials shipped with the crate.
///
/// Every variant is a sum `U(x) = sum_i u_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Constant { level: f64 },
    /// `u_i(v) = a_i v`; `slope` is cycled if shorter than the dimension.
    Linear { slope: Vec<f64> },
    /// `u(v) = v^2 / 2`. Its gradient is unbounded, so it is only admitted
    /// together with a domain box.
    Quadratic,
    /// `u_i(v) = log cosh(v) - c_i v`, gradient `tanh(v) - c_i`.
    LogCosh { tilt: Vec<f64> },
    /// `u(v) = sqrt(1 + v^2) + h exp(-v^2 / 2)`: linear tails, a barrier of
    /// height roughly `h` at the origin, wells near `±1.7` for `h = 2`.
    DoubleWell { barrier: f64 },
}

fn cycled(values: &[f64], i: usize) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values[i % values.len()]
    }
}

fn log_cosh(v: f64) -> f64 {
    let a = v.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl Builtin {
    /// Resolve a potential by name. Parameters are positional:
    /// `linear`: slopes; `log_cosh`: tilts; `double_well`: barrier (default 2).
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let p = params.to_vec();
        match name {
            "constant" => Ok(Builtin::Constant {
                level: p.first().copied().unwrap_or(0.0),
            }),
            "linear" => {
                if p.is_empty() {
                    return Err(Error::config("linear potential needs at least one slope"));
                }
                Ok(Builtin::Linear { slope: p })
            }
            "quadratic" => Ok(Builtin::Quadratic),
            "log_cosh" => Ok(Builtin::LogCosh { tilt: p }),
            "double_well" => {
                let barrier = p.first().copied().unwrap_or(2.0);
                if !(barrier.is_finite() && barrier >= 0.0) {
                    return Err(Error::config(format!("double_well barrier must be >= 0, got {barrier}")));
                }
                Ok(Builtin::DoubleWell { barrier })
            }
            other => Err(Error::config(format!("unknown potential '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Constant { .. } => "constant",
            Builtin::Linear { .. } => "linear",
            Builtin::Quadratic => "quadratic",
            Builtin::LogCosh { .. } => "log_cosh",
            Builtin::DoubleWell { .. } => "double_well",
        }
    }

    fn term(&self, i: usize, v: f64) -> f64 {
        match self {
            Builtin::Constant { .. } => 0.0,
            Builtin::Linear { slope } => cycled(slope, i) * v,
            Builtin::Quadratic => 0.5 * v * v,
            Builtin::LogCosh { tilt } => log_cosh(v) - cycled(tilt, i) * v,
            Builtin::DoubleWell { barrier } => (1.0 + v * v).sqrt() + barrier * (-0.5 * v * v).exp(),
        }
    }

    fn term_derivative(&self, i: usize, v: f64) -> f64 {
        match self {
            Builtin::Constant { .. } => 0.0,
            Builtin::Linear { slope } => cycled(slope, i),
            Builtin::Quadratic => v,
            Builtin::LogCosh { tilt } => v.tanh() - cycled(tilt, i),
            Builtin::DoubleWell { barrier } => {
                v / (1.0 + v * v).sqrt() - barrier * v * (-0.5 * v * v).exp()
            }
        }
    }

    /// Sup of `|u_i'|` over the real line, or `None` when unbounded.
    pub fn natural_grad_bound(&self) -> Option<f64> {
        match self {
            Builtin::Constant { .. } => Some(0.0),
            Builtin::Linear { slope } => Some(slope.iter().fold(0.0_f64, |m, a| m.max(a.abs()))),
            Builtin::Quadratic => None,
            Builtin::LogCosh { tilt } => Some(1.0 + tilt.iter().fold(0.0_f64, |m, c| m.max(c.abs()))),
            // |v / sqrt(1+v^2)| < 1 and |h v exp(-v^2/2)| <= h exp(-1/2).
            Builtin::DoubleWell { barrier } => Some(1.0 + barrier * (-0.5_f64).exp()),
        }
    }
}

impl Potential for Builtin {
    fn value(&self, x: &[f64]) -> f64 {
        let base = match self {
            Builtin::Constant { level } => *level,
            _ => 0.0,
        };
        x.iter().enumerate().fold(base, |acc, (i, &v)| acc + self.term(i, v))
    }

    fn partial(&self, x: &[f64], i: usize) -> f64 {
        self.term_derivative(i, x[i])
    }

    fn coordinate_delta(&self, x: &[f64], i: usize, new_value: f64) -> f64 {
        match self {
            Builtin::Constant { .. } => 0.0,
            // (y^2 - x^2)/2 in factored form for accuracy at small moves.
            Builtin::Quadratic => 0.5 * (new_value - x[i]) * (new_value + x[i]),
            Builtin::Linear { slope } => cycled(slope, i) * (new_value - x[i]),
            _ => self.term(i, new_value) - self.term(i, x[i]),
        }
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type PartialFn = dyn Fn(&[f64], usize) -> f64 + Send + Sync;

/// A potential given by closures, for experiments off the built-in list.
#[derive(Clone)]
pub struct FnPotential {
    label: String,
    value: Arc<ValueFn>,
    partial: Arc<PartialFn>,
}

impl FnPotential {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        partial: impl Fn(&[f64], usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            partial: Arc::new(partial),
        }
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential").field("label", &self.label).finish()
    }
}

impl Potential for FnPotential {
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn partial(&self, x: &[f64], i: usize) -> f64 {
        (self.partial)(x, i)
    }
}

/// Axis-aligned box `[lo, hi]^d` that a target is declared on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub lo: f64,
    pub hi: f64,
}

impl DomainBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| v >= self.lo && v <= self.hi)
    }
}

/// Half-width of the default box for the quadratic potential.
pub const QUADRATIC_BOX: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct TargetPotential {
    dim: usize,
    temperature: f64,
    grad_bound: f64,
    domain: Option<DomainBox>,
    potential: Arc<dyn Potential>,
}

impl TargetPotential {
    pub fn new(
        potential: impl Potential + 'static,
        dim: usize,
        temperature: f64,
        grad_bound: f64,
    ) -> Result<Self> {
        Self::from_arc(Arc::new(potential), dim, temperature, grad_bound)
    }

    pub fn from_arc(
        potential: Arc<dyn Potential>,
        dim: usize,
        temperature: f64,
        grad_bound: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::config(format!("temperature must be > 0, got {temperature}")));
        }
        if !(grad_bound.is_finite() && grad_bound >= 0.0) {
            return Err(Error::config(format!("gradient bound must be finite and >= 0, got {grad_bound}")));
        }
        Ok(Self {
            dim,
            temperature,
            grad_bound,
            domain: None,
            potential,
        })
    }

    /// Restrict the target to `[lo, hi]^d`.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::config(format!("domain box needs lo < hi, got [{lo}, {hi}]")));
        }
        self.domain = Some(DomainBox { lo, hi });
        Ok(self)
    }

    /// Build a built-in potential. Bounded-gradient potentials get their
    /// natural bound; the quadratic gets the box `[-10, 10]^d` and bound 10.
    pub fn builtin(potential: Builtin, dim: usize, temperature: f64) -> Result<Self> {
        match potential.natural_grad_bound() {
            Some(bound) => Self::new(potential, dim, temperature, bound),
            None => Self::new(potential, dim, temperature, QUADRATIC_BOX)?
                .with_domain(-QUADRATIC_BOX, QUADRATIC_BOX),
        }
    }

    pub fn quadratic(dim: usize, temperature: f64) -> Result<Self> {
        Self::builtin(Builtin::Quadratic, dim, temperature)
    }

    pub fn double_well(dim: usize, temperature: f64, barrier: f64) -> Result<Self> {
        Self::builtin(Builtin::DoubleWell { barrier }, dim, temperature)
    }

    pub fn log_cosh(dim: usize, temperature: f64, tilt: Vec<f64>) -> Result<Self> {
        Self::builtin(Builtin::LogCosh { tilt }, dim, temperature)
    }

    pub fn constant(dim: usize, temperature: f64) -> Result<Self> {
        Self::builtin(Builtin::Constant { level: 0.0 }, dim, temperature)
    }

    pub fn linear(slope: Vec<f64>, dim: usize, temperature: f64) -> Result<Self> {
        Self::builtin(Builtin::Linear { slope }, dim, temperature)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    /// `M / T`, the tilt of the M2 dominating kernel.
    pub fn tilt(&self) -> f64 {
        self.grad_bound / self.temperature
    }

    pub fn domain(&self) -> Option<DomainBox> {
        self.domain
    }

    pub fn potential(&self) -> &dyn Potential {
        &*self.potential
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.domain.is_none_or(|b| b.contains(x))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::usage(format!(
                "state has {} coordinates, target has dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `U(x)`, required finite.
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let u = self.potential.value(x);
        if u.is_finite() {
            Ok(u)
        } else {
            Err(Error::NonFinitePotential { x: x.to_vec() })
        }
    }

    /// `U(y) - U(x)` for the single-coordinate move `x -> y`.
    pub fn delta(&self, x: &[f64], mv: CoordinateMove) -> Result<f64> {
        self.check_point(x)?;
        mv.check(self.dim)?;
        let d = self.potential.coordinate_delta(x, mv.coord, mv.new_value);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::NonFinitePotential { x: mv.apply(x) })
        }
    }

    /// `dU/dx_i`, checked against the declared bound.
    pub fn partial(&self, x: &[f64], i: usize) -> Result<f64> {
        self.check_point(x)?;
        if i >= self.dim {
            return Err(Error::usage(format!("coordinate {i} out of range for dimension {}", self.dim)));
        }
        let g = self.potential.partial(x, i);
        if !g.is_finite() {
            return Err(Error::NonFinitePotential { x: x.to_vec() });
        }
        // A few ulps of slack so that the bound itself is attainable.
        if g.abs() > self.grad_bound * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::GradBoundViolation {
                x: x.to_vec(),
                coord: i,
                value: g.abs(),
                bound: self.grad_bound,
            });
        }
        Ok(g)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.dim).map(|i| self.partial(x, i)).collect()
    }

    /// Largest scaled gap between the analytic gradient and central
    /// differences with step `1e-6 (1 + |x_i|)`, measured as
    /// `|fd - g| / max(1, |g|)`.
    pub fn gradient_fd_error(&self, x: &[f64]) -> Result<f64> {
        let grad = self.gradient(x)?;
        let mut worst = 0.0_f64;
        let mut probe = x.to_vec();
        for (i, &g) in grad.iter().enumerate() {
            let h = 1e-6 * (1.0 + x[i].abs());
            probe[i] = x[i] + h;
            let up = self.energy(&probe)?;
            probe[i] = x[i] - h;
            let down = self.energy(&probe)?;
            probe[i] = x[i];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - g).abs() / g.abs().max(1.0));
        }
        Ok(worst)
    }
}
