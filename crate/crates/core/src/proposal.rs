//! The Gaussian single-coordinate proposal `Q_eps`: pick a coordinate
//! uniformly, move it by `N(0, eps)`, keep the rest.

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalSpec {
    dim: usize,
    epsilon: f64,
}

impl ProposalSpec {
    pub fn new(dim: usize, epsilon: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("proposal dimension must be at least 1"));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::config(format!("proposal variance must be > 0, got {epsilon}")));
        }
        Ok(Self { dim, epsilon })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `log phi_eps(z)`.
    pub fn log_phi(&self, z: f64) -> f64 {
        log_normal_density(z, self.epsilon)
    }

    /// `log((1/d) phi_eps(z))`, the log density of `Q_eps` along one
    /// coordinate.
    pub fn log_coordinate_density(&self, z: f64) -> f64 {
        self.log_phi(z) - (self.dim as f64).ln()
    }
}

/// `log` of the `N(0, variance)` density at `z`.
pub fn log_normal_density(z: f64, variance: f64) -> f64 {
    -0.5 * z * z / variance - 0.5 * variance.ln() - LN_SQRT_2PI
}

pub fn normal_density(z: f64, variance: f64) -> f64 {
    log_normal_density(z, variance).exp()
}

/// A proposal `y` that differs from `x` only in coordinate `coord`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateMove {
    pub coord: usize,
    pub new_value: f64,
}

impl CoordinateMove {
    pub fn new(coord: usize, new_value: f64) -> Self {
        Self { coord, new_value }
    }

    /// Move `x_coord` by `displacement`.
    pub fn by(x: &[f64], coord: usize, displacement: f64) -> Self {
        Self::new(coord, x[coord] + displacement)
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.coord >= dim {
            return Err(Error::usage(format!(
                "move coordinate {} out of range for dimension {dim}",
                self.coord
            )));
        }
        if !self.new_value.is_finite() {
            return Err(Error::usage("move target is not finite"));
        }
        Ok(())
    }

    pub fn displacement(&self, x: &[f64]) -> f64 {
        self.new_value - x[self.coord]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        y[self.coord] = self.new_value;
        y
    }

    /// The move that takes `apply(x)` back to `x`.
    pub fn reverse(&self, x: &[f64]) -> Self {
        Self::new(self.coord, x[self.coord])
    }
}
