//! Continuous-time Metropolis-Hastings jump processes on `R^d` and on
//! finite state spaces.
//!
//! The two generators studied here are built from a proposal kernel `Q` and
//! a target `mu`:
//!
//! * `M1(x, y) = min{Q(x, y), mu(y)/mu(x) Q(y, x)}`, classical Metropolis;
//! * `M2(x, y) = max{Q(x, y), mu(y)/mu(x) Q(y, x)}`, the faster "second"
//!   Metropolis-Hastings dynamics.
//!
//! Modules:
//!
//! * [`potential`], [`proposal`], [`acceptance`]: Gibbs targets, the
//!   Gaussian coordinate proposal and the acceptance ratios.
//! * [`kernel`]: rate densities, the tilted dominating kernel and thinning.
//! * [`simulate`], [`ensemble`]: jump-process paths on the accelerated clock.
//! * [`langevin`]: the limiting diffusion, integrated by Euler-Maruyama.
//! * [`finite`]: generator matrices and the `d_mu` distance.
//! * [`harness`]: quadrature-based generator moment checks and ensemble
//!   comparisons.

pub mod acceptance;
pub mod ensemble;
pub mod finite;
pub mod harness;
pub mod error;
pub mod kernel;
pub mod langevin;
mod par;
pub mod potential;
pub mod proposal;
pub mod quadrature;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use kernel::GeneratorKind;
pub use potential::{Builtin, TargetPotential};
pub use proposal::{CoordinateMove, ProposalSpec};
