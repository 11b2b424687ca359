//! Thinning simulation of the jump processes `X^{M1^eps}`, `X^{M2^eps}` and
//! their mixtures.
//!
//! Candidate events ring at the constant rate `B` of the kind's
//! [`CandidateKernel`]. At each ring a coordinate is picked uniformly, a
//! displacement is drawn from the candidate kernel, and the move is accepted
//! with probability `exp(thinning_accept_logprob)`. Accepted rings are the
//! jumps of the process.
//!
//! Observation on the accelerated clock `t / eps` is done by dividing the
//! horizon ([`Clock::Dilated`]); [`Clock::Accelerated`] instead multiplies
//! every rate by `1 / eps` and is kept as a cross-check.

use rand::Rng;
use rand_distr::Exp1;

use crate::ensemble::{EnsembleSource, ObservedEnsemble};
use crate::error::{Error, Result};
use crate::kernel::{thinning_accept_logprob, CandidateKernel, GeneratorKind};
use crate::par::map_paths;
use crate::potential::TargetPotential;
use crate::proposal::{CoordinateMove, ProposalSpec};
use crate::rng::{domain, stream_rng};

/// What to do when an accepted jump leaves the target's domain box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainPolicy {
    #[default]
    Abort,
    /// Record the exit time and keep simulating.
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    /// Process time `t / eps` at the native rates.
    #[default]
    Dilated,
    /// Macroscopic time `t` with every rate multiplied by `1 / eps`.
    Accelerated,
}

/// A piecewise-constant trajectory in process time.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub initial_state: Vec<f64>,
    pub jump_times: Vec<f64>,
    /// State immediately after each jump.
    pub states: Vec<Vec<f64>>,
    pub horizon: f64,
    /// Candidate events, accepted or not.
    pub candidates: u64,
    pub domain_exits: Vec<f64>,
}

impl JumpPath {
    /// Right-continuous evaluation: the state after the last jump `<= t`.
    pub fn state_at(&self, t: f64) -> &[f64] {
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            &self.initial_state
        } else {
            &self.states[k - 1]
        }
    }

    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }
}

/// The first accepted move out of a fixed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstJump {
    pub time: f64,
    pub coord: usize,
    pub displacement: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub candidates: u64,
    pub jumps: u64,
    pub domain_exits: u64,
}

#[derive(Debug, Clone)]
pub struct JumpSimulator {
    kind: GeneratorKind,
    target: TargetPotential,
    proposal: ProposalSpec,
    candidates: CandidateKernel,
    policy: DomainPolicy,
}

impl JumpSimulator {
    pub fn new(kind: GeneratorKind, target: &TargetPotential, proposal: &ProposalSpec) -> Result<Self> {
        if target.dim() != proposal.dim() {
            return Err(Error::config(format!(
                "target dimension {} differs from proposal dimension {}",
                target.dim(),
                proposal.dim()
            )));
        }
        Ok(Self {
            kind,
            target: target.clone(),
            proposal: *proposal,
            candidates: CandidateKernel::new(kind, target, proposal)?,
            policy: DomainPolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: DomainPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn proposal(&self) -> &ProposalSpec {
        &self.proposal
    }

    pub fn candidate_rate(&self) -> f64 {
        self.candidates.total_rate()
    }

    fn check_start(&self, x0: &[f64]) -> Result<()> {
        if x0.len() != self.target.dim() {
            return Err(Error::usage(format!(
                "initial state has {} coordinates, expected {}",
                x0.len(),
                self.target.dim()
            )));
        }
        if !self.target.in_domain(x0) {
            return Err(Error::usage(format!("initial state {x0:?} is outside the domain box")));
        }
        Ok(())
    }

    /// One candidate event. Returns the accepted move, already applied to `x`.
    fn ring<R: Rng + ?Sized>(&self, x: &mut [f64], rng: &mut R) -> Result<Option<CoordinateMove>> {
        let coord = rng.random_range(0..self.target.dim());
        let z = self.candidates.sample(rng);
        let mv = CoordinateMove::by(x, coord, z);
        let lp = thinning_accept_logprob(self.kind, &self.target, x, mv)?;
        // lp <= 0; accept iff log U < lp, with U in (0, 1].
        let u: f64 = 1.0 - rng.random::<f64>();
        if u.ln() < lp || lp == 0.0 {
            x[coord] = mv.new_value;
            Ok(Some(mv))
        } else {
            Ok(None)
        }
    }

    fn on_exit(&self, time: f64, x: &[f64], stats: &mut RunStats) -> Result<bool> {
        if self.target.in_domain(x) {
            return Ok(false);
        }
        stats.domain_exits += 1;
        match self.policy {
            DomainPolicy::Abort => Err(Error::DomainExit { time, x: x.to_vec() }),
            DomainPolicy::Continue => Ok(true),
        }
    }

    fn waiting_time<R: Rng + ?Sized>(&self, rate_scale: f64, rng: &mut R) -> f64 {
        let e: f64 = rng.sample(Exp1);
        e / (self.candidates.total_rate() * rate_scale)
    }

    /// Full jump log over `[0, horizon]` in process time.
    pub fn simulate_path<R: Rng + ?Sized>(&self, x0: &[f64], horizon: f64, rng: &mut R) -> Result<JumpPath> {
        self.check_start(x0)?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::usage(format!("horizon must be > 0, got {horizon}")));
        }
        let mut x = x0.to_vec();
        let mut path = JumpPath {
            initial_state: x0.to_vec(),
            jump_times: Vec::new(),
            states: Vec::new(),
            horizon,
            candidates: 0,
            domain_exits: Vec::new(),
        };
        let mut stats = RunStats::default();
        let mut t = 0.0;
        loop {
            t += self.waiting_time(1.0, rng);
            if t > horizon {
                break;
            }
            path.candidates += 1;
            if self.ring(&mut x, rng)?.is_some() {
                path.jump_times.push(t);
                path.states.push(x.clone());
                if self.on_exit(t, &x, &mut stats)? {
                    path.domain_exits.push(t);
                }
            }
        }
        Ok(path)
    }

    /// Record the state at each of the increasing process times `times`
    /// into `out` (`times.len() * d` values), without keeping the jump log.
    pub fn observe<R: Rng + ?Sized>(
        &self,
        x0: &[f64],
        times: &[f64],
        rate_scale: f64,
        rng: &mut R,
        out: &mut [f64],
    ) -> Result<RunStats> {
        self.check_start(x0)?;
        let d = x0.len();
        debug_assert_eq!(out.len(), times.len() * d);
        let mut x = x0.to_vec();
        let mut stats = RunStats::default();
        let mut t = 0.0;
        let mut k = 0;
        while k < times.len() {
            let next = t + self.waiting_time(rate_scale, rng);
            while k < times.len() && times[k] < next {
                out[k * d..(k + 1) * d].copy_from_slice(&x);
                k += 1;
            }
            if k == times.len() {
                break;
            }
            t = next;
            stats.candidates += 1;
            if self.ring(&mut x, rng)?.is_some() {
                stats.jumps += 1;
                self.on_exit(t, &x, &mut stats)?;
            }
        }
        Ok(stats)
    }

    /// Run until the first accepted candidate.
    pub fn first_jump<R: Rng + ?Sized>(&self, x0: &[f64], rng: &mut R) -> Result<FirstJump> {
        self.check_start(x0)?;
        let mut x = x0.to_vec();
        let mut t = 0.0;
        loop {
            t += self.waiting_time(1.0, rng);
            if let Some(mv) = self.ring(&mut x, rng)? {
                return Ok(FirstJump {
                    time: t,
                    coord: mv.coord,
                    displacement: mv.displacement(x0),
                });
            }
        }
    }
}

pub fn simulate_path<R: Rng + ?Sized>(
    kind: GeneratorKind,
    target: &TargetPotential,
    proposal: &ProposalSpec,
    x0: &[f64],
    horizon: f64,
    rng: &mut R,
) -> Result<JumpPath> {
    JumpSimulator::new(kind, target, proposal)?.simulate_path(x0, horizon, rng)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnsembleOptions {
    pub clock: Clock,
    pub policy: DomainPolicy,
}

pub(crate) fn check_grid(obs_grid: &[f64]) -> Result<()> {
    if obs_grid.is_empty() {
        return Err(Error::usage("observation grid is empty"));
    }
    if obs_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::usage("observation times must be finite and >= 0"));
    }
    if obs_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::usage("observation grid must be strictly increasing"));
    }
    Ok(())
}

/// `n_paths` independent paths observed at macroscopic times `obs_grid`,
/// i.e. at process times `t / eps`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_ensemble_with(
    kind: GeneratorKind,
    target: &TargetPotential,
    proposal: &ProposalSpec,
    x0: &[f64],
    obs_grid: &[f64],
    n_paths: usize,
    master_seed: u64,
    options: EnsembleOptions,
) -> Result<ObservedEnsemble> {
    check_grid(obs_grid)?;
    if n_paths == 0 {
        return Err(Error::usage("need at least one path"));
    }
    let sim = JumpSimulator::new(kind, target, proposal)?.with_policy(options.policy);
    sim.check_start(x0)?;
    let eps = proposal.epsilon();
    let (times, rate_scale): (Vec<f64>, f64) = match options.clock {
        Clock::Dilated => (obs_grid.iter().map(|t| t / eps).collect(), 1.0),
        Clock::Accelerated => (obs_grid.to_vec(), 1.0 / eps),
    };
    let d = x0.len();
    let block = times.len() * d;
    let rows = map_paths(n_paths, |p| {
        let mut rng = stream_rng(master_seed, domain::JUMP, p as u64);
        let mut out = vec![0.0; block];
        sim.observe(x0, &times, rate_scale, &mut rng, &mut out)?;
        Ok(out)
    })?;
    Ok(ObservedEnsemble::new(
        EnsembleSource::Jump { kind, epsilon: eps },
        obs_grid.to_vec(),
        d,
        n_paths,
        rows.concat(),
        master_seed,
    ))
}

pub fn simulate_ensemble(
    kind: GeneratorKind,
    target: &TargetPotential,
    proposal: &ProposalSpec,
    x0: &[f64],
    obs_grid: &[f64],
    n_paths: usize,
    master_seed: u64,
) -> Result<ObservedEnsemble> {
    simulate_ensemble_with(
        kind,
        target,
        proposal,
        x0,
        obs_grid,
        n_paths,
        master_seed,
        EnsembleOptions::default(),
    )
}
