//! Experiment configuration, read from JSON.
//!
//! Every key is optional; missing keys take the defaults below. Unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use mhjump::harness::{BumpShape, TestFunction};
use mhjump::quadrature::QuadOptions;
use mhjump::{Builtin, GeneratorKind, TargetPotential};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable consulted for the master seed when neither the
/// command line nor the config sets one.
pub const SEED_ENV: &str = "MHJUMP_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub name: String,
    pub params: Vec<f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            name: "quadratic".into(),
            params: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl From<QuadratureConfig> for QuadOptions {
    fn from(q: QuadratureConfig) -> Self {
        QuadOptions {
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_intervals: q.max_intervals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub chains: usize,
    pub states: usize,
    pub reversible_draws: usize,
    pub alphas: Vec<f64>,
    /// Chain file to check instead of random chains.
    pub chain_file: Option<PathBuf>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            chains: 100,
            states: 5,
            reversible_draws: 10_000,
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            chain_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    pub tilts: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self {
            tilts: vec![0.0, 1.0, 5.0],
            epsilon_grid: vec![1e-4, 1e-5, 1e-6, 1e-7],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SBoundConfig {
    pub pairs: usize,
    pub scales: Vec<f64>,
}

impl Default for SBoundConfig {
    fn default() -> Self {
        Self {
            pairs: 100_000,
            scales: vec![1e-1, 1e-2, 1e-3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitConfig {
    /// Points at which generator moments and test-function gaps are taken;
    /// each is a full state.
    pub x_grid: Vec<Vec<f64>>,
    pub coord: usize,
    pub test_centre: f64,
    pub test_radius: f64,
    /// Kinds compared against the diffusion.
    pub kinds: Vec<String>,
    /// `eps` values for the quadrature checks.
    pub epsilon_grid: Vec<f64>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            x_grid: [-1.7, -0.6, 0.4, 1.3, 2.2].iter().map(|&v| vec![v]).collect(),
            coord: 0,
            test_centre: 0.3,
            test_radius: 2.5,
            kinds: vec!["m1".into(), "m2".into(), "mix:0.5".into()],
            epsilon_grid: vec![1e-1, 1e-2, 1e-3, 1e-4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub potential: PotentialConfig,
    pub temperature: f64,
    pub dim: usize,
    /// `m1`, `m2` or `mix:<alpha>`.
    pub kind: String,
    pub epsilon: f64,
    pub epsilon_grid: Vec<f64>,
    pub obs_grid: Vec<f64>,
    pub x0: Vec<f64>,
    pub paths: usize,
    pub reference_paths: usize,
    /// Euler-Maruyama step of the reference diffusion.
    pub dt: f64,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub quadrature: QuadratureConfig,
    pub geometry: GeometryConfig,
    pub moments: MomentsConfig,
    pub sbound: SBoundConfig,
    pub limit: LimitConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::default(),
            temperature: 1.0,
            dim: 1,
            kind: "m2".into(),
            epsilon: 1e-3,
            epsilon_grid: vec![1e-1, 1e-2, 1e-3],
            obs_grid: vec![0.5, 1.0],
            x0: vec![1.0],
            paths: 10_000,
            reference_paths: 10_000,
            dt: 1e-4,
            seed: None,
            out_dir: None,
            quadrature: QuadratureConfig::default(),
            geometry: GeometryConfig::default(),
            moments: MomentsConfig::default(),
            sbound: SBoundConfig::default(),
            limit: LimitConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be a positive number, got {v}")))
    }
}

fn positive_all(name: &str, vs: &[f64]) -> Result<(), CliError> {
    if vs.is_empty() {
        return Err(CliError::Config(format!("{name} must not be empty")));
    }
    vs.iter().try_for_each(|&v| positive(name, v))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.target()?;
        self.generator()?;
        self.limit_kinds()?;
        positive("epsilon", self.epsilon)?;
        positive_all("epsilon_grid", &self.epsilon_grid)?;
        positive("dt", self.dt)?;
        if self.obs_grid.is_empty() || self.obs_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::Config("obs_grid must be a non-empty list of times >= 0".into()));
        }
        if self.obs_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("obs_grid must be strictly increasing".into()));
        }
        if self.x0.len() != self.dim {
            return Err(CliError::Config(format!("x0 has {} entries but dim is {}", self.x0.len(), self.dim)));
        }
        if self.paths == 0 || self.reference_paths == 0 {
            return Err(CliError::Config("path counts must be positive".into()));
        }
        let q = self.quadrature;
        if !(q.abs_tol >= 0.0 && q.rel_tol >= 0.0 && q.abs_tol + q.rel_tol > 0.0 && q.max_intervals > 0) {
            return Err(CliError::Config("quadrature tolerances must be >= 0 and not both zero".into()));
        }
        let g = &self.geometry;
        if g.states < 2 || g.chains == 0 {
            return Err(CliError::Config("geometry needs at least one chain of two or more states".into()));
        }
        if g.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(CliError::Config("geometry alphas must lie in [0, 1]".into()));
        }
        positive_all("moments.epsilon_grid", &self.moments.epsilon_grid)?;
        if self.moments.tilts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::Config("moments.tilts must be finite and >= 0".into()));
        }
        positive_all("sbound.scales", &self.sbound.scales)?;
        let l = &self.limit;
        if l.x_grid.is_empty() || l.x_grid.iter().any(|p| p.len() != self.dim) {
            return Err(CliError::Config(format!("limit.x_grid points must have {} coordinates", self.dim)));
        }
        if l.coord >= self.dim {
            return Err(CliError::Config(format!("limit.coord {} out of range", l.coord)));
        }
        positive("limit.test_radius", l.test_radius)?;
        positive_all("limit.epsilon_grid", &l.epsilon_grid)?;
        Ok(())
    }

    pub fn target(&self) -> Result<TargetPotential, CliError> {
        let b = Builtin::from_name(&self.potential.name, &self.potential.params)?;
        Ok(TargetPotential::builtin(b, self.dim, self.temperature)?)
    }

    pub fn generator(&self) -> Result<GeneratorKind, CliError> {
        Ok(self.kind.parse::<GeneratorKind>()?)
    }

    pub fn limit_kinds(&self) -> Result<Vec<GeneratorKind>, CliError> {
        if self.limit.kinds.is_empty() {
            return Err(CliError::Config("limit.kinds must not be empty".into()));
        }
        self.limit.kinds.iter().map(|k| Ok(k.parse::<GeneratorKind>()?)).collect()
    }

    pub fn test_functions(&self) -> Result<Vec<TestFunction>, CliError> {
        [BumpShape::Bump, BumpShape::Linear, BumpShape::Quadratic]
            .into_iter()
            .map(|s| Ok(TestFunction::new(s, self.limit.test_centre, self.limit.test_radius)?))
            .collect()
    }

    /// Seed precedence: command line, then config, then the environment,
    /// then zero.
    pub fn resolve_seed(&self, cli: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
        if let Some(s) = cli.or(self.seed) {
            return Ok(s);
        }
        match env {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
            None => Ok(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn bad_configs_are_rejected() {
        for text in [
            r#"{"potential": {"name": "nope"}}"#,
            r#"{"kind": "m3"}"#,
            r#"{"epsilon": -1}"#,
            r#"{"dim": 2}"#,
            r#"{"obs_grid": [1.0, 0.5]}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"geometry": {"alphas": [1.5]}}"#,
            "not json",
        ] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn seed_precedence() {
        let mut c = ExperimentConfig::default();
        assert_eq!(c.resolve_seed(None, None).unwrap(), 0);
        assert_eq!(c.resolve_seed(None, Some("17")).unwrap(), 17);
        c.seed = Some(5);
        assert_eq!(c.resolve_seed(None, Some("17")).unwrap(), 5);
        assert_eq!(c.resolve_seed(Some(9), Some("17")).unwrap(), 9);
        c.seed = None;
        assert!(c.resolve_seed(None, Some("x")).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(
            eps in 1e-6f64..1.0,
            temp in 0.1f64..10.0,
            paths in 1usize..100_000,
            seed in proptest::option::of(any::<u64>()),
            alpha in 0.0f64..=1.0,
            grid in proptest::collection::vec(1e-3f64..1.0, 1..5),
        ) {
            let cfg = ExperimentConfig {
                epsilon: eps,
                temperature: temp,
                paths,
                seed,
                kind: format!("mix:{alpha}"),
                epsilon_grid: grid,
                ..ExperimentConfig::default()
            };
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
