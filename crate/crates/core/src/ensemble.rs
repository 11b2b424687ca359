//! Ensembles of paths observed on a common time grid, with CSV and binary
//! serialisation.
//!
//! # Binary layout
//!
//! All integers and floats little-endian:
//!
//! | field      | type        | notes                                         |
//! |------------|-------------|-----------------------------------------------|
//! | magic      | `[u8; 4]`   | `b"MHJE"`                                     |
//! | version    | `u16`       | `1`                                           |
//! | source     | `u8`        | 0 = M1, 1 = M2, 2 = Mix, 3 = Langevin, 4 = Langevin (clocked) |
//! | reserved   | `u8`        | `0`                                           |
//! | dim        | `u32`       |                                               |
//! | n_paths    | `u64`       |                                               |
//! | n_grid     | `u64`       |                                               |
//! | seed       | `u64`       |                                               |
//! | epsilon    | `f64`       | proposal variance; 0 for Langevin             |
//! | param      | `f64`       | alpha for Mix, dt for Langevin, else 0        |
//! | grid       | `[f64; n_grid]` |                                           |
//! | samples    | `[f64; n_paths * n_grid * dim]` | path-major, then grid, then coordinate |

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::kernel::GeneratorKind;
use crate::langevin::SdeVariant;

pub const MAGIC: [u8; 4] = *b"MHJE";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSource {
    Jump { kind: GeneratorKind, epsilon: f64 },
    Langevin { dt: f64, variant: SdeVariant },
}

impl EnsembleSource {
    fn encode(&self) -> (u8, f64, f64) {
        match *self {
            EnsembleSource::Jump { kind, epsilon } => match kind {
                GeneratorKind::M1 => (0, epsilon, 0.0),
                GeneratorKind::M2 => (1, epsilon, 0.0),
                GeneratorKind::Mix(a) => (2, epsilon, a),
            },
            EnsembleSource::Langevin { dt, variant } => match variant {
                SdeVariant::Rescaled => (3, 0.0, dt),
                SdeVariant::StandardWithClock => (4, 0.0, dt),
            },
        }
    }

    fn decode(tag: u8, epsilon: f64, param: f64) -> Result<Self> {
        Ok(match tag {
            0 => EnsembleSource::Jump { kind: GeneratorKind::M1, epsilon },
            1 => EnsembleSource::Jump { kind: GeneratorKind::M2, epsilon },
            2 => EnsembleSource::Jump {
                kind: GeneratorKind::mix(param)?,
                epsilon,
            },
            3 => EnsembleSource::Langevin {
                dt: param,
                variant: SdeVariant::Rescaled,
            },
            4 => EnsembleSource::Langevin {
                dt: param,
                variant: SdeVariant::StandardWithClock,
            },
            other => return Err(Error::Parse(format!("unknown ensemble source tag {other}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedEnsemble {
    source: EnsembleSource,
    obs_grid: Vec<f64>,
    dim: usize,
    n_paths: usize,
    samples: Vec<f64>,
    seed: u64,
}

impl ObservedEnsemble {
    pub fn new(
        source: EnsembleSource,
        obs_grid: Vec<f64>,
        dim: usize,
        n_paths: usize,
        samples: Vec<f64>,
        seed: u64,
    ) -> Self {
        assert_eq!(samples.len(), n_paths * obs_grid.len() * dim);
        Self {
            source,
            obs_grid,
            dim,
            n_paths,
            samples,
            seed,
        }
    }

    pub fn source(&self) -> EnsembleSource {
        self.source
    }

    pub fn obs_grid(&self) -> &[f64] {
        &self.obs_grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn state(&self, path: usize, grid: usize) -> &[f64] {
        let start = (path * self.obs_grid.len() + grid) * self.dim;
        &self.samples[start..start + self.dim]
    }

    /// Coordinate `coord` across all paths at grid point `grid`.
    pub fn marginal(&self, grid: usize, coord: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.state(p, grid)[coord]).collect()
    }

    /// One row per path and grid point: `path_id,t,x_1,...,x_d`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "path_id,t")?;
        for i in 1..=self.dim {
            write!(w, ",x_{i}")?;
        }
        writeln!(w)?;
        for p in 0..self.n_paths {
            for (g, t) in self.obs_grid.iter().enumerate() {
                write!(w, "{p},{t}")?;
                for v in self.state(p, g) {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (tag, epsilon, param) = self.source.encode();
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[tag, 0])?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.n_paths as u64).to_le_bytes())?;
        w.write_all(&(self.obs_grid.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&epsilon.to_le_bytes())?;
        w.write_all(&param.to_le_bytes())?;
        for v in self.obs_grid.iter().chain(&self.samples) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)
                .map_err(|e| Error::Parse(format!("truncated ensemble file: {e}")))?;
            Ok(buf)
        }
        if take::<4, _>(&mut r)? != MAGIC {
            return Err(Error::Parse("bad ensemble magic".into()));
        }
        let version = u16::from_le_bytes(take(&mut r)?);
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported ensemble version {version}")));
        }
        let [tag, _] = take::<2, _>(&mut r)?;
        let dim = u32::from_le_bytes(take(&mut r)?) as usize;
        let n_paths = u64::from_le_bytes(take(&mut r)?) as usize;
        let n_grid = u64::from_le_bytes(take(&mut r)?) as usize;
        let seed = u64::from_le_bytes(take(&mut r)?);
        let epsilon = f64::from_le_bytes(take(&mut r)?);
        let param = f64::from_le_bytes(take(&mut r)?);
        let source = EnsembleSource::decode(tag, epsilon, param)?;
        let count = n_paths
            .checked_mul(n_grid)
            .and_then(|v| v.checked_mul(dim))
            .ok_or_else(|| Error::Parse("ensemble dimensions overflow".into()))?;
        let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
            (0..n).map(|_| Ok(f64::from_le_bytes(take(&mut r)?))).collect()
        };
        let obs_grid = read_f64s(n_grid)?;
        let samples = read_f64s(count)?;
        Ok(Self::new(source, obs_grid, dim, n_paths, samples, seed))
    }
}
