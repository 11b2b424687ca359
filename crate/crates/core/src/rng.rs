//! Reproducible per-path random streams.
//!
//! Each path gets a ChaCha8 generator keyed by the master seed and a domain
//! tag, with the path index selecting the ChaCha stream. Streams are a pure
//! function of `(master_seed, domain, index)`, so results do not depend on
//! which worker runs which path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

/// Domain tags keep jump and diffusion ensembles built from the same
/// master seed statistically independent.
pub mod domain {
    pub const JUMP: u64 = 0x4a55_4d50;
    pub const LANGEVIN: u64 = 0x4c41_4e47;
    pub const AUX: u64 = 0x4155_5821;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_rng(master_seed: u64, domain: u64, index: u64) -> PathRng {
    let key = splitmix64(master_seed ^ splitmix64(domain));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}
