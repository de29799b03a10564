//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! pair `(seed, stream)` and positioned on the ChaCha stream `replication`.
//! Replication `r` therefore sees the same numbers no matter how many other
//! replications run, or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream identifiers, one per consumer.
pub mod streams {
    pub const NOISE: u64 = 1;
    pub const CONVERGENCE: u64 = 2;
    pub const PULLBACK: u64 = 3;
    pub const ERGODIC: u64 = 4;
    pub const HITTING: u64 = 5;
    pub const ESTIMATE: u64 = 6;
    pub const DENSITY: u64 = 7;
    pub const DENSITY_MEHLER: u64 = 8;
    pub const DENSITY_HISTOGRAM: u64 = 9;
    pub const HESTON: u64 = 10;
    pub const COUPLED: u64 = 11;
    pub const CONTRACTION: u64 = 12;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `(seed, stream, replication)`.
pub fn stream_rng(seed: u64, stream: u64, replication: u64) -> ChaCha8Rng {
    let mut state = seed ^ stream.rotate_left(32);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replication);
    rng
}

pub fn standard_normals<R: rand::Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}
