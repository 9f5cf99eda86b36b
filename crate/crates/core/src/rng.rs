//! The per-chain random number generator.
//!
//! Every stochastic operation takes the chain's generator explicitly. The
//! algorithm is fixed to ChaCha8 so that a seed, or a serialized generator in
//! a checkpoint, reproduces a run bit for bit.

use rand::SeedableRng;

pub type ChainRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}

/// Derives an independent generator for a numbered substream of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChainRng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}
