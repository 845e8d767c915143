//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 (`rand_chacha`), whose
//! output stream is fixed by its algorithm and therefore identical across
//! platforms. Uniform reals use `rand`'s 53-bit mantissa construction and
//! normals use `rand_distr::StandardNormal`; both are pinned by the
//! manifest versions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream derived from `seed` for a named purpose, so that adding
/// draws to one component never shifts another.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
