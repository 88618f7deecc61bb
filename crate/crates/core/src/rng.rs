//! Seeded randomness. Every random draw in the crate goes through an
//! explicitly seeded ChaCha stream; independent cases use distinct streams
//! of the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type CaseRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> CaseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> CaseRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
