use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Portable seeded generator shared by every randomized stage.
pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
