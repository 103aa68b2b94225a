//! Seed derivation.
//!
//! Every random draw goes through [`ChaCha20Rng`], a counter-based generator
//! whose output stream is fixed by its 64-bit seed. Per-trial seeds are a
//! SplitMix64 chain over the base seed and the grid coordinates, so a trial's
//! data does not depend on which worker runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `h = sm(base); h = sm(h ^ δ-index); h = sm(h ^ ρ-index); h = sm(h ^ trial)`.
pub fn trial_seed(base: u64, delta_index: usize, rho_index: usize, trial: usize) -> u64 {
    [delta_index as u64, rho_index as u64, trial as u64]
        .into_iter()
        .fold(splitmix64(base), |h, i| splitmix64(h ^ i))
}

/// Seed for the `attempt`-th redraw of a degenerate instance.
pub fn redraw_seed(seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        seed
    } else {
        splitmix64(seed ^ (u64::from(attempt) << 32))
    }
}

pub fn generator(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
