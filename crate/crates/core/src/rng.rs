//! Seed derivation for independent random streams.
//!
//! Every stochastic step (split, VFC evolution, request draws, fading,
//! random baseline) pulls from its own stream derived from the master seed,
//! a purpose tag and up to two indices. Changing one knob, e.g. the platoon
//! cache size, therefore never perturbs the draws of an unrelated step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for derived streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Split = 1,
    InitialVfc = 2,
    VfcVehicle = 3,
    VfcAdvance = 4,
    Requests = 5,
    Fading = 6,
    RandomPolicy = 7,
    Mock = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the master seed with a tag and two indices into a stream seed.
pub fn derive_seed(seed: u64, stream: Stream, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(seed ^ 0x5EED_0000_0000_0000);
    h = splitmix64(h ^ stream as u64);
    h = splitmix64(h ^ a);
    splitmix64(h ^ b.rotate_left(32))
}

pub fn stream_rng(seed: u64, stream: Stream, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, a, b))
}
