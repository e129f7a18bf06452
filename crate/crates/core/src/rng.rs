//! Seed derivation.
//!
//! Each run gets a 64-bit key mixed from `(master_seed, run)`; each consumer
//! inside the run reads a separate ChaCha stream of that key. Streams are
//! disjoint, so the instance, the preference noise, and every sampler chain
//! are independent of one another and of the algorithm being run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Purpose of a random stream within one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Instance = 0,
    Feedback = 1,
    Agent = 2,
    ChainOne = 3,
    ChainTwo = 4,
    ArmResample = 5,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Key for run `run` under `master_seed`.
pub fn run_key(master_seed: u64, run: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ splitmix64(run.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Generator for one stream of a run key.
pub fn stream_rng(key: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream as u64);
    rng
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
