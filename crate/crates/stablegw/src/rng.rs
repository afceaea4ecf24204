//! Splittable random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] selected by a
//! root seed and a structured key, so results never depend on which worker
//! thread happens to run a given replica or pool block.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// A root seed from which independent keyed streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for a key made of a tag and up to two indices.
    pub fn stream(&self, tag: u64, a: u64, b: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let key = splitmix(splitmix(splitmix(tag) ^ a) ^ b.rotate_left(17));
        rng.set_stream(key);
        rng
    }

    /// A child family of streams, for nesting one experiment inside another.
    pub fn derive(&self, tag: u64, index: u64) -> Streams {
        Streams {
            seed: splitmix(splitmix(self.seed ^ splitmix(tag)) ^ index),
        }
    }
}

/// Stream tags used across modules.
pub mod tag {
    pub const POOL_C: u64 = 1;
    pub const POOL_W: u64 = 2;
    pub const POOL_CHAT: u64 = 3;
    pub const READOUT: u64 = 4;
    pub const REPLICA: u64 = 5;
    pub const ESTIMATOR: u64 = 6;
    pub const DIAGNOSTIC: u64 = 7;
}
