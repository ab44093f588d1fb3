//! Counter-based random streams.
//!
//! A stream is addressed by `(master_seed, purpose_id, block_index)` and its
//! sample sequence is a pure function of that triple: the three words become the
//! ChaCha8 key. Work is cut into fixed blocks before it is handed to threads, so
//! results never depend on how blocks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub purpose_id: u64,
    pub block_index: u64,
}

/// Purpose identifiers used by the library. Callers may use any other values.
pub mod purpose {
    pub const SPHERE: u64 = 1;
    pub const GROWTH: u64 = 2;
    pub const REGION: u64 = 3;
    pub const ARITH: u64 = 4;
    pub const PSH: u64 = 5;
    pub const VOLUME: u64 = 6;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, purpose_id: u64) -> Self {
        Self {
            master_seed,
            purpose_id,
            block_index: 0,
        }
    }

    pub fn with_block(self, block_index: u64) -> Self {
        Self {
            block_index,
            ..self
        }
    }

    /// A child stream for sub-block `index` of this block. Children of distinct
    /// parents or distinct indices are distinct streams.
    pub fn split(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            purpose_id: splitmix64(self.purpose_id ^ splitmix64(self.block_index)),
            block_index: index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.purpose_id.to_le_bytes());
        seed[16..24].copy_from_slice(&self.block_index.to_le_bytes());
        seed[24..32].copy_from_slice(b"nevorder");
        ChaCha8Rng::from_seed(seed)
    }
}
