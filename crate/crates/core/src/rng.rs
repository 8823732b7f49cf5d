//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 keystream: the key is derived from the master
//! seed and a component tag, the 64-bit stream id is the replica index, and
//! the block counter is the draw index. Two replicas therefore never share
//! keystream blocks, and a replica's draws do not depend on how replicas are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// Tags used to separate the random sources that make up one replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Component {
    Forward = 1,
    Left = 2,
    Tail = 3,
    Gaussian = 4,
    Other = 5,
}

impl RngSeed {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn with_stream(self, stream_index: u64) -> Self {
        Self {
            stream_index,
            ..self
        }
    }

    /// Generator for the given component of this replica.
    pub fn rng(&self, component: Component) -> ChaCha8Rng {
        self.rng_tagged(component as u64)
    }

    /// Generator for an arbitrary 64-bit tag.
    pub fn rng_tagged(&self, tag: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.master_seed ^ tag.wrapping_mul(0xA076_1D64_78BD_642F);
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
