//! Deterministic random streams.
//!
//! Every stochastic routine takes a [`SeedStream`]: a user seed plus a
//! stream id. Sub-streams are derived by mixing an index into the stream id,
//! so batch `k` of a run always sees the same numbers no matter which worker
//! thread executes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    pub seed: u64,
    pub stream: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Child stream `index`; distinct indices give unrelated generators.
    pub fn substream(self, index: u64) -> Self {
        let stream = splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x5bd1_e995)));
        Self { seed: self.seed, stream }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
