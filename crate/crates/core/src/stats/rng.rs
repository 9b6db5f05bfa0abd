//! Counter-based random streams.
//!
//! A [`RngStream`] is a value: `(master_seed, stream_id)`. Materializing it
//! with [`RngStream::rng`] yields a ChaCha12 generator keyed by the master
//! seed and positioned on the ChaCha stream `stream_id`, so distinct ids give
//! non-overlapping keystreams without any shared state.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// A reproducible, independently splittable source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// A child stream identified by `label`.
    ///
    /// Children of the same parent with different labels are distinct, and a
    /// child never coincides with its parent except with probability 2^-64.
    pub fn substream(&self, label: u64) -> RngStream {
        let mixed = splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x5bd1_e995)));
        RngStream::new(self.master_seed, mixed)
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in seed.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
        }
        let mut inner = ChaCha12Rng::from_seed(seed);
        inner.set_stream(self.stream_id);
        StreamRng(inner)
    }
}

/// Generator materialized from a [`RngStream`].
#[derive(Debug, Clone)]
pub struct StreamRng(ChaCha12Rng);

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
