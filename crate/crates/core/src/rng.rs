//! Purpose-separated random streams.
//!
//! A run owns one master seed. Every consumer of randomness asks for a stream
//! keyed by `(purpose, index)`, so the arrival process of user 3 never depends
//! on how many channel coefficients a scheduler happened to look at.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for. The discriminant lands in the top byte
/// of the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    /// One stream per `(frame, user)` channel row.
    Channel = 1,
    /// One stream per user, consumed one draw per slot.
    Arrivals = 2,
    /// One stream per frame for randomized policies.
    Policy = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    master: u64,
}

impl StreamFactory {
    pub fn new(master: u64) -> Self {
        StreamFactory { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Independent generator for `(purpose, index)`. `index` must fit in 56 bits.
    pub fn stream(&self, purpose: Purpose, index: u64) -> ChaCha8Rng {
        debug_assert!(index < (1 << 56));
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(((purpose as u64) << 56) | index);
        rng
    }

    /// Stream for the channel row of `user` in frame `frame`.
    pub fn channel_row(&self, frame: u64, user: usize) -> ChaCha8Rng {
        self.stream(Purpose::Channel, (frame << 16) | user as u64)
    }
}

/// SplitMix64 finaliser; used to derive per-run seeds in a sweep.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
