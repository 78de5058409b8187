//! Counter-based random streams.
//!
//! A stream is a pair `(key, counter)`; its `i`-th output is
//! `mix64(key + (i + 1) · γ)` with SplitMix64's finaliser `mix64` and increment `γ`.
//! Outputs therefore depend only on the key and the position, never on what other
//! streams did, which makes per-particle streams independent of scheduling.
//!
//! Keys are derived hierarchically: a replica key from `(seed, replica)` and a
//! child key from `(parent key, child index)`.

use rand_core::{impls, Error, RngCore};

/// Name recorded in output metadata.
pub const RNG_NAME: &str = "splitmix64-ctr (counter-based, key = mix64(parent ^ mix64(index + c)))";

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const CHILD_SALT: u64 = 0xd1b5_4a32_d192_ed03;
const REPLICA_SALT: u64 = 0x8cb9_2ba7_2f3d_8dd7;

/// SplitMix64 finaliser (a bijection on `u64`).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn from_key(key: u64) -> Self {
        Stream { key, counter: 0 }
    }

    /// Root stream of replica `replica` under `seed`.
    pub fn replica(seed: u64, replica: u64) -> Self {
        Stream::from_key(mix64(mix64(seed) ^ mix64(replica.wrapping_add(REPLICA_SALT))))
    }

    /// Fresh stream for the `index`-th child; independent of this stream's position.
    pub fn child(&self, index: u64) -> Self {
        Stream::from_key(mix64(self.key ^ mix64(index.wrapping_add(CHILD_SALT))))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
