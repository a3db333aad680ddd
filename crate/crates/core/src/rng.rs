//! Reproducible per-replicate random streams.
//!
//! A stream is a ChaCha8 generator keyed by a SplitMix64 expansion of the base
//! seed, with the replicate index selecting the ChaCha stream id. Distinct
//! stream ids address disjoint keystreams, so replicates never share draws,
//! and ChaCha output is defined bit-for-bit independent of platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Scalar;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Deterministic random stream identified by `(base_seed, stream)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    base_seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(base_seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key_from_seed(base_seed));
        rng.set_stream(stream);
        Self {
            base_seed,
            stream,
            rng,
        }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A sibling stream for an additional independent component (for example
    /// the second chain of a product model). Component 0 is the stream itself,
    /// reset to its start.
    pub fn component(&self, component: u64) -> Self {
        if component == 0 {
            return Self::new(self.base_seed, self.stream);
        }
        let mut state = self.base_seed ^ component.wrapping_mul(GOLDEN);
        Self::new(splitmix64(&mut state), self.stream)
    }

    pub fn standard_normal<T: Scalar>(&mut self) -> T {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        T::lit(z)
    }

    pub fn normal<T: Scalar>(&mut self, mean: T, sd: T) -> T {
        mean + sd * self.standard_normal::<T>()
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform<T: Scalar>(&mut self) -> T {
        T::lit(self.rng.random::<f64>())
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Stream for replicate `replicate` under `base_seed`.
pub fn derive_stream(base_seed: u64, replicate: u64) -> RngStream {
    RngStream::new(base_seed, replicate)
}
