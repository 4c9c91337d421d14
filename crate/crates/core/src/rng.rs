// SPDX-License-Identifier: Apache-2.0
//! Reproducible per-replica random streams.
//!
//! Every replica owns a PCG-XSL-RR 128/64 generator (`rand_pcg::Pcg64`)
//! seeded from `seed ^ splitmix64(replica_index)`. The stream of a replica
//! depends only on the pair, so ensembles can be run in any order or in
//! parallel. Floats and exponential variates are derived here rather than
//! through `rand`'s distribution traits so the mapping from raw bits stays
//! fixed across dependency upgrades.

use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg64;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed actually fed to the generator of `replica_index`.
#[inline]
pub fn stream_seed(seed: u64, replica_index: u64) -> u64 {
    seed ^ splitmix64(replica_index)
}

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: Pcg64,
}

impl SimRng {
    pub fn from_stream_seed(stream: u64) -> Self {
        SimRng { inner: Pcg64::seed_from_u64(stream) }
    }

    pub fn for_replica(seed: u64, replica_index: u64) -> Self {
        Self::from_stream_seed(stream_seed(seed, replica_index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential variate by inverse CDF, `-ln(1 - u) / rate`.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Uniform integer in `0..n` (rejection sampling, unbiased). `n > 0`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }
}
