//! Counter-based random streams.
//!
//! Every stochastic step in the toolkit draws from a stream keyed by
//! `(seed, label, counter)` rather than from a shared generator, so results
//! do not depend on evaluation order or thread layout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derives a 64-bit seed from a global seed, an item id and a stage name.
pub fn hash64(global_seed: u64, item_id: &str, stage: &str) -> u64 {
    let a = fnv1a64(item_id.as_bytes());
    let b = fnv1a64(stage.as_bytes());
    mix64(mix64(global_seed ^ GOLDEN) ^ a.rotate_left(17) ^ mix64(b))
}

/// Stateless counter-based generator: `at(i)` is a pure function of the
/// key and `i`.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64, label: &str) -> Self {
        Self {
            key: mix64(seed.wrapping_add(GOLDEN) ^ fnv1a64(label.as_bytes())),
        }
    }

    #[inline]
    pub fn u64_at(&self, counter: u64) -> u64 {
        mix64(self.key ^ mix64(counter.wrapping_mul(GOLDEN).wrapping_add(0xD134_2543_DE82_EF95)))
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn open01_at(&self, counter: u64) -> f64 {
        ((self.u64_at(counter) >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    /// A pair of independent standard normals for `counter` (Box-Muller).
    #[inline]
    pub fn normal_pair_at(&self, counter: u64) -> (f64, f64) {
        let u1 = self.open01_at(counter.wrapping_mul(2));
        let u2 = self.open01_at(counter.wrapping_mul(2).wrapping_add(1));
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

/// Sequential generator for stages that consume a variable number of draws.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
