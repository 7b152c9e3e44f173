use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seedable random generator with a platform-stable stream: the same seed
/// yields the same draws on every platform, which underpins the
/// reproducible-training and deterministic-initialization contracts.
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.random_range(lo..hi)
    }

    /// Fisher-Yates shuffle driven by this generator.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.inner.random_range(0..=i);
            items.swap(i, j);
        }
    }

    /// Derives an independent generator, used to give each initialization
    /// site its own stream.
    pub fn fork(&mut self, label: u64) -> SeededRng {
        let seed = self.inner.random::<u64>() ^ label;
        SeededRng::new(seed)
    }
}

/// FNV-1a 64-bit hash. Stable across platforms and trivially re-derivable,
/// which is what the deterministic hash initializer and the config hash need.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
