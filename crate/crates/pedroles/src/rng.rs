//! Seeded pseudorandom generation.
//!
//! Everything random in this crate (k-means++ seeding, mini-batch sampling,
//! fold shuffling, forest bootstraps, the hashing encoder's sign/bucket mix)
//! flows through SplitMix64 so that a run is bit-for-bit reproducible from a
//! single seed, independent of platform or crate versions.

/// SplitMix64 generator (Steele, Lea & Flood; also used as the seeder in
/// `java.util.SplittableRandom`). State advances by a fixed odd constant and
/// each output is a finalizer over the new state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.state)
    }

    /// Uniform draw in `[0, bound)` by 128-bit widening multiply.
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0, "next_below requires a positive bound");
        (((self.next_u64() as u128) * (bound as u128)) >> 64) as usize
    }

    /// Uniform f64 in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }

    /// `m` distinct indices out of `0..n`, in draw order (partial Fisher-Yates).
    pub fn sample_indices(&mut self, n: usize, m: usize) -> Vec<usize> {
        debug_assert!(m <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = i + self.next_below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(m);
        pool
    }
}

/// SplitMix64 output finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed for a named stream of a master seed.
///
/// Components of a run (fold plan, per-fold clustering, per-role forests, the
/// builtin encoder) each use their own stream so they stay reproducible in
/// isolation: `derive_seed(master, stream)` never collides across streams for
/// a fixed master.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    SplitMix64::new(master ^ stream.wrapping_mul(0xA076_1D64_78BD_642F)).next_u64()
}
