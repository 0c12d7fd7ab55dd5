//! Deterministic random source.
//!
//! Every random decision in the toolkit is drawn from [`Rng`], a ChaCha8
//! stream cipher keyed by `seed_from_u64(seed)` with the ChaCha stream id set
//! to a caller-chosen stream number. Corpus-level operations give every item
//! (document, sentence pair) its own stream, so output does not depend on how
//! work is split across threads.
//!
//! Integer and float draws are derived from raw 64-bit words by the routines
//! below rather than by a distribution library, so the mapping from seed to
//! output is fixed by this file alone.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Name recorded in metadata sidecars.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64/stream=item-index";

/// Largest Poisson mean sampled in one piece; larger means are split into
/// independent pieces whose sum has the same distribution.
const POISSON_CHUNK: f64 = 30.0;

#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::for_stream(seed, 0)
    }

    /// Independent stream `stream` under `seed`.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n` (Lemire's multiply-and-reject). `n` must be > 0.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "Rng::below called with n = 0");
        let n = n as u64;
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Poisson-distributed count with mean `lambda` (> 0), by sequential
    /// inversion of the CDF.
    pub fn poisson(&mut self, lambda: f64) -> usize {
        debug_assert!(lambda > 0.0 && lambda.is_finite());
        let pieces = (lambda / POISSON_CHUNK).ceil().max(1.0);
        let piece_lambda = lambda / pieces;
        (0..pieces as usize).map(|_| self.poisson_small(piece_lambda)).sum()
    }

    fn poisson_small(&mut self, lambda: f64) -> usize {
        let u = self.unit();
        let mut p = (-lambda).exp();
        let mut cdf = p;
        let mut k = 0usize;
        // the cap only matters when rounding keeps the CDF just below u
        let cap = (lambda * 20.0) as usize + 100;
        while u >= cdf && k < cap {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
        }
        k
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, uniformly, in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }

    /// Index drawn with probability proportional to `weights[i]`.
    /// Returns `None` when every weight is zero.
    pub fn weighted_index(&mut self, weights: &[u32]) -> Option<usize> {
        let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
        if total == 0 {
            return None;
        }
        let mut x = self.below(total as usize) as u64;
        for (i, &w) in weights.iter().enumerate() {
            let w = u64::from(w);
            if x < w {
                return Some(i);
            }
            x -= w;
        }
        unreachable!("weighted draw fell outside total")
    }
}
