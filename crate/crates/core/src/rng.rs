//! Counter-based pseudo random numbers.
//!
//! Every draw is a pure function of `(seed, stream, counter, index)`, so a
//! simulation can be replayed from any round without carrying generator
//! state around, and the same stream can be reproduced in another language
//! with a few lines of code.
//!
//! The mixing function is the SplitMix64 finalizer (Steele, Lea & Flood,
//! "Fast splittable pseudorandom number generators", 2014):
//!
//! ```text
//! mix(x):  x += 0x9E3779B97F4A7C15
//!          x  = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
//!          x  = (x ^ (x >> 27)) * 0x94D049BB133111EB
//!          x  =  x ^ (x >> 31)
//! draw(seed, stream, counter, index) =
//!          mix(mix(mix(mix(seed) ^ stream) ^ counter) ^ index)
//! ```
//!
//! Integers in `[0, n)` use the multiply-shift reduction `(draw * n) >> 64`;
//! uniform reals in `[0, 1)` use the top 53 bits.

/// Named streams so that independent consumers never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u64)]
pub enum Stream {
    /// Client mini-batch indices.
    Batch = 1,
    /// Bernoulli snapshot decisions.
    Snapshot = 2,
    /// Row shuffling when partitioning data over nodes.
    Partition = 3,
    /// Synthetic data generation.
    Data = 4,
    /// Random test states, power-iteration starts and other diagnostics.
    Diagnostic = 5,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN_GAMMA);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A keyed view on the counter-based generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn draw(&self, stream: Stream, counter: u64, index: u64) -> u64 {
        let h = splitmix64(self.seed);
        let h = splitmix64(h ^ stream as u64);
        let h = splitmix64(h ^ counter);
        splitmix64(h ^ index)
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    #[inline]
    pub fn below(&self, stream: Stream, counter: u64, index: u64, n: usize) -> usize {
        debug_assert!(n > 0);
        let r = self.draw(stream, counter, index) as u128;
        ((r * n as u128) >> 64) as usize
    }

    /// Uniform real in `[0, 1)`.
    #[inline]
    pub fn uniform(&self, stream: Stream, counter: u64, index: u64) -> f64 {
        (self.draw(stream, counter, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; consumes draws `2*index` and `2*index + 1`.
    pub fn normal(&self, stream: Stream, counter: u64, index: u64) -> f64 {
        let u1 = self.uniform(stream, counter, 2 * index);
        let u2 = self.uniform(stream, counter, 2 * index + 1);
        // 1 - u1 lies in (0, 1], keeping the logarithm finite.
        let r = libm::sqrt(-2.0 * libm::log(1.0 - u1));
        r * libm::cos(core::f64::consts::TAU * u2)
    }

    /// Sequential cursor over one `(stream, counter)` lane.
    pub fn lane(&self, stream: Stream, counter: u64) -> Lane {
        Lane { rng: *self, stream, counter, next: 0 }
    }
}

/// Convenience cursor that hands out consecutive draw indices of one lane.
#[derive(Clone, Debug)]
pub struct Lane {
    rng: CounterRng,
    stream: Stream,
    counter: u64,
    next: u64,
}

impl Lane {
    pub fn next_u64(&mut self) -> u64 {
        let v = self.rng.draw(self.stream, self.counter, self.next);
        self.next += 1;
        v
    }

    pub fn below(&mut self, n: usize) -> usize {
        let v = self.rng.below(self.stream, self.counter, self.next, n);
        self.next += 1;
        v
    }

    pub fn uniform(&mut self) -> f64 {
        let v = self.rng.uniform(self.stream, self.counter, self.next);
        self.next += 1;
        v
    }

    pub fn normal(&mut self) -> f64 {
        let v = self.rng.normal(self.stream, self.counter, self.next);
        self.next += 1;
        v
    }

    /// Uniform real in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
