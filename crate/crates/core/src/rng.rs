//! Counter-based random draws keyed by `(seed, stream, index, lane)`.
//!
//! Every draw position is addressed directly instead of advancing a shared
//! generator, so per-frame values do not depend on evaluation order and can
//! be produced in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Distinct streams for the different consumers of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    RandomMotion = 1,
    HumanParams = 2,
    HumanNoise = 3,
    SpinNoise = 4,
    Btf = 5,
    Queries = 6,
    MotionChoice = 7,
    Sample = 8,
    SynthNoise = 9,
}

/// Words reserved per `(index, lane)` slot.
const SLOT_WORDS: u128 = 64;
const LANES: u128 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyedRng {
    seed: u64,
}

impl KeyedRng {
    pub fn new(seed: u64) -> Self {
        KeyedRng { seed }
    }

    /// Generator positioned at slot `(index, lane)` of `stream`.
    ///
    /// `lane` must be below 16. Each slot holds 32 `u64` draws before it runs
    /// into the next one.
    pub fn at(&self, stream: Stream, index: u64, lane: u64) -> ChaCha8Rng {
        debug_assert!((lane as u128) < LANES);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream as u64);
        rng.set_word_pos((index as u128 * LANES + lane as u128) * SLOT_WORDS);
        rng
    }

    /// Uniform in `[lo, hi)`; returns `lo` when the interval is empty.
    pub fn uniform(&self, stream: Stream, index: u64, lane: u64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + (hi - lo) * self.at(stream, index, lane).random::<f64>()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn integer(&self, stream: Stream, index: u64, lane: u64, lo: i64, hi: i64) -> i64 {
        self.at(stream, index, lane).random_range(lo..=hi)
    }

    /// Normal with mean 0 and standard deviation `sigma`.
    pub fn normal(&self, stream: Stream, index: u64, lane: u64, sigma: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.at(stream, index, lane));
        sigma * z
    }

    /// Derives an independent seed, e.g. one per dataset sample.
    pub fn derive(&self, index: u64) -> u64 {
        self.at(Stream::Sample, index, 0).random::<u64>()
    }
}
