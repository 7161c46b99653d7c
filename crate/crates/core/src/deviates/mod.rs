//! Random variate generation.
//!
//! Everything random in the crate flows through [`UniformSource`], which is
//! implemented both by the seeded generator [`RandomSource`] and by the
//! counter-keyed [`TupleHashStream`]. The latter lets independent workers
//! reproduce exactly the same deviates for a shared recursion node without
//! talking to each other.

mod binomial;
mod geometric;
mod hypergeometric;
mod logfact;
mod skip;

pub use binomial::{binomial, binomial_inversion, binomial_rejection, BINOMIAL_INVERSION_LIMIT};
pub use geometric::{geometric, Geometric};
pub use hypergeometric::{
    hypergeom_log_pmf, hypergeometric, hypergeometric_inversion, hypergeometric_rejection, HypergeomParams,
    HYPERGEOM_INVERSION_LIMIT,
};
pub use logfact::{ln_factorial, ln_factorial_ratio};
pub use skip::{skip_deviate, skip_deviate_inversion, skip_deviate_rejection, SkipSequence, SKIP_REJECTION_CROSSOVER};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{invalid, Result};

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

/// A stream of uniform 64-bit words plus the derived uniform deviates.
pub trait UniformSource {
    fn next_u64(&mut self) -> u64;

    /// Uniform real in `[0, 1)` with 53 bits of precision. Consumes one word.
    fn uniform_real(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Uniform real in the open interval `(0, 1)`. Consumes one word.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Uniform integer in `0..bound` without modulo bias (`bound >= 1`).
    ///
    /// Multiply-shift with rejection of the short zone.
    fn uniform_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut m = self.next_u64() as u128 * bound as u128;
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                m = self.next_u64() as u128 * bound as u128;
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform integer in the inclusive range `lo..=hi`.
    fn uniform_int(&mut self, lo: u64, hi: u64) -> Result<u64> {
        if lo > hi {
            return invalid(format!("empty integer range {lo}..={hi}"));
        }
        let span = hi - lo;
        if span == u64::MAX {
            return Ok(self.next_u64());
        }
        Ok(lo + self.uniform_below(span + 1))
    }
}

impl<T: UniformSource + ?Sized> UniformSource for &mut T {
    fn next_u64(&mut self) -> u64 {
        (**self).next_u64()
    }
}

impl<T: UniformSource + ?Sized> UniformSource for Box<T> {
    fn next_u64(&mut self) -> u64 {
        (**self).next_u64()
    }
}

/// Seeded pseudorandom generator (xoshiro256++, period 2^256 - 1).
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: Xoshiro256PlusPlus,
    seed: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl UniformSource for RandomSource {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Wraps a source and counts the 64-bit words drawn from it.
#[derive(Debug, Clone)]
pub struct CountingSource<S> {
    inner: S,
    words: u64,
}

impl<S: UniformSource> CountingSource<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, words: 0 }
    }

    pub fn words(&self) -> u64 {
        self.words
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: UniformSource> UniformSource for CountingSource<S> {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.words += 1;
        self.inner.next_u64()
    }
}

const HASH_INIT: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed 64-bit hash of the tuple `(lo, hi, t)` under `master_seed`.
///
/// Each word is folded into the state through a full-avalanche finalizer, so
/// a change in any input bit randomizes every output bit.
#[inline]
pub fn tuple_hash(master_seed: u64, lo: u64, hi: u64, t: u64) -> u64 {
    let mut h = mix64(master_seed ^ HASH_INIT);
    h = mix64(h ^ lo);
    h = mix64(h.wrapping_add(HASH_INIT) ^ hi);
    mix64(h.wrapping_add(HASH_INIT) ^ t)
}

/// Deviate stream whose `t`-th word is `tuple_hash(seed, lo, hi, t)`.
///
/// Any worker that knows the key `(seed, lo, hi)` sees the same stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleHashStream {
    master_seed: u64,
    lo: u64,
    hi: u64,
    counter: u64,
}

impl TupleHashStream {
    pub fn new(master_seed: u64, lo: u64, hi: u64) -> Self {
        Self {
            master_seed,
            lo,
            hi,
            counter: 0,
        }
    }

    /// Starts the stream at counter `start` instead of 0.
    pub fn with_counter(mut self, start: u64) -> Self {
        self.counter = start;
        self
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Value at position `t`, independent of the stream's current position.
    pub fn at(&self, t: u64) -> u64 {
        tuple_hash(self.master_seed, self.lo, self.hi, t)
    }
}

impl UniformSource for TupleHashStream {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        let v = self.at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_equal_sequences() {
        let mut a = RandomSource::new(17);
        let mut b = RandomSource::new(17);
        for _ in 0..1000 {
            assert_eq!(a.uniform_real().to_bits(), b.uniform_real().to_bits());
        }
    }

    #[test]
    fn uniform_real_in_unit_interval() {
        let mut src = RandomSource::new(3);
        for _ in 0..10_000 {
            let u = src.uniform_real();
            assert!((0.0..1.0).contains(&u));
            let v = src.uniform_open();
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn uniform_int_edges() {
        let mut src = RandomSource::new(5);
        assert_eq!(src.uniform_int(5, 5).unwrap(), 5);
        assert!(src.uniform_int(6, 5).is_err());
        for _ in 0..1000 {
            let v = src.uniform_int(1, 1 << 40).unwrap();
            assert!((1..=1 << 40).contains(&v));
        }
        // full range does not overflow
        src.uniform_int(0, u64::MAX).unwrap();
    }

    #[test]
    fn stream_is_position_independent() {
        let s = TupleHashStream::new(99, 3, 7);
        let mut forward = s;
        let seq: Vec<u64> = (0..50).map(|_| forward.next_u64()).collect();
        for t in (0..50).rev() {
            assert_eq!(s.at(t), seq[t as usize]);
        }
        let mut skipped = s.with_counter(20);
        assert_eq!(skipped.next_u64(), seq[20]);
        assert_eq!(forward.counter(), 50);
    }

    #[test]
    fn tuple_hash_deterministic_and_key_sensitive() {
        assert_eq!(tuple_hash(1, 2, 3, 4), tuple_hash(1, 2, 3, 4));
        assert_ne!(tuple_hash(1, 2, 3, 4), tuple_hash(1, 3, 2, 4));
        assert_ne!(tuple_hash(1, 2, 3, 4), tuple_hash(2, 2, 3, 4));
    }
}
