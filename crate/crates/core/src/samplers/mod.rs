//! Sequential samplers.
//!
//! Without replacement: selection sampling ([`sample_s`]), hashing
//! ([`sample_h`]), skip-based sorted sampling ([`sample_d`]), Bernoulli with
//! repair ([`sample_b`]) and divide-and-conquer ([`sample_r`], plus the online
//! [`sample_r_online`]). Also Bernoulli sampling and sampling with
//! replacement.
//!
//! Samplers work on a [`UniverseRange`] and return absolute values
//! `offset..offset + size`.

mod bernoulli;
mod recursive;
mod sequential;
mod table;

pub use bernoulli::{bernoulli_prefix_sum, bernoulli_prefix_sum_with_block, bernoulli_skip};
pub use recursive::{
    sample_r, sample_r_online, sample_r_with_stats, sample_with_replacement, RecursionStats, SampleBatchIterator,
};
pub use sequential::{
    default_oversampling, sample_b, sample_b_with, sample_d, sample_h, sample_s, RepairStats, SampleD,
};
pub use table::{HashSampleTable, EMPTY};

use crate::error::{invalid, Result};

/// The integers `offset..offset + size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UniverseRange {
    pub offset: u64,
    pub size: u64,
}

impl UniverseRange {
    pub fn new(offset: u64, size: u64) -> Result<Self> {
        if size > 0 && offset.checked_add(size - 1).is_none() {
            return invalid(format!("range of {size} starting at {offset} overflows"));
        }
        Ok(Self { offset, size })
    }

    /// `1..=n`.
    pub fn one_to(n: u64) -> Self {
        Self { offset: 1, size: n }
    }

    /// Last element, `None` when empty.
    pub fn last(&self) -> Option<u64> {
        (self.size > 0).then(|| self.offset + (self.size - 1))
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= self.offset && x - self.offset < self.size
    }

    /// The first `len` elements.
    pub fn prefix(&self, len: u64) -> Self {
        Self {
            offset: self.offset,
            size: len.min(self.size),
        }
    }

    /// Everything after the first `len` elements.
    pub fn suffix(&self, len: u64) -> Self {
        let len = len.min(self.size);
        Self {
            offset: self.offset + len,
            size: self.size - len,
        }
    }

    pub(crate) fn check_count(&self, n: u64) -> Result<()> {
        if n > self.size {
            return invalid(format!("cannot draw {n} distinct values from {} elements", self.size));
        }
        Ok(())
    }
}

/// Tuning shared by the samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Subproblems with fewer samples go to the hashing sampler.
    pub base_case: u64,
    /// Hash table slots for the base case; a power of two.
    pub table_capacity: usize,
    pub seed: u64,
    pub sorted_output: bool,
}

pub const DEFAULT_BASE_CASE: u64 = 1 << 9;
pub const DEFAULT_TABLE_CAPACITY: usize = 1 << 12;

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            base_case: DEFAULT_BASE_CASE,
            table_capacity: DEFAULT_TABLE_CAPACITY,
            seed: 0,
            sorted_output: false,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn sorted(mut self, sorted: bool) -> Self {
        self.sorted_output = sorted;
        self
    }

    pub fn base_case(mut self, n0: u64) -> Self {
        self.base_case = n0;
        self
    }

    pub fn table_capacity(mut self, m: usize) -> Self {
        self.table_capacity = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_case < 1 {
            return invalid("base case size must be at least 1");
        }
        if !self.table_capacity.is_power_of_two() {
            return invalid(format!("table capacity {} is not a power of two", self.table_capacity));
        }
        if (self.table_capacity as u128) < 2 * self.base_case as u128 {
            return invalid(format!(
                "table capacity {} below twice the base case {}",
                self.table_capacity, self.base_case
            ));
        }
        Ok(())
    }
}

/// Samples `n` values by sampling the at most `size / 2` values left out
/// when `n` is more than half the range. `sampler` receives the count to
/// draw. The result is sorted whenever the complement was used.
pub fn sample_complement<F>(n: u64, range: UniverseRange, mut sampler: F) -> Result<Vec<u64>>
where
    F: FnMut(u64, UniverseRange) -> Result<Vec<u64>>,
{
    range.check_count(n)?;
    if n <= range.size / 2 {
        return sampler(n, range);
    }
    let mut excluded = sampler(range.size - n, range)?;
    excluded.sort_unstable();
    let mut out = Vec::with_capacity(n as usize);
    let mut skip = excluded.iter().peekable();
    for x in range.offset..range.offset + range.size {
        if skip.peek() == Some(&&x) {
            skip.next();
        } else {
            out.push(x);
        }
    }
    Ok(out)
}

/// True if `values` are pairwise distinct and inside `range`.
pub fn is_valid_sample(values: &[u64], range: UniverseRange) -> bool {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] < w[1]) && sorted.iter().all(|&x| range.contains(x))
}
