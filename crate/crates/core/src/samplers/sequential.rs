use super::bernoulli::bernoulli_skip;
use super::recursive::sample_r;
use super::table::HashSampleTable;
use super::{SamplerConfig, UniverseRange};
use crate::deviates::{SkipSequence, UniformSource};
use crate::error::{invalid, Result};

/// Selection sampling: scans the range once, taking each element with
/// probability (still needed) / (still unseen). Sorted, `Theta(N)` time.
pub fn sample_s<S: UniformSource + ?Sized>(n: u64, range: UniverseRange, src: &mut S) -> Result<Vec<u64>> {
    range.check_count(n)?;
    let mut out = Vec::with_capacity(n as usize);
    let mut chosen = 0;
    let mut i = 0;
    while chosen < n {
        if src.uniform_below(range.size - i) < n - chosen {
            out.push(range.offset + i);
            chosen += 1;
        }
        i += 1;
    }
    Ok(out)
}

/// Hashing sampler reused across calls: one table, cleared after each
/// sample, grown on demand.
#[derive(Debug, Clone)]
pub(crate) struct BaseSampler {
    table: HashSampleTable,
}

impl BaseSampler {
    pub(crate) fn new(capacity: usize, max_n: u64, sorted: bool) -> Self {
        Self {
            table: HashSampleTable::new(capacity, max_n as usize, sorted),
        }
    }

    fn reserve(&mut self, n: u64) {
        let n = n as usize;
        let cap = self.table.capacity();
        let too_small = 2 * n > cap || (self.table.is_sorted_mode() && self.table.overflow() < n);
        if too_small {
            let cap = cap.max((2 * n).next_power_of_two());
            self.table = HashSampleTable::new(cap, n.max(self.table.overflow()), self.table.is_sorted_mode());
        }
    }

    /// Appends `n` distinct values of `range` to `out`, drawing fresh uniform
    /// keys until `n` of them are new.
    pub(crate) fn sample_into<S: UniformSource + ?Sized>(
        &mut self,
        n: u64,
        range: UniverseRange,
        src: &mut S,
        out: &mut Vec<u64>,
    ) {
        if n == 0 {
            return;
        }
        self.reserve(n);
        self.table.set_universe(range.size);
        let mut inserted = 0;
        while inserted < n {
            if self.table.insert(src.uniform_below(range.size)) {
                inserted += 1;
            }
        }
        let offset = range.offset;
        self.table.drain_into(out, |k| offset + k);
    }
}

/// Hashing sampler: draws uniform positions and rejects repeats using a
/// linear-probing table. Expected `O(n)` for `n <= N/2`.
///
/// The table has `max(m, 2n rounded up to a power of two)` slots.
pub fn sample_h<S: UniformSource + ?Sized>(
    n: u64,
    range: UniverseRange,
    src: &mut S,
    cfg: &SamplerConfig,
) -> Result<Vec<u64>> {
    range.check_count(n)?;
    cfg.validate()?;
    let mut out = Vec::with_capacity(n as usize);
    if n > 0 {
        let cap = cfg.table_capacity.max((2 * n as usize).next_power_of_two());
        BaseSampler::new(cap, n, cfg.sorted_output).sample_into(n, range, src, &mut out);
    }
    Ok(out)
}

/// Online sorted sampler driven by skip deviates. Holds `O(1)` state.
#[derive(Debug, Clone)]
pub struct SampleD<S> {
    skips: SkipSequence,
    next: u64,
    offset: u64,
    src: S,
}

/// Iterator over `n` increasing samples of `range`.
pub fn sample_d<S: UniformSource>(n: u64, range: UniverseRange, src: S) -> Result<SampleD<S>> {
    range.check_count(n)?;
    Ok(SampleD {
        skips: SkipSequence::new(n, range.size)?,
        next: 0,
        offset: range.offset,
        src,
    })
}

impl<S: UniformSource> SampleD<S> {
    pub fn remaining(&self) -> u64 {
        self.skips.remaining()
    }
}

impl<S: UniformSource> Iterator for SampleD<S> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let s = self.skips.next_skip(&mut self.src)?;
        let pos = self.next + s;
        self.next = pos + 1;
        Some(self.offset + pos)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.skips.remaining() as usize;
        (r, Some(r))
    }
}

/// How often [`sample_b_with`] had to start over and how many surplus
/// samples it removed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairStats {
    pub restarts: u32,
    pub removed: u64,
}

/// `(n + 3 sqrt(n)) / N`, capped at 1.
pub fn default_oversampling(n: u64, size: u64) -> f64 {
    let nf = n as f64;
    ((nf + 3.0 * nf.sqrt()) / size as f64).min(1.0)
}

/// Bernoulli sampling with repair: samples at a rate slightly above `n/N`,
/// starts over on a shortfall and otherwise removes the surplus, choosing
/// the positions to drop with [`sample_r`]. Output is sorted.
pub fn sample_b<S: UniformSource + ?Sized>(n: u64, range: UniverseRange, src: &mut S) -> Result<Vec<u64>> {
    let size = range.size;
    sample_b_with(n, range, src, |_| default_oversampling(n, size)).map(|(v, _)| v)
}

/// [`sample_b`] with the sampling rate for each attempt supplied by `rate`.
pub fn sample_b_with<S, F>(n: u64, range: UniverseRange, src: &mut S, mut rate: F) -> Result<(Vec<u64>, RepairStats)>
where
    S: UniformSource + ?Sized,
    F: FnMut(u32) -> f64,
{
    range.check_count(n)?;
    let mut stats = RepairStats::default();
    if n == 0 {
        return Ok((Vec::new(), stats));
    }
    let mut attempt = 0u32;
    let sample = loop {
        let rho = rate(attempt);
        if !(rho > 0.0 && rho <= 1.0) {
            return invalid(format!("oversampling rate {rho} outside (0, 1]"));
        }
        let s = bernoulli_skip(rho, range, src)?;
        if s.len() as u64 >= n {
            break s;
        }
        attempt += 1;
        stats.restarts += 1;
    };
    let surplus = sample.len() as u64 - n;
    if surplus == 0 {
        return Ok((sample, stats));
    }
    stats.removed = surplus;
    let cfg = SamplerConfig::default().sorted(true);
    let drop = sample_r(surplus, UniverseRange::new(0, sample.len() as u64)?, src, &cfg)?;
    let mut out = Vec::with_capacity(n as usize);
    let mut drop = drop.into_iter().peekable();
    for (i, x) in sample.into_iter().enumerate() {
        if drop.peek() == Some(&(i as u64)) {
            drop.next();
        } else {
            out.push(x);
        }
    }
    Ok((out, stats))
}
