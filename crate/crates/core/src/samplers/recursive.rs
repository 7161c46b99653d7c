use super::sequential::{sample_s, BaseSampler};
use super::{SamplerConfig, UniverseRange};
use crate::deviates::{binomial, hypergeometric, HypergeomParams, UniformSource};
use crate::error::{invalid, Result};

/// Shape of one divide-and-conquer run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecursionStats {
    /// Internal nodes, each costing one hypergeometric deviate.
    pub splits: u64,
    /// Leaves handed to the hashing sampler.
    pub base_cases: u64,
    pub max_depth: u32,
}

struct Recursion<'a, S: ?Sized> {
    n0: u64,
    base: BaseSampler,
    src: &'a mut S,
    out: Vec<u64>,
    stats: RecursionStats,
}

impl<S: UniformSource + ?Sized> Recursion<'_, S> {
    fn run(&mut self, n: u64, range: UniverseRange, depth: u32) {
        self.stats.max_depth = self.stats.max_depth.max(depth);
        if n == 0 {
            return;
        }
        if n == range.size {
            self.out.extend(range.offset..range.offset + range.size);
            return;
        }
        if n < self.n0 {
            self.stats.base_cases += 1;
            self.base.sample_into(n, range, self.src, &mut self.out);
            return;
        }
        self.stats.splits += 1;
        let half = range.size / 2;
        let params = HypergeomParams {
            draws: n,
            successes: half,
            total: range.size,
        };
        let left = hypergeometric(self.src, params);
        self.run(left, range.prefix(half), depth + 1);
        self.run(n - left, range.suffix(half), depth + 1);
    }
}

/// Divide-and-conquer sampling: split the range in halves, draw the left
/// half's share from the hypergeometric distribution, recurse. Below the
/// base case size the hashing sampler takes over.
///
/// Output is grouped by position (each half before the next) and fully
/// sorted when `cfg.sorted_output` is set.
pub fn sample_r<S: UniformSource + ?Sized>(
    n: u64,
    range: UniverseRange,
    src: &mut S,
    cfg: &SamplerConfig,
) -> Result<Vec<u64>> {
    sample_r_with_stats(n, range, src, cfg).map(|(v, _)| v)
}

pub fn sample_r_with_stats<S: UniformSource + ?Sized>(
    n: u64,
    range: UniverseRange,
    src: &mut S,
    cfg: &SamplerConfig,
) -> Result<(Vec<u64>, RecursionStats)> {
    range.check_count(n)?;
    cfg.validate()?;
    let mut rec = Recursion {
        n0: cfg.base_case,
        base: BaseSampler::new(cfg.table_capacity, cfg.base_case, cfg.sorted_output),
        src,
        out: Vec::with_capacity(n as usize),
        stats: RecursionStats::default(),
    };
    rec.run(n, range, 0);
    Ok((rec.out, rec.stats))
}

/// Online variant of [`sample_r`]: yields sorted batches of about `n0`
/// samples each, left to right, by repeatedly splitting off a leading
/// subrange of `ceil(N n0 / n)` elements.
#[derive(Debug, Clone)]
pub struct SampleBatchIterator<S> {
    remaining: u64,
    range: UniverseRange,
    n0: u64,
    src: S,
    base: BaseSampler,
}

pub fn sample_r_online<S: UniformSource>(
    n: u64,
    range: UniverseRange,
    src: S,
    cfg: &SamplerConfig,
) -> Result<SampleBatchIterator<S>> {
    range.check_count(n)?;
    cfg.validate()?;
    Ok(SampleBatchIterator {
        remaining: n,
        range,
        n0: cfg.base_case,
        src,
        base: BaseSampler::new(cfg.table_capacity, cfg.base_case, true),
    })
}

impl<S: UniformSource> SampleBatchIterator<S> {
    /// Samples not yet emitted.
    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// Part of the universe not yet covered by emitted batches.
    pub fn remaining_range(&self) -> UniverseRange {
        self.range
    }

    /// Concatenates all remaining batches.
    pub fn collect_samples(self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.remaining as usize);
        for batch in self {
            out.extend(batch);
        }
        out
    }
}

impl<S: UniformSource> Iterator for SampleBatchIterator<S> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        while self.remaining > 0 {
            let size = self.range.size;
            let split = (size as u128 * self.n0 as u128).div_ceil(self.remaining as u128);
            let (piece, count) = if split >= size as u128 {
                (self.range, self.remaining)
            } else {
                let split = split as u64;
                let params = HypergeomParams {
                    draws: self.remaining,
                    successes: split,
                    total: size,
                };
                (self.range.prefix(split), hypergeometric(&mut self.src, params))
            };
            self.range = self.range.suffix(piece.size);
            self.remaining -= count;
            if count == 0 {
                continue;
            }
            let mut batch = Vec::with_capacity(count as usize);
            if count == piece.size {
                batch.extend(piece.offset..piece.offset + piece.size);
            } else if 2 * count > piece.size {
                batch = sample_s(count, piece, &mut self.src).expect("count fits the piece");
            } else {
                self.base.sample_into(count, piece, &mut self.src, &mut batch);
            }
            return Some(batch);
        }
        None
    }
}

/// `n` independent uniform draws from `range`, sorted, by recursive
/// binomial splitting.
pub fn sample_with_replacement<S: UniformSource + ?Sized>(
    n: u64,
    range: UniverseRange,
    src: &mut S,
    cfg: &SamplerConfig,
) -> Result<Vec<u64>> {
    if range.size == 0 && n > 0 {
        return invalid("cannot draw from an empty range");
    }
    cfg.validate()?;
    let mut out = Vec::with_capacity(n as usize);
    with_replacement_rec(n, range, src, cfg.base_case, &mut out);
    Ok(out)
}

fn with_replacement_rec<S: UniformSource + ?Sized>(
    n: u64,
    range: UniverseRange,
    src: &mut S,
    n0: u64,
    out: &mut Vec<u64>,
) {
    if n == 0 {
        return;
    }
    if range.size == 1 {
        out.extend(std::iter::repeat_n(range.offset, n as usize));
        return;
    }
    if n < n0 {
        let start = out.len();
        out.extend((0..n).map(|_| range.offset + src.uniform_below(range.size)));
        out[start..].sort_unstable();
        return;
    }
    let half = range.size / 2;
    let left = binomial(src, n, half as f64 / range.size as f64).expect("probability in [0, 1]");
    with_replacement_rec(left, range.prefix(half), src, n0, out);
    with_replacement_rec(n - left, range.suffix(half), src, n0, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deviates::RandomSource;
    use crate::samplers::is_valid_sample;

    #[test]
    fn r_edges() {
        let mut src = RandomSource::new(1);
        let cfg = SamplerConfig::default();
        let r = UniverseRange::one_to(1000);
        assert!(sample_r(0, r, &mut src, &cfg).unwrap().is_empty());
        assert_eq!(
            sample_r(1000, r, &mut src, &cfg).unwrap(),
            (1..=1000).collect::<Vec<_>>()
        );
        assert!(sample_r(1001, r, &mut src, &cfg).is_err());
    }

    #[test]
    fn r_large_sample_valid_and_sorted() {
        let mut src = RandomSource::new(2);
        let cfg = SamplerConfig::default().sorted(true);
        let r = UniverseRange::one_to(1 << 50);
        let (v, st) = sample_r_with_stats(100_000, r, &mut src, &cfg).unwrap();
        assert_eq!(v.len(), 100_000);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v.iter().all(|&x| r.contains(x)));
        assert!(st.splits > 0 && st.base_cases > 0);
    }

    #[test]
    fn r_with_unit_base_case() {
        let mut src = RandomSource::new(3);
        let cfg = SamplerConfig::default().base_case(1).table_capacity(2);
        let r = UniverseRange::one_to(8);
        for _ in 0..1000 {
            let v = sample_r(3, r, &mut src, &cfg).unwrap();
            assert_eq!(v.len(), 3);
            assert!(is_valid_sample(&v, r));
        }
    }

    #[test]
    fn online_batches() {
        let cfg = SamplerConfig::default();
        let r = UniverseRange::one_to(1 << 40);
        let it = sample_r_online(10_000, r, RandomSource::new(4), &cfg).unwrap();
        let mut total = 0;
        let mut last = 0;
        for b in it {
            assert!(!b.is_empty());
            assert!(b[0] > last);
            assert!(b.windows(2).all(|w| w[0] < w[1]));
            last = *b.last().unwrap();
            total += b.len();
        }
        assert_eq!(total, 10_000);
    }

    #[test]
    fn online_single_batch_when_n_is_n0() {
        let cfg = SamplerConfig::default();
        let r = UniverseRange::one_to(1 << 20);
        let mut it = sample_r_online(512, r, RandomSource::new(5), &cfg).unwrap();
        let b = it.next().unwrap();
        assert_eq!(b.len(), 512);
        assert!(it.next().is_none());
        // same draws as the sorted hashing sampler on the same stream
        let h = crate::samplers::sample_h(512, r, &mut RandomSource::new(5), &cfg.sorted(true)).unwrap();
        assert_eq!(b, h);
    }

    #[test]
    fn with_replacement_edges() {
        let mut src = RandomSource::new(6);
        let cfg = SamplerConfig::default();
        assert_eq!(
            sample_with_replacement(5, UniverseRange::one_to(1), &mut src, &cfg).unwrap(),
            vec![1; 5]
        );
        assert!(sample_with_replacement(1, UniverseRange::one_to(0), &mut src, &cfg).is_err());
        let v = sample_with_replacement(10_000, UniverseRange::one_to(100), &mut src, &cfg).unwrap();
        assert_eq!(v.len(), 10_000);
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        assert!(v.iter().all(|&x| (1..=100).contains(&x)));
    }
}
