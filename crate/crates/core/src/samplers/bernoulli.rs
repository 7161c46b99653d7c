use super::UniverseRange;
use crate::deviates::{Geometric, UniformSource};
use crate::error::{invalid, Result};

fn check_rate(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid(format!("inclusion probability {rho} outside (0, 1]"));
    }
    Ok(())
}

fn full(range: UniverseRange) -> Vec<u64> {
    (0..range.size).map(|i| range.offset + i).collect()
}

/// Includes each element independently with probability `rho`, jumping
/// over excluded runs with geometric skips. Sorted output.
pub fn bernoulli_skip<S: UniformSource + ?Sized>(rho: f64, range: UniverseRange, src: &mut S) -> Result<Vec<u64>> {
    check_rate(rho)?;
    if rho == 1.0 {
        return Ok(full(range));
    }
    let g = Geometric::new(rho)?;
    let mut out = Vec::with_capacity((rho * range.size as f64 * 1.1) as usize + 16);
    let mut pos = 0u64;
    loop {
        match pos.checked_add(g.sample(src)) {
            Some(p) if p < range.size => {
                out.push(range.offset + p);
                pos = p + 1;
            }
            _ => break,
        }
    }
    Ok(out)
}

/// Same distribution as [`bernoulli_skip`], computed blockwise: a block of
/// gaps is drawn, turned into positions by a prefix sum, and cut at the end
/// of the range. A block that stops short triggers another.
pub fn bernoulli_prefix_sum<S: UniformSource + ?Sized>(
    rho: f64,
    range: UniverseRange,
    src: &mut S,
) -> Result<Vec<u64>> {
    bernoulli_prefix_sum_with_block(rho, range, src, None).map(|(v, _)| v)
}

fn block_len(rho: f64, size: u64) -> usize {
    let mean = rho * size as f64;
    (mean + 3.0 * mean.sqrt()).ceil() as usize + 16
}

/// [`bernoulli_prefix_sum`] with an explicit first block length. Also
/// returns the number of extension blocks that were needed.
pub fn bernoulli_prefix_sum_with_block<S: UniformSource + ?Sized>(
    rho: f64,
    range: UniverseRange,
    src: &mut S,
    first_block: Option<usize>,
) -> Result<(Vec<u64>, u32)> {
    check_rate(rho)?;
    if rho == 1.0 {
        return Ok((full(range), 0));
    }
    let g = Geometric::new(rho)?;
    let size = range.size;
    let mut out = Vec::new();
    let mut block = vec![0u64; first_block.unwrap_or_else(|| block_len(rho, size)).max(1)];
    let mut extensions = 0;
    // positions below `base` are decided
    let mut base = 0u64;
    loop {
        for b in block.iter_mut() {
            *b = g.sample(src).saturating_add(1);
        }
        let mut acc = 0u64;
        for b in block.iter_mut() {
            acc = acc.saturating_add(*b);
            *b = acc;
        }
        // element i sits at base + block[i] - 1
        let room = size - base;
        let keep = block.partition_point(|&x| x <= room);
        out.extend(block[..keep].iter().map(|&x| range.offset + base + x - 1));
        if keep < block.len() {
            return Ok((out, extensions));
        }
        base += block[block.len() - 1];
        extensions += 1;
        let next = block_len(rho, size - base);
        block.resize(next, 0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deviates::RandomSource;

    #[test]
    fn full_rate_takes_everything() {
        let mut src = RandomSource::new(1);
        let r = UniverseRange::one_to(5);
        assert_eq!(bernoulli_skip(1.0, r, &mut src).unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(bernoulli_prefix_sum(1.0, r, &mut src).unwrap(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn bad_rates() {
        let mut src = RandomSource::new(1);
        let r = UniverseRange::one_to(5);
        for rho in [0.0, -0.1, 1.1, f64::NAN] {
            assert!(bernoulli_skip(rho, r, &mut src).is_err());
            assert!(bernoulli_prefix_sum(rho, r, &mut src).is_err());
        }
    }

    #[test]
    fn high_rate_stays_in_range() {
        let mut src = RandomSource::new(2);
        for _ in 0..100 {
            let v = bernoulli_prefix_sum(0.999, UniverseRange::one_to(100), &mut src).unwrap();
            assert!(v.windows(2).all(|w| w[0] < w[1]));
            assert!(v.iter().all(|&x| (1..=100).contains(&x)));
        }
    }

    #[test]
    fn extension_blocks_preserve_output() {
        let r = UniverseRange::one_to(1_000_000);
        let mut extended = 0;
        for seed in 0..20 {
            let mut src = RandomSource::new(seed);
            let (v, ext) = bernoulli_prefix_sum_with_block(0.01, r, &mut src, Some(10_000)).unwrap();
            extended += (ext > 0) as u32;
            assert!(v.windows(2).all(|w| w[0] < w[1]));
            assert!(v.iter().all(|&x| r.contains(x)));
            assert!((9_000..11_000).contains(&v.len()));
        }
        assert!(extended > 0);
    }

    #[test]
    fn tiny_block_forces_many_extensions() {
        let mut src = RandomSource::new(3);
        let r = UniverseRange::new(0, 500).unwrap();
        let (v, ext) = bernoulli_prefix_sum_with_block(0.5, r, &mut src, Some(1)).unwrap();
        assert!(ext >= 1);
        assert!(v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&x| x < 500));
    }
}
