//! Uniform random graphs on vertices `0..v`: `G(v, m)` samples `m` of the
//! `v(v-1)/2` possible edges without replacement, `G(v, p)` includes each
//! independently.
//!
//! Edge index `e` (0-based) numbers the upper triangle row by row:
//! `(0,1), (0,2), .., (0,v-1), (1,2), ..`.

use crate::deviates::UniformSource;
use crate::error::{invalid, Result};
use crate::samplers::{bernoulli_skip, sample_r, SamplerConfig, UniverseRange};

pub fn edge_count(v: u64) -> Result<u64> {
    let c = v as u128 * v.saturating_sub(1) as u128 / 2;
    u64::try_from(c).or_else(|_| invalid(format!("{v} vertices have too many edges")))
}

// first index of row r
fn row_start(v: u64, r: u64) -> u128 {
    r as u128 * (2 * v as u128 - r as u128 - 1) / 2
}

/// Edge with row-major index `e`.
pub fn index_to_edge(v: u64, e: u64) -> (u64, u64) {
    // largest r with row_start(r) <= e
    let (mut lo, mut hi) = (0, v.saturating_sub(2));
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if row_start(v, mid) <= e as u128 {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let col = lo + 1 + (e as u128 - row_start(v, lo)) as u64;
    (lo, col)
}

pub fn edge_to_index(v: u64, u: u64, w: u64) -> u64 {
    debug_assert!(u < w && w < v);
    (row_start(v, u) + (w - u - 1) as u128) as u64
}

/// `m` distinct edges chosen uniformly, in index order.
pub fn gnm<S: UniformSource + ?Sized>(v: u64, m: u64, src: &mut S) -> Result<Vec<(u64, u64)>> {
    let total = edge_count(v)?;
    if m > total {
        return invalid(format!("{m} edges requested but only {total} exist on {v} vertices"));
    }
    let cfg = SamplerConfig::default().sorted(true);
    let idx = sample_r(m, UniverseRange::new(0, total)?, src, &cfg)?;
    Ok(idx.into_iter().map(|e| index_to_edge(v, e)).collect())
}

/// Every edge present independently with probability `p`, in index order.
pub fn gnp<S: UniformSource + ?Sized>(v: u64, p: f64, src: &mut S) -> Result<Vec<(u64, u64)>> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("edge probability {p} outside [0, 1]"));
    }
    let total = edge_count(v)?;
    if p == 0.0 || total == 0 {
        return Ok(Vec::new());
    }
    let idx = bernoulli_skip(p, UniverseRange::new(0, total)?, src)?;
    Ok(idx.into_iter().map(|e| index_to_edge(v, e)).collect())
}
