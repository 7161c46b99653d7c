//! Wall-clock benchmarks of the sampling methods, one CSV row per
//! `(method, n)`.

use std::hint::black_box;
use std::time::Instant;

use crate::error::{invalid, Result};
use crate::methods::{run_method, Method, MethodOptions};
use crate::samplers::UniverseRange;

pub const CSV_HEADER: &str = "method,n,N,reps,total_ns,ns_per_sample,stddev";
pub const DEFAULT_UNIVERSE: u64 = 1 << 50;
pub const DEFAULT_WORK: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n: u64,
    pub universe: u64,
    pub reps: u64,
    pub total_ns: u128,
    pub ns_per_sample: f64,
    /// Standard deviation of the per-repetition ns-per-sample.
    pub stddev: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{:.3}",
            self.method, self.n, self.universe, self.reps, self.total_ns, self.ns_per_sample, self.stddev
        )
    }
}

/// Repetitions so that about `work` samples are drawn in total.
pub fn reps_for(work: u64, n: u64) -> u64 {
    (work / n.max(1)).max(1)
}

/// Times `reps` runs of `method` after one untimed warm-up run. Repetition
/// `r` uses seed `seed + r`.
pub fn bench_method(
    method: Method,
    n: u64,
    universe: u64,
    reps: u64,
    seed: u64,
    opts: &MethodOptions,
) -> Result<BenchRow> {
    if reps == 0 {
        return invalid("need at least one repetition");
    }
    let range = UniverseRange::one_to(universe);
    let mut opts = *opts;
    if method == Method::Bernoulli && opts.rho.is_none() {
        opts.rho = Some(n as f64 / universe as f64);
    }
    let opts = &opts;
    black_box(run_method(method, n, range, seed.wrapping_sub(1), opts)?.len());
    let mut per_sample = Vec::with_capacity(reps as usize);
    let mut total_ns = 0u128;
    for r in 0..reps {
        let start = Instant::now();
        let out = run_method(method, n, range, seed.wrapping_add(r), opts)?;
        black_box(out.len());
        let ns = start.elapsed().as_nanos();
        drop(out);
        total_ns += ns;
        per_sample.push(ns as f64 / n.max(1) as f64);
    }
    let mean = total_ns as f64 / (reps * n.max(1)) as f64;
    let stddev = if reps > 1 {
        let var = per_sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (reps - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    Ok(BenchRow {
        method,
        n,
        universe,
        reps,
        total_ns,
        ns_per_sample: mean,
        stddev,
    })
}

/// Every method at every `n`, with `reps_for(work, n)` repetitions each.
pub fn bench_grid(
    methods: &[Method],
    ns: &[u64],
    universe: u64,
    work: u64,
    seed: u64,
    opts: &MethodOptions,
) -> Result<Vec<BenchRow>> {
    if let Some(&big) = ns.iter().max() {
        if big > universe {
            return invalid(format!("n = {big} exceeds N = {universe}"));
        }
    }
    let mut rows = Vec::with_capacity(methods.len() * ns.len());
    for &m in methods {
        for &n in ns {
            rows.push(bench_method(m, n, universe, reps_for(work, n), seed, opts)?);
        }
    }
    Ok(rows)
}
