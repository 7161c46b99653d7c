//! Statistical self-test batteries behind `samplekit selftest`.

use std::io::Write;

use crate::deviates::{
    binomial, geometric, hypergeometric, skip_deviate, tuple_hash, HypergeomParams, RandomSource, UniformSource,
};
use crate::error::Result;
use crate::methods::{run_method, Method, MethodOptions};
use crate::samplers::UniverseRange;
use crate::stats::{
    binomial_pmf, chi_square_gof, geometric_pmf, hypergeom_pmf, pmf_gof, skip_pmf_table, subset_uniformity,
    with_single_retry, GofReport, DEFAULT_ALPHA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Builds the generator for a seed; lets tests swap in a broken one.
pub type SourceFactory = dyn Fn(u64) -> Box<dyn UniformSource>;

/// Generator with its top output bit stuck at zero.
#[derive(Debug, Clone)]
pub struct StuckBitSource(RandomSource);

impl StuckBitSource {
    pub fn new(seed: u64) -> Self {
        Self(RandomSource::new(seed))
    }
}

impl UniformSource for StuckBitSource {
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64() >> 1
    }
}

pub fn default_factory() -> Box<SourceFactory> {
    Box::new(|seed| Box::new(RandomSource::new(seed)))
}

pub fn faulty_factory() -> Box<SourceFactory> {
    Box::new(|seed| Box::new(StuckBitSource::new(seed)))
}

type Battery = Box<dyn Fn(&SourceFactory, u64) -> Result<GofReport>>;

fn deviate_battery<F>(pmf: Vec<f64>, draws: u64, sample: F) -> Battery
where
    F: Fn(&mut dyn UniformSource) -> u64 + 'static,
{
    Box::new(move |make, seed| {
        let mut src = make(seed);
        pmf_gof(&pmf, draws, DEFAULT_ALPHA, || sample(&mut *src))
    })
}

fn hypergeom_battery(draws: u64, successes: u64, total: u64, runs: u64) -> (String, Battery) {
    let pmf = (0..=draws.min(successes))
        .map(|x| hypergeom_pmf(x, draws, successes, total))
        .collect();
    let params = HypergeomParams::new(draws, successes, total).expect("valid parameters");
    (
        format!("hypergeometric({draws},{successes},{total})"),
        deviate_battery(pmf, runs, move |s| hypergeometric(s, params)),
    )
}

fn binomial_battery(trials: u64, p: f64, runs: u64) -> (String, Battery) {
    let pmf = (0..=trials).map(|k| binomial_pmf(k, trials, p)).collect();
    (
        format!("binomial({trials},{p})"),
        deviate_battery(pmf, runs, move |s| binomial(s, trials, p).expect("valid probability")),
    )
}

fn subset_battery(method: Method, n: u64, universe: u64, runs: u64) -> (String, Battery) {
    let mut opts = MethodOptions {
        workers: 2,
        jobs: 5,
        ..MethodOptions::default()
    };
    // shallow base case so the recursive paths actually split
    opts.sampler.base_case = 1;
    opts.sampler.table_capacity = 2;
    (
        format!("subsets-{method}({universe},{n})"),
        Box::new(move |make, seed| {
            let mut src = make(seed);
            subset_uniformity(n, universe, runs, DEFAULT_ALPHA, |_| {
                run_method(method, n, UniverseRange::one_to(universe), src.next_u64(), &opts)
            })
        }),
    )
}

fn batteries(level: Level) -> Vec<(String, Battery)> {
    let scale = match level {
        Level::Quick => 1,
        Level::Full => 10,
    };
    let mut v: Vec<(String, Battery)> = vec![
        (
            "uniform-real-64-bins".into(),
            Box::new(|make: &SourceFactory, seed| {
                let mut src = make(seed);
                let mut counts = [0u64; 64];
                for _ in 0..1_000_000 {
                    counts[(src.uniform_real() * 64.0) as usize] += 1;
                }
                chi_square_gof(&counts, &[1.0 / 64.0; 64], DEFAULT_ALPHA)
            }),
        ),
        (
            "uniform-int-1-2".into(),
            deviate_battery(vec![0.5, 0.5], 100_000, |s| s.uniform_int(1, 2).expect("range") - 1),
        ),
        (
            "tuple-hash-256-bins".into(),
            Box::new(|_: &SourceFactory, seed| {
                let mut counts = [0u64; 256];
                for t in 0..100_000 {
                    counts[(tuple_hash(seed, 3, 7, t) >> 56) as usize] += 1;
                }
                chi_square_gof(&counts, &[1.0 / 256.0; 256], DEFAULT_ALPHA)
            }),
        ),
        hypergeom_battery(5, 5, 10, 100_000),
        hypergeom_battery(200, 300, 1000, 100_000),
        binomial_battery(20, 0.3, 100_000),
        binomial_battery(400, 0.4, 100_000),
        (
            "geometric(0.5)".into(),
            deviate_battery((0..16).map(|k| geometric_pmf(k, 0.5)).collect(), 100_000, |s| {
                geometric(s, 0.5).expect("valid probability")
            }),
        ),
        (
            "skip(3,10)".into(),
            deviate_battery(skip_pmf_table(3, 10), 100_000, |s| {
                skip_deviate(s, 3, 10).expect("valid")
            }),
        ),
        (
            "skip(5,1000)".into(),
            deviate_battery(skip_pmf_table(5, 1000), 100_000, |s| {
                skip_deviate(s, 5, 1000).expect("valid")
            }),
        ),
    ];
    let methods = [
        Method::S,
        Method::H,
        Method::D,
        Method::B,
        Method::R,
        Method::ROnline,
        Method::Parallel,
        Method::Jobs,
    ];
    match level {
        Level::Quick => {
            for m in [Method::S, Method::H, Method::D, Method::R] {
                v.push(subset_battery(m, 2, 6, 10_000));
            }
        }
        Level::Full => {
            for (universe, n) in [(6, 2), (8, 3), (10, 3)] {
                for m in methods {
                    v.push(subset_battery(m, n, universe, 10_000 * scale));
                }
            }
        }
    }
    v
}

/// Runs every battery of `level`, retrying each once on failure, and writes
/// one `key=value` line per battery plus a summary. Returns whether all
/// passed.
pub fn run_selftest(level: Level, make: &SourceFactory, seed: u64, out: &mut dyn Write) -> Result<bool> {
    let mut failed = 0;
    let all = batteries(level);
    for (i, (name, battery)) in all.iter().enumerate() {
        let report = with_single_retry(|attempt| battery(make, tuple_hash(seed, i as u64, attempt as u64, 0x5e1f)))?;
        failed += !report.pass as usize;
        writeln!(out, "{}", report.key_values(name)).ok();
    }
    let level_name = match level {
        Level::Quick => "quick",
        Level::Full => "full",
    };
    writeln!(
        out,
        "selftest level={level_name} batteries={} passed={} failed={failed}",
        all.len(),
        all.len() - failed
    )
    .ok();
    Ok(failed == 0)
}
