//! Uniform entry point over all sampling methods, shared by the CLI and
//! the benchmark driver.

use std::fmt;

use clap::ValueEnum;

use crate::deviates::RandomSource;
use crate::error::{invalid, Result};
use crate::parallel::{sample_jobs, sample_p_all, JobSchedule, ParallelRunConfig};
use crate::samplers::{
    bernoulli_skip, sample_b, sample_d, sample_h, sample_r, sample_r_online, sample_s, sample_with_replacement,
    SamplerConfig, UniverseRange,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Method {
    S,
    H,
    D,
    B,
    R,
    #[value(name = "r-online")]
    ROnline,
    #[value(name = "with-replacement")]
    WithReplacement,
    Bernoulli,
    Parallel,
    Jobs,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::S => "s",
            Method::H => "h",
            Method::D => "d",
            Method::B => "b",
            Method::R => "r",
            Method::ROnline => "r-online",
            Method::WithReplacement => "with-replacement",
            Method::Bernoulli => "bernoulli",
            Method::Parallel => "parallel",
            Method::Jobs => "jobs",
        }
    }

    /// Whether the output always comes out increasing.
    pub fn naturally_sorted(&self) -> bool {
        matches!(
            self,
            Method::S | Method::D | Method::B | Method::ROnline | Method::WithReplacement | Method::Bernoulli
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a method may need besides `n`, the range and the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOptions {
    pub sampler: SamplerConfig,
    pub workers: usize,
    pub jobs: usize,
    pub rho: Option<f64>,
    pub schedule: JobSchedule,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::default(),
            workers: 1,
            jobs: 64,
            rho: None,
            schedule: JobSchedule::Static,
        }
    }
}

/// Draws with `method`. Bernoulli ignores `n` and uses `opts.rho`; the
/// parallel methods need `range` to start at 1.
pub fn run_method(method: Method, n: u64, range: UniverseRange, seed: u64, opts: &MethodOptions) -> Result<Vec<u64>> {
    let cfg = SamplerConfig { seed, ..opts.sampler };
    let mut src = RandomSource::new(seed);
    let par = || -> Result<ParallelRunConfig> {
        if range.offset != 1 {
            return invalid("parallel methods sample from 1..N");
        }
        Ok(ParallelRunConfig {
            workers: opts.workers,
            jobs: opts.jobs,
            master_seed: seed,
            sampler: cfg,
        })
    };
    let mut out = match method {
        Method::S => sample_s(n, range, &mut src)?,
        Method::H => sample_h(n, range, &mut src, &cfg)?,
        Method::D => sample_d(n, range, &mut src)?.collect(),
        Method::B => sample_b(n, range, &mut src)?,
        Method::R => sample_r(n, range, &mut src, &cfg)?,
        Method::ROnline => sample_r_online(n, range, &mut src, &cfg)?.collect_samples(),
        Method::WithReplacement => sample_with_replacement(n, range, &mut src, &cfg)?,
        Method::Bernoulli => {
            let Some(rho) = opts.rho else {
                return invalid("bernoulli sampling needs a rate");
            };
            bernoulli_skip(rho, range, &mut src)?
        }
        Method::Parallel => sample_p_all(n, range.size, &par()?)?,
        Method::Jobs => sample_jobs(n, range.size, &par()?, opts.schedule)?,
    };
    if cfg.sorted_output && !method.naturally_sorted() && !out.is_sorted() {
        out.sort_unstable();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::is_valid_sample;

    #[test]
    fn every_method_produces_a_sample() {
        let r = UniverseRange::one_to(10_000);
        let opts = MethodOptions {
            workers: 3,
            jobs: 7,
            ..MethodOptions::default()
        };
        for m in Method::value_variants() {
            if matches!(m, Method::Bernoulli | Method::WithReplacement) {
                continue;
            }
            let v = run_method(*m, 300, r, 5, &opts).unwrap();
            assert_eq!(v.len(), 300, "{m}");
            assert!(is_valid_sample(&v, r), "{m}");
        }
        let v = run_method(Method::WithReplacement, 300, r, 5, &opts).unwrap();
        assert_eq!(v.len(), 300);
        assert!(run_method(Method::Bernoulli, 0, r, 5, &opts).is_err());
    }

    #[test]
    fn sorted_option_sorts() {
        let r = UniverseRange::one_to(1 << 30);
        let mut opts = MethodOptions::default();
        opts.sampler.sorted_output = true;
        opts.workers = 4;
        opts.jobs = 8;
        for m in [Method::H, Method::R, Method::Parallel, Method::Jobs] {
            let v = run_method(m, 5000, r, 1, &opts).unwrap();
            assert!(v.windows(2).all(|w| w[0] < w[1]), "{m}");
        }
    }
}
