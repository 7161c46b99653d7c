//! Communication-free parallel sampling.
//!
//! The universe is cut into one piece per PE. Every PE walks the same binary
//! recursion over PE ranges, drawing each node's split from a stream keyed
//! by that node's PE range, so all PEs agree on the counts without
//! exchanging a message. The deterministic jobs mode does the same over a
//! fixed number of jobs, making the sample independent of the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use crate::deviates::{hypergeometric, tuple_hash, HypergeomParams, RandomSource, TupleHashStream};
use crate::error::{invalid, Result};
use crate::samplers::{sample_r, SamplerConfig, UniverseRange};

/// Boundaries `0 = N_0 <= N_1 <= ... <= N_p = N`; piece `i` (1-based) is
/// `N_{i-1}+1 ..= N_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMap {
    boundaries: Vec<u64>,
}

impl PartitionMap {
    /// `N_j = min(j * ceil(N/p), N)`.
    pub fn even(universe: u64, p: usize) -> Result<Self> {
        if p == 0 {
            return invalid("partition needs at least one piece");
        }
        let step = universe.div_ceil(p as u64);
        let boundaries = (0..=p as u64).map(|j| step.saturating_mul(j).min(universe)).collect();
        Ok(Self { boundaries })
    }

    /// From explicit boundaries; must start at 0 and be nondecreasing.
    pub fn from_boundaries(boundaries: Vec<u64>) -> Result<Self> {
        if boundaries.len() < 2 || boundaries[0] != 0 || boundaries.windows(2).any(|w| w[0] > w[1]) {
            return invalid("boundaries must start at 0, be nondecreasing and name at least one piece");
        }
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }

    pub fn pieces(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn universe(&self) -> u64 {
        self.boundaries[self.pieces()]
    }

    /// Piece `i`, 1-based, as a range of `1..=N`.
    pub fn piece(&self, i: usize) -> UniverseRange {
        let lo = self.boundaries[i - 1];
        UniverseRange {
            offset: lo + 1,
            size: self.boundaries[i] - lo,
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.pieces() {
            return invalid(format!("PE index {i} outside 1..={}", self.pieces()));
        }
        Ok(())
    }
}

/// One recursion node's split as seen by a PE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeDraw {
    pub lo: usize,
    pub hi: usize,
    pub count: u64,
    pub left: u64,
}

// Split of `count` at node lo..=hi, drawn from the node's own stream.
fn node_split(count: u64, part: &PartitionMap, lo: usize, hi: usize, seed: u64) -> u64 {
    let mid = (lo + hi) / 2;
    let b = part.boundaries();
    let params = HypergeomParams {
        draws: count,
        successes: b[mid] - b[lo - 1],
        total: b[hi] - b[lo - 1],
    };
    let mut stream = TupleHashStream::new(seed, lo as u64, hi as u64);
    hypergeometric(&mut stream, params)
}

/// Sample count of piece `i`, following only the path from the root to
/// leaf `i`. Records every node draw in `trace`.
pub fn local_count(
    n: u64,
    part: &PartitionMap,
    i: usize,
    seed: u64,
    mut trace: Option<&mut Vec<NodeDraw>>,
) -> Result<u64> {
    part.check_index(i)?;
    if n > part.universe() {
        return invalid(format!("cannot draw {n} from {}", part.universe()));
    }
    let (mut lo, mut hi, mut count) = (1, part.pieces(), n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let left = node_split(count, part, lo, hi, seed);
        if let Some(t) = trace.as_deref_mut() {
            t.push(NodeDraw { lo, hi, count, left });
        }
        if i <= mid {
            hi = mid;
            count = left;
        } else {
            lo = mid + 1;
            count -= left;
        }
    }
    Ok(count)
}

/// Counts for every piece by a full traversal of the same recursion.
pub fn assign_counts(n: u64, part: &PartitionMap, seed: u64) -> Result<Vec<u64>> {
    if n > part.universe() {
        return invalid(format!("cannot draw {n} from {}", part.universe()));
    }
    let mut out = vec![0; part.pieces()];
    fn walk(count: u64, part: &PartitionMap, lo: usize, hi: usize, seed: u64, out: &mut [u64]) {
        if lo == hi {
            out[lo - 1] = count;
            return;
        }
        let mid = (lo + hi) / 2;
        let left = node_split(count, part, lo, hi, seed);
        walk(left, part, lo, mid, seed, out);
        walk(count - left, part, mid + 1, hi, seed, out);
    }
    walk(n, part, 1, part.pieces(), seed, &mut out);
    Ok(out)
}

/// Base-case source of PE `i`: a generator seeded with `h(seed, i, i, 0)`.
pub fn pe_source(seed: u64, i: u64) -> RandomSource {
    RandomSource::new(tuple_hash(seed, i, i, 0))
}

/// PE `i`'s part of the sample: its count from the shared recursion, then
/// a local divide-and-conquer sample of its piece.
pub fn sample_p_local(n: u64, part: &PartitionMap, i: usize, seed: u64, cfg: &SamplerConfig) -> Result<Vec<u64>> {
    sample_p_local_traced(n, part, i, seed, cfg).map(|(v, _)| v)
}

pub fn sample_p_local_traced(
    n: u64,
    part: &PartitionMap,
    i: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<(Vec<u64>, Vec<NodeDraw>)> {
    let mut trace = Vec::new();
    let count = local_count(n, part, i, seed, Some(&mut trace))?;
    let mut src = pe_source(seed, i as u64);
    let sample = sample_r(count, part.piece(i), &mut src, cfg)?;
    Ok((sample, trace))
}

/// Worker and job layout for a parallel run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelRunConfig {
    pub workers: usize,
    pub jobs: usize,
    pub master_seed: u64,
    pub sampler: SamplerConfig,
}

impl ParallelRunConfig {
    pub fn new(workers: usize, master_seed: u64) -> Self {
        Self {
            workers,
            jobs: workers,
            master_seed,
            sampler: SamplerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return invalid("need at least one worker");
        }
        if self.jobs < self.workers {
            return invalid(format!("{} jobs for {} workers", self.jobs, self.workers));
        }
        self.sampler.validate()
    }
}

/// Runs every PE of an even `workers`-way partition of `1..=universe` on
/// its own thread and concatenates the pieces in order.
pub fn sample_p_all(n: u64, universe: u64, cfg: &ParallelRunConfig) -> Result<Vec<u64>> {
    if cfg.workers == 0 {
        return invalid("need at least one worker");
    }
    cfg.sampler.validate()?;
    let part = PartitionMap::even(universe, cfg.workers)?;
    if n > universe {
        return invalid(format!("cannot draw {n} from {universe}"));
    }
    let pieces: Vec<Result<Vec<u64>>> = thread::scope(|s| {
        let handles: Vec<_> = (1..=cfg.workers)
            .map(|i| {
                let part = &part;
                s.spawn(move || sample_p_local(n, part, i, cfg.master_seed, &cfg.sampler))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    concat(pieces)
}

/// [`sample_p_all`] evaluated PE by PE on the calling thread.
pub fn sample_p_all_sequential(n: u64, universe: u64, cfg: &ParallelRunConfig) -> Result<Vec<u64>> {
    let part = PartitionMap::even(universe, cfg.workers)?;
    concat(
        (1..=cfg.workers)
            .map(|i| sample_p_local(n, &part, i, cfg.master_seed, &cfg.sampler))
            .collect(),
    )
}

fn concat(pieces: Vec<Result<Vec<u64>>>) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for p in pieces {
        out.extend(p?);
    }
    Ok(out)
}

/// A piece of the universe with its share of the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobDescriptor {
    pub job_index: usize,
    pub range: UniverseRange,
    pub sample_count: u64,
}

/// Cuts `1..=universe` into `jobs` even pieces and assigns sample counts by
/// the hash-keyed recursion over job indices.
pub fn split_jobs_deterministic(n: u64, universe: u64, jobs: usize, seed: u64) -> Result<Vec<JobDescriptor>> {
    let part = PartitionMap::even(universe, jobs)?;
    let counts = assign_counts(n, &part, seed)?;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(j, c)| JobDescriptor {
            job_index: j,
            range: part.piece(j + 1),
            sample_count: c,
        })
        .collect())
}

/// How workers pick up jobs. Either way each job's output depends only on
/// the job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JobSchedule {
    /// Worker `w` runs a contiguous block of `ceil(jobs / workers)` jobs.
    #[default]
    Static,
    /// Workers take the next unclaimed job from a shared counter.
    Dynamic,
}

fn run_job(job: &JobDescriptor, seed: u64, cfg: &SamplerConfig) -> Result<Vec<u64>> {
    if job.sample_count == 0 {
        return Ok(Vec::new());
    }
    let mut src = pe_source(seed, job.job_index as u64);
    sample_r(job.sample_count, job.range, &mut src, cfg)
}

/// Samples every job on `workers` threads and concatenates in job order.
pub fn run_jobs_deterministic(
    jobs: &[JobDescriptor],
    workers: usize,
    seed: u64,
    cfg: &SamplerConfig,
    schedule: JobSchedule,
) -> Result<Vec<u64>> {
    if workers == 0 {
        return invalid("need at least one worker");
    }
    cfg.validate()?;
    let workers = workers.min(jobs.len()).max(1);
    let block = jobs.len().div_ceil(workers);
    let cursor = AtomicUsize::new(0);
    let done: Vec<Vec<(usize, Result<Vec<u64>>)>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let cursor = &cursor;
                s.spawn(move || {
                    let mut mine = Vec::new();
                    match schedule {
                        JobSchedule::Static => {
                            for j in (w * block..(w + 1) * block).take_while(|&j| j < jobs.len()) {
                                mine.push((j, run_job(&jobs[j], seed, cfg)));
                            }
                        }
                        JobSchedule::Dynamic => loop {
                            let j = cursor.fetch_add(1, Ordering::Relaxed);
                            if j >= jobs.len() {
                                break;
                            }
                            mine.push((j, run_job(&jobs[j], seed, cfg)));
                        },
                    }
                    mine
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut slots: Vec<Option<Result<Vec<u64>>>> = (0..jobs.len()).map(|_| None).collect();
    for (j, r) in done.into_iter().flatten() {
        slots[j] = Some(r);
    }
    concat(slots.into_iter().map(|s| s.expect("every job ran")).collect())
}

/// Split then run: the sample is a function of `(n, universe, jobs, seed)`.
pub fn sample_jobs(n: u64, universe: u64, cfg: &ParallelRunConfig, schedule: JobSchedule) -> Result<Vec<u64>> {
    if cfg.jobs == 0 {
        return invalid("need at least one job");
    }
    let jobs = split_jobs_deterministic(n, universe, cfg.jobs, cfg.master_seed)?;
    run_jobs_deterministic(&jobs, cfg.workers, cfg.master_seed, &cfg.sampler, schedule)
}
