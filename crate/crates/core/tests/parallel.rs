use samplekit::deviates::RandomSource;
use samplekit::parallel::{
    assign_counts, pe_source, run_jobs_deterministic, sample_jobs, sample_p_all, sample_p_all_sequential,
    sample_p_local, split_jobs_deterministic, JobSchedule, ParallelRunConfig, PartitionMap,
};
use samplekit::samplers::{is_valid_sample, sample_r, sample_s, SamplerConfig, UniverseRange};
use samplekit::stats::{chi_square_gof, chi_square_homogeneity, with_single_retry, SubsetEnumeration, DEFAULT_ALPHA};

const RUNS: u64 = 100_000;

fn deep() -> SamplerConfig {
    SamplerConfig::default().base_case(1).table_capacity(2)
}

fn histogram(n: u64, universe: u64, runs: u64, mut draw: impl FnMut(u64) -> Vec<u64>) -> Vec<u64> {
    let e = SubsetEnumeration::new(n, universe).unwrap();
    let mut counts = vec![0u64; e.len()];
    for run in 0..runs {
        let mut s = draw(run);
        s.sort_unstable();
        counts[e.rank(&s).expect("valid subset")] += 1;
    }
    counts
}

fn assert_matches_s(name: &str, n: u64, universe: u64, mut draw: impl FnMut(u64) -> Vec<u64>) {
    let r = UniverseRange::one_to(universe);
    let report = with_single_retry(|attempt| {
        let mut src = RandomSource::new(7 + attempt as u64);
        let a = histogram(n, universe, RUNS, |_| sample_s(n, r, &mut src).unwrap());
        let salt = (attempt as u64 + 1) << 40;
        let b = histogram(n, universe, RUNS, |run| draw(run + salt));
        chi_square_homogeneity(&a, &b, DEFAULT_ALPHA)
    })
    .unwrap();
    assert!(report.pass, "{name}: {report}");
}

#[test]
fn partition_boundaries() {
    assert_eq!(PartitionMap::even(10, 1).unwrap().boundaries(), &[0, 10]);
    assert_eq!(PartitionMap::even(10, 3).unwrap().boundaries(), &[0, 4, 8, 10]);
    let p = PartitionMap::even(5, 8).unwrap();
    assert_eq!(p.boundaries(), &[0, 1, 2, 3, 4, 5, 5, 5, 5]);
    assert_eq!(p.piece(7).size, 0);
}

#[test]
fn single_pe_is_plain_recursion() {
    let part = PartitionMap::even(1 << 30, 1).unwrap();
    let cfg = SamplerConfig::default();
    let local = sample_p_local(1000, &part, 1, 5, &cfg).unwrap();
    let direct = sample_r(1000, UniverseRange::one_to(1 << 30), &mut pe_source(5, 1), &cfg).unwrap();
    assert_eq!(local, direct);
    let all = sample_p_all(1000, 1 << 30, &ParallelRunConfig::new(1, 5)).unwrap();
    assert_eq!(all, local);
}

#[test]
fn full_sample_fills_every_piece() {
    let part = PartitionMap::even(10, 2).unwrap();
    let cfg = SamplerConfig::default();
    for i in 1..=2 {
        let mut v = sample_p_local(10, &part, i, 3, &cfg).unwrap();
        v.sort_unstable();
        let piece = part.piece(i);
        assert_eq!(v, (piece.offset..piece.offset + piece.size).collect::<Vec<_>>());
    }
}

#[test]
fn local_parts_are_consistent() {
    let part = PartitionMap::even(64, 4).unwrap();
    let cfg = SamplerConfig::default();
    for seed in 0..200 {
        let mut union = Vec::new();
        for i in 1..=4 {
            let v = sample_p_local(16, &part, i, seed, &cfg).unwrap();
            assert!(is_valid_sample(&v, part.piece(i)));
            union.extend(v);
        }
        assert_eq!(union.len(), 16);
        assert!(is_valid_sample(&union, UniverseRange::one_to(64)));
        assert_eq!(assign_counts(16, &part, seed).unwrap().iter().sum::<u64>(), 16);
    }
}

#[test]
fn p_all_matches_oracle() {
    let mut cfg = ParallelRunConfig::new(2, 0);
    cfg.sampler = deep();
    assert_matches_s("P p=2 (3,8)", 3, 8, |seed| {
        sample_p_all_sequential(
            3,
            8,
            &ParallelRunConfig {
                master_seed: seed,
                ..cfg
            },
        )
        .unwrap()
    });
}

#[test]
fn p_all_is_reproducible() {
    let cfg = ParallelRunConfig::new(4, 99);
    let a = sample_p_all(50_000, 1 << 40, &cfg).unwrap();
    assert_eq!(a, sample_p_all(50_000, 1 << 40, &cfg).unwrap());
    assert_eq!(a, sample_p_all_sequential(50_000, 1 << 40, &cfg).unwrap());
}

#[test]
fn job_split_cases() {
    let one = split_jobs_deterministic(77, 1000, 1, 4).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].sample_count, 77);
    let jobs = split_jobs_deterministic(10_000, 1_000_000, 64, 4).unwrap();
    assert_eq!(jobs.iter().map(|j| j.sample_count).sum::<u64>(), 10_000);

    // without-replacement counts are no more spread than balls into bins
    let report = with_single_retry(|attempt| {
        let jobs = split_jobs_deterministic(100_000, 10_000_000, 100, 10 + attempt as u64).unwrap();
        let counts: Vec<u64> = jobs.iter().map(|j| j.sample_count).collect();
        chi_square_gof(&counts, &[0.01; 100], DEFAULT_ALPHA)
    })
    .unwrap();
    assert!(report.pass, "{report}");
}

#[test]
fn jobs_independent_of_workers() {
    let cfg = SamplerConfig::default();
    let jobs = split_jobs_deterministic(100_000, 1 << 45, 64, 17).unwrap();
    let one = run_jobs_deterministic(&jobs, 1, 17, &cfg, JobSchedule::Static).unwrap();
    for workers in [2, 3, 8, 64] {
        for schedule in [JobSchedule::Static, JobSchedule::Dynamic] {
            assert_eq!(one, run_jobs_deterministic(&jobs, workers, 17, &cfg, schedule).unwrap());
        }
    }
}

#[test]
fn empty_jobs_contribute_nothing() {
    let cfg = SamplerConfig::default();
    let jobs = split_jobs_deterministic(3, 1000, 50, 2).unwrap();
    assert!(jobs.iter().filter(|j| j.sample_count == 0).count() >= 47);
    let v = run_jobs_deterministic(&jobs, 4, 2, &cfg, JobSchedule::Static).unwrap();
    assert_eq!(v.len(), 3);
}

#[test]
fn jobs_match_oracle() {
    let mut cfg = ParallelRunConfig::new(2, 0);
    cfg.jobs = 5;
    cfg.sampler = deep();
    assert_matches_s("jobs p'=5 (3,10)", 3, 10, |seed| {
        sample_jobs(
            3,
            10,
            &ParallelRunConfig {
                master_seed: seed,
                ..cfg
            },
            JobSchedule::Static,
        )
        .unwrap()
    });
}
