use samplekit::deviates::RandomSource;
use samplekit::graph::{edge_count, edge_to_index, gnm, gnp, index_to_edge};
use samplekit::stats::{binomial_dispersion, subset_uniformity, with_single_retry, DEFAULT_ALPHA};

#[test]
fn complete_graph() {
    let mut src = RandomSource::new(1);
    let mut e = gnm(4, 6, &mut src).unwrap();
    e.sort_unstable();
    assert_eq!(e, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    assert!(gnm(4, 7, &mut src).is_err());
}

#[test]
fn empty_gnp() {
    let mut src = RandomSource::new(2);
    for v in [0, 1, 5, 1000] {
        assert!(gnp(v, 0.0, &mut src).unwrap().is_empty());
    }
}

#[test]
fn edge_index_round_trip() {
    let v = 1 << 20;
    let c = edge_count(v).unwrap();
    for e in [0, 1, c / 3, c / 2, c - 2, c - 1] {
        let (a, b) = index_to_edge(v, e);
        assert!(a < b && b < v);
        assert_eq!(edge_to_index(v, a, b), e);
    }
}

#[test]
fn gnm_pairs_uniform() {
    let report = with_single_retry(|attempt| {
        let mut src = RandomSource::new(10 + attempt as u64);
        // each edge pair maps to the pair of its indices + 1
        subset_uniformity(2, 6, 100_000, DEFAULT_ALPHA, |_| {
            let edges = gnm(4, 2, &mut src)?;
            Ok(edges.iter().map(|&(a, b)| edge_to_index(4, a, b) + 1).collect())
        })
    })
    .unwrap();
    assert!(report.pass, "{report}");
}

#[test]
fn gnp_edge_frequencies() {
    let v = 50;
    let c = edge_count(v).unwrap() as usize;
    let report = with_single_retry(|attempt| {
        let mut src = RandomSource::new(20 + attempt as u64);
        let mut counts = vec![0u64; c];
        for _ in 0..10_000 {
            for (a, b) in gnp(v, 0.1, &mut src).unwrap() {
                counts[edge_to_index(v, a, b) as usize] += 1;
            }
        }
        binomial_dispersion(&counts, 10_000, 0.1, DEFAULT_ALPHA)
    })
    .unwrap();
    assert!(report.pass, "{report}");
}
