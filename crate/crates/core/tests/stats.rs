use samplekit::deviates::{RandomSource, UniformSource};
use samplekit::stats::{
    avalanche_score, chi_square_gof, multivariate_hypergeom_log_pmf, SubsetEnumeration, DEFAULT_ALPHA,
};

#[test]
fn proportional_data_passes() {
    let r = chi_square_gof(&[10, 20, 30, 40], &[0.1, 0.2, 0.3, 0.4], DEFAULT_ALPHA).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert!(r.pass);
}

#[test]
fn concentrated_data_fails() {
    let mut counts = [0u64; 10];
    counts[3] = 1000;
    let r = chi_square_gof(&counts, &[0.1; 10], DEFAULT_ALPHA).unwrap();
    assert!((r.statistic - 9000.0).abs() < 1e-6);
    assert!(!r.pass);
}

#[test]
fn false_rejection_rate_is_calibrated() {
    let mut src = RandomSource::new(3);
    let probs = [0.05, 0.15, 0.3, 0.3, 0.2];
    let mut rejections = 0;
    for _ in 0..1000 {
        let mut counts = [0u64; 5];
        for _ in 0..2000 {
            let u = src.uniform_real();
            let mut acc = 0.0;
            let cell = probs.iter().position(|p| {
                acc += p;
                u < acc
            });
            counts[cell.unwrap_or(4)] += 1;
        }
        rejections += !chi_square_gof(&counts, &probs, DEFAULT_ALPHA).unwrap().pass as u32;
    }
    let sd = (DEFAULT_ALPHA * (1.0 - DEFAULT_ALPHA) / 1000.0).sqrt();
    let rate = rejections as f64 / 1000.0;
    assert!((rate - DEFAULT_ALPHA).abs() <= 3.0 * sd, "{rate}");
}

#[test]
fn subset_enumeration_sizes() {
    let e = SubsetEnumeration::new(1, 3).unwrap();
    assert_eq!(e.subsets(), &[vec![1], vec![2], vec![3]]);
    assert_eq!(SubsetEnumeration::new(3, 8).unwrap().len(), 56);
    let e = SubsetEnumeration::new(0, 5).unwrap();
    assert_eq!(e.len(), 1);
    assert!(e.subsets()[0].is_empty());
}

#[test]
fn multivariate_hypergeometric_values() {
    assert_eq!(multivariate_hypergeom_log_pmf(&[4], &[9], 4), 0.0);
    assert_eq!(multivariate_hypergeom_log_pmf(&[1, 1], &[1, 1], 2), 0.0);
    let v = multivariate_hypergeom_log_pmf(&[2, 1], &[3, 2], 3);
    assert!((v - 0.6f64.ln()).abs() < 1e-12);
}

#[test]
fn avalanche_diagnostics() {
    let mut src = RandomSource::new(4);
    let identity = avalanche_score(|w| w[0], 1000, &mut src).unwrap();
    assert_eq!(identity.min, 0.0);
    let constant = avalanche_score(|_| 42, 1000, &mut src).unwrap();
    assert_eq!(constant.max, 0.0);
}
