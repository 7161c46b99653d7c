use super::logfact::ln_factorial_ratio;
use super::UniformSource;
use crate::error::{invalid, Result};

/// Inversion is used while `trials * min(p, 1 - p)` stays at or below this.
pub const BINOMIAL_INVERSION_LIMIT: f64 = 30.0;

fn check(prob: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&prob) {
        return invalid(format!("binomial probability {prob} outside [0, 1]"));
    }
    Ok(())
}

/// Binomial deviate: successes in `trials` independent trials of probability `prob`.
pub fn binomial<S: UniformSource + ?Sized>(src: &mut S, trials: u64, prob: f64) -> Result<u64> {
    check(prob)?;
    Ok(with_reflection(trials, prob, |p| {
        if trials as f64 * p <= BINOMIAL_INVERSION_LIMIT {
            inversion_core(src, trials, p)
        } else {
            btrs_core(src, trials, p)
        }
    }))
}

/// Binomial deviate by sequential inversion regardless of parameters.
pub fn binomial_inversion<S: UniformSource + ?Sized>(src: &mut S, trials: u64, prob: f64) -> Result<u64> {
    check(prob)?;
    Ok(with_reflection(trials, prob, |p| inversion_core(src, trials, p)))
}

/// Binomial deviate by transformed rejection. Needs `trials * min(p, 1-p) >= 10`.
pub fn binomial_rejection<S: UniformSource + ?Sized>(src: &mut S, trials: u64, prob: f64) -> Result<u64> {
    check(prob)?;
    let p = prob.min(1.0 - prob);
    if trials as f64 * p < 10.0 {
        return invalid("rejection binomial needs trials * min(p, 1-p) >= 10");
    }
    Ok(with_reflection(trials, prob, |p| btrs_core(src, trials, p)))
}

fn with_reflection(trials: u64, prob: f64, mut core: impl FnMut(f64) -> u64) -> u64 {
    if trials == 0 || prob == 0.0 {
        return 0;
    }
    if prob == 1.0 {
        return trials;
    }
    if prob > 0.5 {
        trials - core(1.0 - prob)
    } else {
        core(prob)
    }
}

fn inversion_core<S: UniformSource + ?Sized>(src: &mut S, trials: u64, p: f64) -> u64 {
    let q = 1.0 - p;
    let odds = p / q;
    let f0 = (trials as f64 * (-p).ln_1p()).exp();
    loop {
        let mut u = src.uniform_real();
        let mut f = f0;
        let mut k = 0u64;
        loop {
            if u < f {
                return k;
            }
            u -= f;
            if k == trials || f <= 0.0 {
                break;
            }
            k += 1;
            f *= odds * (trials - k + 1) as f64 / k as f64;
        }
    }
}

// Hormann's BTRS; p <= 1/2 and trials * p >= 10.
fn btrs_core<S: UniformSource + ?Sized>(src: &mut S, trials: u64, p: f64) -> u64 {
    let n = trials as f64;
    let q = 1.0 - p;
    let spq = (n * p * q).sqrt();
    let b = 1.15 + 2.53 * spq;
    let a = -0.0873 + 0.0248 * b + 0.01 * p;
    let c = n * p + 0.5;
    let alpha = (2.83 + 5.1 / b) * spq;
    let v_r = 0.92 - 4.2 / b;
    let lpq = (p / q).ln();
    let m = (((trials as f64) + 1.0) * p).floor().min(n) as u64;
    loop {
        let u = src.uniform_real() - 0.5;
        let v = src.uniform_real();
        let us = 0.5 - u.abs();
        let kf = ((2.0 * a / us + b) * u + c).floor();
        if !(kf >= 0.0 && kf <= n) {
            continue;
        }
        let k = (kf as u64).min(trials);
        if us >= 0.07 && v <= v_r {
            return k;
        }
        let lhs = (v * alpha / (a / (us * us) + b)).ln();
        let rhs = ln_factorial_ratio(m, k) + ln_factorial_ratio(trials - m, trials - k) + (k as f64 - m as f64) * lpq;
        if lhs <= rhs {
            return k;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deviates::RandomSource;

    #[test]
    fn certain_outcomes() {
        let mut src = RandomSource::new(4);
        assert_eq!(binomial(&mut src, 17, 0.0).unwrap(), 0);
        assert_eq!(binomial(&mut src, 17, 1.0).unwrap(), 17);
        assert_eq!(binomial(&mut src, 0, 0.4).unwrap(), 0);
    }

    #[test]
    fn rejects_bad_probability() {
        let mut src = RandomSource::new(4);
        assert!(binomial(&mut src, 3, -0.1).is_err());
        assert!(binomial(&mut src, 3, 1.5).is_err());
        assert!(binomial(&mut src, 3, f64::NAN).is_err());
        assert!(binomial_rejection(&mut src, 10, 0.5).is_err());
    }

    #[test]
    fn large_trials_mean() {
        let mut src = RandomSource::new(8);
        let trials = 1u64 << 40;
        let p = 0.37;
        let draws = 5000;
        let mean = (0..draws)
            .map(|_| binomial(&mut src, trials, p).unwrap() as f64)
            .sum::<f64>()
            / draws as f64;
        let expect = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p) / draws as f64).sqrt();
        assert!((mean - expect).abs() < 5.0 * sd);
    }
}
