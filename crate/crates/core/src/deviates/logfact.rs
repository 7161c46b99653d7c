use std::sync::OnceLock;

const TABLE_LEN: usize = 256;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

fn table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for k in 1..TABLE_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

// ln k! - [(k + 1/2) ln k - k + ln(2 pi)/2], accurate to ~1e-17 for k >= 256
#[inline]
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// `ln(k!)`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < TABLE_LEN as u64 {
        return table()[k as usize];
    }
    let x = k as f64;
    (x + 0.5) * x.ln() - x + HALF_LN_TWO_PI + stirling_tail(x)
}

/// `ln(a!) - ln(b!)` without cancellation when `a` and `b` are large and
/// close together.
pub fn ln_factorial_ratio(a: u64, b: u64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (hi, lo, sign) = if a > b { (a, b, 1.0) } else { (b, a, -1.0) };
    if lo < TABLE_LEN as u64 {
        return sign * (ln_factorial(hi) - ln_factorial(lo));
    }
    let d = (hi - lo) as f64;
    let lo_f = lo as f64;
    let hi_f = hi as f64;
    let v = (hi_f + 0.5) * (d / lo_f).ln_1p() + d * lo_f.ln() - d + stirling_tail(hi_f) - stirling_tail(lo_f);
    sign * v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(k: u64) -> f64 {
        (1..=k).map(|i| (i as f64).ln()).sum()
    }

    #[test]
    fn matches_direct_sum() {
        for k in [0, 1, 2, 10, 255, 256, 300, 1000, 5000] {
            let expect = direct(k);
            assert!((ln_factorial(k) - expect).abs() <= 1e-12 * expect.max(1.0), "k={k}");
        }
    }

    #[test]
    fn ratio_is_accurate_for_huge_close_arguments() {
        let base = 1u64 << 52;
        // ln((base+3)!/base!) = ln(base+1) + ln(base+2) + ln(base+3)
        let expect: f64 = (1..=3).map(|i| ((base + i) as f64).ln()).sum();
        let got = ln_factorial_ratio(base + 3, base);
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
        assert!((ln_factorial_ratio(base, base + 3) + expect).abs() < 1e-9);
    }

    #[test]
    fn ratio_agrees_with_difference_in_moderate_range() {
        for (a, b) in [(300, 280), (1000, 1), (4000, 3990), (10, 300)] {
            let expect = direct(a) - direct(b);
            assert!((ln_factorial_ratio(a, b) - expect).abs() < 1e-8);
        }
    }
}
