use super::logfact::{ln_factorial, ln_factorial_ratio};
use super::UniformSource;
use crate::error::{invalid, Result};

/// Reduced problems whose smaller parameter is at most this use inversion.
pub const HYPERGEOM_INVERSION_LIMIT: u64 = 32;
// Above this variance the mode carries little mass and the walk gets long.
const INVERSION_VARIANCE_LIMIT: f64 = 16.0;

/// Parameters of the number of successes among `draws` draws without
/// replacement from `total` items of which `successes` are successes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypergeomParams {
    pub draws: u64,
    pub successes: u64,
    pub total: u64,
}

impl HypergeomParams {
    pub fn new(draws: u64, successes: u64, total: u64) -> Result<Self> {
        if draws > total || successes > total {
            return invalid(format!(
                "hypergeometric parameters out of range: draws={draws} successes={successes} total={total}"
            ));
        }
        Ok(Self {
            draws,
            successes,
            total,
        })
    }

    /// Inclusive support bounds `max(0, n + l - N)..=min(n, l)`.
    pub fn support(&self) -> (u64, u64) {
        let lo = (self.draws + self.successes).saturating_sub(self.total);
        (lo, self.draws.min(self.successes))
    }

    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.draws as f64 * self.successes as f64 / self.total as f64
    }

    /// Whether [`hypergeometric`] draws these parameters by inversion.
    pub fn uses_inversion(&self) -> bool {
        let r = Reduced::new(*self);
        r.small() <= HYPERGEOM_INVERSION_LIMIT || r.variance() <= INVERSION_VARIANCE_LIMIT
    }

    pub fn variance(&self) -> f64 {
        if self.total < 2 {
            return 0.0;
        }
        let n = self.total as f64;
        let p = self.successes as f64 / n;
        self.draws as f64 * p * (1.0 - p) * (n - self.draws as f64) / (n - 1.0)
    }
}

/// Reflections that bring draws and successes to at most half the total.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    draws: u64,
    successes: u64,
    total: u64,
    complement_draws: bool,
    complement_successes: bool,
    original_draws: u64,
}

impl Reduced {
    fn new(p: HypergeomParams) -> Self {
        let n = p.total;
        let complement_successes = p.successes > n - p.successes;
        let complement_draws = p.draws > n - p.draws;
        Self {
            draws: if complement_draws { n - p.draws } else { p.draws },
            successes: if complement_successes {
                n - p.successes
            } else {
                p.successes
            },
            total: n,
            complement_draws,
            complement_successes,
            original_draws: p.draws,
        }
    }

    fn small(&self) -> u64 {
        self.draws.min(self.successes)
    }

    fn big(&self) -> u64 {
        self.draws.max(self.successes)
    }

    fn variance(&self) -> f64 {
        HypergeomParams {
            draws: self.draws,
            successes: self.successes,
            total: self.total,
        }
        .variance()
    }

    fn restore(&self, z: u64) -> u64 {
        let y = if self.complement_draws { self.successes - z } else { z };
        if self.complement_successes {
            self.original_draws - y
        } else {
            y
        }
    }
}

fn mode(small: u64, big: u64, total: u64) -> u64 {
    let m = (small as u128 + 1) * (big as u128 + 1) / (total as u128 + 2);
    (m as u64).min(small)
}

fn ln_choose(a: u64, x: u64) -> f64 {
    if x <= a - x {
        ln_factorial_ratio(a, a - x) - ln_factorial(x)
    } else {
        ln_factorial_ratio(a, x) - ln_factorial(a - x)
    }
}

// ln P(X = x) with the smaller of (draws, successes) in `small`; x on support.
fn ln_pmf_sorted(x: u64, small: u64, big: u64, total: u64) -> f64 {
    ln_choose(small, x)
        + ln_factorial_ratio(total - small, total)
        + ln_factorial_ratio(big, big - x)
        + ln_factorial_ratio(total - big, total - small - big + x)
}

/// Exact log-probability `ln P(X = x)`; `-inf` outside the support.
pub fn hypergeom_log_pmf(x: u64, params: HypergeomParams) -> f64 {
    let (lo, hi) = params.support();
    if x < lo || x > hi {
        return f64::NEG_INFINITY;
    }
    let small = params.draws.min(params.successes);
    let big = params.draws.max(params.successes);
    ln_pmf_sorted(x, small, big, params.total)
}

/// Draws a hypergeometric deviate, choosing inversion or rejection by the
/// shape of the reduced problem.
pub fn hypergeometric<S: UniformSource + ?Sized>(src: &mut S, params: HypergeomParams) -> u64 {
    let r = Reduced::new(params);
    let small = r.small();
    let z = if small == 0 {
        0
    } else if small <= HYPERGEOM_INVERSION_LIMIT || r.variance() <= INVERSION_VARIANCE_LIMIT {
        inversion_core(src, small, r.big(), r.total)
    } else {
        rejection_core(src, r.draws, r.successes, r.total)
    };
    r.restore(z)
}

/// Hypergeometric deviate by sequential inversion regardless of parameters.
pub fn hypergeometric_inversion<S: UniformSource + ?Sized>(src: &mut S, params: HypergeomParams) -> u64 {
    let r = Reduced::new(params);
    let small = r.small();
    let z = if small == 0 {
        0
    } else {
        inversion_core(src, small, r.big(), r.total)
    };
    r.restore(z)
}

/// Hypergeometric deviate by ratio-of-uniforms rejection regardless of
/// parameters.
pub fn hypergeometric_rejection<S: UniformSource + ?Sized>(src: &mut S, params: HypergeomParams) -> u64 {
    let r = Reduced::new(params);
    let z = if r.small() == 0 {
        0
    } else {
        rejection_core(src, r.draws, r.successes, r.total)
    };
    r.restore(z)
}

// Support is 0..=small. Walks outward from the mode, alternating down and
// up, subtracting probabilities from one uniform. Rounding leftovers restart.
fn inversion_core<S: UniformSource + ?Sized>(src: &mut S, small: u64, big: u64, total: u64) -> u64 {
    let m = mode(small, big, total);
    let p_mode = ln_pmf_sorted(m, small, big, total).exp();
    let rest = total - small - big;
    let up = |x: u64| ((small - x) as f64 * (big - x) as f64) / ((x + 1) as f64 * (rest + x + 1) as f64);
    let down = |x: u64| (x as f64 * (rest + x) as f64) / ((small - x + 1) as f64 * (big - x + 1) as f64);
    loop {
        let mut u = src.uniform_real() - p_mode;
        if u < 0.0 {
            return m;
        }
        let (mut lo, mut hi) = (m, m);
        let (mut p_lo, mut p_hi) = (p_mode, p_mode);
        loop {
            let can_down = lo > 0 && p_lo > 0.0;
            let can_up = hi < small && p_hi > 0.0;
            if !can_down && !can_up {
                break;
            }
            if can_down {
                p_lo *= down(lo);
                lo -= 1;
                u -= p_lo;
                if u < 0.0 {
                    return lo;
                }
            }
            if can_up {
                p_hi *= up(hi);
                hi += 1;
                u -= p_hi;
                if u < 0.0 {
                    return hi;
                }
            }
        }
    }
}

const HRUA_D1: f64 = 1.715_527_769_921_413_5; // 2 * sqrt(2 / e)
const HRUA_D2: f64 = 0.898_916_162_058_898_8; // 3 - 2 * sqrt(3 / e)

// Stadlober's ratio-of-uniforms sampler (HRUA). Requires
// sample <= total / 2 and good <= total / 2.
fn rejection_core<S: UniformSource + ?Sized>(src: &mut S, sample: u64, good: u64, total: u64) -> u64 {
    let bad = total - good;
    let nf = total as f64;
    let mf = sample as f64;
    let d4 = good as f64 / nf;
    let d5 = 1.0 - d4;
    let d6 = mf * d4 + 0.5;
    let d7 = ((nf - mf) * mf * d4 * d5 / (nf - 1.0) + 0.5).sqrt();
    let d8 = HRUA_D1 * d7 + HRUA_D2;
    let d9 = mode(sample, good, total).min(good);
    let upper = (sample.min(good) as f64 + 1.0).min((d6 + 16.0 * d7).floor());
    loop {
        let x = src.uniform_open();
        let y = src.uniform_real();
        let w = d6 + d8 * (y - 0.5) / x;
        if !(w >= 0.0 && w < upper) {
            continue;
        }
        let z = w as u64;
        let t = ln_factorial_ratio(d9, z)
            + ln_factorial_ratio(good - d9, good - z)
            + ln_factorial_ratio(sample - d9, sample - z)
            + ln_factorial_ratio(bad - sample + d9, bad - sample + z);
        if x * (4.0 - x) - 3.0 <= t {
            return z;
        }
        if x * (x - t) >= 1.0 {
            continue;
        }
        if 2.0 * x.ln() <= t {
            return z;
        }
    }
}
