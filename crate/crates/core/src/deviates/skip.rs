use super::UniformSource;
use crate::error::{invalid, Result};

/// Vitter's rejection method is used while the remaining universe exceeds
/// this multiple of the remaining sample count; below it, sequential
/// inversion is cheaper.
pub const SKIP_REJECTION_CROSSOVER: u64 = 13;

fn check(remaining: u64, universe: u64) -> Result<()> {
    if remaining < 1 || remaining > universe {
        return invalid(format!(
            "skip deviate needs 1 <= n <= N, got n={remaining} N={universe}"
        ));
    }
    Ok(())
}

fn use_rejection(remaining: u64, universe: u64) -> bool {
    remaining >= 2 && (universe as u128) > SKIP_REJECTION_CROSSOVER as u128 * remaining as u128
}

/// Number of unselected positions before the next selected one when
/// `remaining` items are still to be chosen from `universe` positions.
///
/// `P(S >= s) = prod_{i<s} (N - n - i) / (N - i)`.
pub fn skip_deviate<S: UniformSource + ?Sized>(src: &mut S, remaining: u64, universe: u64) -> Result<u64> {
    check(remaining, universe)?;
    Ok(if remaining == universe {
        0
    } else if remaining == 1 {
        src.uniform_below(universe)
    } else if use_rejection(remaining, universe) {
        let mut vprime = fresh_vprime(src, remaining);
        rejection_step(src, remaining, universe, &mut vprime)
    } else {
        inversion_step(src, remaining, universe)
    })
}

/// Forces the sequential-inversion path.
pub fn skip_deviate_inversion<S: UniformSource + ?Sized>(src: &mut S, remaining: u64, universe: u64) -> Result<u64> {
    check(remaining, universe)?;
    Ok(inversion_step(src, remaining, universe))
}

/// Forces the rejection path. Needs `remaining >= 2`.
pub fn skip_deviate_rejection<S: UniformSource + ?Sized>(src: &mut S, remaining: u64, universe: u64) -> Result<u64> {
    check(remaining, universe)?;
    if remaining < 2 {
        return invalid("rejection skip needs at least two remaining samples");
    }
    let mut vprime = fresh_vprime(src, remaining);
    Ok(rejection_step(src, remaining, universe, &mut vprime))
}

#[inline]
fn fresh_vprime<S: UniformSource + ?Sized>(src: &mut S, n: u64) -> f64 {
    (src.uniform_open().ln() / n as f64).exp()
}

// Method A: walk the tail probabilities until they drop below a uniform.
fn inversion_step<S: UniformSource + ?Sized>(src: &mut S, n: u64, universe: u64) -> u64 {
    let v = src.uniform_real();
    let mut s = 0u64;
    let mut top = (universe - n) as f64;
    let mut total = universe as f64;
    let mut quot = top / total;
    while quot > v {
        s += 1;
        top -= 1.0;
        total -= 1.0;
        quot *= top / total;
    }
    s
}

// Method D. On return `vprime` holds a valid U^(1/(n-1)) for the next call.
fn rejection_step<S: UniformSource + ?Sized>(src: &mut S, n: u64, universe: u64, vprime: &mut f64) -> u64 {
    let nf = n as f64;
    let total = universe as f64;
    let ninv = 1.0 / nf;
    let nmin1inv = 1.0 / (nf - 1.0);
    let qu1 = (universe - n + 1) as f64;
    loop {
        let (x, s) = loop {
            let x = total * (1.0 - *vprime);
            let s = x.floor();
            if s < qu1 {
                break (x, s);
            }
            *vprime = (src.uniform_open().ln() * ninv).exp();
        };
        let u = src.uniform_open();
        let y1 = ((u * total / qu1).ln() * nmin1inv).exp();
        *vprime = y1 * (1.0 - x / total) * (qu1 / (qu1 - s));
        if *vprime <= 1.0 {
            return s as u64;
        }
        let si = s as u64;
        let mut y2 = 1.0;
        let mut top = total - 1.0;
        let (mut bottom, iterations) = if n - 1 > si {
            (total - nf, si)
        } else {
            (total - 1.0 - s, n - 1)
        };
        for _ in 0..iterations {
            y2 = y2 * top / bottom;
            top -= 1.0;
            bottom -= 1.0;
        }
        if total / (total - x) >= y1 * (y2.ln() * nmin1inv).exp() {
            *vprime = (src.uniform_open().ln() * nmin1inv).exp();
            return si;
        }
        *vprime = (src.uniform_open().ln() * ninv).exp();
    }
}

/// Stateful skip generator for sequential sampling: yields successive skips
/// while carrying Vitter's auxiliary deviate between steps.
#[derive(Debug, Clone)]
pub struct SkipSequence {
    remaining: u64,
    universe: u64,
    // U^(1/k) valid for `remaining == k`
    vprime: Option<(u64, f64)>,
}

impl SkipSequence {
    pub fn new(remaining: u64, universe: u64) -> Result<Self> {
        if remaining > universe {
            return invalid(format!("cannot select {remaining} positions from {universe}"));
        }
        Ok(Self {
            remaining,
            universe,
            vprime: None,
        })
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// Next skip, or `None` once every position has been selected.
    pub fn next_skip<S: UniformSource + ?Sized>(&mut self, src: &mut S) -> Option<u64> {
        let n = self.remaining;
        let big = self.universe;
        if n == 0 {
            return None;
        }
        let s = if n == big {
            self.vprime = None;
            0
        } else if n == 1 {
            match self.vprime.take() {
                Some((1, v)) => ((big as f64 * v) as u64).min(big - 1),
                _ => src.uniform_below(big),
            }
        } else if use_rejection(n, big) {
            let mut v = match self.vprime {
                Some((k, v)) if k == n => v,
                _ => fresh_vprime(src, n),
            };
            let s = rejection_step(src, n, big, &mut v);
            self.vprime = Some((n - 1, v));
            s
        } else {
            self.vprime = None;
            inversion_step(src, n, big)
        };
        self.remaining -= 1;
        self.universe -= s + 1;
        Some(s)
    }
}
