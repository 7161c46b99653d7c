use super::UniformSource;
use crate::error::{invalid, Result};

/// Number of failures before the first success, for a fixed success
/// probability. Precomputes the logarithm used by every draw.
#[derive(Debug, Clone, Copy)]
pub struct Geometric {
    prob: f64,
    inv_ln_q: f64,
}

impl Geometric {
    pub fn new(prob: f64) -> Result<Self> {
        if !(prob > 0.0 && prob <= 1.0) {
            return invalid(format!("geometric probability {prob} outside (0, 1]"));
        }
        Ok(Self {
            prob,
            // ln_1p keeps ln(1 - p) accurate for tiny p
            inv_ln_q: 1.0 / (-prob).ln_1p(),
        })
    }

    pub fn prob(&self) -> f64 {
        self.prob
    }

    /// Saturates at `u64::MAX` for astronomically small probabilities.
    #[inline]
    pub fn sample<S: UniformSource + ?Sized>(&self, src: &mut S) -> u64 {
        if self.prob == 1.0 {
            return 0;
        }
        (src.uniform_open().ln() * self.inv_ln_q).floor() as u64
    }
}

pub fn geometric<S: UniformSource + ?Sized>(src: &mut S, prob: f64) -> Result<u64> {
    Ok(Geometric::new(prob)?.sample(src))
}
