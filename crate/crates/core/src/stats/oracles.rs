use std::collections::HashMap;
use std::sync::OnceLock;

use statrs::function::factorial;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

const CACHE_LEN: usize = 1_000_001;
const MAX_SUBSETS: u128 = 1_000_000;

/// `ln(k!)` from the log-gamma function, cached for `k <= 10^6`.
pub fn ln_factorial(k: u64) -> f64 {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    if k < CACHE_LEN as u64 {
        let table = CACHE.get_or_init(|| (0..CACHE_LEN as u64).map(factorial::ln_factorial).collect());
        return table[k as usize];
    }
    ln_gamma(k as f64 + 1.0)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `P(X = x)` for `X ~ Hypergeom(draws, successes, total)`.
pub fn hypergeom_pmf(x: u64, draws: u64, successes: u64, total: u64) -> f64 {
    let lo = (draws + successes).saturating_sub(total);
    let hi = draws.min(successes);
    if x < lo || x > hi {
        return 0.0;
    }
    (ln_choose(successes, x) + ln_choose(total - successes, draws - x) - ln_choose(total, draws)).exp()
}

/// `P(X = k)` for `X ~ Binomial(trials, prob)`.
pub fn binomial_pmf(k: u64, trials: u64, prob: f64) -> f64 {
    if k > trials {
        return 0.0;
    }
    if prob == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if prob == 1.0 {
        return if k == trials { 1.0 } else { 0.0 };
    }
    (ln_choose(trials, k) + k as f64 * prob.ln() + (trials - k) as f64 * (1.0 - prob).ln()).exp()
}

/// `P(X = k) = (1 - p)^k p`.
pub fn geometric_pmf(k: u64, prob: f64) -> f64 {
    (1.0 - prob).powi(k as i32) * prob
}

/// Exact distribution of the skip before the next selected position, by
/// direct evaluation of the tail product. Index `s` holds `P(S = s)` for
/// `s` in `0..=universe - remaining`.
pub fn skip_pmf_table(remaining: u64, universe: u64) -> Vec<f64> {
    assert!(remaining >= 1 && remaining <= universe);
    let slack = universe - remaining;
    let mut tail = Vec::with_capacity(slack as usize + 2);
    let mut t = 1.0;
    tail.push(t);
    for i in 0..=slack {
        t *= (universe - remaining - i) as f64 / (universe - i) as f64;
        tail.push(t);
    }
    (0..=slack as usize).map(|s| tail[s] - tail[s + 1]).collect()
}

/// `ln( prod_i C(L_i, c_i) / C(sum L, n) )`; `-inf` when infeasible.
pub fn multivariate_hypergeom_log_pmf(counts: &[u64], group_sizes: &[u64], n: u64) -> f64 {
    if counts.len() != group_sizes.len()
        || counts.iter().sum::<u64>() != n
        || counts.iter().zip(group_sizes).any(|(c, l)| c > l)
    {
        return f64::NEG_INFINITY;
    }
    let total: u64 = group_sizes.iter().sum();
    counts
        .iter()
        .zip(group_sizes)
        .map(|(&c, &l)| ln_choose(l, c))
        .sum::<f64>()
        - ln_choose(total, n)
}

/// All `n`-subsets of `1..=universe` in lexicographic order, with a reverse
/// index for histogramming sampler output.
#[derive(Debug, Clone)]
pub struct SubsetEnumeration {
    subsets: Vec<Vec<u64>>,
    index: HashMap<Vec<u64>, usize>,
}

impl SubsetEnumeration {
    pub fn new(n: u64, universe: u64) -> Result<Self> {
        if n > universe {
            return invalid(format!("no {n}-subsets of a {universe}-element universe"));
        }
        let count = (0..n).fold(1u128, |acc, i| acc * (universe - i) as u128 / (i + 1) as u128);
        if count > MAX_SUBSETS {
            return invalid(format!("{count} subsets exceeds the enumeration limit"));
        }
        let mut subsets = Vec::with_capacity(count as usize);
        let mut current: Vec<u64> = (1..=n).collect();
        loop {
            subsets.push(current.clone());
            // rightmost position that can still advance
            let Some(i) = (0..n as usize)
                .rev()
                .find(|&i| current[i] < universe - (n - 1 - i as u64))
            else {
                break;
            };
            current[i] += 1;
            for j in i + 1..n as usize {
                current[j] = current[j - 1] + 1;
            }
        }
        let index = subsets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { subsets, index })
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Vec<u64>] {
        &self.subsets
    }

    /// Index of `sample` (in any order); `None` if it is not an `n`-subset.
    pub fn rank(&self, sample: &[u64]) -> Option<usize> {
        let mut key = sample.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    /// Uniform probabilities over all subsets.
    pub fn uniform_probs(&self) -> Vec<f64> {
        vec![1.0 / self.len() as f64; self.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        let e = SubsetEnumeration::new(1, 3).unwrap();
        assert_eq!(e.subsets(), &[vec![1], vec![2], vec![3]]);
        assert_eq!(SubsetEnumeration::new(3, 8).unwrap().len(), 56);
        let empty = SubsetEnumeration::new(0, 5).unwrap();
        assert_eq!(empty.len(), 1);
        assert_eq!(empty.rank(&[]), Some(0));
        assert!(SubsetEnumeration::new(20, 60).is_err());
    }

    #[test]
    fn rank_is_a_bijection() {
        let e = SubsetEnumeration::new(3, 7).unwrap();
        for (i, s) in e.subsets().iter().enumerate() {
            assert_eq!(e.rank(s), Some(i));
            let mut rev = s.clone();
            rev.reverse();
            assert_eq!(e.rank(&rev), Some(i));
        }
        assert!(e.subsets().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(e.rank(&[1, 2]), None);
    }

    #[test]
    fn multivariate_examples() {
        assert!(multivariate_hypergeom_log_pmf(&[4], &[9], 4).abs() < 1e-12);
        assert!(multivariate_hypergeom_log_pmf(&[1, 1], &[1, 1], 2).abs() < 1e-12);
        let v = multivariate_hypergeom_log_pmf(&[2, 1], &[3, 2], 3);
        assert!((v - 0.6f64.ln()).abs() < 1e-12);
        assert_eq!(multivariate_hypergeom_log_pmf(&[3, 0], &[2, 5], 3), f64::NEG_INFINITY);
    }

    #[test]
    fn pmfs_normalize() {
        let h: f64 = (0..=10).map(|x| hypergeom_pmf(x, 10, 30, 100)).sum();
        assert!((h - 1.0).abs() < 1e-9);
        let b: f64 = (0..=20).map(|k| binomial_pmf(k, 20, 0.3)).sum();
        assert!((b - 1.0).abs() < 1e-9);
        let s: f64 = skip_pmf_table(3, 10).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        // one remaining of eight: uniform skip
        for p in skip_pmf_table(1, 8) {
            assert!((p - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_factorial_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-12);
        assert!(ln_factorial(2_000_000) > ln_factorial(1_000_000));
    }
}
