//! Exact log-space evaluation of the Pitman–Yor partition law
//!
//! ```text
//! Pr(C) = prod_{i=1}^{k-1} (alpha + i d) / (alpha + 1)_(n-1) * prod_{c in C} (1 - d)_(|c| - 1)
//! ```
//!
//! with `k = |C|`. This is the usual `d^k (alpha/d)_(k) / (alpha)_(n)` form
//! with the common factor `alpha` cancelled, so every factor stays positive
//! for `alpha > -d` and `d = 0` needs no limit.

use crate::error::{Error, Result};
use crate::params::PYParams;
use crate::partition::{enumerate_partitions, Partition};
use crate::special::{log_rising_factorial_unchecked, LogProb};

/// Largest `n` for the exhaustive normalization sum.
pub const MAX_NORMALIZATION_N: usize = 10;

pub fn eppf_log_prob(params: &PYParams, partition: &Partition) -> LogProb {
    if params.is_dirichlet() {
        return dp_log_prob_unchecked(params.alpha(), partition);
    }
    log_prob_from_sizes(params, partition.n(), &partition.block_sizes())
}

/// Same law from the block sizes alone; the value depends on nothing else.
pub fn log_prob_from_sizes(params: &PYParams, n: usize, sizes: &[usize]) -> LogProb {
    if params.is_dirichlet() {
        return dp_from_sizes(params.alpha(), n, sizes);
    }
    let (alpha, d) = (params.alpha(), params.d());
    let k = sizes.len();
    let mut value = -log_rising_factorial_unchecked(alpha + 1.0, n as u64 - 1);
    for i in 1..k {
        value += (alpha + i as f64 * d).ln();
    }
    for &s in sizes {
        value += log_rising_factorial_unchecked(1.0 - d, s as u64 - 1);
    }
    LogProb::from_ln(value)
}

/// Dirichlet-process (Ewens) law: `alpha^k / (alpha)_(n) * prod (|c| - 1)!`.
pub fn dp_log_prob(alpha: f64, partition: &Partition) -> Result<LogProb> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParams {
            alpha,
            d: 0.0,
            reason: "Dirichlet process needs alpha > 0",
        });
    }
    Ok(dp_log_prob_unchecked(alpha, partition))
}

fn dp_log_prob_unchecked(alpha: f64, partition: &Partition) -> LogProb {
    dp_from_sizes(alpha, partition.n(), &partition.block_sizes())
}

fn dp_from_sizes(alpha: f64, n: usize, sizes: &[usize]) -> LogProb {
    let mut value =
        sizes.len() as f64 * alpha.ln() - log_rising_factorial_unchecked(alpha, n as u64);
    for &s in sizes {
        value += log_rising_factorial_unchecked(1.0, s as u64 - 1);
    }
    LogProb::from_ln(value)
}

/// Sum of the law over every partition of `[n]`; equals one up to rounding.
pub fn normalization_check(params: &PYParams, n: usize) -> Result<f64> {
    if !(1..=MAX_NORMALIZATION_N).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 1,
            max: MAX_NORMALIZATION_N,
        });
    }
    Ok(enumerate_partitions(n)?
        .map(|c| eppf_log_prob(params, &c).prob())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances::{DP_LIMIT_DISCOUNT, DP_LIMIT_TOL, EXHAUSTIVE_TOL};

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn params(alpha: f64, d: f64) -> PYParams {
        PYParams::new(alpha, d).unwrap()
    }

    /// Every valid pair of the standard grid.
    fn grid() -> Vec<PYParams> {
        let mut out = Vec::new();
        for &alpha in &[-0.3, 0.0, 0.5, 1.0, 5.0] {
            for &d in &[0.0, 0.1, 0.5, 0.9] {
                if let Ok(pp) = PYParams::new(alpha, d) {
                    out.push(pp);
                }
            }
        }
        out
    }

    /// The uncancelled textbook form, for `alpha > 0` and `d > 0`.
    fn textbook(alpha: f64, d: f64, c: &Partition) -> f64 {
        let rf = |x: f64, m: usize| (0..m).map(|j| x + j as f64).product::<f64>();
        let k = c.num_blocks();
        d.powi(k as i32) / rf(alpha, c.n())
            * rf(alpha / d, k)
            * c.block_sizes()
                .iter()
                .map(|&s| rf(1.0 - d, s - 1))
                .product::<f64>()
    }

    #[test]
    fn hand_evaluated_values() {
        let pp = params(1.0, 0.5);
        assert_eq!(eppf_log_prob(&pp, &p("1")).ln(), 0.0);
        assert!((eppf_log_prob(&pp, &p("1,2")).prob() - 0.25).abs() < 1e-15);
        assert!((eppf_log_prob(&pp, &p("1|2")).prob() - 0.75).abs() < 1e-15);
        let dp = params(2.0, 0.0);
        assert!((eppf_log_prob(&dp, &p("1,2|3")).prob() - 4.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn single_element_has_probability_one() {
        for pp in grid() {
            assert_eq!(eppf_log_prob(&pp, &p("1")).ln(), 0.0);
        }
    }

    #[test]
    fn dirichlet_values() {
        assert_eq!(dp_log_prob(1.0, &p("1")).unwrap().ln(), 0.0);
        assert!((dp_log_prob(1.0, &p("1|2")).unwrap().prob() - 0.5).abs() < 1e-15);
        assert!((dp_log_prob(3.0, &p("1,2,3")).unwrap().prob() - 0.1).abs() < 1e-15);
        assert!(dp_log_prob(0.0, &p("1")).is_err());
        assert!(dp_log_prob(-1.0, &p("1")).is_err());
    }

    #[test]
    fn matches_uncancelled_form() {
        for &(alpha, d) in &[(1.0, 0.5), (0.3, 0.7), (5.0, 0.1)] {
            for c in enumerate_partitions(6).unwrap() {
                let ours = eppf_log_prob(&params(alpha, d), &c).prob();
                let reference = textbook(alpha, d, &c);
                assert!((ours - reference).abs() <= 1e-14 * reference.max(1e-300));
            }
        }
    }

    #[test]
    fn normalization_small_cases() {
        let pp = params(1.0, 0.5);
        assert_eq!(normalization_check(&pp, 1).unwrap(), 1.0);
        assert!((normalization_check(&pp, 2).unwrap() - 1.0).abs() < 1e-15);
        let pp = params(0.3, 0.7);
        assert!((normalization_check(&pp, 8).unwrap() - 1.0).abs() < EXHAUSTIVE_TOL);
        assert!(normalization_check(&pp, 0).is_err());
        assert!(normalization_check(&pp, 11).is_err());
    }

    #[test]
    fn normalization_over_grid() {
        for pp in grid() {
            for n in 1..=8 {
                let total = normalization_check(&pp, n).unwrap();
                assert!(
                    (total - 1.0).abs() < EXHAUSTIVE_TOL,
                    "{pp:?} n={n}: {total}"
                );
            }
        }
    }

    #[test]
    fn depends_only_on_block_sizes() {
        let pp = params(0.7, 0.3);
        let a = eppf_log_prob(&pp, &p("1,2|3|4,5,6"));
        let b = eppf_log_prob(&pp, &p("1|2,5,6|3,4"));
        let c = eppf_log_prob(&pp, &p("1,6,3|2,4|5"));
        assert_eq!(a.ln().to_bits(), b.ln().to_bits());
        assert_eq!(a.ln().to_bits(), c.ln().to_bits());
    }

    #[test]
    fn dirichlet_limit() {
        for &alpha in &[0.5, 1.0, 5.0] {
            let near = params(alpha, DP_LIMIT_DISCOUNT);
            for n in 1..=6 {
                for c in enumerate_partitions(n).unwrap() {
                    let gap = (eppf_log_prob(&near, &c).prob()
                        - dp_log_prob(alpha, &c).unwrap().prob())
                    .abs();
                    assert!(gap <= DP_LIMIT_TOL);
                }
            }
        }
    }

    #[test]
    fn consistent_under_adding_an_element() {
        for pp in grid() {
            for n in 1..=6 {
                for c in enumerate_partitions(n).unwrap() {
                    let here = eppf_log_prob(&pp, &c).prob();
                    let extended: f64 = c.extensions().map(|e| eppf_log_prob(&pp, &e).prob()).sum();
                    assert!((here - extended).abs() <= 1e-13 * here.max(1e-300) + 1e-16);
                }
            }
        }
    }
}
