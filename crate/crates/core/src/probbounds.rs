//! Exact binomial tails, the geometric-series tail bound, and the closed-form
//! probabilities of the per-row erasure extremes.
//!
//! All pmf values are formed in the log domain from `ln Gamma`, and tails are
//! summed on whichever side of the threshold carries less mass, so both
//! `P(X < c)` and `P(X >= c)` keep full accuracy when close to zero.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::channel::check_probability;
use crate::error::{Error, Result};

/// Snap slack for thresholds such as `N k` that should be integers but
/// picked up floating-point noise (`100 * 0.3 = 30.000000000000004`).
const SNAP: f64 = 1e-9;

fn snapped(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= SNAP * x.abs().max(1.0)).then_some(r)
}

/// Smallest integer `>= x`, treating values within `1e-9` (relative) of an integer as that integer.
pub fn ceil_snapped(x: f64) -> i64 {
    snapped(x).unwrap_or_else(|| x.ceil()) as i64
}

/// Largest integer `<= x`, with the same snapping as [`ceil_snapped`].
pub fn floor_snapped(x: f64) -> i64 {
    snapped(x).unwrap_or_else(|| x.floor()) as i64
}

/// `ln P(X = k)` for `X ~ B(n, theta)`; `-inf` when the mass is zero.
pub fn ln_pmf(n: u64, k: u64, theta: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (kf, nf) = (k as f64, n as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    let hits = if k == 0 { 0.0 } else { kf * theta.ln() };
    let misses = if k == n {
        0.0
    } else {
        (nf - kf) * (-theta).ln_1p()
    };
    ln_choose + hits + misses
}

/// `sum_{k=lo}^{hi} P(X = k)`, by scaled exponentials and Neumaier summation.
fn pmf_sum(n: u64, theta: f64, lo: u64, hi: u64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    let logs: Vec<f64> = (lo..=hi).map(|k| ln_pmf(n, k, theta)).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return 0.0;
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for l in logs {
        let term = (l - peak).exp();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    ((sum + comp) * peak.exp()).min(1.0)
}

/// `(P(X < k), P(X >= k))`, the smaller one summed directly.
fn split_at(n: u64, theta: f64, k: i64) -> (f64, f64) {
    if k <= 0 {
        return (0.0, 1.0);
    }
    let k = k as u64;
    if k > n {
        return (1.0, 0.0);
    }
    if k as f64 > n as f64 * theta {
        let above = pmf_sum(n, theta, k, n);
        (1.0 - above, above)
    } else {
        let below = pmf_sum(n, theta, 0, k - 1);
        (below, 1.0 - below)
    }
}

/// `ln(p)` where `p` is one side of [`split_at`], using `ln_1p` of the other side when that is small.
fn ln_side(side: f64, other: f64) -> f64 {
    if other <= 0.5 {
        (-other).ln_1p()
    } else {
        side.ln()
    }
}

/// `P(X >= threshold)` for `X ~ B(n, theta)`; the first included integer is `ceil(threshold)`.
pub fn binom_tail_upper(n: u64, theta: f64, threshold: f64) -> Result<f64> {
    check_probability(theta)?;
    Ok(split_at(n, theta, ceil_snapped(threshold)).1)
}

/// `P(X <= threshold)` for `X ~ B(n, theta)`.
pub fn binom_tail_lower(n: u64, theta: f64, threshold: f64) -> Result<f64> {
    check_probability(theta)?;
    Ok(split_at(n, theta, floor_snapped(threshold) + 1).0)
}

/// `P(M_max < c) = P(X < c)^t` with `X ~ B(n, theta)`.
pub fn prob_mmax_below(n: u64, t: u64, theta: f64, c: f64) -> Result<f64> {
    check_probability(theta)?;
    let (below, above) = split_at(n, theta, ceil_snapped(c));
    if below == 0.0 {
        return Ok(0.0);
    }
    Ok((t as f64 * ln_side(below, above)).exp())
}

/// `P(M_min < c) = 1 - P(X >= c)^t` with `X ~ B(n, theta)`.
pub fn prob_mmin_below(n: u64, t: u64, theta: f64, c: f64) -> Result<f64> {
    check_probability(theta)?;
    let (below, above) = split_at(n, theta, ceil_snapped(c));
    if above == 0.0 {
        return Ok(1.0);
    }
    Ok(-(t as f64 * ln_side(above, below)).exp_m1())
}

/// The geometric-series bound on `P(X >= n k)` next to the exact tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundResult {
    /// `ceil(n k)`, the first summand index.
    pub first_index: u64,
    /// `P(X >= n k)`, summed exactly.
    pub exact_tail: f64,
    /// Ratio of consecutive summands at the first index.
    pub ratio: f64,
    /// `1 / (1 - ratio)`; infinite when `ratio >= 1`.
    pub geometric_prefactor: f64,
    /// `P(X = ceil(n k))`.
    pub leading_term: f64,
    /// `geometric_prefactor * leading_term`.
    pub lemma_bound: f64,
    /// Whether `ratio < 1`, so the bound applies.
    pub valid: bool,
}

/// Bounds `P(X >= n k)` by the first summand times `1 / (1 - r)`, with
/// `r = (n - K) theta / ((K + 1)(1 - theta))` and `K = ceil(n k)`.
///
/// The summand ratio `(n - y) theta / ((y + 1)(1 - theta))` is decreasing in
/// `y`, so `r` dominates every later ratio and the tail is below the geometric
/// series. Requires `0 < theta < k < 1`.
pub fn lemma_tail_bound(n: u64, theta: f64, k: f64) -> Result<TailBoundResult> {
    if !(theta > 0.0 && theta < k && k < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail bound needs 0 < theta < k < 1, got theta={theta}, k={k}"
        )));
    }
    let first = ceil_snapped(n as f64 * k).max(0) as u64;
    let ratio = (n.saturating_sub(first)) as f64 * theta / ((first + 1) as f64 * (1.0 - theta));
    let valid = ratio < 1.0;
    let geometric_prefactor = if valid {
        1.0 / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    let leading_term = ln_pmf(n, first, theta).exp();
    Ok(TailBoundResult {
        first_index: first,
        exact_tail: split_at(n, theta, first as i64).1,
        ratio,
        geometric_prefactor,
        leading_term,
        lemma_bound: geometric_prefactor * leading_term,
        valid,
    })
}

/// `(ceil(1 / (2 theta)) - 1, t * that)`: the per-row and total support a
/// row-wise transmission can certify at loss rate `theta`.
pub fn support_budget(theta: f64, t: u64) -> Result<(u64, u64)> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "support budget needs 0 < theta < 1, got {theta}"
        )));
    }
    let per_row = (ceil_snapped(1.0 / (2.0 * theta)) - 1).max(0) as u64;
    Ok((per_row, t * per_row))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping() {
        assert_eq!(ceil_snapped(100.0 * 0.3), 30);
        assert_eq!(ceil_snapped(30.2), 31);
        assert_eq!(floor_snapped(-0.5), -1);
        assert_eq!(ceil_snapped(1.0 / (2.0 * 0.05)), 10);
    }

    #[test]
    fn upper_tail_edges() {
        assert_eq!(binom_tail_upper(10, 0.3, 0.0).unwrap(), 1.0);
        assert_eq!(binom_tail_upper(10, 0.5, 11.0).unwrap(), 0.0);
        assert_eq!(binom_tail_upper(10, 1.0, 10.0).unwrap(), 1.0);
        assert_eq!(binom_tail_upper(10, 0.0, 1.0).unwrap(), 0.0);
        assert!(binom_tail_upper(10, 1.2, 1.0).is_err());
    }

    #[test]
    fn lower_tail_edges() {
        assert_eq!(binom_tail_lower(10, 0.3, 10.0).unwrap(), 1.0);
        assert_eq!(binom_tail_lower(10, 0.3, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn single_row_min_equals_max() {
        let a = prob_mmax_below(20, 1, 0.3, 7.0).unwrap();
        let b = prob_mmin_below(20, 1, 0.3, 7.0).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!((a - binom_tail_lower(20, 0.3, 6.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn certain_and_impossible_events() {
        assert_eq!(prob_mmax_below(16, 4, 0.9, 17.0).unwrap(), 1.0);
        assert_eq!(prob_mmin_below(16, 4, 1.0, 16.0).unwrap(), 0.0);
    }

    #[test]
    fn bound_rejects_bad_k() {
        assert!(lemma_tail_bound(100, 0.3, 0.3).is_err());
        assert!(lemma_tail_bound(100, 0.3, 0.2).is_err());
        assert!(lemma_tail_bound(100, 0.0, 0.2).is_err());
    }

    #[test]
    fn bound_dominates_tail() {
        let r = lemma_tail_bound(100, 0.1, 0.3).unwrap();
        assert!(r.valid);
        assert_eq!(r.first_index, 30);
        assert!(r.exact_tail <= r.lemma_bound);
        assert!(r.exact_tail >= r.leading_term);
    }

    #[test]
    fn budgets() {
        assert_eq!(support_budget(0.05, 10).unwrap(), (9, 90));
        assert_eq!(support_budget(0.5, 7).unwrap(), (0, 0));
        assert_eq!(support_budget(0.25, 4).unwrap(), (1, 4));
        assert!(support_budget(0.0, 4).is_err());
        assert!(support_budget(1.0, 4).is_err());
    }
}
