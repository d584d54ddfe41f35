//! Two-sided Wilcoxon signed-rank test with exact small-sample p-values.
//!
//! Zero differences are dropped. For n <= 25 remaining pairs the p-value is
//! exact over all 2^n sign assignments (computed by a subset-sum
//! distribution); larger samples use the normal approximation with tie
//! correction and continuity correction.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Significance level used for report marks.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

/// Largest n for which the exact distribution is enumerated.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// min(W+, W-): the smaller of the signed-rank sums.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// p < 0.01.
    pub significant: bool,
    /// True when every difference was zero.
    pub degenerate: bool,
    /// Pairs remaining after zero-difference removal.
    pub n_used: usize,
    /// True when the exact enumeration was used.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonError {
    LengthMismatch,
    Empty,
}

impl fmt::Display for WilcoxonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WilcoxonError::LengthMismatch => f.write_str("paired samples must have equal length"),
            WilcoxonError::Empty => f.write_str("paired samples must be nonempty"),
        }
    }
}

/// Average ranks of `values` (ascending), doubled so ties stay integral.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks2 = alloc::vec![0u64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Average rank of positions i..=j (1-based), doubled: (i+1) + (j+1).
        let r2 = (i as u64 + 1) + (j as u64 + 1);
        for &idx in &order[i..=j] {
            ranks2[idx] = r2;
        }
        i = j + 1;
    }
    ranks2
}

/// Exact two-sided p-value: 2 * P(min rank sum <= w) over all 2^n sign
/// assignments of the given doubled ranks, capped at 1.
pub fn exact_two_sided_p(doubled: &[u64], w_doubled: u64) -> f64 {
    let n = doubled.len();
    let max_sum: u64 = doubled.iter().sum();
    // Subset-sum distribution of W+ (doubled scale).
    let mut counts = alloc::vec![0u64; max_sum as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    let tail: u64 = counts[..=w_doubled.min(max_sum) as usize].iter().sum();
    let total = (1u128) << n;
    let p = 2.0 * (tail as f64) / (total as f64);
    p.min(1.0)
}

/// Exact two-sided p-value for untied ranks 1..=n and min rank sum `w`.
pub fn exact_two_sided_p_untied(n: usize, w: u64) -> f64 {
    let ranks: Vec<u64> = (1..=n as u64).map(|r| 2 * r).collect();
    exact_two_sided_p(&ranks, 2 * w)
}

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2))
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult, WilcoxonError> {
    if x.len() != y.len() {
        return Err(WilcoxonError::LengthMismatch);
    }
    if x.is_empty() {
        return Err(WilcoxonError::Empty);
    }

    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            significant: false,
            degenerate: true,
            n_used: 0,
            exact: true,
        });
    }

    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks2 = doubled_ranks(&abs);
    let w_plus2: u64 = diffs
        .iter()
        .zip(&ranks2)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let total2: u64 = ranks2.iter().sum();
    let w_minus2 = total2 - w_plus2;
    let w2 = w_plus2.min(w_minus2);
    let statistic = w2 as f64 / 2.0;

    let (p_value, exact) = if n <= EXACT_LIMIT {
        (exact_two_sided_p(&ranks2, w2), true)
    } else {
        // Normal approximation with tie correction.
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
        // Tie groups over |d|.
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
        if var <= 0.0 {
            (1.0, false)
        } else {
            let z = (statistic - mean + 0.5) / libm::sqrt(var);
            ((2.0 * phi(z)).min(1.0), false)
        }
    };

    Ok(WilcoxonResult {
        statistic,
        p_value,
        significant: p_value < SIGNIFICANCE_LEVEL,
        degenerate: false,
        n_used: n,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn all_positive_differences_n5() {
        // n = 5, all differences positive: one-sided exact p = 1/32.
        let x = vec![2.0, 3.0, 4.0, 5.0, 6.0];
        let y = vec![1.0, 1.0, 1.0, 1.0, 1.0];
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_abs_diff_eq!(r.p_value, 0.0625, epsilon = 1e-12);
        assert!(!r.significant);
        assert!(r.exact);
    }

    #[test]
    fn identical_samples_degenerate() {
        let x = vec![1.0, 2.0, 3.0];
        let r = wilcoxon_signed_rank(&x, &x).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn exact_vs_normal_agree_at_n20() {
        use rand::{Rng, SeedableRng};
        // 100 seeded random cases; forbid the approximation path by
        // recomputing the exact p on the same ranks.
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
            let y: Vec<f64> = (0..20).map(|_| rng.random::<f64>() - 0.1).collect();
            let r = wilcoxon_signed_rank(&x, &y).unwrap();
            assert!(r.exact);
            // Normal approximation on the same statistic.
            let n = 20.0f64;
            let mean = n * (n + 1.0) / 4.0;
            let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
            let z = (r.statistic - mean + 0.5) / var.sqrt();
            let approx_p = (2.0 * phi(z)).min(1.0);
            assert!(
                (r.p_value - approx_p).abs() < 0.01,
                "seed {seed}: exact {} vs approx {approx_p}",
                r.p_value
            );
        }
    }

    #[test]
    fn tie_handling_uses_average_ranks() {
        // |d| = [1, 1, 2]: doubled ranks [3, 3, 6].
        assert_eq!(doubled_ranks(&[1.0, 1.0, 2.0]), vec![3, 3, 6]);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert_eq!(
            wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]),
            Err(WilcoxonError::LengthMismatch)
        );
        assert_eq!(wilcoxon_signed_rank(&[], &[]), Err(WilcoxonError::Empty));
    }

    #[test]
    fn matches_published_critical_values() {
        // Two-sided critical values for W = min rank sum: the largest T with
        // exact p <= alpha. None means no attainable critical value.
        let alpha_05: [(usize, Option<u64>); 8] = [
            (5, None),
            (6, Some(0)),
            (7, Some(2)),
            (8, Some(3)),
            (9, Some(5)),
            (10, Some(8)),
            (11, Some(10)),
            (12, Some(13)),
        ];
        let alpha_01: [(usize, Option<u64>); 8] = [
            (5, None),
            (6, None),
            (7, None),
            (8, Some(0)),
            (9, Some(1)),
            (10, Some(3)),
            (11, Some(5)),
            (12, Some(7)),
        ];
        for (table, alpha) in [(&alpha_05, 0.05), (&alpha_01, 0.01)] {
            for &(n, expected) in table.iter() {
                let max_w = (n * (n + 1) / 2) as u64 / 2;
                let computed = (0..=max_w)
                    .rev()
                    .find(|&w| exact_two_sided_p_untied(n, w) <= alpha);
                assert_eq!(computed, expected, "n = {n}, alpha = {alpha}");
            }
        }
    }

    #[test]
    fn normal_path_used_above_limit() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 + 1.0).collect();
        let y: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        assert!(!r.exact);
        assert!(r.significant);
    }
}
