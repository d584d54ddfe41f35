//! Summary statistics over nonnegative count vectors.

use core::fmt;

use serde::{Deserialize, Serialize};

/// The six summary metrics computed over an entity bag or metric series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicStats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
    pub entropy: f64,
}

impl BasicStats {
    pub const ZERO: BasicStats = BasicStats {
        mean: 0.0,
        median: 0.0,
        min: 0.0,
        max: 0.0,
        std: 0.0,
        entropy: 0.0,
    };

    /// Stat names in the order they are emitted as features.
    pub const NAMES: [&'static str; 6] = ["mean", "median", "min", "max", "std", "entropy"];

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "mean" => Some(self.mean),
            "median" => Some(self.median),
            "min" => Some(self.min),
            "max" => Some(self.max),
            "std" => Some(self.std),
            "entropy" => Some(self.entropy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatsError {
    NegativeValue(f64),
    NonFiniteValue,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::NegativeValue(v) => write!(f, "negative value {v} in count vector"),
            StatsError::NonFiniteValue => write!(f, "non-finite value in count vector"),
        }
    }
}

/// Shannon entropy in nats of the distribution obtained by normalizing
/// `values`. All-zero or empty input yields 0; `0 ln 0` is taken as 0.
pub fn entropy(values: &[f64]) -> f64 {
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &v in values {
        if v > 0.0 {
            let p = v / total;
            h -= p * libm::log(p);
        }
    }
    h
}

/// mean/median/min/max, population std, and Shannon entropy of `values`.
/// The empty vector maps to all zeros.
pub fn basic_stats(values: &[f64]) -> Result<BasicStats, StatsError> {
    for &v in values {
        if !v.is_finite() {
            return Err(StatsError::NonFiniteValue);
        }
        if v < 0.0 {
            return Err(StatsError::NegativeValue(v));
        }
    }
    if values.is_empty() {
        return Ok(BasicStats::ZERO);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;

    let mut sorted: alloc::vec::Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };

    Ok(BasicStats {
        mean,
        median,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        std: libm::sqrt(variance),
        entropy: entropy(values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_of_4_3_2() {
        // Independent oracle: -sum p ln p over p = (4/9, 3/9, 2/9).
        let p = [4.0 / 9.0, 3.0 / 9.0, 2.0 / 9.0];
        let expected: f64 = -p.iter().map(|&x: &f64| x * x.ln()).sum::<f64>();
        assert_abs_diff_eq!(expected, 1.0609, epsilon = 1e-4);
        let s = basic_stats(&[4.0, 3.0, 2.0]).unwrap();
        assert_abs_diff_eq!(s.entropy, expected, epsilon = 1e-12);
    }

    #[test]
    fn singleton_bag() {
        let s = basic_stats(&[5.0]).unwrap();
        assert_eq!(s.entropy, 0.0);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.median, 5.0);
        assert_eq!(s.min, 5.0);
        assert_eq!(s.max, 5.0);
    }

    #[test]
    fn uniform_entropy_is_ln_n() {
        let s = basic_stats(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s.entropy, 4.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(basic_stats(&[]).unwrap(), BasicStats::ZERO);
    }

    #[test]
    fn negative_rejected() {
        assert_eq!(basic_stats(&[1.0, -2.0]), Err(StatsError::NegativeValue(-2.0)));
    }

    #[test]
    fn population_std() {
        // [3000, 5000]: mean 4000, population std 1000.
        let s = basic_stats(&[3000.0, 5000.0]).unwrap();
        assert_abs_diff_eq!(s.std, 1000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.mean, 4000.0, epsilon = 1e-9);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(basic_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap().median, 2.5);
        assert_eq!(basic_stats(&[1.0, 2.0, 9.0]).unwrap().median, 2.0);
    }

    proptest::proptest! {
        #[test]
        fn entropy_bounds(values in proptest::collection::vec(0.0f64..1000.0, 1..40)) {
            let h = entropy(&values);
            proptest::prop_assert!(h >= 0.0);
            proptest::prop_assert!(h <= (values.len() as f64).ln() + 1e-9);
        }

        #[test]
        fn stats_ordering(values in proptest::collection::vec(0.0f64..1000.0, 1..40)) {
            let s = basic_stats(&values).unwrap();
            proptest::prop_assert!(s.min <= s.median && s.median <= s.max);
            proptest::prop_assert!(s.std >= 0.0);
        }
    }
}
