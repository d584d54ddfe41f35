//! Fitted feature space and encoding of raw features into fixed-length
//! numeric vectors.
//!
//! Numeric features are min-max scaled to [0, 1] and clamped; categorical
//! features become one-hot blocks over a top-K vocabulary; series features
//! become normalized histogram blocks projected onto a fitted bin
//! vocabulary. All orderings are lexicographic for determinism.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::features::{AccountFeatures, FeatureValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpaceConfig {
    /// Vocabulary size for one-hot encoded categorical features.
    pub one_hot_top_k: usize,
    /// Per-account bin budget for series features.
    pub series_top_bins: usize,
}

impl Default for FeatureSpaceConfig {
    fn default() -> Self {
        FeatureSpaceConfig {
            one_hot_top_k: 20,
            series_top_bins: 100,
        }
    }
}

/// One output dimension of the encoded vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dim {
    Numeric { feature: String },
    Category { feature: String, value: String },
    SeriesBin { feature: String, bin: String },
}

impl Dim {
    pub fn name(&self) -> String {
        match self {
            Dim::Numeric { feature } => feature.clone(),
            Dim::Category { feature, value } => format!("{feature}={value}"),
            Dim::SeriesBin { feature, bin } => format!("{feature}:{bin}"),
        }
    }
}

/// Global dictionary fitted on training accounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub config: FeatureSpaceConfig,
    /// Output dimensions in encoding order.
    pub dims: Vec<Dim>,
    /// Per-numeric-feature (min, max) scaling bounds.
    pub bounds: BTreeMap<String, (f64, f64)>,
    /// Per-categorical-feature retained vocabulary, sorted.
    pub vocabularies: BTreeMap<String, Vec<String>>,
    /// Per-series-feature retained bin keys, sorted.
    pub bins: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceError {
    EmptyTrainingSet,
    InvalidConfig,
    NonFiniteFeature(String),
    MixedKinds(String),
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceError::EmptyTrainingSet => f.write_str("cannot fit a feature space on zero accounts"),
            SpaceError::InvalidConfig => f.write_str("config values must be >= 1"),
            SpaceError::NonFiniteFeature(name) => write!(f, "non-finite value for feature {name:?}"),
            SpaceError::MixedKinds(name) => write!(f, "feature {name:?} has inconsistent value kinds"),
        }
    }
}

/// Dense row-major matrix of encoded vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            data: alloc::vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, cols: usize) -> Matrix {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            debug_assert_eq!(row.len(), cols);
            data.extend(row);
        }
        Matrix { data, rows: n, cols }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// An account's top `limit` series bins by count, ties broken by key.
fn top_bins(series: &BTreeMap<String, u64>, limit: usize) -> Vec<(&String, u64)> {
    let mut entries: Vec<(&String, u64)> = series.iter().map(|(k, &v)| (k, v)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    entries.truncate(limit);
    entries
}

/// Fit scaling bounds, categorical vocabularies, and series bin sets on the
/// training accounts.
pub fn fit_feature_space(
    training: &[&AccountFeatures],
    config: FeatureSpaceConfig,
) -> Result<FeatureSpace, SpaceError> {
    if training.is_empty() {
        return Err(SpaceError::EmptyTrainingSet);
    }
    if config.one_hot_top_k == 0 || config.series_top_bins == 0 {
        return Err(SpaceError::InvalidConfig);
    }

    let mut bounds: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut category_counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut bin_sets: BTreeMap<String, BTreeMap<String, ()>> = BTreeMap::new();

    for features in training {
        for (name, value) in features.iter() {
            match value {
                FeatureValue::Num(v) => {
                    if !v.is_finite() {
                        return Err(SpaceError::NonFiniteFeature(name.clone()));
                    }
                    if category_counts.contains_key(name) || bin_sets.contains_key(name) {
                        return Err(SpaceError::MixedKinds(name.clone()));
                    }
                    let entry = bounds.entry(name.clone()).or_insert((*v, *v));
                    entry.0 = entry.0.min(*v);
                    entry.1 = entry.1.max(*v);
                }
                FeatureValue::Cat(c) => {
                    if bounds.contains_key(name) || bin_sets.contains_key(name) {
                        return Err(SpaceError::MixedKinds(name.clone()));
                    }
                    *category_counts
                        .entry(name.clone())
                        .or_default()
                        .entry(c.clone())
                        .or_insert(0) += 1;
                }
                FeatureValue::Series(series) => {
                    if bounds.contains_key(name) || category_counts.contains_key(name) {
                        return Err(SpaceError::MixedKinds(name.clone()));
                    }
                    let set = bin_sets.entry(name.clone()).or_default();
                    for (bin, _) in top_bins(series, config.series_top_bins) {
                        set.insert(bin.clone(), ());
                    }
                }
            }
        }
    }

    let vocabularies: BTreeMap<String, Vec<String>> = category_counts
        .into_iter()
        .map(|(name, counts)| {
            // Top-K by corpus frequency, ties broken lexicographically.
            let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
            entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            entries.truncate(config.one_hot_top_k);
            let mut vocab: Vec<String> = entries.into_iter().map(|(k, _)| k).collect();
            vocab.sort();
            (name, vocab)
        })
        .collect();

    let bins: BTreeMap<String, Vec<String>> = bin_sets
        .into_iter()
        .map(|(name, set)| (name, set.into_keys().collect()))
        .collect();

    // Dimension order: lexicographic by feature name, then key within a block.
    let mut dims: Vec<(String, Dim)> = Vec::new();
    for feature in bounds.keys() {
        dims.push((feature.clone(), Dim::Numeric { feature: feature.clone() }));
    }
    for (feature, vocab) in &vocabularies {
        for value in vocab {
            dims.push((
                feature.clone(),
                Dim::Category {
                    feature: feature.clone(),
                    value: value.clone(),
                },
            ));
        }
    }
    for (feature, keys) in &bins {
        for bin in keys {
            dims.push((
                feature.clone(),
                Dim::SeriesBin {
                    feature: feature.clone(),
                    bin: bin.clone(),
                },
            ));
        }
    }
    dims.sort_by_key(|a| a.1.name());

    Ok(FeatureSpace {
        config,
        dims: dims.into_iter().map(|(_, d)| d).collect(),
        bounds,
        vocabularies,
        bins,
    })
}

impl FeatureSpace {
    pub fn width(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_names(&self) -> Vec<String> {
        self.dims.iter().map(Dim::name).collect()
    }

    /// Encode one account into a dense vector of `width()` values in [0, 1].
    pub fn encode(&self, features: &AccountFeatures) -> Vec<f64> {
        // Normalized per-series lookup built once per account.
        let mut series_mass: BTreeMap<&String, BTreeMap<&String, f64>> = BTreeMap::new();
        for (name, value) in features.iter() {
            if let FeatureValue::Series(series) = value {
                let kept = top_bins(series, self.config.series_top_bins);
                let total: u64 = kept.iter().map(|(_, c)| c).sum();
                if total > 0 {
                    series_mass.insert(
                        name,
                        kept.into_iter()
                            .map(|(k, c)| (k, c as f64 / total as f64))
                            .collect(),
                    );
                }
            }
        }

        self.dims
            .iter()
            .map(|dim| match dim {
                Dim::Numeric { feature } => {
                    let v = features.get(feature).and_then(FeatureValue::as_num).unwrap_or(0.0);
                    let (min, max) = self.bounds[feature];
                    if max > min {
                        ((v - min) / (max - min)).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                }
                Dim::Category { feature, value } => match features.get(feature) {
                    Some(FeatureValue::Cat(c)) if c == value => 1.0,
                    _ => 0.0,
                },
                Dim::SeriesBin { feature, bin } => series_mass
                    .get(feature)
                    .and_then(|mass| mass.get(bin).copied())
                    .unwrap_or(0.0),
            })
            .collect()
    }

    /// Encode accounts in input order into a row-per-account matrix.
    pub fn encode_dataset<'a, I>(&self, accounts: I) -> Matrix
    where
        I: IntoIterator<Item = &'a AccountFeatures>,
    {
        let rows: Vec<Vec<f64>> = accounts.into_iter().map(|f| self.encode(f)).collect();
        Matrix::from_rows(rows, self.width())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn num_features(pairs: &[(&str, f64)]) -> AccountFeatures {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), FeatureValue::Num(*v)))
            .collect()
    }

    fn cat(value: &str) -> AccountFeatures {
        let mut f = AccountFeatures::new();
        f.insert("color".to_string(), FeatureValue::Cat(value.to_string()));
        f
    }

    fn series(pairs: &[(&str, u64)]) -> AccountFeatures {
        let mut f = AccountFeatures::new();
        f.insert(
            "hist".to_string(),
            FeatureValue::Series(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
        );
        f
    }

    #[test]
    fn single_account_constant_bounds() {
        let f = num_features(&[("x", 3.0), ("y", -1.0)]);
        let space = fit_feature_space(&[&f], FeatureSpaceConfig::default()).unwrap();
        assert_eq!(space.bounds["x"], (3.0, 3.0));
        // Constant features encode to 0.
        assert_eq!(space.encode(&f), vec![0.0, 0.0]);
    }

    #[test]
    fn numeric_scaling_and_clamp() {
        let lo = num_features(&[("x", 2.0)]);
        let hi = num_features(&[("x", 6.0)]);
        let space = fit_feature_space(&[&lo, &hi], FeatureSpaceConfig::default()).unwrap();
        assert_abs_diff_eq!(space.encode(&num_features(&[("x", 4.0)]))[0], 0.5);
        assert_abs_diff_eq!(space.encode(&num_features(&[("x", 8.0)]))[0], 1.0);
        assert_abs_diff_eq!(space.encode(&num_features(&[("x", -1.0)]))[0], 0.0);
        // Extremes map exactly to 0 and 1.
        assert_eq!(space.encode(&lo)[0], 0.0);
        assert_eq!(space.encode(&hi)[0], 1.0);
    }

    #[test]
    fn top_k_vocabulary_tie_break() {
        // Corpus frequencies A:9, B:5, C:5, D:1 with K=2 keeps {A, B}.
        let mut training = Vec::new();
        for _ in 0..9 {
            training.push(cat("A"));
        }
        for _ in 0..5 {
            training.push(cat("B"));
        }
        for _ in 0..5 {
            training.push(cat("C"));
        }
        training.push(cat("D"));
        let refs: Vec<&AccountFeatures> = training.iter().collect();
        let config = FeatureSpaceConfig {
            one_hot_top_k: 2,
            series_top_bins: 100,
        };
        let space = fit_feature_space(&refs, config).unwrap();
        assert_eq!(space.vocabularies["color"], vec!["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn one_hot_block_width_bounded() {
        let training = [cat("A"), cat("B"), cat("C")];
        let refs: Vec<&AccountFeatures> = training.iter().collect();
        let space = fit_feature_space(&refs, FeatureSpaceConfig::default()).unwrap();
        assert_eq!(space.width(), 3.min(space.config.one_hot_top_k));
    }

    #[test]
    fn one_hot_example() {
        // Vocabulary (A, B, C, D): "A" encodes as [1, 0, 0, 0] and so on.
        let training = [cat("A"), cat("B"), cat("C"), cat("D")];
        let refs: Vec<&AccountFeatures> = training.iter().collect();
        let space = fit_feature_space(&refs, FeatureSpaceConfig::default()).unwrap();
        assert_eq!(space.encode(&cat("A")), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(space.encode(&cat("B")), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(space.encode(&cat("C")), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(space.encode(&cat("D")), vec![0.0, 0.0, 0.0, 1.0]);
        // Out-of-vocabulary degrades to an all-zero block.
        assert_eq!(space.encode(&cat("E")), vec![0.0; 4]);
    }

    #[test]
    fn series_normalization() {
        let f = series(&[("a", 4), ("b", 3), ("c", 2)]);
        let space = fit_feature_space(&[&f], FeatureSpaceConfig::default()).unwrap();
        let encoded = space.encode(&f);
        // dims sorted: hist:a, hist:b, hist:c
        assert_abs_diff_eq!(encoded[0], 4.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(encoded[1], 3.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(encoded[2], 2.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(encoded.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn series_projection_drops_unseen_mass() {
        // Space knows bins {a, b}; an account with mass on c keeps sum < 1.
        let train = series(&[("a", 1), ("b", 1)]);
        let space = fit_feature_space(&[&train], FeatureSpaceConfig::default()).unwrap();
        let encoded = space.encode(&series(&[("a", 1), ("b", 1), ("c", 2)]));
        assert_abs_diff_eq!(encoded[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(encoded[1], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(encoded.iter().sum::<f64>(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn series_top_bins_cap() {
        let config = FeatureSpaceConfig {
            one_hot_top_k: 20,
            series_top_bins: 2,
        };
        let f = series(&[("a", 4), ("b", 3), ("c", 2)]);
        let space = fit_feature_space(&[&f], config).unwrap();
        // Only the top 2 bins survive the fit.
        assert_eq!(space.bins["hist"], vec!["a".to_string(), "b".to_string()]);
        let encoded = space.encode(&f);
        // Re-normalized over the kept bins before projection.
        assert_abs_diff_eq!(encoded[0], 4.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(encoded[1], 3.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_training_rejected() {
        assert_eq!(
            fit_feature_space(&[], FeatureSpaceConfig::default()),
            Err(SpaceError::EmptyTrainingSet)
        );
    }

    #[test]
    fn encode_dataset_shape_and_determinism() {
        let a = num_features(&[("x", 1.0)]);
        let b = num_features(&[("x", 2.0)]);
        let space = fit_feature_space(&[&a, &b], FeatureSpaceConfig::default()).unwrap();
        let empty = space.encode_dataset([]);
        assert_eq!(empty.rows, 0);
        assert_eq!(empty.cols, 1);
        let m1 = space.encode_dataset([&a, &b]);
        let m2 = space.encode_dataset([&a, &b]);
        assert_eq!(m1, m2);
        assert_eq!(m1.rows, 2);
    }

    proptest::proptest! {
        #[test]
        fn encoded_values_unit_range(values in proptest::collection::vec(-100.0f64..100.0, 3..8)) {
            let training: Vec<AccountFeatures> =
                values.iter().map(|&v| num_features(&[("x", v)])).collect();
            let refs: Vec<&AccountFeatures> = training.iter().collect();
            let space = fit_feature_space(&refs, FeatureSpaceConfig::default()).unwrap();
            for f in &training {
                let e = space.encode(f);
                proptest::prop_assert!(e.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
            // Probe outside the fitted range still clamps.
            let probe = space.encode(&num_features(&[("x", 1e9)]));
            proptest::prop_assert!(probe[0] <= 1.0);
        }
    }
}
