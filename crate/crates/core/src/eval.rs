//! Metrics and protocol pieces: confusion counts, P/R/F1, stratified folds,
//! the random-guess baseline, feature importance, top-K precision, empirical
//! CDFs, and activity heatmaps.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{LinearLoss, LinearModel};
use crate::mix_seed;
use crate::space::Matrix;
use crate::timeutil::{local_date, local_hour, weekday_index};
use crate::types::TweetRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    TooFewFolds,
    EmptyLabels,
    LengthMismatch,
    NotEnoughRanked { have: usize, want: usize },
    MissingJudgment,
    NotLogistic,
    ZeroClassCount,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::TooFewFolds => f.write_str("fold count must be at least 2"),
            EvalError::EmptyLabels => f.write_str("label list is empty"),
            EvalError::LengthMismatch => f.write_str("paired inputs must have equal length"),
            EvalError::NotEnoughRanked { have, want } => {
                write!(f, "ranking holds {have} rows, need {want}")
            }
            EvalError::MissingJudgment => f.write_str("missing manual judgment for a ranked row"),
            EvalError::NotLogistic => {
                f.write_str("feature importance needs a logistic-loss linear model")
            }
            EvalError::ZeroClassCount => f.write_str("class counts must be positive"),
        }
    }
}

/// One-vs-rest confusion counts for every class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: Vec<u64>,
    pub fp: Vec<u64>,
    pub fn_: Vec<u64>,
    pub tn: Vec<u64>,
}

impl ConfusionCounts {
    pub fn new(n_classes: usize) -> Self {
        ConfusionCounts {
            tp: alloc::vec![0; n_classes],
            fp: alloc::vec![0; n_classes],
            fn_: alloc::vec![0; n_classes],
            tn: alloc::vec![0; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.tp.len()
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        for c in 0..self.n_classes() {
            match (truth == c, predicted == c) {
                (true, true) => self.tp[c] += 1,
                (false, true) => self.fp[c] += 1,
                (true, false) => self.fn_[c] += 1,
                (false, false) => self.tn[c] += 1,
            }
        }
    }

    pub fn from_predictions(
        truth: &[usize],
        predicted: &[usize],
        n_classes: usize,
    ) -> Result<Self, EvalError> {
        if truth.len() != predicted.len() {
            return Err(EvalError::LengthMismatch);
        }
        let mut counts = ConfusionCounts::new(n_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            counts.record(t, p);
        }
        Ok(counts)
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        for c in 0..self.n_classes() {
            self.tp[c] += other.tp[c];
            self.fp[c] += other.fp[c];
            self.fn_[c] += other.fn_[c];
            self.tn[c] += other.tn[c];
        }
    }
}

/// Per-class precision/recall/F1 with macro averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

impl PrfReport {
    pub fn macro_precision(&self) -> f64 {
        mean(&self.precision)
    }

    pub fn macro_recall(&self) -> f64 {
        mean(&self.recall)
    }

    pub fn macro_f1(&self) -> f64 {
        mean(&self.f1)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, and F1 per class; zero denominators yield 0.
pub fn prf(confusion: &ConfusionCounts) -> PrfReport {
    let n = confusion.n_classes();
    let mut report = PrfReport {
        precision: Vec::with_capacity(n),
        recall: Vec::with_capacity(n),
        f1: Vec::with_capacity(n),
    };
    for c in 0..n {
        let p = ratio(confusion.tp[c], confusion.tp[c] + confusion.fp[c]);
        let r = ratio(confusion.tp[c], confusion.tp[c] + confusion.fn_[c]);
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        report.precision.push(p);
        report.recall.push(r);
        report.f1.push(f1);
    }
    report
}

/// Stratified k-fold assignment: returns a fold index per instance.
///
/// Instances of each class are shuffled with a class-specific stream of the
/// seed and dealt round-robin, so per-class fold sizes differ by at most one.
/// The starting fold rotates across classes to balance total fold sizes.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds);
    }
    if labels.is_empty() {
        return Err(EvalError::EmptyLabels);
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        by_class.entry(label).or_default().push(i);
    }
    let mut assignment = alloc::vec![0usize; labels.len()];
    let mut dealt = 0usize;
    for (class, mut members) in by_class {
        let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, class as u64 + 1));
        members.shuffle(&mut rng);
        let start = dealt % k;
        for (i, idx) in members.iter().enumerate() {
            assignment[*idx] = (start + i) % k;
        }
        dealt += members.len();
    }
    Ok(assignment)
}

/// Expected per-class P = R = F1 of a proportional random guesser.
pub fn random_guess_baseline(class_counts: &[u64]) -> Result<Vec<f64>, EvalError> {
    if class_counts.is_empty() || class_counts.contains(&0) {
        return Err(EvalError::ZeroClassCount);
    }
    let total: u64 = class_counts.iter().sum();
    Ok(class_counts
        .iter()
        .map(|&c| c as f64 / total as f64)
        .collect())
}

/// Per-class list of the `top_n` highest-weighted dimensions of a logistic
/// model, as (dimension name, raw weight). Ties break lexicographically.
pub fn feature_importance(
    model: &LinearModel,
    dim_names: &[String],
    top_n: usize,
) -> Result<Vec<Vec<(String, f64)>>, EvalError> {
    if model.loss != LinearLoss::Logistic {
        return Err(EvalError::NotLogistic);
    }
    if dim_names.len() != model.n_features {
        return Err(EvalError::LengthMismatch);
    }
    let mut per_class = Vec::with_capacity(model.n_classes());
    for c in 0..model.n_classes() {
        let weights = model.class_weights(c);
        let mut entries: Vec<(String, f64)> = dim_names
            .iter()
            .cloned()
            .zip(weights.iter().copied())
            .collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(top_n);
        per_class.push(entries);
    }
    Ok(per_class)
}

/// One row of a per-class ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPrediction {
    pub user_id: String,
    pub class: usize,
    pub score: f64,
}

/// Accounts ranked by a class's probability score, descending; score ties
/// break by user_id ascending.
pub fn rank_predictions(
    user_ids: &[String],
    scores: &Matrix,
    class: usize,
) -> Result<Vec<RankedPrediction>, EvalError> {
    if user_ids.len() != scores.rows {
        return Err(EvalError::LengthMismatch);
    }
    let mut ranked: Vec<RankedPrediction> = user_ids
        .iter()
        .enumerate()
        .map(|(i, id)| RankedPrediction {
            user_id: id.clone(),
            class,
            score: scores.row(i)[class],
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.user_id.cmp(&b.user_id))
    });
    Ok(ranked)
}

/// TP count and TP/K precision over the top K rows of a ranking, judged
/// against manually supplied labels.
pub fn top_k_precision(
    ranked: &[RankedPrediction],
    judgments: &BTreeMap<String, usize>,
    class: usize,
    k: usize,
) -> Result<(u64, f64), EvalError> {
    if ranked.len() < k {
        return Err(EvalError::NotEnoughRanked {
            have: ranked.len(),
            want: k,
        });
    }
    let mut tp = 0u64;
    for row in &ranked[..k] {
        match judgments.get(&row.user_id) {
            Some(&label) => {
                if label == class {
                    tp += 1;
                }
            }
            None => return Err(EvalError::MissingJudgment),
        }
    }
    Ok((tp, tp as f64 / k as f64))
}

/// Empirical CDF of `values`: sorted (value, cumulative fraction) pairs with
/// one point per distinct value. Empty input yields an empty table.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut table = Vec::new();
    let mut seen = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        seen += j - i + 1;
        table.push((sorted[i], seen as f64 / n));
        i = j + 1;
    }
    table
}

/// Tweet counts bucketed by local weekday x hour and by local date x hour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityHeatmap {
    /// Rows monday..sunday, columns hour 0..24.
    pub weekday_hour: Vec<Vec<u64>>,
    /// Local date "YYYY-MM-DD" -> 24 hourly counts.
    pub date_hour: BTreeMap<String, Vec<u64>>,
}

impl ActivityHeatmap {
    pub fn empty() -> Self {
        ActivityHeatmap {
            weekday_hour: alloc::vec![alloc::vec![0; 24]; 7],
            date_hour: BTreeMap::new(),
        }
    }
}

pub fn activity_heatmap(
    tweets: &[TweetRecord],
    local_offset_ms: i64,
) -> Result<ActivityHeatmap, crate::timeutil::TimeError> {
    let mut heatmap = ActivityHeatmap::empty();
    for tweet in tweets {
        let hour = local_hour(tweet.timestamp, local_offset_ms)? as usize;
        let weekday = weekday_index(tweet.timestamp, local_offset_ms)?;
        heatmap.weekday_hour[weekday][hour] += 1;
        let date = local_date(tweet.timestamp, local_offset_ms)?;
        heatmap
            .date_hour
            .entry(date)
            .or_insert_with(|| alloc::vec![0; 24])[hour] += 1;
    }
    Ok(heatmap)
}
