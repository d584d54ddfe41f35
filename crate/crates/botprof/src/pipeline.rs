//! Experiment orchestration: feature extraction over windows, leak-free
//! stratified cross-validation, the four-classifier bank with significance
//! marks, duration sweeps, grid search, rankings, and report tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use botprof_core::classify::{self, Family, HyperParams, TrainedModel};
use botprof_core::eval::{
    self, ActivityHeatmap, ConfusionCounts, PrfReport, RankedPrediction,
};
use botprof_core::features::{extract_account, AccountFeatures};
use botprof_core::space::{fit_feature_space, FeatureSpace, FeatureSpaceConfig};
use botprof_core::types::{ClassLabel, Corpus, TimeWindow};
use botprof_core::wilcoxon::wilcoxon_signed_rank;

use crate::error::AppError;

pub const MS_PER_DAY: i64 = 86_400_000;

/// The standard observation durations, shortest first.
pub const DURATIONS: [(&str, u32); 5] =
    [("1w", 7), ("2w", 14), ("1m", 30), ("2m", 60), ("4m", 120)];

/// Names of the per-family hour-entropy features examined in the entropy
/// distribution report.
pub const ENTROPY_FEATURES: [&str; 5] = [
    "dynamic.tweet.hour_entropy",
    "dynamic.retweet.hour_entropy",
    "dynamic.hashtag.hour_entropy",
    "dynamic.mention.hour_entropy",
    "dynamic.url.hour_entropy",
];

/// Extracts features for every account, optionally restricted to a window.
/// The profile reference time is the window end (or corpus end + 1).
pub fn extract_features(
    corpus: &Corpus,
    window: Option<TimeWindow>,
) -> Result<BTreeMap<String, AccountFeatures>, AppError> {
    let sliced;
    let source = match window {
        Some(w) => {
            sliced = corpus.slice_window(w);
            &sliced
        }
        None => corpus,
    };
    let reference = match window {
        Some(w) => w.end,
        None => source.end_time().map(|t| t + 1).unwrap_or(0),
    };
    let mut out = BTreeMap::new();
    for (id, account) in &source.accounts {
        let reference = reference.max(account.profile.created_at);
        out.insert(
            id.clone(),
            extract_account(account, source.local_offset_ms, reference)?,
        );
    }
    Ok(out)
}

/// Labeled accounts ready for vectorization, id-sorted.
pub struct Dataset {
    pub ids: Vec<String>,
    pub features: Vec<AccountFeatures>,
    pub labels: Vec<usize>,
}

pub fn labeled_dataset(
    corpus: &Corpus,
    window: Option<TimeWindow>,
) -> Result<Dataset, AppError> {
    let features = extract_features(corpus, window)?;
    let mut dataset = Dataset {
        ids: Vec::new(),
        features: Vec::new(),
        labels: Vec::new(),
    };
    for (id, feats) in features {
        if let Some(label) = corpus.accounts[&id].label {
            dataset.ids.push(id);
            dataset.features.push(feats);
            dataset.labels.push(label.index());
        }
    }
    if dataset.ids.is_empty() {
        return Err(AppError::data("no labeled accounts in corpus"));
    }
    Ok(dataset)
}

/// One CV fold's outcome; the fitted space and test ids are retained so
/// tests can verify no test-row statistic leaked into fitting.
#[derive(Debug, Clone)]
pub struct CvFold {
    pub fold: usize,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub space: FeatureSpace,
    pub confusion: ConfusionCounts,
    pub prf: PrfReport,
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub family: Family,
    pub folds: Vec<CvFold>,
    /// Per-class metrics averaged across folds.
    pub mean: PrfReport,
    /// Per-fold macro F1; the paired sample used for significance testing.
    pub fold_macro_f1: Vec<f64>,
}

impl CvReport {
    pub fn macro_f1(&self) -> f64 {
        self.mean.macro_f1()
    }
}

/// Stratified k-fold CV. Each fold fits the feature space and the model on
/// its training split only.
pub fn cross_validate(
    dataset: &Dataset,
    family: Family,
    params: &HyperParams,
    k: usize,
    seed: u64,
) -> Result<CvReport, AppError> {
    let assignment = eval::stratified_kfold(&dataset.labels, k, seed)?;
    let n_classes = ClassLabel::COUNT;
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
        for (i, &f) in assignment.iter().enumerate() {
            if f == fold {
                test_idx.push(i);
            } else {
                train_idx.push(i);
            }
        }
        let train_feats: Vec<&AccountFeatures> =
            train_idx.iter().map(|&i| &dataset.features[i]).collect();
        let space = fit_feature_space(&train_feats, FeatureSpaceConfig::default())?;
        let x_train = space.encode_dataset(train_feats.iter().copied());
        let y_train: Vec<usize> = train_idx.iter().map(|&i| dataset.labels[i]).collect();
        let model = classify::fit(family, &x_train, &y_train, params, n_classes)?;

        let x_test = space.encode_dataset(test_idx.iter().map(|&i| &dataset.features[i]));
        let predicted = classify::predict(&model, &x_test)?;
        let truth: Vec<usize> = test_idx.iter().map(|&i| dataset.labels[i]).collect();
        let confusion = ConfusionCounts::from_predictions(&truth, &predicted, n_classes)?;
        let prf = eval::prf(&confusion);
        folds.push(CvFold {
            fold,
            train_ids: train_idx.iter().map(|&i| dataset.ids[i].clone()).collect(),
            test_ids: test_idx.iter().map(|&i| dataset.ids[i].clone()).collect(),
            space,
            confusion,
            prf,
        });
    }

    let mean_of = |select: fn(&PrfReport) -> &Vec<f64>| -> Vec<f64> {
        (0..n_classes)
            .map(|c| {
                folds.iter().map(|f| select(&f.prf)[c]).sum::<f64>() / folds.len() as f64
            })
            .collect()
    };
    let mean = PrfReport {
        precision: mean_of(|p| &p.precision),
        recall: mean_of(|p| &p.recall),
        f1: mean_of(|p| &p.f1),
    };
    let fold_macro_f1 = folds.iter().map(|f| f.prf.macro_f1()).collect();
    Ok(CvReport {
        family,
        folds,
        mean,
        fold_macro_f1,
    })
}

/// Cross-validates all four families on the same folds.
pub fn evaluate_bank(
    dataset: &Dataset,
    params: &HyperParams,
    k: usize,
    seed: u64,
) -> Result<Vec<CvReport>, AppError> {
    Family::ALL
        .iter()
        .map(|&family| cross_validate(dataset, family, params, k, seed))
        .collect()
}

/// `+`/`-`/empty mark for a family against the LR reference: signed by the
/// mean difference when the fold-wise Wilcoxon test is significant at 0.01.
pub fn significance_mark(family: &[f64], reference: &[f64]) -> Result<String, AppError> {
    let result = wilcoxon_signed_rank(family, reference)?;
    if !result.significant {
        return Ok(String::new());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(if mean(family) > mean(reference) { "+" } else { "-" }.to_string())
}

/// Table rows in the bank-report layout: one row per metric x family, with
/// per-class columns, each followed by its significance mark vs LR, then
/// the macro column and its mark.
pub fn bank_table(bank: &[CvReport]) -> Result<Vec<Vec<String>>, AppError> {
    let lr = bank
        .iter()
        .find(|r| r.family == Family::Lr)
        .ok_or_else(|| AppError::internal("bank is missing the LR reference"))?;
    type MetricSelector = fn(&PrfReport) -> &Vec<f64>;
    let metrics: [(&str, MetricSelector); 3] = [
        ("precision", |p| &p.precision),
        ("recall", |p| &p.recall),
        ("f1", |p| &p.f1),
    ];
    let mut rows = Vec::new();
    for (metric_name, select) in metrics {
        for report in bank {
            let mut row = vec![metric_name.to_string(), report.family.as_str().to_string()];
            for class in 0..ClassLabel::COUNT {
                row.push(crate::io::fmt4(select(&report.mean)[class]));
                let ours: Vec<f64> = report.folds.iter().map(|f| select(&f.prf)[class]).collect();
                let theirs: Vec<f64> = lr.folds.iter().map(|f| select(&f.prf)[class]).collect();
                row.push(significance_mark(&ours, &theirs)?);
            }
            let macro_of = |p: &PrfReport| match metric_name {
                "precision" => p.macro_precision(),
                "recall" => p.macro_recall(),
                _ => p.macro_f1(),
            };
            row.push(crate::io::fmt4(macro_of(&report.mean)));
            let ours: Vec<f64> = report.folds.iter().map(|f| macro_of(&f.prf)).collect();
            let theirs: Vec<f64> = lr.folds.iter().map(|f| macro_of(&f.prf)).collect();
            row.push(significance_mark(&ours, &theirs)?);
            rows.push(row);
        }
    }
    Ok(rows)
}

pub const BANK_TABLE_HEADER: [&str; 12] = [
    "metric",
    "family",
    "broadcast",
    "broadcast_sig",
    "consumption",
    "consumption_sig",
    "spam",
    "spam_sig",
    "human",
    "human_sig",
    "macro",
    "macro_sig",
];

#[derive(Debug, Clone)]
pub struct DurationRow {
    pub name: &'static str,
    pub days: u32,
    /// None when the corpus does not span the duration.
    pub report: Option<CvReport>,
}

/// Evaluates one family over windows of each standard duration, all
/// anchored at the corpus end.
pub fn duration_sweep(
    corpus: &Corpus,
    family: Family,
    params: &HyperParams,
    k: usize,
    seed: u64,
) -> Result<Vec<DurationRow>, AppError> {
    let end = corpus
        .end_time()
        .ok_or_else(|| AppError::data("corpus has no tweets"))?;
    let start = corpus.start_time().unwrap_or(end);
    let span_ms = end - start + 1;
    let mut rows = Vec::new();
    for (name, days) in DURATIONS {
        let duration_ms = days as i64 * MS_PER_DAY;
        if duration_ms > span_ms {
            rows.push(DurationRow {
                name,
                days,
                report: None,
            });
            continue;
        }
        let window = TimeWindow::anchored_at_end(end, duration_ms)?;
        let dataset = labeled_dataset(corpus, Some(window))?;
        rows.push(DurationRow {
            name,
            days,
            report: Some(cross_validate(&dataset, family, params, k, seed)?),
        });
    }
    Ok(rows)
}

pub fn duration_table(rows: &[DurationRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|row| match &row.report {
            Some(report) => vec![
                row.name.to_string(),
                row.days.to_string(),
                crate::io::fmt4(report.mean.macro_precision()),
                crate::io::fmt4(report.mean.macro_recall()),
                crate::io::fmt4(report.mean.macro_f1()),
            ],
            None => vec![
                row.name.to_string(),
                row.days.to_string(),
                "unavailable".to_string(),
                "unavailable".to_string(),
                "unavailable".to_string(),
            ],
        })
        .collect()
}

pub const DURATION_TABLE_HEADER: [&str; 5] =
    ["duration", "days", "macro_precision", "macro_recall", "macro_f1"];

/// The standard hyperparameter grid for one family.
pub fn default_grid(family: Family) -> Vec<f64> {
    match family {
        Family::Nb => vec![0.1, 1.0, 10.0],
        Family::Rf => (1..=10).map(|n| (n * 10) as f64).collect(),
        Family::Svm | Family::Lr => vec![0.01, 0.1, 1.0, 10.0, 100.0],
    }
}

fn with_setting(family: Family, base: &HyperParams, value: f64) -> HyperParams {
    let mut params = base.clone();
    match family {
        Family::Nb => params.nb_alpha = value,
        Family::Rf => params.rf_trees = value as usize,
        Family::Svm | Family::Lr => params.linear_cost_c = value,
    }
    params
}

/// CV macro-F1 over the family's grid; returns the winning parameters and
/// every (setting, macro F1) pair. Ties go to the smaller setting.
pub fn grid_search(
    dataset: &Dataset,
    family: Family,
    base: &HyperParams,
    grid: &[f64],
    k: usize,
    seed: u64,
) -> Result<(HyperParams, Vec<(f64, f64)>), AppError> {
    if grid.is_empty() {
        return Err(AppError::Usage("grid must be nonempty".to_string()));
    }
    let mut settings = grid.to_vec();
    settings.sort_by(f64::total_cmp);
    let mut scores = Vec::with_capacity(settings.len());
    let mut best: Option<(f64, f64)> = None;
    for &value in &settings {
        let params = with_setting(family, base, value);
        let report = cross_validate(dataset, family, &params, k, seed)?;
        let score = report.macro_f1();
        scores.push((value, score));
        if best.map(|(_, s)| score > s).unwrap_or(true) {
            best = Some((value, score));
        }
    }
    let (value, _) = best.expect("grid is nonempty");
    Ok((with_setting(family, base, value), scores))
}

/// Fits the feature space and a model on the whole labeled dataset.
pub fn train_full(
    dataset: &Dataset,
    family: Family,
    params: &HyperParams,
) -> Result<(FeatureSpace, TrainedModel), AppError> {
    let feats: Vec<&AccountFeatures> = dataset.features.iter().collect();
    let space = fit_feature_space(&feats, FeatureSpaceConfig::default())?;
    let x = space.encode_dataset(feats.iter().copied());
    let model = classify::fit(family, &x, &dataset.labels, params, ClassLabel::COUNT)?;
    Ok((space, model))
}

/// Scores a feature pool and ranks it per class.
pub fn rank_pool(
    space: &FeatureSpace,
    model: &TrainedModel,
    pool: &BTreeMap<String, AccountFeatures>,
) -> Result<Vec<Vec<RankedPrediction>>, AppError> {
    let ids: Vec<String> = pool.keys().cloned().collect();
    let x = space.encode_dataset(pool.values());
    let scores = classify::predict_scores(model, &x)?;
    let mut rankings = Vec::with_capacity(ClassLabel::COUNT);
    for class in 0..ClassLabel::COUNT {
        rankings.push(eval::rank_predictions(&ids, &scores, class)?);
    }
    Ok(rankings)
}

pub const PRECISION_KS: [usize; 5] = [10, 20, 30, 40, 50];

/// Table-shaped top-K precision: one row per class, TP and precision
/// columns for each K.
pub fn precision_table(
    rankings: &[Vec<RankedPrediction>],
    judgments: &BTreeMap<String, usize>,
) -> Result<Vec<Vec<String>>, AppError> {
    let mut rows = Vec::new();
    for (class, ranking) in rankings.iter().enumerate() {
        let label = ClassLabel::from_index(class)
            .ok_or_else(|| AppError::internal("class index out of range"))?;
        let mut row = vec![label.as_str().to_string()];
        for k in PRECISION_KS {
            if k > ranking.len() {
                // Pool smaller than the cutoff: leave the cells blank.
                row.push(String::new());
                row.push(String::new());
                continue;
            }
            let (tp, precision) = eval::top_k_precision(ranking, judgments, class, k)?;
            row.push(tp.to_string());
            row.push(crate::io::fmt4(precision));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Per-class, per-feature empirical CDFs of the hour-entropy features.
/// Classes with no accounts yield empty tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyCdfs {
    /// `[class][feature]` -> (value, cumulative fraction) steps.
    pub tables: Vec<Vec<Vec<(f64, f64)>>>,
}

pub fn entropy_cdfs(
    features: &BTreeMap<String, AccountFeatures>,
    classes: &BTreeMap<String, usize>,
) -> EntropyCdfs {
    let mut values: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::new(); ENTROPY_FEATURES.len()]; ClassLabel::COUNT];
    for (id, feats) in features {
        let Some(&class) = classes.get(id) else {
            continue;
        };
        for (fi, name) in ENTROPY_FEATURES.iter().enumerate() {
            if let Some(v) = feats.get(*name).and_then(|f| f.as_num()) {
                values[class][fi].push(v);
            }
        }
    }
    EntropyCdfs {
        tables: values
            .into_iter()
            .map(|per_class| per_class.iter().map(|v| eval::ecdf(v)).collect())
            .collect(),
    }
}

impl EntropyCdfs {
    /// Median of one class/feature distribution; None for an empty class.
    pub fn median(&self, class: usize, feature: usize) -> Option<f64> {
        let table = &self.tables[class][feature];
        table
            .iter()
            .find(|(_, frac)| *frac >= 0.5)
            .map(|(value, _)| *value)
            .or(None)
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (class, per_class) in self.tables.iter().enumerate() {
            let label = ClassLabel::from_index(class).expect("class index in range");
            for (fi, table) in per_class.iter().enumerate() {
                for (value, frac) in table {
                    rows.push(vec![
                        label.as_str().to_string(),
                        ENTROPY_FEATURES[fi].to_string(),
                        crate::io::fmt4(*value),
                        crate::io::fmt4(*frac),
                    ]);
                }
            }
        }
        rows
    }
}

pub const CDF_TABLE_HEADER: [&str; 4] = ["class", "feature", "value", "cumulative"];

/// Per-class tweet-activity heatmaps over the labeled (or judged) accounts.
pub fn class_heatmaps(
    corpus: &Corpus,
    classes: &BTreeMap<String, usize>,
) -> Result<Vec<ActivityHeatmap>, AppError> {
    let mut maps: Vec<ActivityHeatmap> = (0..ClassLabel::COUNT)
        .map(|_| ActivityHeatmap::empty())
        .collect();
    for (id, account) in &corpus.accounts {
        let Some(&class) = classes.get(id) else {
            continue;
        };
        let partial = eval::activity_heatmap(&account.tweets, corpus.local_offset_ms)?;
        let target = &mut maps[class];
        for (w, row) in partial.weekday_hour.iter().enumerate() {
            for (h, count) in row.iter().enumerate() {
                target.weekday_hour[w][h] += count;
            }
        }
        for (date, row) in partial.date_hour {
            let entry = target
                .date_hour
                .entry(date)
                .or_insert_with(|| vec![0; 24]);
            for (h, count) in row.iter().enumerate() {
                entry[h] += count;
            }
        }
    }
    Ok(maps)
}

pub fn weekday_heatmap_rows(maps: &[ActivityHeatmap]) -> Vec<Vec<String>> {
    const WEEKDAYS: [&str; 7] = [
        "monday",
        "tuesday",
        "wednesday",
        "thursday",
        "friday",
        "saturday",
        "sunday",
    ];
    let mut rows = Vec::new();
    for (class, map) in maps.iter().enumerate() {
        let label = ClassLabel::from_index(class).expect("class index in range");
        for (w, counts) in map.weekday_hour.iter().enumerate() {
            let mut row = vec![label.as_str().to_string(), WEEKDAYS[w].to_string()];
            row.extend(counts.iter().map(|c| c.to_string()));
            rows.push(row);
        }
    }
    rows
}

pub fn heatmap_header() -> Vec<String> {
    let mut header = vec!["class".to_string(), "weekday".to_string()];
    header.extend((0..24).map(|h| format!("h{h:02}")));
    header
}
