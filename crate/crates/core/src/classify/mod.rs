//! The four-classifier bank: naive Bayes, logistic regression, linear SVM,
//! and random forest, with balanced class weighting.

mod forest;
mod linear;
mod nb;

pub use forest::ForestModel;
pub use linear::{LinearLoss, LinearModel};
pub use nb::NbModel;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::space::Matrix;

/// Learner families in the bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Nb,
    Rf,
    Svm,
    Lr,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Nb, Family::Rf, Family::Svm, Family::Lr];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Nb => "nb",
            Family::Rf => "rf",
            Family::Svm => "svm",
            Family::Lr => "lr",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "nb" => Some(Family::Nb),
            "rf" => Some(Family::Rf),
            "svm" => Some(Family::Svm),
            "lr" => Some(Family::Lr),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeightMode {
    Uniform,
    Balanced,
}

/// Classifier bank hyperparameters with the defaults used throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Additive smoothing for naive Bayes.
    pub nb_alpha: f64,
    /// Number of random-forest trees.
    pub rf_trees: usize,
    /// Cost parameter C shared by the linear models.
    pub linear_cost_c: f64,
    pub class_weight_mode: ClassWeightMode,
    pub seed: u64,
    /// Draw a bootstrap resample per tree (disable to reduce RF to bagging-free trees).
    pub rf_bootstrap: bool,
    /// Sample ceil(sqrt(d)) candidate dimensions per split (disable to scan all).
    pub rf_feature_subsample: bool,
    /// Gradient-descent iteration cap for logistic regression.
    pub lr_max_iter: usize,
    /// Gradient-norm stopping tolerance for logistic regression.
    pub lr_grad_tol: f64,
    /// Full-batch subgradient steps for the linear SVM.
    pub svm_steps: usize,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            nb_alpha: 1.0,
            rf_trees: 100,
            linear_cost_c: 1.0,
            class_weight_mode: ClassWeightMode::Balanced,
            seed: 0,
            rf_bootstrap: true,
            rf_feature_subsample: true,
            lr_max_iter: 10_000,
            lr_grad_tol: 1e-6,
            svm_steps: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyError {
    EmptyDataset,
    SingleClass,
    NonFiniteInput,
    ZeroCountClass(usize),
    WidthMismatch { expected: usize, got: usize },
    NotLinear,
    InvalidParams(String),
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::EmptyDataset => f.write_str("training set is empty"),
            ClassifyError::SingleClass => f.write_str("training labels contain fewer than 2 classes"),
            ClassifyError::NonFiniteInput => f.write_str("non-finite value in input matrix"),
            ClassifyError::ZeroCountClass(c) => write!(f, "class {c} has zero training instances"),
            ClassifyError::WidthMismatch { expected, got } => {
                write!(f, "input width {got} does not match model width {expected}")
            }
            ClassifyError::NotLinear => f.write_str("operation requires a logistic-loss linear model"),
            ClassifyError::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
        }
    }
}

/// Per-class weights: uniform, or total / (num_classes * count_c).
pub fn class_weights(counts: &[usize], mode: ClassWeightMode) -> Result<Vec<f64>, ClassifyError> {
    match mode {
        ClassWeightMode::Uniform => Ok(alloc::vec![1.0; counts.len()]),
        ClassWeightMode::Balanced => {
            let total: usize = counts.iter().sum();
            counts
                .iter()
                .enumerate()
                .map(|(c, &n)| {
                    if n == 0 {
                        Err(ClassifyError::ZeroCountClass(c))
                    } else {
                        Ok(total as f64 / (counts.len() as f64 * n as f64))
                    }
                })
                .collect()
        }
    }
}

/// A fitted model from any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Nb(NbModel),
    Linear(LinearModel),
    Forest(ForestModel),
}

impl TrainedModel {
    pub fn family(&self) -> Family {
        match self {
            TrainedModel::Nb(_) => Family::Nb,
            TrainedModel::Forest(_) => Family::Rf,
            TrainedModel::Linear(m) => match m.loss {
                LinearLoss::Logistic => Family::Lr,
                LinearLoss::Hinge => Family::Svm,
            },
        }
    }

    pub fn width(&self) -> usize {
        match self {
            TrainedModel::Nb(m) => m.width(),
            TrainedModel::Linear(m) => m.width(),
            TrainedModel::Forest(m) => m.width(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedModel::Nb(m) => m.n_classes(),
            TrainedModel::Linear(m) => m.n_classes(),
            TrainedModel::Forest(m) => m.n_classes(),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearModel> {
        match self {
            TrainedModel::Linear(m) => Some(m),
            _ => None,
        }
    }
}

fn validate_training(x: &Matrix, y: &[usize], n_classes: usize) -> Result<Vec<usize>, ClassifyError> {
    if x.rows == 0 || y.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    debug_assert_eq!(x.rows, y.len());
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(ClassifyError::NonFiniteInput);
    }
    let mut counts = alloc::vec![0usize; n_classes];
    for &label in y {
        counts[label] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(ClassifyError::SingleClass);
    }
    Ok(counts)
}

/// Per-sample loss multipliers derived from the class-weight mode. Classes
/// absent from `y` get weight 0 slots that are never referenced.
fn sample_class_weights(
    counts: &[usize],
    mode: ClassWeightMode,
) -> Result<Vec<f64>, ClassifyError> {
    match mode {
        ClassWeightMode::Uniform => Ok(alloc::vec![1.0; counts.len()]),
        ClassWeightMode::Balanced => {
            let present: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
            let total: usize = present.iter().sum();
            let k = present.len();
            Ok(counts
                .iter()
                .map(|&n| {
                    if n == 0 {
                        0.0
                    } else {
                        total as f64 / (k as f64 * n as f64)
                    }
                })
                .collect())
        }
    }
}

/// Fit one model of `family` on `x`/`y` with labels in `0..n_classes`.
pub fn fit(
    family: Family,
    x: &Matrix,
    y: &[usize],
    params: &HyperParams,
    n_classes: usize,
) -> Result<TrainedModel, ClassifyError> {
    let counts = validate_training(x, y, n_classes)?;
    let weights = sample_class_weights(&counts, params.class_weight_mode)?;
    match family {
        Family::Nb => Ok(TrainedModel::Nb(nb::fit(x, y, &counts, &weights, params)?)),
        Family::Lr => Ok(TrainedModel::Linear(linear::fit(
            x,
            y,
            &weights,
            params,
            n_classes,
            LinearLoss::Logistic,
        )?)),
        Family::Svm => Ok(TrainedModel::Linear(linear::fit(
            x,
            y,
            &weights,
            params,
            n_classes,
            LinearLoss::Hinge,
        )?)),
        Family::Rf => Ok(TrainedModel::Forest(forest::fit(x, y, &weights, params, n_classes)?)),
    }
}

/// Per-class scores: probabilities for NB/LR, vote fractions for RF, raw
/// (unbounded) margins for SVM.
pub fn predict_scores(model: &TrainedModel, x: &Matrix) -> Result<Matrix, ClassifyError> {
    if x.cols != model.width() {
        return Err(ClassifyError::WidthMismatch {
            expected: model.width(),
            got: x.cols,
        });
    }
    Ok(match model {
        TrainedModel::Nb(m) => m.predict_scores(x),
        TrainedModel::Linear(m) => m.predict_scores(x),
        TrainedModel::Forest(m) => m.predict_scores(x),
    })
}

/// Argmax labels with deterministic tie-break by class declaration order.
pub fn predict(model: &TrainedModel, x: &Matrix) -> Result<Vec<usize>, ClassifyError> {
    let scores = predict_scores(model, x)?;
    Ok((0..scores.rows).map(|i| argmax(scores.row(i))).collect())
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn balanced_weights_formula() {
        // Published class counts: w_spam = 1613 / (4 * 105).
        let w = class_weights(&[171, 313, 105, 1024], ClassWeightMode::Balanced).unwrap();
        assert_abs_diff_eq!(w[2], 1613.0 / (4.0 * 105.0), epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 3.840, epsilon = 1e-3);
    }

    #[test]
    fn equal_counts_give_unit_weights() {
        let w = class_weights(&[5, 5, 5, 5], ClassWeightMode::Balanced).unwrap();
        assert!(w.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn uniform_ignores_counts() {
        let w = class_weights(&[1, 100, 3], ClassWeightMode::Uniform).unwrap();
        assert_eq!(w, alloc::vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn zero_count_class_rejected() {
        assert_eq!(
            class_weights(&[3, 0], ClassWeightMode::Balanced),
            Err(ClassifyError::ZeroCountClass(1))
        );
    }

    #[test]
    fn argmax_tie_breaks_by_order() {
        assert_eq!(argmax(&[0.5, 0.5, 0.1]), 0);
        assert_eq!(argmax(&[0.1, 0.5, 0.5]), 1);
    }

    #[test]
    fn single_class_training_rejected() {
        let x = Matrix::from_rows(alloc::vec![alloc::vec![1.0], alloc::vec![2.0]], 1);
        let err = fit(Family::Lr, &x, &[1, 1], &HyperParams::default(), 4);
        assert_eq!(err, Err(ClassifyError::SingleClass));
    }

    #[test]
    fn non_finite_input_rejected() {
        let x = Matrix::from_rows(alloc::vec![alloc::vec![1.0], alloc::vec![f64::NAN]], 1);
        let err = fit(Family::Lr, &x, &[0, 1], &HyperParams::default(), 2);
        assert_eq!(err, Err(ClassifyError::NonFiniteInput));
    }

    #[test]
    fn width_mismatch_rejected() {
        let x = Matrix::from_rows(
            alloc::vec![alloc::vec![0.0, 0.0], alloc::vec![1.0, 1.0]],
            2,
        );
        let model = fit(Family::Nb, &x, &[0, 1], &HyperParams::default(), 2).unwrap();
        let probe = Matrix::from_rows(alloc::vec![alloc::vec![0.0]], 1);
        assert!(matches!(
            predict(&model, &probe),
            Err(ClassifyError::WidthMismatch { .. })
        ));
    }
}
