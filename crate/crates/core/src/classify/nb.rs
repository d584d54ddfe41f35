//! Multinomial naive Bayes with additive smoothing over nonnegative
//! feature mass. Class weights scale the prior.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ClassifyError, HyperParams};
use crate::space::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    /// Per-class log prior (weighted, normalized).
    pub log_prior: Vec<f64>,
    /// Per-class, per-feature smoothed log likelihood, row-major (class x feature).
    pub log_likelihood: Vec<f64>,
    pub n_features: usize,
}

impl NbModel {
    pub fn width(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.log_prior.len()
    }

    pub fn predict_scores(&self, x: &Matrix) -> Matrix {
        let k = self.n_classes();
        let mut out = Matrix::zeros(x.rows, k);
        for i in 0..x.rows {
            let row = x.row(i);
            let mut joint = Vec::with_capacity(k);
            for c in 0..k {
                if self.log_prior[c] == f64::NEG_INFINITY {
                    joint.push(f64::NEG_INFINITY);
                    continue;
                }
                let ll = &self.log_likelihood[c * self.n_features..(c + 1) * self.n_features];
                let mut s = self.log_prior[c];
                for (v, l) in row.iter().zip(ll) {
                    if *v != 0.0 {
                        s += v * l;
                    }
                }
                joint.push(s);
            }
            // Posterior via log-sum-exp normalization.
            let max = joint.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            let probs: Vec<f64> = joint
                .iter()
                .map(|&j| {
                    let p = if j == f64::NEG_INFINITY { 0.0 } else { libm::exp(j - max) };
                    total += p;
                    p
                })
                .collect();
            for (c, p) in probs.iter().enumerate() {
                out.row_mut(i)[c] = p / total;
            }
        }
        out
    }
}

pub(super) fn fit(
    x: &Matrix,
    y: &[usize],
    counts: &[usize],
    class_weights: &[f64],
    params: &HyperParams,
) -> Result<NbModel, ClassifyError> {
    if params.nb_alpha <= 0.0 {
        return Err(ClassifyError::InvalidParams(alloc::format!(
            "nb_alpha must be positive, got {}",
            params.nb_alpha
        )));
    }
    if x.data.iter().any(|&v| v < 0.0) {
        return Err(ClassifyError::InvalidParams(
            "naive Bayes requires nonnegative features".into(),
        ));
    }
    let k = counts.len();
    let d = x.cols;
    let alpha = params.nb_alpha;

    // Per-class feature mass.
    let mut mass = alloc::vec![0.0f64; k * d];
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        let dst = &mut mass[label * d..(label + 1) * d];
        for (m, v) in dst.iter_mut().zip(row) {
            *m += v;
        }
    }

    let total_weighted: f64 = counts
        .iter()
        .zip(class_weights)
        .map(|(&n, &w)| n as f64 * w)
        .sum();

    let mut log_prior = Vec::with_capacity(k);
    let mut log_likelihood = alloc::vec![0.0f64; k * d];
    for c in 0..k {
        if counts[c] == 0 {
            log_prior.push(f64::NEG_INFINITY);
            continue;
        }
        log_prior.push(libm::log(counts[c] as f64 * class_weights[c] / total_weighted));
        let class_mass = &mass[c * d..(c + 1) * d];
        let denom: f64 = class_mass.iter().sum::<f64>() + alpha * d as f64;
        for (j, &m) in class_mass.iter().enumerate() {
            log_likelihood[c * d + j] = libm::log((m + alpha) / denom);
        }
    }

    Ok(NbModel {
        log_prior,
        log_likelihood,
        n_features: d,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{fit as bank_fit, predict, predict_scores, ClassWeightMode, Family, TrainedModel};
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn toy() -> (Matrix, Vec<usize>) {
        // 2 classes x 2 count features.
        let x = Matrix::from_rows(
            vec![
                vec![3.0, 1.0],
                vec![4.0, 0.0],
                vec![0.0, 2.0],
                vec![1.0, 5.0],
            ],
            2,
        );
        (x, vec![0, 0, 1, 1])
    }

    /// Hand-computed posterior for the probe point [2, 1] with alpha = 1.
    fn hand_posterior() -> (f64, f64) {
        // Class 0 mass: f0 = 7, f1 = 1, total 8; theta = (8/10, 2/10).
        // Class 1 mass: f0 = 1, f1 = 7, total 8; theta = (2/10, 8/10).
        // Uniform prior (2 samples each, uniform weights).
        let joint0 = 0.5 * (0.8f64.powi(2)) * 0.2;
        let joint1 = 0.5 * (0.2f64.powi(2)) * 0.8;
        (joint0 / (joint0 + joint1), joint1 / (joint0 + joint1))
    }

    #[test]
    fn posterior_matches_hand_calculation() {
        let (x, y) = toy();
        let params = HyperParams {
            class_weight_mode: ClassWeightMode::Uniform,
            ..HyperParams::default()
        };
        let model = bank_fit(Family::Nb, &x, &y, &params, 2).unwrap();
        let probe = Matrix::from_rows(vec![vec![2.0, 1.0]], 2);
        let scores = predict_scores(&model, &probe).unwrap();
        let (p0, p1) = hand_posterior();
        assert_abs_diff_eq!(scores.row(0)[0], p0, epsilon = 1e-9);
        assert_abs_diff_eq!(scores.row(0)[1], p1, epsilon = 1e-9);
        assert_eq!(predict(&model, &probe).unwrap(), vec![0]);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (x, y) = toy();
        let model = bank_fit(Family::Nb, &x, &y, &HyperParams::default(), 2).unwrap();
        let scores = predict_scores(&model, &x).unwrap();
        for i in 0..scores.rows {
            assert_abs_diff_eq!(scores.row(i).iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn huge_alpha_converges_to_prior_argmax() {
        // With alpha -> infinity likelihoods flatten; prediction follows the prior.
        let x = Matrix::from_rows(
            vec![vec![9.0, 0.0], vec![8.0, 1.0], vec![7.0, 0.0], vec![0.0, 9.0]],
            2,
        );
        let y = vec![0, 0, 0, 1];
        let params = HyperParams {
            nb_alpha: 1e12,
            class_weight_mode: ClassWeightMode::Uniform,
            ..HyperParams::default()
        };
        let model = bank_fit(Family::Nb, &x, &y, &params, 2).unwrap();
        let probe = Matrix::from_rows(vec![vec![0.0, 9.0]], 2);
        // Class 0 has the larger prior (3 of 4 samples).
        assert_eq!(predict(&model, &probe).unwrap(), vec![0]);
    }

    #[test]
    fn balanced_weights_flatten_prior() {
        let x = Matrix::from_rows(
            vec![vec![9.0, 0.0], vec![8.0, 1.0], vec![7.0, 0.0], vec![0.0, 9.0]],
            2,
        );
        let y = vec![0, 0, 0, 1];
        let model = bank_fit(Family::Nb, &x, &y, &HyperParams::default(), 2).unwrap();
        if let TrainedModel::Nb(nb) = model {
            assert_abs_diff_eq!(nb.log_prior[0], nb.log_prior[1], epsilon = 1e-12);
        } else {
            panic!("expected NB model");
        }
    }

    #[test]
    fn negative_features_rejected() {
        let x = Matrix::from_rows(vec![vec![-1.0], vec![1.0]], 1);
        assert!(bank_fit(Family::Nb, &x, &[0, 1], &HyperParams::default(), 2).is_err());
    }
}
