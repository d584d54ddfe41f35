//! One-vs-rest linear models: logistic regression trained by deterministic
//! full-batch descent with backtracking line search (Nesterov-accelerated
//! with restarts), and a hinge-loss SVM trained by a deterministic
//! full-batch subgradient schedule.
//!
//! Per-class objective, with y in {-1, +1} and s_i the sample's class
//! weight:
//!
//!   J(w, b) = C * sum_i s_i * loss(y_i * (w . x_i + b)) + ||w||^2 / 2
//!
//! The bias is not regularized.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ClassifyError, HyperParams};
use crate::space::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearLoss {
    Logistic,
    Hinge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Row-major per-class weight vectors (class x feature).
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub loss: LinearLoss,
    pub n_features: usize,
}

impl LinearModel {
    pub fn width(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.biases.len()
    }

    pub fn class_weights(&self, class: usize) -> &[f64] {
        &self.weights[class * self.n_features..(class + 1) * self.n_features]
    }

    /// Raw one-vs-rest margins per class.
    pub fn margins(&self, x: &Matrix) -> Matrix {
        let k = self.n_classes();
        let mut out = Matrix::zeros(x.rows, k);
        for i in 0..x.rows {
            let row = x.row(i);
            for c in 0..k {
                out.row_mut(i)[c] = dot(self.class_weights(c), row) + self.biases[c];
            }
        }
        out
    }

    /// Probabilities for logistic loss (per-class sigmoids normalized to sum
    /// to 1), raw margins for hinge loss.
    pub fn predict_scores(&self, x: &Matrix) -> Matrix {
        let mut scores = self.margins(x);
        if self.loss == LinearLoss::Hinge {
            return scores;
        }
        let k = self.n_classes();
        for i in 0..scores.rows {
            let row = scores.row_mut(i);
            let mut total = 0.0;
            for v in row.iter_mut().take(k) {
                *v = sigmoid(*v);
                total += *v;
            }
            if total > 0.0 {
                for v in row.iter_mut() {
                    *v /= total;
                }
            } else {
                for v in row.iter_mut() {
                    *v = 1.0 / k as f64;
                }
            }
        }
        scores
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// log(1 + exp(-m)), computed stably.
#[inline]
fn log1p_exp_neg(m: f64) -> f64 {
    if m >= 0.0 {
        libm::log1p(libm::exp(-m))
    } else {
        -m + libm::log1p(libm::exp(m))
    }
}

pub(super) fn fit(
    x: &Matrix,
    y: &[usize],
    class_weights: &[f64],
    params: &HyperParams,
    n_classes: usize,
    loss: LinearLoss,
) -> Result<LinearModel, ClassifyError> {
    if params.linear_cost_c <= 0.0 {
        return Err(ClassifyError::InvalidParams(alloc::format!(
            "linear_cost_c must be positive, got {}",
            params.linear_cost_c
        )));
    }
    let d = x.cols;
    let sample_weights: Vec<f64> = y.iter().map(|&label| class_weights[label]).collect();
    let mut weights = alloc::vec![0.0f64; n_classes * d];
    let mut biases = alloc::vec![0.0f64; n_classes];

    for class in 0..n_classes {
        let signs: Vec<f64> = y
            .iter()
            .map(|&label| if label == class { 1.0 } else { -1.0 })
            .collect();
        let (w, b) = match loss {
            LinearLoss::Logistic => train_logistic(x, &signs, &sample_weights, params),
            LinearLoss::Hinge => train_hinge(x, &signs, &sample_weights, params),
        };
        weights[class * d..(class + 1) * d].copy_from_slice(&w);
        biases[class] = b;
    }

    Ok(LinearModel {
        weights,
        biases,
        loss,
        n_features: d,
    })
}

struct LogisticProblem<'a> {
    x: &'a Matrix,
    signs: &'a [f64],
    sample_weights: &'a [f64],
    cost: f64,
}

impl LogisticProblem<'_> {
    /// Objective value at (w, b).
    fn objective(&self, w: &[f64], b: f64) -> f64 {
        let mut loss = 0.0;
        for i in 0..self.x.rows {
            let m = self.signs[i] * (dot(w, self.x.row(i)) + b);
            loss += self.sample_weights[i] * log1p_exp_neg(m);
        }
        self.cost * loss + 0.5 * dot(w, w)
    }

    /// Objective and gradient at (w, b); gradient written into (gw, gb).
    fn objective_grad(&self, w: &[f64], b: f64, gw: &mut [f64], gb: &mut f64) -> f64 {
        gw.copy_from_slice(w);
        *gb = 0.0;
        let mut loss = 0.0;
        for i in 0..self.x.rows {
            let row = self.x.row(i);
            let yi = self.signs[i];
            let m = yi * (dot(w, row) + b);
            let si = self.sample_weights[i];
            loss += si * log1p_exp_neg(m);
            // d/dm log(1+e^-m) = -sigmoid(-m)
            let coeff = self.cost * si * (-sigmoid(-m)) * yi;
            if coeff != 0.0 {
                for (g, &v) in gw.iter_mut().zip(row) {
                    *g += coeff * v;
                }
                *gb += coeff;
            }
        }
        self.cost * loss + 0.5 * dot(w, w)
    }
}

/// Accelerated gradient descent with two-way backtracking line search.
/// Stops on gradient norm below `lr_grad_tol`, an objective plateau, or the
/// iteration cap.
fn train_logistic(x: &Matrix, signs: &[f64], sample_weights: &[f64], params: &HyperParams) -> (Vec<f64>, f64) {
    let problem = LogisticProblem {
        x,
        signs,
        sample_weights,
        cost: params.linear_cost_c,
    };
    let d = x.cols;

    let mut cur_w = alloc::vec![0.0f64; d];
    let mut cur_b = 0.0f64;
    let mut cur_obj = problem.objective(&cur_w, cur_b);
    // Momentum extrapolation point.
    let mut look_w = cur_w.clone();
    let mut look_b = cur_b;
    let mut momentum = 1.0f64;

    let mut gw = alloc::vec![0.0f64; d];
    let mut gb = 0.0f64;
    let mut step = 1.0f64;
    let mut plateau = 0u32;

    for _ in 0..params.lr_max_iter {
        let look_obj = problem.objective_grad(&look_w, look_b, &mut gw, &mut gb);
        let grad_sq = dot(&gw, &gw) + gb * gb;
        if libm::sqrt(grad_sq) < params.lr_grad_tol {
            cur_w = look_w;
            cur_b = look_b;
            break;
        }

        // Backtracking Armijo step from the extrapolation point.
        let mut next_w = alloc::vec![0.0f64; d];
        let mut next_b;
        let mut next_obj;
        loop {
            for (n, (l, g)) in next_w.iter_mut().zip(look_w.iter().zip(&gw)) {
                *n = l - step * g;
            }
            next_b = look_b - step * gb;
            next_obj = problem.objective(&next_w, next_b);
            if next_obj <= look_obj - 0.25 * step * grad_sq || step < 1e-18 {
                break;
            }
            step *= 0.5;
        }

        if next_obj > cur_obj {
            // Momentum overshot: restart from the best iterate.
            look_w.copy_from_slice(&cur_w);
            look_b = cur_b;
            momentum = 1.0;
            step *= 2.0;
            continue;
        }

        let rel_change = (cur_obj - next_obj) / cur_obj.abs().max(1.0);
        if rel_change < 1e-10 {
            plateau += 1;
        } else {
            plateau = 0;
        }

        let next_momentum = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * momentum * momentum));
        let beta = (momentum - 1.0) / next_momentum;
        for ((l, n), c) in look_w.iter_mut().zip(&next_w).zip(&cur_w) {
            *l = n + beta * (n - c);
        }
        look_b = next_b + beta * (next_b - cur_b);
        momentum = next_momentum;

        cur_w.copy_from_slice(&next_w);
        cur_b = next_b;
        cur_obj = next_obj;
        step *= 2.0;

        if plateau >= 5 {
            break;
        }
    }
    (cur_w, cur_b)
}

/// Deterministic full-batch subgradient descent on the equivalent averaged
/// objective with lambda = 1 / (C * n) and step 1 / (lambda * (t + 1)).
fn train_hinge(x: &Matrix, signs: &[f64], sample_weights: &[f64], params: &HyperParams) -> (Vec<f64>, f64) {
    let d = x.cols;
    let n = x.rows as f64;
    let lambda = 1.0 / (params.linear_cost_c * n);
    let mut w = alloc::vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut acc = alloc::vec![0.0f64; d];

    for t in 0..params.svm_steps {
        let step = 1.0 / (lambda * (t as f64 + 1.0));
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut acc_b = 0.0;
        for i in 0..x.rows {
            let row = x.row(i);
            let yi = signs[i];
            if yi * (dot(&w, row) + b) < 1.0 {
                let c = sample_weights[i] * yi / n;
                for (a, &v) in acc.iter_mut().zip(row) {
                    *a += c * v;
                }
                acc_b += c;
            }
        }
        for (wi, &a) in w.iter_mut().zip(&acc) {
            *wi = (1.0 - step * lambda) * *wi + step * a;
        }
        b += step * acc_b;
    }
    (w, b)
}
