//! Random forest: bootstrap-resampled CART trees with weighted Gini splits
//! over ceil(sqrt(d)) random candidate dimensions, grown until pure.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, ClassifyError, HyperParams};
use crate::mix_seed;
use crate::space::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Weighted class votes at this leaf.
        votes: Vec<f64>,
    },
    Split {
        dim: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Class voted by this tree (argmax of the reached leaf's votes).
    pub fn vote(&self, row: &[f64]) -> usize {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { votes } => return argmax(votes),
                Node::Split { dim, threshold, left, right } => {
                    node = if row[*dim] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { votes } => Some(votes),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub n_classes: usize,
    /// Seed of the bootstrap/substream generator per tree index.
    pub seed: u64,
}

impl ForestModel {
    pub fn width(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Vote fractions over the trees.
    pub fn predict_scores(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows, self.n_classes);
        let n_trees = self.trees.len() as f64;
        for i in 0..x.rows {
            let row = x.row(i);
            let scores = out.row_mut(i);
            for tree in &self.trees {
                scores[tree.vote(row)] += 1.0;
            }
            for s in scores.iter_mut() {
                *s /= n_trees;
            }
        }
        out
    }
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    sample_weights: &'a [f64],
    n_classes: usize,
    n_candidates: usize,
    subsample: bool,
    nodes: Vec<Node>,
}

fn gini(class_mass: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let mut g = 1.0;
    for &m in class_mass {
        let p = m / total;
        g -= p * p;
    }
    g
}

impl TreeBuilder<'_> {
    fn class_mass(&self, indices: &[usize]) -> (Vec<f64>, f64) {
        let mut mass = alloc::vec![0.0f64; self.n_classes];
        let mut total = 0.0;
        for &i in indices {
            let w = self.sample_weights[i];
            mass[self.y[i]] += w;
            total += w;
        }
        (mass, total)
    }

    /// Best (dim, threshold, child impurity) over the candidate dims.
    fn best_split(&self, indices: &[usize], dims: &[usize]) -> Option<(usize, f64)> {
        let (_, total) = self.class_mass(indices);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut column: Vec<(f64, usize, f64)> = Vec::with_capacity(indices.len());

        for &dim in dims {
            column.clear();
            column.extend(
                indices
                    .iter()
                    .map(|&i| (self.x.row(i)[dim], self.y[i], self.sample_weights[i])),
            );
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            if column[0].0 == column[column.len() - 1].0 {
                continue;
            }
            let mut left_mass = alloc::vec![0.0f64; self.n_classes];
            let mut left_total = 0.0;
            let (mut right_mass, mut right_total) = self.class_mass(indices);
            for i in 0..column.len() - 1 {
                let (value, label, weight) = column[i];
                left_mass[label] += weight;
                left_total += weight;
                right_mass[label] -= weight;
                right_total -= weight;
                let next_value = column[i + 1].0;
                if next_value == value {
                    continue;
                }
                let impurity = (left_total * gini(&left_mass, left_total)
                    + right_total * gini(&right_mass, right_total))
                    / total;
                if best.is_none_or(|(_, _, b)| impurity < b) {
                    best = Some((dim, value + 0.5 * (next_value - value), impurity));
                }
            }
        }
        best.map(|(dim, threshold, _)| (dim, threshold))
    }

    fn build(&mut self, indices: &[usize], rng: &mut ChaCha12Rng) -> usize {
        let (mass, _) = self.class_mass(indices);
        let pure = mass.iter().filter(|&&m| m > 0.0).count() <= 1;
        if pure || indices.len() < 2 {
            self.nodes.push(Node::Leaf { votes: mass });
            return self.nodes.len() - 1;
        }

        let d = self.x.cols;
        let split = if self.subsample {
            let mut dims: Vec<usize> = (0..d).collect();
            dims.shuffle(rng);
            dims.truncate(self.n_candidates);
            // Fall back to the full dimension scan when all candidates are
            // constant on this node.
            self.best_split(indices, &dims)
                .or_else(|| self.best_split(indices, &(0..d).collect::<Vec<_>>()))
        } else {
            self.best_split(indices, &(0..d).collect::<Vec<_>>())
        };

        match split {
            None => {
                self.nodes.push(Node::Leaf { votes: mass });
                self.nodes.len() - 1
            }
            Some((dim, threshold)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                    indices.iter().partition(|&&i| self.x.row(i)[dim] <= threshold);
                let slot = self.nodes.len();
                self.nodes.push(Node::Leaf { votes: Vec::new() }); // placeholder
                let left = self.build(&left_idx, rng);
                let right = self.build(&right_idx, rng);
                self.nodes[slot] = Node::Split { dim, threshold, left, right };
                slot
            }
        }
    }
}

fn isqrt_ceil(d: usize) -> usize {
    let mut c = 1;
    while c * c < d {
        c += 1;
    }
    c
}

pub(super) fn fit(
    x: &Matrix,
    y: &[usize],
    class_weights: &[f64],
    params: &HyperParams,
    n_classes: usize,
) -> Result<ForestModel, ClassifyError> {
    if params.rf_trees == 0 {
        return Err(ClassifyError::InvalidParams("rf_trees must be >= 1".into()));
    }
    let n = x.rows;
    let sample_weights: Vec<f64> = y.iter().map(|&label| class_weights[label]).collect();
    let n_candidates = isqrt_ceil(x.cols);

    let trees: Vec<Tree> = (0..params.rf_trees)
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(params.seed, t as u64 + 1));
            let indices: Vec<usize> = if params.rf_bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = TreeBuilder {
                x,
                y,
                sample_weights: &sample_weights,
                n_classes,
                n_candidates,
                subsample: params.rf_feature_subsample,
                nodes: Vec::new(),
            };
            builder.build(&indices, &mut rng);
            Tree { nodes: builder.nodes }
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_features: x.cols,
        n_classes,
        seed: params.seed,
    })
}
