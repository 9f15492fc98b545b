use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{midpoint, Node, Tree};
use super::RfParams;
use crate::matrix::Matrix;

/// Bagged Gini trees; a tree votes 1 when its leaf holds at least half class 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

/// Independent stream per tree, so results do not depend on thread scheduling.
fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64 + 1);
    rng
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    params: &'a RfParams,
    mtry: usize,
    nodes: Vec<Node>,
}

fn gini_sum(n: f64, n1: f64) -> f64 {
    // n * gini = n - (n0^2 + n1^2) / n
    if n == 0.0 {
        0.0
    } else {
        let n0 = n - n1;
        n - (n0 * n0 + n1 * n1) / n
    }
}

impl Grower<'_> {
    fn grow(&mut self, samples: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = samples.len();
        let n1 = samples.iter().filter(|&&i| self.y[i] == 1).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: n1 as f64 / n as f64,
        });
        let msl = self.params.min_samples_leaf.max(1);
        if depth >= self.params.max_depth || n1 == 0 || n1 == n || n < 2 * msl {
            return id;
        }
        let p = self.x.cols();
        let mut features = sample(rng, p, self.mtry.min(p)).into_vec();
        features.sort_unstable();

        let parent = gini_sum(n as f64, n1 as f64);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = samples.to_vec();
        for &f in &features {
            order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let mut left1 = 0usize;
            for k in 1..n {
                left1 += usize::from(self.y[order[k - 1]] == 1);
                let lo = self.x.get(order[k - 1], f);
                let hi = self.x.get(order[k], f);
                if lo == hi || k < msl || n - k < msl {
                    continue;
                }
                let impurity = gini_sum(k as f64, left1 as f64) + gini_sum((n - k) as f64, (n1 - left1) as f64);
                let threshold = midpoint(lo, hi);
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, f, threshold));
                }
            }
        }
        let Some((impurity, feature, threshold)) = best else {
            return id;
        };
        if parent - impurity <= 1e-12 {
            return id;
        }
        let mid = stable_partition(samples, |&i| self.x.get(i, feature) <= threshold);
        let (l, r) = samples.split_at_mut(mid);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Stable in-place partition; returns the number of elements satisfying `pred`.
fn stable_partition<T: Copy>(xs: &mut [T], pred: impl Fn(&T) -> bool) -> usize {
    let (yes, no): (Vec<T>, Vec<T>) = xs.iter().partition(|v| pred(v));
    let k = yes.len();
    for (slot, v) in xs.iter_mut().zip(yes.into_iter().chain(no)) {
        *slot = v;
    }
    k
}

pub fn train_forest(x: &Matrix, y: &[u8], params: &RfParams, seed: u64) -> Forest {
    let p = x.cols();
    let mtry = params
        .features_per_split
        .unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1));
    let n = x.rows();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let mut samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            samples.sort_unstable();
            let mut grower = Grower {
                x,
                y,
                params,
                mtry,
                nodes: Vec::new(),
            };
            grower.grow(&mut samples, 0, &mut rng);
            Tree { nodes: grower.nodes }
        })
        .collect();
    Forest { trees }
}

impl Forest {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.5;
        }
        let votes = self.trees.iter().filter(|t| t.predict(x) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}
