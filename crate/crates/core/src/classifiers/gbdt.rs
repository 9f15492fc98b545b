use serde::{Deserialize, Serialize};

use super::tree::{midpoint, Node, Tree};
use super::GbdtParams;
use crate::matrix::Matrix;

/// Second-order boosted trees on the logistic loss, base margin 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean logistic loss of margins `f` against labels `y`.
pub fn logistic_loss(f: &[f64], y: &[u8]) -> f64 {
    let total: f64 = f
        .iter()
        .zip(y)
        .map(|(&z, &t)| {
            // log(1 + e^z) - t z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - f64::from(t) * z
        })
        .sum();
    total / f.len() as f64
}

#[derive(Clone, Copy, Default)]
struct Sums {
    g: f64,
    h: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Scan {
    left: Sums,
    last: f64,
    seen: bool,
    best: Option<Candidate>,
}

fn score(s: Sums, lambda: f64) -> f64 {
    s.g * s.g / (s.h + lambda)
}

/// Grow one tree level by level. `sorted[f]` lists sample indices in
/// ascending order of feature `f`; each level is one pass over it.
fn grow(x: &Matrix, sorted: &[Vec<u32>], g: &[f64], h: &[f64], params: &GbdtParams) -> Tree {
    let n = x.rows();
    let lambda = params.lambda;
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut node_of = vec![0usize; n];
    let mut frontier: Vec<(usize, Sums)> = vec![(
        0,
        Sums {
            g: g.iter().sum(),
            h: h.iter().sum(),
        },
    )];
    let leaf_value = |s: Sums| -s.g / (s.h + lambda);

    for _depth in 0..params.max_depth {
        if frontier.is_empty() {
            break;
        }
        let mut slot_of = vec![usize::MAX; nodes.len()];
        for (slot, (node, _)) in frontier.iter().enumerate() {
            slot_of[*node] = slot;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; frontier.len()];
        for (f, order) in sorted.iter().enumerate() {
            let mut scans: Vec<Scan> = frontier
                .iter()
                .map(|_| Scan {
                    left: Sums::default(),
                    last: 0.0,
                    seen: false,
                    best: None,
                })
                .collect();
            for &i in order {
                let i = i as usize;
                let slot = slot_of[node_of[i]];
                if slot == usize::MAX {
                    continue;
                }
                let total = frontier[slot].1;
                let v = x.get(i, f);
                let scan = &mut scans[slot];
                if scan.seen && v > scan.last {
                    let right = Sums {
                        g: total.g - scan.left.g,
                        h: total.h - scan.left.h,
                    };
                    if scan.left.h >= params.min_child_weight && right.h >= params.min_child_weight {
                        let gain = 0.5 * (score(scan.left, lambda) + score(right, lambda) - score(total, lambda));
                        if scan.best.is_none_or(|b| gain > b.gain) {
                            scan.best = Some(Candidate {
                                gain,
                                feature: f,
                                threshold: midpoint(scan.last, v),
                            });
                        }
                    }
                }
                scan.left.g += g[i];
                scan.left.h += h[i];
                scan.last = v;
                scan.seen = true;
            }
            // features are visited in ascending order, so strict > keeps the lowest index on ties
            for (b, scan) in best.iter_mut().zip(scans) {
                if let Some(c) = scan.best {
                    if b.is_none_or(|cur| c.gain > cur.gain) {
                        *b = Some(c);
                    }
                }
            }
        }

        let mut next = Vec::new();
        let mut split_of = vec![None; frontier.len()];
        for (slot, &(node, total)) in frontier.iter().enumerate() {
            match best[slot] {
                Some(c) if c.gain > 0.0 => {
                    let left = nodes.len();
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes[node] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right: left + 1,
                    };
                    split_of[slot] = Some((c, left));
                }
                _ => nodes[node] = Node::Leaf { value: leaf_value(total) },
            }
        }
        let mut child_sums = vec![Sums::default(); nodes.len()];
        for i in 0..n {
            let slot = slot_of.get(node_of[i]).copied().unwrap_or(usize::MAX);
            if slot == usize::MAX {
                continue;
            }
            if let Some((c, left)) = split_of[slot] {
                let child = if x.get(i, c.feature) <= c.threshold { left } else { left + 1 };
                node_of[i] = child;
                child_sums[child].g += g[i];
                child_sums[child].h += h[i];
            }
        }
        for (_, left) in split_of.into_iter().flatten() {
            next.push((left, child_sums[left]));
            next.push((left + 1, child_sums[left + 1]));
        }
        frontier = next;
    }
    for (node, total) in frontier {
        nodes[node] = Node::Leaf { value: leaf_value(total) };
    }
    Tree { nodes }
}

pub fn presort(x: &Matrix) -> Vec<Vec<u32>> {
    (0..x.cols())
        .map(|f| {
            let mut idx: Vec<u32> = (0..x.rows() as u32).collect();
            idx.sort_by(|&a, &b| x.get(a as usize, f).total_cmp(&x.get(b as usize, f)));
            idx
        })
        .collect()
}

/// Train and return the model with the training loss after every round
/// (index 0 is the loss of the base margin).
pub fn train_boosted(x: &Matrix, y: &[u8], params: &GbdtParams) -> (Boosted, Vec<f64>) {
    let n = x.rows();
    let sorted = presort(x);
    let mut margin = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut losses = vec![logistic_loss(&margin, y)];
    for _ in 0..params.rounds {
        for i in 0..n {
            let p = sigmoid(margin[i]);
            g[i] = p - f64::from(y[i]);
            h[i] = p * (1.0 - p);
        }
        let tree = grow(x, &sorted, &g, &h, params);
        for (i, m) in margin.iter_mut().enumerate() {
            *m += params.learning_rate * tree.predict(x.row(i));
        }
        trees.push(tree);
        losses.push(logistic_loss(&margin, y));
    }
    (
        Boosted {
            learning_rate: params.learning_rate,
            trees,
        },
        losses,
    )
}

impl Boosted {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| self.learning_rate * t.predict(x)).sum()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_split_matches_hand_computation() {
        // one feature, perfectly separable at 1.5
        let x = Matrix::from_vec(12, 1, [1.0, 1.0, 2.0, 2.0].repeat(3)).unwrap();
        let y = [0, 0, 1, 1].repeat(3);
        let params = GbdtParams {
            rounds: 1,
            max_depth: 1,
            min_child_weight: 0.0,
            ..GbdtParams::default()
        };
        let (model, losses) = train_boosted(&x, &y, &params);
        // p = 0.5 everywhere: g = -0.5/+0.5, h = 0.25; each side has 6 samples
        let w_left = -(6.0 * 0.5) / (6.0 * 0.25 + 1.0);
        let w_right = -(6.0 * -0.5) / (6.0 * 0.25 + 1.0);
        assert_eq!(
            model.trees[0].nodes[0],
            Node::Split {
                feature: 0,
                threshold: 1.5,
                left: 1,
                right: 2
            }
        );
        assert!((model.trees[0].predict(&[1.0]) - w_left).abs() < 1e-12);
        assert!((model.trees[0].predict(&[2.0]) - w_right).abs() < 1e-12);
        assert!(losses[1] < losses[0]);
    }

    #[test]
    fn zero_rounds_is_one_half() {
        let model = Boosted {
            learning_rate: 0.1,
            trees: vec![],
        };
        assert_eq!(model.predict_proba(&[3.0]), 0.5);
    }

    #[test]
    fn loss_is_stable_for_large_margins() {
        assert!(logistic_loss(&[800.0], &[1]).abs() < 1e-12);
        assert!((logistic_loss(&[-800.0], &[1]) - 800.0).abs() < 1e-9);
        assert_eq!(sigmoid(-1000.0), 0.0);
    }
}
