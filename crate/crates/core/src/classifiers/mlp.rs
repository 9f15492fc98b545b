use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gbdt::sigmoid;
use super::MlpParams;
use crate::matrix::Matrix;

pub const STD_FLOOR: f64 = 1e-8;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Per-column z-scoring learned on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let mut mean = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        Standardizer {
            mean,
            std: var.into_iter().map(|v| v.sqrt().max(STD_FLOOR)).collect(),
        }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..x.rows() {
            let z = self.apply_row(x.row(i));
            out.row_mut(i).copy_from_slice(&z);
        }
        out
    }
}

/// Fully connected layer, `w` stored row-major as `out x inp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inp: usize,
    pub out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros_like(&self) -> Layer {
        Layer {
            inp: self.inp,
            out: self.out,
            w: vec![0.0; self.w.len()],
            b: vec![0.0; self.b.len()],
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out)
            .map(|o| {
                let row = &self.w[o * self.inp..(o + 1) * self.inp];
                self.b[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

/// ReLU hidden layers and one sigmoid output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    /// Glorot-uniform weights, zero biases.
    pub fn init(inputs: usize, hidden: &[usize], rng: &mut impl Rng) -> Self {
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inp, out) = (w[0], w[1]);
                let limit = (6.0 / (inp + out) as f64).sqrt();
                Layer {
                    inp,
                    out,
                    w: (0..inp * out).map(|_| rng.random_range(-limit..limit)).collect(),
                    b: vec![0.0; out],
                }
            })
            .collect();
        Network { layers }
    }

    /// Output logit for one (already standardized) input row.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            a = layer.forward(&a);
            if k < last {
                a.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        a[0]
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Mean binary cross-entropy over `rows` of `x`.
    pub fn loss(&self, x: &Matrix, y: &[u8], rows: &[usize]) -> f64 {
        rows.iter().map(|&i| bce(self.logit(x.row(i)), y[i])).sum::<f64>() / rows.len() as f64
    }

    /// Mean binary cross-entropy over `rows` and its gradient.
    pub fn loss_and_grad(&self, x: &Matrix, y: &[u8], rows: &[usize]) -> (f64, Vec<Layer>) {
        let mut grads: Vec<Layer> = self.layers.iter().map(Layer::zeros_like).collect();
        let scale = 1.0 / rows.len() as f64;
        let last = self.layers.len() - 1;
        let mut loss = 0.0;
        for &i in rows {
            // forward, keeping every layer's input activation
            let mut acts = vec![x.row(i).to_vec()];
            for (k, layer) in self.layers.iter().enumerate() {
                let mut z = layer.forward(acts.last().unwrap());
                if k < last {
                    z.iter_mut().for_each(|v| *v = v.max(0.0));
                }
                acts.push(z);
            }
            let logit = acts[self.layers.len()][0];
            loss += bce(logit, y[i]);
            let mut delta = vec![(sigmoid(logit) - f64::from(y[i])) * scale];
            for k in (0..self.layers.len()).rev() {
                let layer = &self.layers[k];
                let input = &acts[k];
                let grad = &mut grads[k];
                for (o, d) in delta.iter().enumerate() {
                    grad.b[o] += d;
                    let row = &mut grad.w[o * layer.inp..(o + 1) * layer.inp];
                    for (g, a) in row.iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if k > 0 {
                    let mut back = vec![0.0; layer.inp];
                    for (d, row) in delta.iter().zip(layer.w.chunks_exact(layer.inp)) {
                        for (b, w) in back.iter_mut().zip(row) {
                            *b += d * w;
                        }
                    }
                    // ReLU derivative, taken as 0 at 0
                    for (b, a) in back.iter_mut().zip(input) {
                        if *a <= 0.0 {
                            *b = 0.0;
                        }
                    }
                    delta = back;
                }
            }
        }
        (loss * scale, grads)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()))
    }
}

pub fn flatten(layers: &[Layer]) -> Vec<f64> {
    layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()).copied()).collect()
}

fn bce(logit: f64, y: u8) -> f64 {
    let softplus = if logit > 0.0 {
        logit + (-logit).exp().ln_1p()
    } else {
        logit.exp().ln_1p()
    };
    softplus - f64::from(y) * logit
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, net: &mut Network, grads: &[Layer]) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        let g = flatten(grads);
        for (k, p) in net.params_mut().enumerate() {
            self.m[k] = BETA1 * self.m[k] + (1.0 - BETA1) * g[k];
            self.v[k] = BETA2 * self.v[k] + (1.0 - BETA2) * g[k] * g[k];
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

/// Result of MLP training on standardized inputs.
pub struct MlpFit {
    pub network: Network,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Mini-batch Adam with early stopping on `val` (or on the training loss
/// when there is no validation data). The best weights are restored.
pub fn train_network(x: &Matrix, y: &[u8], val: Option<(&Matrix, &[u8])>, params: &MlpParams, seed: u64) -> MlpFit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::init(x.cols(), &params.hidden, &mut rng);
    let n_params = net.params().count();
    let mut adam = Adam::new(n_params, params.lr);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let (vx, vy) = match val {
        Some((vx, vy)) if vx.rows() > 0 => (vx, vy),
        _ => (x, y),
    };
    let val_rows: Vec<usize> = (0..vx.rows()).collect();
    let mut best = (net.loss(vx, vy, &val_rows), net.clone(), 0usize);
    let mut since_best = 0;
    let mut epochs_run = 0;
    for epoch in 1..=params.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(params.batch.max(1)) {
            let (_, grads) = net.loss_and_grad(x, y, batch);
            adam.step(&mut net, &grads);
        }
        epochs_run = epoch;
        let loss = net.loss(vx, vy, &val_rows);
        if loss < best.0 {
            best = (loss, net.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= params.patience {
                break;
            }
        }
    }
    MlpFit {
        network: best.1,
        epochs_run,
        best_epoch: best.2,
        best_val_loss: best.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizer_floors_constant_columns() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let s = Standardizer::fit(&x);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, STD_FLOOR]);
        assert_eq!(s.apply_row(&[3.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn bce_matches_definition() {
        let p = sigmoid(0.3);
        assert!((bce(0.3, 1) + p.ln()).abs() < 1e-12);
        assert!((bce(0.3, 0) + (1.0 - p).ln()).abs() < 1e-12);
    }
}
