//! Binary classifiers written from scratch: random forest, second-order
//! gradient-boosted trees and a multilayer perceptron.
//!
//! All three share [`train`] / [`Model::predict_proba`]; label 1 is the AI
//! class. Training is deterministic given the seed.

mod forest;
mod gbdt;
mod mlp;
mod tree;

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use forest::{train_forest, Forest};
pub use gbdt::{logistic_loss, presort, sigmoid, train_boosted, Boosted};
pub use mlp::{flatten, train_network, Layer, MlpFit, Network, Standardizer, STD_FLOOR};
pub use tree::{midpoint, Node, Tree};

pub const MODEL_MAGIC: &[u8] = b"VRD1\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gbdt,
    Rf,
    Mlp,
}

impl ModelKind {
    /// Report column order.
    pub const ALL: [ModelKind; 3] = [ModelKind::Gbdt, ModelKind::Rf, ModelKind::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gbdt => "gbdt",
            ModelKind::Rf => "rf",
            ModelKind::Mlp => "mlp",
        }
    }

    /// Column heading in rendered reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Gbdt => "XGBoost",
            ModelKind::Rf => "RF",
            ModelKind::Mlp => "MLP",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rf" | "random_forest" => Ok(ModelKind::Rf),
            "gbdt" | "xgboost" => Ok(ModelKind::Gbdt),
            "mlp" => Ok(ModelKind::Mlp),
            _ => Err(Error::Config(format!("unknown model {s:?}; expected rf, gbdt or mlp"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// `None` means `floor(sqrt(p))`.
    pub features_per_split: Option<usize>,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 200,
            max_depth: 12,
            min_samples_leaf: 2,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub min_child_weight: f64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            rounds: 200,
            learning_rate: 0.1,
            max_depth: 6,
            lambda: 1.0,
            min_child_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub patience: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: vec![64],
            epochs: 500,
            batch: 16,
            lr: 1e-3,
            patience: 20,
        }
    }
}

/// Hyperparameters of all three models; `model` picks which one trains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rf: RfParams,
    #[serde(default)]
    pub gbdt: GbdtParams,
    #[serde(default)]
    pub mlp: MlpParams,
}

impl TrainConfig {
    pub fn new(model: ModelKind, seed: u64) -> Self {
        TrainConfig {
            model,
            seed,
            rf: RfParams::default(),
            gbdt: GbdtParams::default(),
            mlp: MlpParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rf.n_trees", self.rf.n_trees),
            ("rf.max_depth", self.rf.max_depth),
            ("rf.min_samples_leaf", self.rf.min_samples_leaf),
            ("gbdt.max_depth", self.gbdt.max_depth),
            ("mlp.epochs", self.mlp.epochs),
            ("mlp.batch", self.mlp.batch),
            ("mlp.patience", self.mlp.patience),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.rf.features_per_split == Some(0) {
            return Err(Error::Config("rf.features_per_split must be positive".into()));
        }
        if self.mlp.hidden.is_empty() || self.mlp.hidden.contains(&0) {
            return Err(Error::Config("mlp.hidden must list positive layer widths".into()));
        }
        if !(self.gbdt.learning_rate > 0.0 && self.mlp.lr > 0.0 && self.gbdt.lambda >= 0.0) {
            return Err(Error::Config("learning rates must be positive and lambda non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Parameters {
    Rf(Forest),
    Gbdt(Boosted),
    Mlp {
        standardizer: Standardizer,
        network: Network,
    },
}

/// A trained classifier, bound to the feature manifest it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    pub config: TrainConfig,
    pub manifest_fingerprint: String,
    pub n_features: usize,
    pub parameters: Parameters,
}

fn check_training_data(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Training("training matrix is empty".into()));
    }
    if x.rows() != y.len() {
        return Err(Error::Training(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if !x.all_finite() {
        return Err(Error::Training("training matrix contains NaN or infinite values".into()));
    }
    if y.iter().any(|&t| t > 1) {
        return Err(Error::Training("labels must be 0 or 1".into()));
    }
    let positives = y.iter().filter(|&&t| t == 1).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    Ok(())
}

/// Train `config.model`. `val` is used for early stopping by the MLP only.
pub fn train(
    x: &Matrix,
    y: &[u8],
    val: Option<(&Matrix, &[u8])>,
    config: &TrainConfig,
    manifest_fingerprint: &str,
) -> Result<Model> {
    config.validate()?;
    check_training_data(x, y)?;
    if let Some((vx, vy)) = val {
        if vx.cols() != x.cols() || vx.rows() != vy.len() {
            return Err(Error::Training("validation data does not match training width".into()));
        }
    }
    let parameters = match config.model {
        ModelKind::Rf => Parameters::Rf(train_forest(x, y, &config.rf, config.seed)),
        ModelKind::Gbdt => Parameters::Gbdt(train_boosted(x, y, &config.gbdt).0),
        ModelKind::Mlp => {
            let standardizer = Standardizer::fit(x);
            let xs = standardizer.apply(x);
            let vs = val.map(|(vx, vy)| (standardizer.apply(vx), vy));
            let fit = train_network(&xs, y, vs.as_ref().map(|(m, t)| (m, *t)), &config.mlp, config.seed);
            log::debug!(
                "mlp stopped after {} epochs, best epoch {} (val loss {:.4})",
                fit.epochs_run,
                fit.best_epoch,
                fit.best_val_loss
            );
            Parameters::Mlp {
                standardizer,
                network: fit.network,
            }
        }
    };
    Ok(Model {
        kind: config.model,
        config: config.clone(),
        manifest_fingerprint: manifest_fingerprint.to_string(),
        n_features: x.cols(),
        parameters,
    })
}

impl Model {
    fn proba_row(&self, row: &[f64]) -> f64 {
        match &self.parameters {
            Parameters::Rf(f) => f.predict_proba(row),
            Parameters::Gbdt(b) => b.predict_proba(row),
            Parameters::Mlp {
                standardizer,
                network,
            } => network.predict_proba(&standardizer.apply_row(row)),
        }
    }

    /// Probability of the AI class per row.
    pub fn predict_proba(&self, x: &Matrix, manifest_fingerprint: &str) -> Result<Vec<f64>> {
        if manifest_fingerprint != self.manifest_fingerprint {
            return Err(Error::Manifest(
                "input features were built with a different manifest than the model".into(),
            ));
        }
        if x.cols() != self.n_features {
            return Err(Error::Manifest(format!(
                "model expects {} features, input has {}",
                self.n_features,
                x.cols()
            )));
        }
        if !x.all_finite() {
            return Err(Error::InvalidInput("input contains NaN or infinite values".into()));
        }
        Ok(x.iter_rows().map(|r| self.proba_row(r)).collect())
    }

    pub fn predict(&self, x: &Matrix, manifest_fingerprint: &str, threshold: f64) -> Result<Vec<u8>> {
        Ok(threshold_labels(&self.predict_proba(x, manifest_fingerprint)?, threshold))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MODEL_MAGIC).map_err(|e| Error::io("<model>", e))?;
        serde_json::to_writer(&mut out, self)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Model> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes).map_err(|e| Error::io("<model>", e))?;
        let body = bytes
            .strip_prefix(MODEL_MAGIC)
            .ok_or_else(|| Error::ModelFormat("missing VRD1 header".into()))?;
        serde_json::from_slice(body).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// `proba >= threshold` is class 1.
pub fn threshold_labels(proba: &[f64], threshold: f64) -> Vec<u8> {
    proba.iter().map(|&p| u8::from(p >= threshold)).collect()
}
