//! A trained, self-contained detector: fitted split state, feature manifest,
//! training column statistics and the classifier, stored as one model file.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classifiers::{train, Model, ModelKind, Standardizer, MODEL_MAGIC, STD_FLOOR};
use crate::corpus::{make_split, Document, Label, Language, SplitPlan, Task};
use crate::error::{Error, Result};
use crate::eval::{confusion, Confusion, Hyperparameters};
use crate::features::{
    assemble_matrix, common_embedding_dim, complete, extract_static, manifest, manifest_fingerprint, names,
    ActiveProviders, BigramLm, Category, FeatureMatrix, FeatureSet, FittedState, FittedVectorizer,
};
use crate::providers::ProviderSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub language: Language,
    pub task: Task,
    pub features: FeatureSet,
    pub manifest: Vec<String>,
    pub vectorizer: Option<FittedVectorizer>,
    pub lm: Option<BigramLm>,
    /// Column statistics of the training matrix.
    pub column_stats: Standardizer,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopFeature {
    pub name: String,
    pub value: f64,
    /// Standardized against the training documents.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub proba_ai: f64,
    pub label: Label,
    pub top_features: Vec<TopFeature>,
}

/// Held-out result of [`Detector::train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub plan: SplitPlan,
    pub test: Confusion,
}

fn fitted_state(vectorizer: Option<FittedVectorizer>, lm: Option<BigramLm>) -> FittedState {
    FittedState {
        vectorizer,
        lm: lm.map(Arc::new),
    }
}

/// Extract `docs` with the fitted state into a matrix over `names`.
pub fn extract_matrix(
    docs: &[&Document],
    categories: &BTreeSet<Category>,
    providers: &ProviderSet,
    fitted: &FittedState,
    names: Option<&[String]>,
) -> Result<FeatureMatrix> {
    let mut vectors = Vec::with_capacity(docs.len());
    for doc in docs {
        let tokens = doc.tokenize();
        let mut fv = extract_static(doc, &tokens, categories, providers)?;
        complete(&mut fv, &tokens, categories, fitted)?;
        vectors.push(fv);
    }
    let names = match names {
        Some(n) => n.to_vec(),
        None => manifest(categories, &ActiveProviders::of(providers), common_embedding_dim(&vectors)?),
    };
    let refs: Vec<_> = vectors.iter().collect();
    assemble_matrix(
        docs.iter().map(|d| d.id.clone()).collect(),
        docs.iter().map(|d| d.label).collect(),
        &refs,
        &names,
    )
}

/// Split `docs` and extract train/val/test matrices with state fitted on train.
pub fn extract_split(
    docs: &[Document],
    task: Task,
    language: Language,
    seed: u64,
    features: &FeatureSet,
    providers: &ProviderSet,
) -> Result<(SplitPlan, FittedState, [FeatureMatrix; 3])> {
    if let Some(reason) = features.skip_reason(&ActiveProviders::of(providers)) {
        return Err(Error::Config(format!("feature set {features} is unavailable ({reason})")));
    }
    let plan = make_split(docs, task, language, seed)?;
    let pick = |ids: &BTreeSet<String>| -> Vec<&Document> { docs.iter().filter(|d| ids.contains(&d.id)).collect() };
    let (train_docs, val_docs, test_docs) = (pick(&plan.train_ids), pick(&plan.val_ids), pick(&plan.test_ids));
    let train_tokens: Vec<_> = train_docs.iter().map(|d| d.tokenize()).collect();
    let refs: Vec<_> = train_tokens.iter().collect();
    let fitted = FittedState::fit(&features.categories, providers, &refs, &plan.train_fingerprint())?;
    let train_m = extract_matrix(&train_docs, &features.categories, providers, &fitted, None)?;
    let val_m = extract_matrix(&val_docs, &features.categories, providers, &fitted, Some(&train_m.manifest))?;
    let test_m = extract_matrix(&test_docs, &features.categories, providers, &fitted, Some(&train_m.manifest))?;
    Ok((plan, fitted, [train_m, val_m, test_m]))
}

impl Detector {
    /// Train on one seeded split; the test part is scored and returned.
    #[allow(clippy::too_many_arguments)]
    pub fn train(
        docs: &[Document],
        language: Language,
        task: Task,
        features: &FeatureSet,
        model: ModelKind,
        seed: u64,
        hyperparameters: &Hyperparameters,
        providers: &ProviderSet,
    ) -> Result<(Detector, TrainSummary)> {
        let (plan, fitted, [train_m, val_m, test_m]) = extract_split(docs, task, language, seed, features, providers)?;
        let fp = train_m.fingerprint();
        let cfg = hyperparameters.train_config(model, seed);
        let vy = val_m.targets();
        let trained = train(&train_m.x, &train_m.targets(), Some((&val_m.x, &vy)), &cfg, &fp)?;
        let pred = trained.predict(&test_m.x, &fp, 0.5)?;
        let test = confusion(&test_m.targets(), &pred)?;
        let detector = Detector {
            language,
            task,
            features: features.clone(),
            column_stats: Standardizer::fit(&train_m.x),
            manifest: train_m.manifest,
            vectorizer: fitted.vectorizer,
            lm: fitted.lm.map(|lm| (*lm).clone()),
            model: trained,
        };
        Ok((detector, TrainSummary { plan, test }))
    }

    /// Score one text; empty text is rejected.
    pub fn detect(&self, text: &str, providers: &ProviderSet) -> Result<Detection> {
        let body = text.replace("\r\n", "\n");
        if body.trim().is_empty() {
            return Err(Error::InvalidInput("empty document".into()));
        }
        let doc = Document {
            id: "input".into(),
            language: self.language,
            topic: String::new(),
            label: Label::Human,
            title: String::new(),
            body,
        };
        let fitted = fitted_state(self.vectorizer.clone(), self.lm.clone());
        let m = extract_matrix(&[&doc], &self.features.categories, providers, &fitted, Some(&self.manifest))?;
        let proba_ai = self.model.predict_proba(&m.x, &manifest_fingerprint(&self.manifest))?[0];
        let row = m.x.row(0);
        let mut scored: Vec<TopFeature> = self
            .manifest
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.starts_with(names::TFIDF_PREFIX) && !n.starts_with(names::EMBEDDING_MEAN_PREFIX))
            .map(|(j, n)| TopFeature {
                name: n.clone(),
                value: row[j],
                z: (row[j] - self.column_stats.mean[j]) / self.column_stats.std[j].max(STD_FLOOR),
            })
            .collect();
        // stable sort keeps manifest order among equal magnitudes
        scored.sort_by(|a, b| b.z.abs().total_cmp(&a.z.abs()));
        scored.truncate(5);
        Ok(Detection {
            proba_ai,
            label: if proba_ai >= 0.5 { self.task.ai_label() } else { Label::Human },
            top_features: scored,
        })
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MODEL_MAGIC).map_err(|e| Error::io("<detector>", e))?;
        serde_json::to_writer(&mut out, self)?;
        out.flush().map_err(|e| Error::io("<detector>", e))
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Detector> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes).map_err(|e| Error::io("<detector>", e))?;
        let body = bytes
            .strip_prefix(MODEL_MAGIC)
            .ok_or_else(|| Error::ModelFormat("missing VRD1 header".into()))?;
        let d: Detector = serde_json::from_slice(body).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if d.model.n_features != d.manifest.len() || d.model.manifest_fingerprint != manifest_fingerprint(&d.manifest) {
            return Err(Error::ModelFormat("model does not match its stored manifest".into()));
        }
        Ok(d)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Detector> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}
