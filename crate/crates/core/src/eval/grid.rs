use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::report::{CellStats, EvalReport, Outcome, ReportRow};
use super::confusion;
use crate::classifiers::{threshold_labels, train, GbdtParams, MlpParams, ModelKind, RfParams, TrainConfig};
use crate::corpus::{fingerprint_ids, make_split, CorpusFormat, Document, Language, SplitPlan, Task};
use crate::error::{Error, Result};
use crate::features::{
    assemble_matrix, common_embedding_dim, complete, extract_static, manifest, manifest_fingerprint, ActiveProviders,
    Category, FeatureMatrix, FeatureSet, FeatureVector, FittedState,
};
use crate::providers::{ProviderSet, ProvidersConfig};
use crate::textproc::TokenizedDocument;

/// Classifier settings shared by every cell of a grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub rf: RfParams,
    pub gbdt: GbdtParams,
    pub mlp: MlpParams,
}

impl Hyperparameters {
    pub fn train_config(&self, model: ModelKind, seed: u64) -> TrainConfig {
        TrainConfig {
            model,
            seed,
            rf: self.rf.clone(),
            gbdt: self.gbdt.clone(),
            mlp: self.mlp.clone(),
        }
    }

    fn json_for(&self, model: ModelKind) -> String {
        match model {
            ModelKind::Rf => serde_json::to_string(&self.rf),
            ModelKind::Gbdt => serde_json::to_string(&self.gbdt),
            ModelKind::Mlp => serde_json::to_string(&self.mlp),
        }
        .expect("parameters serialize")
    }
}

fn default_tasks() -> Vec<Task> {
    Task::ALL.to_vec()
}

fn default_languages() -> Vec<Language> {
    Language::ALL.to_vec()
}

fn default_models() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn yes() -> bool {
    true
}

/// Experiment grid configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_format: Option<CorpusFormat>,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default = "default_languages")]
    pub languages: Vec<Language>,
    #[serde(default = "FeatureSet::table_rows")]
    pub features: Vec<FeatureSet>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub providers: ProvidersConfig,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    /// Worker threads; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "yes")]
    pub write_predictions: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

fn no_duplicates<T: Ord + Clone + std::fmt::Debug>(name: &str, xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    let set: BTreeSet<T> = xs.iter().cloned().collect();
    if set.len() != xs.len() {
        return Err(Error::Config(format!("{name} lists an entry twice")));
    }
    Ok(())
}

impl GridSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GridSpec = serde_json::from_str(text).map_err(|e| Error::Config(format!("grid config: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        no_duplicates("tasks", &self.tasks)?;
        no_duplicates("languages", &self.languages)?;
        no_duplicates("features", &self.features)?;
        no_duplicates("models", &self.models)?;
        no_duplicates("seeds", &self.seeds)?;
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.hyperparameters.train_config(ModelKind::Rf, 0).validate()
    }

    /// Hash of everything that affects results; paths and thread count excluded.
    pub fn fingerprint(&self) -> String {
        let mut canon = self.clone();
        canon.corpus = None;
        canon.threads = None;
        canon.providers.cache_dir = None;
        let bytes = serde_json::to_vec(&canon).expect("spec serializes");
        hex::encode(&Sha256::digest(&bytes)[..16])
    }
}

/// What one fitting call consumed, recorded so leakage can be checked.
#[derive(Debug, Clone, PartialEq)]
pub struct FitAudit {
    pub language: Language,
    pub task: Task,
    pub seed: u64,
    /// Ids of the documents actually handed to the fitting code.
    pub fitted_ids: BTreeSet<String>,
    /// Split fingerprints stored in the fitted state.
    pub fitted_on: Vec<String>,
    pub plan: SplitPlan,
}

impl FitAudit {
    /// True if fitting saw exactly the training ids and nothing else.
    pub fn is_clean(&self) -> bool {
        let train_fp = fingerprint_ids(self.plan.train_ids.iter().map(String::as_str));
        self.fitted_ids == self.plan.train_ids
            && self.fitted_ids.is_disjoint(&self.plan.test_ids)
            && self.fitted_ids.is_disjoint(&self.plan.val_ids)
            && self.fitted_on.iter().all(|f| *f == train_fp)
    }
}

pub struct GridOutcome {
    pub report: EvalReport,
    pub audit: Vec<FitAudit>,
    pub cancelled: bool,
}

/// Split-independent data of one language.
struct LanguageData<'a> {
    docs: Vec<&'a Document>,
    tokens: Vec<TokenizedDocument>,
    vectors: Vec<FeatureVector>,
    /// Categories whose extraction failed, with the first error.
    failed: BTreeMap<Category, String>,
}

/// One (language, task, seed): the split and completed feature vectors.
struct Prepared {
    plan: SplitPlan,
    vectors: HashMap<String, FeatureVector>,
    embedding_dim: usize,
}

fn merge(into: &mut FeatureVector, from: FeatureVector) {
    into.scalars.extend(from.scalars);
    into.tfidf = into.tfidf.take().or(from.tfidf);
    into.embedding_mean = into.embedding_mean.take().or(from.embedding_mean);
    into.embedding_dist = into.embedding_dist.or(from.embedding_dist);
    into.warnings.extend(from.warnings);
}

fn prepare_language<'a>(
    docs: &'a [Document],
    language: Language,
    categories: &BTreeSet<Category>,
    providers: &ProviderSet,
) -> LanguageData<'a> {
    let docs: Vec<&Document> = docs.iter().filter(|d| d.language == language).collect();
    let tokens: Vec<TokenizedDocument> = docs.par_iter().map(|d| d.tokenize()).collect();
    let per_doc: Vec<(FeatureVector, Vec<(Category, String)>)> = docs
        .par_iter()
        .zip(&tokens)
        .map(|(doc, tok)| {
            let mut fv = FeatureVector::default();
            let mut errors = Vec::new();
            for &c in categories {
                let single: BTreeSet<Category> = [c].into_iter().collect();
                match extract_static(doc, tok, &single, providers) {
                    Ok(part) => merge(&mut fv, part),
                    Err(e) => errors.push((c, e.to_string())),
                }
            }
            (fv, errors)
        })
        .collect();
    let mut failed = BTreeMap::new();
    let mut vectors = Vec::with_capacity(per_doc.len());
    for (fv, errors) in per_doc {
        for (c, e) in errors {
            failed.entry(c).or_insert(e);
        }
        vectors.push(fv);
    }
    for (c, e) in &failed {
        log::warn!("{language}: {c:?} extraction failed: {e}");
    }
    LanguageData {
        docs,
        tokens,
        vectors,
        failed,
    }
}

fn prepare_split(
    data: &LanguageData,
    task: Task,
    language: Language,
    seed: u64,
    categories: &BTreeSet<Category>,
    providers: &ProviderSet,
) -> std::result::Result<(Prepared, FitAudit), String> {
    let owned: Vec<Document> = data.docs.iter().map(|d| (*d).clone()).collect();
    let plan = make_split(&owned, task, language, seed).map_err(|e| {
        log::warn!("{language} {task} seed {seed}: {e}");
        "insufficient-data".to_string()
    })?;
    let usable: BTreeSet<Category> = categories.difference(&data.failed.keys().copied().collect()).copied().collect();
    let train_idx: Vec<usize> = (0..data.docs.len())
        .filter(|&i| plan.train_ids.contains(&data.docs[i].id))
        .collect();
    let train_tokens: Vec<&TokenizedDocument> = train_idx.iter().map(|&i| &data.tokens[i]).collect();
    let fitted = FittedState::fit(&usable, providers, &train_tokens, &plan.train_fingerprint()).map_err(|e| {
        log::warn!("{language} {task} seed {seed}: fitting failed: {e}");
        "failed:fit".to_string()
    })?;
    let audit = FitAudit {
        language,
        task,
        seed,
        fitted_ids: train_idx.iter().map(|&i| data.docs[i].id.clone()).collect(),
        fitted_on: fitted.fitted_on().into_iter().map(str::to_string).collect(),
        plan: plan.clone(),
    };
    let mut vectors = HashMap::new();
    for (i, doc) in data.docs.iter().enumerate() {
        if !(plan.train_ids.contains(&doc.id) || plan.val_ids.contains(&doc.id) || plan.test_ids.contains(&doc.id)) {
            continue;
        }
        let mut fv = data.vectors[i].clone();
        complete(&mut fv, &data.tokens[i], &usable, &fitted).map_err(|e| {
            log::warn!("{language} {task} seed {seed}: {e}");
            "failed:extract".to_string()
        })?;
        vectors.insert(doc.id.clone(), fv);
    }
    let embedding_dim = common_embedding_dim(vectors.values()).map_err(|e| {
        log::warn!("{language} {task} seed {seed}: {e}");
        "failed:embedding".to_string()
    })?;
    Ok((
        Prepared {
            plan,
            vectors,
            embedding_dim,
        },
        audit,
    ))
}

fn matrix_for(prep: &Prepared, docs: &[&Document], ids: &BTreeSet<String>, names: &[String]) -> Result<FeatureMatrix> {
    let rows: Vec<&Document> = docs.iter().copied().filter(|d| ids.contains(&d.id)).collect();
    let vectors: Vec<&FeatureVector> = rows.iter().map(|d| &prep.vectors[&d.id]).collect();
    assemble_matrix(
        rows.iter().map(|d| d.id.clone()).collect(),
        rows.iter().map(|d| d.label).collect(),
        &vectors,
        names,
    )
}

struct CellJob<'a> {
    set: &'a FeatureSet,
    language: Language,
    lang_idx: usize,
    task: Task,
    task_idx: usize,
    model: ModelKind,
    seed: u64,
    seed_idx: usize,
}

fn preds_name(job: &CellJob) -> String {
    format!(
        "{}_{}_{}_{}_{}.csv",
        job.task.name().to_lowercase(),
        job.language.code().to_lowercase(),
        job.set.name,
        job.model.name(),
        job.seed
    )
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    job: &CellJob,
    prep: &Prepared,
    docs: &[&Document],
    active: &ActiveProviders,
    spec: &GridSpec,
    out_dir: Option<&Path>,
) -> std::result::Result<(f64, f64), String> {
    let names = manifest(&job.set.categories, active, prep.embedding_dim);
    let fail = |e: Error| {
        log::warn!("{} {} {} {} seed {}: {e}", job.language, job.task, job.set, job.model, job.seed);
        "failed:training".to_string()
    };
    let train_m = matrix_for(prep, docs, &prep.plan.train_ids, &names).map_err(fail)?;
    let val_m = matrix_for(prep, docs, &prep.plan.val_ids, &names).map_err(fail)?;
    let test_m = matrix_for(prep, docs, &prep.plan.test_ids, &names).map_err(fail)?;
    train_m.ensure_same_manifest(&val_m).map_err(fail)?;
    train_m.ensure_same_manifest(&test_m).map_err(fail)?;
    let fp = manifest_fingerprint(&names);
    let cfg = spec.hyperparameters.train_config(job.model, job.seed);
    let (vy, ty) = (val_m.targets(), test_m.targets());
    let model = train(&train_m.x, &train_m.targets(), Some((&val_m.x, &vy)), &cfg, &fp).map_err(fail)?;
    let proba = model.predict_proba(&test_m.x, &fp).map_err(fail)?;
    let pred = threshold_labels(&proba, 0.5);
    let c = confusion(&ty, &pred).map_err(fail)?;
    if let (Some(dir), true) = (out_dir, spec.write_predictions) {
        let mut text = String::from("id,label,target,proba_ai,prediction\n");
        for i in 0..test_m.ids.len() {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                test_m.ids[i],
                test_m.labels[i].name(),
                ty[i],
                proba[i],
                pred[i]
            ));
        }
        let path = dir.join("preds").join(preds_name(job));
        std::fs::write(&path, text).map_err(|e| fail(Error::io(&path, e)))?;
    }
    Ok((c.accuracy(), c.f1()))
}

/// Run every (task, language, feature set, model) cell over all seeds.
///
/// Split-dependent state is re-fitted per seed on training ids only. Cells
/// whose providers are unavailable, whose extraction failed, or that were
/// cancelled are reported as skipped; the run itself still succeeds.
pub fn run_grid(
    docs: &[Document],
    spec: &GridSpec,
    providers: &ProviderSet,
    out_dir: Option<&Path>,
    cancel: &AtomicBool,
) -> Result<GridOutcome> {
    spec.validate()?;
    if let (Some(dir), true) = (out_dir, spec.write_predictions) {
        let preds = dir.join("preds");
        std::fs::create_dir_all(&preds).map_err(|e| Error::io(&preds, e))?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_inner(docs, spec, providers, out_dir, cancel))
}

fn run_inner(
    docs: &[Document],
    spec: &GridSpec,
    providers: &ProviderSet,
    out_dir: Option<&Path>,
    cancel: &AtomicBool,
) -> Result<GridOutcome> {
    let active = ActiveProviders::of(providers);
    let active_str = providers
        .modes
        .iter()
        .map(|(k, m)| format!("{k}={m}"))
        .collect::<Vec<_>>()
        .join(";");
    let config_fp = spec.fingerprint();
    let categories: BTreeSet<Category> = spec
        .features
        .iter()
        .filter(|s| s.skip_reason(&active).is_none())
        .flat_map(|s| s.categories.iter().copied())
        .filter(|&c| active.blocking(c).is_none())
        .collect();

    let languages: Vec<LanguageData> = spec
        .languages
        .iter()
        .map(|&lang| {
            log::info!("{lang}: extracting features");
            prepare_language(docs, lang, &categories, providers)
        })
        .collect();

    let keys: Vec<(usize, usize, usize)> = (0..spec.languages.len())
        .flat_map(|l| (0..spec.tasks.len()).flat_map(move |t| (0..spec.seeds.len()).map(move |s| (l, t, s))))
        .collect();
    let prepared: Vec<std::result::Result<(Prepared, FitAudit), String>> = keys
        .par_iter()
        .map(|&(l, t, s)| {
            if cancel.load(Ordering::Relaxed) {
                return Err("cancelled".to_string());
            }
            let (lang, task, seed) = (spec.languages[l], spec.tasks[t], spec.seeds[s]);
            log::info!("{lang} {task} seed {seed}: fitting split state");
            prepare_split(&languages[l], task, lang, seed, &categories, providers)
        })
        .collect();
    let mut audit = Vec::new();
    let mut prep_of: HashMap<(usize, usize, usize), std::result::Result<&Prepared, String>> = HashMap::new();
    for (key, p) in keys.iter().zip(&prepared) {
        match p {
            Ok((prep, a)) => {
                if !a.is_clean() {
                    return Err(Error::Training(format!(
                        "fitted state for {} {} seed {} saw documents outside the training split",
                        a.language, a.task, a.seed
                    )));
                }
                audit.push(a.clone());
                prep_of.insert(*key, Ok(prep));
            }
            Err(reason) => {
                prep_of.insert(*key, Err(reason.clone()));
            }
        }
    }

    // report order: feature set, language, task, model; seeds innermost
    let mut jobs = Vec::new();
    for set in &spec.features {
        for (lang_idx, &language) in spec.languages.iter().enumerate() {
            for (task_idx, &task) in spec.tasks.iter().enumerate() {
                for &model in &spec.models {
                    for (seed_idx, &seed) in spec.seeds.iter().enumerate() {
                        jobs.push(CellJob {
                            set,
                            language,
                            lang_idx,
                            task,
                            task_idx,
                            model,
                            seed,
                            seed_idx,
                        });
                    }
                }
            }
        }
    }
    let results: Vec<std::result::Result<(f64, f64), String>> = jobs
        .par_iter()
        .map(|job| {
            if let Some(reason) = job.set.skip_reason(&active) {
                return Err(reason);
            }
            let data = &languages[job.lang_idx];
            if let Some(c) = job.set.categories.iter().find(|c| data.failed.contains_key(c)) {
                return Err(format!("failed:{}", c.name()));
            }
            let prep = prep_of[&(job.lang_idx, job.task_idx, job.seed_idx)].clone()?;
            if cancel.load(Ordering::Relaxed) {
                return Err("cancelled".to_string());
            }
            run_cell(job, prep, &data.docs, &active, spec, out_dir)
        })
        .collect();

    let mut rows = Vec::new();
    for (chunk_jobs, chunk) in jobs.chunks(spec.seeds.len()).zip(results.chunks(spec.seeds.len())) {
        let job = &chunk_jobs[0];
        let outcome = match chunk.iter().find_map(|r| r.as_ref().err()) {
            Some(reason) => Outcome::Skipped(reason.clone()),
            None => {
                let (acc, f1): (Vec<f64>, Vec<f64>) = chunk.iter().map(|r| *r.as_ref().unwrap()).unzip();
                Outcome::Done(CellStats::from_runs(acc, f1))
            }
        };
        rows.push(ReportRow {
            task: job.task,
            language: job.language,
            features: job.set.name.clone(),
            model: job.model,
            outcome,
            seeds: spec.seeds.clone(),
            active_providers: active_str.clone(),
            config_fingerprint: config_fp.clone(),
            hyperparameters: spec.hyperparameters.json_for(job.model),
        });
    }
    Ok(GridOutcome {
        report: EvalReport { rows },
        audit,
        cancelled: cancel.load(Ordering::Relaxed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_defaults_cover_the_full_table() {
        let spec = GridSpec::default();
        assert_eq!(spec.tasks.len() * spec.languages.len() * spec.features.len() * spec.models.len(), 2 * 4 * 9 * 3);
        assert_eq!(spec.seeds, vec![0, 1, 2, 3, 4]);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn spec_rejects_bad_input() {
        assert!(GridSpec::from_json(r#"{"features":["Nope"]}"#).is_err());
        assert!(GridSpec::from_json(r#"{"seeds":[]}"#).is_err());
        assert!(GridSpec::from_json(r#"{"models":["rf","rf"]}"#).is_err());
        assert!(GridSpec::from_json(r#"{"colour":"red"}"#).is_err());
        let s = GridSpec::from_json(r#"{"tasks":["generated"],"languages":["EN"],"features":["readability,semantic"]}"#)
            .unwrap();
        assert_eq!(s.features[0].categories.len(), 2);
    }

    #[test]
    fn fingerprint_ignores_paths_and_threads() {
        let a = GridSpec::default();
        let mut b = a.clone();
        b.corpus = Some("/data/x.jsonl".into());
        b.threads = Some(2);
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.seeds = vec![0];
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
