//! The 37 stylometric features in eight categories, and matrix assembly.
//!
//! Extraction has two stages. [`extract_static`] computes everything that does
//! not depend on a split (it can be cached per document). [`complete`] then
//! adds the split-dependent parts, TF-IDF and the local language-model
//! perplexities, from a [`FittedState`] built on training documents only.

mod lexical;
mod lm;
mod provided;
mod tfidf;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Document, Label};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::providers::{PerplexitySource, ProviderKind, ProviderSet};
use crate::textproc::{LanguagePack, TokenizedDocument};

pub use lexical::{
    count_phrase, discourse_marker_count, document_features, flesch, listlookup_features, multi_blank_count,
    readability_features, semantic_features,
};
pub use lm::{BigramLm, LM_ADD_K, LM_LAMBDA};
pub use provided::{
    aifeedback_feature, aifeedback_prompt, embedding_features, grammar_error_count, parse_feedback,
    perplexity_features,
};
pub use tfidf::{fit_tfidf, grams, transform_tfidf, FittedVectorizer, TFIDF_DIM};

pub mod names {
    pub const PPL_MEAN: &str = "PPL_mean";
    pub const PPL_MAX: &str = "PPL_max";
    pub const SENTIMENT_POLARITY: &str = "sentiment_polarity";
    pub const SENTIMENT_SUBJECTIVITY: &str = "sentiment_subjectivity";
    pub const STOPWORD_COUNT: &str = "stopWord_count";
    pub const DISCOURSE_MARKER_COUNT: &str = "discourseMarker_count";
    pub const TITLE_REPETITION_COUNT: &str = "titleRepetition_count";
    pub const TITLE_REPETITION_RELATIVE: &str = "titleRepetition_relative";
    pub const PERSONAL_PRONOUN_COUNT: &str = "personalPronoun_count";
    pub const PERSONAL_PRONOUN_RELATIVE: &str = "personalPronoun_relative";
    pub const WORDS_PER_PARAGRAPH_MEAN: &str = "wordsPerParagraph_mean";
    pub const WORDS_PER_PARAGRAPH_STDEV: &str = "wordsPerParagraph_stdev";
    pub const SENTENCES_PER_PARAGRAPH_MEAN: &str = "sentencesPerParagraph_mean";
    pub const SENTENCES_PER_PARAGRAPH_STDEV: &str = "sentencesPerParagraph_stdev";
    pub const WORDS_PER_SENTENCE_MEAN: &str = "wordsPerSentence_mean";
    pub const WORDS_PER_SENTENCE_STDEV: &str = "wordsPerSentence_stdev";
    pub const UNIQ_WORDS_PER_SENTENCE_MEAN: &str = "uniqWordsPerSentence_mean";
    pub const UNIQ_WORDS_PER_SENTENCE_STDEV: &str = "uniqWordsPerSentence_stdev";
    pub const WORDS_COUNT: &str = "words_count";
    pub const UNIQ_WORDS_COUNT: &str = "uniqWords_count";
    pub const UNIQ_WORDS_RELATIVE: &str = "uniqWords_relative";
    pub const PARAGRAPH_COUNT: &str = "paragraph_count";
    pub const SENTENCE_COUNT: &str = "sentence_count";
    pub const PUNCTUATION_COUNT: &str = "punctuation_count";
    pub const QUOTATION_COUNT: &str = "quotation_count";
    pub const CHARACTER_COUNT: &str = "character_count";
    pub const UPPERCASE_WORDS_RELATIVE: &str = "uppercaseWords_relative";
    pub const POS_PER_SENTENCE_MEAN: &str = "POSPerSentence_mean";
    pub const SPECIAL_CHAR_COUNT: &str = "specialChar_count";
    pub const GRAMMAR_ERROR_COUNT: &str = "grammarError_count";
    pub const MULTI_BLANK_COUNT: &str = "multiBlank_count";
    pub const FLESCH_READING_EASE: &str = "fleschReadingEase";
    pub const FLESCH_KINCAID_GRADE_LEVEL: &str = "fleschKincaidGradeLevel";
    pub const AI_FEEDBACK: &str = "AIFeedback";
    pub const EMBEDDING_DIST: &str = "embedding_dist";
    pub const TFIDF_PREFIX: &str = "tfidf_";
    pub const EMBEDDING_MEAN_PREFIX: &str = "embedding_mean_";
}

use names::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Perplexity,
    Semantic,
    ListLookup,
    Document,
    ErrorBased,
    Readability,
    AIFeedback,
    TextVector,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Perplexity,
        Category::Semantic,
        Category::ListLookup,
        Category::Document,
        Category::ErrorBased,
        Category::Readability,
        Category::AIFeedback,
        Category::TextVector,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Perplexity => "Perplexity",
            Category::Semantic => "Semantic",
            Category::ListLookup => "ListLookup",
            Category::Document => "Document",
            Category::ErrorBased => "ErrorBased",
            Category::Readability => "Readability",
            Category::AIFeedback => "AIFeedback",
            Category::TextVector => "TextVector",
        }
    }

    /// Named scalar features; TextVector's blocks are listed by [`manifest`].
    pub fn scalar_names(self) -> &'static [&'static str] {
        match self {
            Category::Perplexity => &[PPL_MEAN, PPL_MAX],
            Category::Semantic => &[SENTIMENT_POLARITY, SENTIMENT_SUBJECTIVITY],
            Category::ListLookup => &[
                STOPWORD_COUNT,
                DISCOURSE_MARKER_COUNT,
                TITLE_REPETITION_COUNT,
                TITLE_REPETITION_RELATIVE,
                PERSONAL_PRONOUN_COUNT,
                PERSONAL_PRONOUN_RELATIVE,
            ],
            Category::Document => &[
                WORDS_PER_PARAGRAPH_MEAN,
                WORDS_PER_PARAGRAPH_STDEV,
                SENTENCES_PER_PARAGRAPH_MEAN,
                SENTENCES_PER_PARAGRAPH_STDEV,
                WORDS_PER_SENTENCE_MEAN,
                WORDS_PER_SENTENCE_STDEV,
                UNIQ_WORDS_PER_SENTENCE_MEAN,
                UNIQ_WORDS_PER_SENTENCE_STDEV,
                WORDS_COUNT,
                UNIQ_WORDS_COUNT,
                UNIQ_WORDS_RELATIVE,
                PARAGRAPH_COUNT,
                SENTENCE_COUNT,
                PUNCTUATION_COUNT,
                QUOTATION_COUNT,
                CHARACTER_COUNT,
                UPPERCASE_WORDS_RELATIVE,
                POS_PER_SENTENCE_MEAN,
                SPECIAL_CHAR_COUNT,
            ],
            Category::ErrorBased => &[GRAMMAR_ERROR_COUNT, MULTI_BLANK_COUNT],
            Category::Readability => &[FLESCH_READING_EASE, FLESCH_KINCAID_GRADE_LEVEL],
            Category::AIFeedback => &[AI_FEEDBACK],
            Category::TextVector => &[],
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown feature category {s:?}; expected one of {}",
                    Category::ALL.map(Category::name).join(", ")
                ))
            })
    }
}

/// A named set of categories, e.g. `Document` or `All`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureSet {
    pub name: String,
    pub categories: BTreeSet<Category>,
}

impl FeatureSet {
    pub fn all() -> Self {
        FeatureSet {
            name: "All".into(),
            categories: Category::ALL.into_iter().collect(),
        }
    }

    pub fn single(c: Category) -> Self {
        FeatureSet {
            name: c.name().into(),
            categories: [c].into_iter().collect(),
        }
    }

    pub fn is_all(&self) -> bool {
        self.name == "All"
    }

    /// The nine rows of the results table: every category, then All.
    pub fn table_rows() -> Vec<FeatureSet> {
        Category::ALL
            .into_iter()
            .map(FeatureSet::single)
            .chain([FeatureSet::all()])
            .collect()
    }

    /// Reason this set cannot run with `active`, if any. `All` never skips; it
    /// just drops the unavailable parts.
    pub fn skip_reason(&self, active: &ActiveProviders) -> Option<String> {
        if self.is_all() {
            return None;
        }
        self.categories
            .iter()
            .find_map(|&c| active.blocking(c).map(|k| format!("provider:{k}")))
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    /// `All`, one category name, or a comma-separated list of names.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(FeatureSet::all());
        }
        let categories = s
            .split(',')
            .map(str::parse)
            .collect::<Result<BTreeSet<Category>>>()?;
        let name = categories.iter().map(|c| c.name()).collect::<Vec<_>>().join("+");
        Ok(FeatureSet { name, categories })
    }
}

impl Serialize for FeatureSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

impl<'de> Deserialize<'de> for FeatureSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which provider-backed features can be computed in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActiveProviders {
    pub perplexity: bool,
    pub embedding: bool,
    pub grammar: bool,
    pub chat: bool,
}

impl ActiveProviders {
    pub fn all() -> Self {
        ActiveProviders {
            perplexity: true,
            embedding: true,
            grammar: true,
            chat: true,
        }
    }

    pub fn of(set: &ProviderSet) -> Self {
        ActiveProviders {
            perplexity: set.is_available(ProviderKind::Perplexity),
            embedding: set.is_available(ProviderKind::Embedding),
            grammar: set.is_available(ProviderKind::Grammar),
            chat: set.is_available(ProviderKind::Chat),
        }
    }

    /// The provider without which category `c` has no features at all.
    pub fn blocking(&self, c: Category) -> Option<ProviderKind> {
        match c {
            Category::Perplexity if !self.perplexity => Some(ProviderKind::Perplexity),
            Category::AIFeedback if !self.chat => Some(ProviderKind::Chat),
            _ => None,
        }
    }

    fn keeps(&self, name: &str) -> bool {
        match name {
            PPL_MEAN | PPL_MAX => self.perplexity,
            GRAMMAR_ERROR_COUNT => self.grammar,
            AI_FEEDBACK => self.chat,
            EMBEDDING_DIST => self.embedding,
            n if n.starts_with(EMBEDDING_MEAN_PREFIX) => self.embedding,
            _ => true,
        }
    }
}

pub fn tfidf_name(i: usize) -> String {
    format!("{TFIDF_PREFIX}{i:03}")
}

pub fn embedding_name(i: usize) -> String {
    format!("{EMBEDDING_MEAN_PREFIX}{i:02}")
}

/// Ordered feature names of `categories` in canonical order, minus features
/// whose provider is inactive.
pub fn manifest(categories: &BTreeSet<Category>, active: &ActiveProviders, embedding_dim: usize) -> Vec<String> {
    let mut out = Vec::new();
    for c in Category::ALL {
        if !categories.contains(&c) {
            continue;
        }
        out.extend(c.scalar_names().iter().map(|s| s.to_string()));
        if c == Category::TextVector {
            out.extend((0..TFIDF_DIM).map(tfidf_name));
            out.extend((0..embedding_dim).map(embedding_name));
            out.push(EMBEDDING_DIST.to_string());
        }
    }
    out.retain(|n| active.keeps(n));
    out
}

pub fn manifest_fingerprint(manifest: &[String]) -> String {
    let mut h = Sha256::new();
    for name in manifest {
        h.update(name.as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..16])
}

/// Feature values of one document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub scalars: BTreeMap<String, f64>,
    pub tfidf: Option<Vec<f64>>,
    pub embedding_mean: Option<Vec<f64>>,
    pub embedding_dist: Option<f64>,
    pub warnings: Vec<String>,
}

impl FeatureVector {
    fn put(&mut self, features: &[(&'static str, f64)]) {
        for (name, value) in features {
            self.scalars.insert(name.to_string(), *value);
        }
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.embedding_mean.as_ref().map(Vec::len)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        if let Some(v) = self.scalars.get(name) {
            return Some(*v);
        }
        if name == EMBEDDING_DIST {
            return self.embedding_dist;
        }
        if let Some(i) = name.strip_prefix(TFIDF_PREFIX).and_then(|i| i.parse::<usize>().ok()) {
            return self.tfidf.as_ref().and_then(|v| v.get(i).copied());
        }
        if let Some(i) = name.strip_prefix(EMBEDDING_MEAN_PREFIX).and_then(|i| i.parse::<usize>().ok()) {
            return self.embedding_mean.as_ref().and_then(|v| v.get(i).copied());
        }
        None
    }

    /// Names of all slots present, in canonical order.
    pub fn manifest(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in Category::ALL {
            out.extend(
                c.scalar_names()
                    .iter()
                    .filter(|n| self.scalars.contains_key(**n))
                    .map(|n| n.to_string()),
            );
        }
        if let Some(t) = &self.tfidf {
            out.extend((0..t.len()).map(tfidf_name));
        }
        if let Some(e) = &self.embedding_mean {
            out.extend((0..e.len()).map(embedding_name));
        }
        if self.embedding_dist.is_some() {
            out.push(EMBEDDING_DIST.into());
        }
        out
    }

    /// Values in `manifest` order.
    pub fn select(&self, manifest: &[String]) -> Result<Vec<f64>> {
        manifest
            .iter()
            .map(|n| match self.value(n) {
                Some(v) if v.is_finite() => Ok(v),
                Some(v) => Err(Error::InvalidInput(format!("feature {n} is not finite ({v})"))),
                None => Err(Error::Manifest(format!("feature {n} was not extracted"))),
            })
            .collect()
    }
}

/// Split-dependent state; must be fitted on training documents only.
#[derive(Debug, Clone, Default)]
pub struct FittedState {
    pub vectorizer: Option<FittedVectorizer>,
    pub lm: Option<Arc<BigramLm>>,
}

impl FittedState {
    /// Fit whatever `categories` need from `train`.
    pub fn fit(
        categories: &BTreeSet<Category>,
        providers: &ProviderSet,
        train: &[&TokenizedDocument],
        fitted_on: &str,
    ) -> Result<FittedState> {
        let mut state = FittedState::default();
        if categories.contains(&Category::TextVector) {
            state.vectorizer = Some(fit_tfidf(train, fitted_on)?);
        }
        if categories.contains(&Category::Perplexity) && matches!(providers.perplexity, PerplexitySource::LocalLm) {
            let language = train
                .first()
                .map(|d| d.language)
                .ok_or_else(|| Error::Training("no training documents".into()))?;
            state.lm = Some(Arc::new(BigramLm::fit(language, train, fitted_on)?));
        }
        Ok(state)
    }

    /// Fingerprints of the training splits the state was fitted on.
    pub fn fitted_on(&self) -> Vec<&str> {
        self.vectorizer
            .iter()
            .map(|v| v.fitted_on.as_str())
            .chain(self.lm.iter().map(|l| l.fitted_on()))
            .collect()
    }
}

/// Everything that does not depend on the split. Local-LM perplexity and
/// TF-IDF are filled in by [`complete`].
pub fn extract_static(
    doc: &Document,
    tokens: &TokenizedDocument,
    categories: &BTreeSet<Category>,
    providers: &ProviderSet,
) -> Result<FeatureVector> {
    let pack = LanguagePack::bundled(doc.language);
    let mut fv = FeatureVector::default();
    let ctx = |e: Error| match e {
        Error::Provider { .. } | Error::Protocol { .. } | Error::Config(_) => e,
        other => Error::InvalidInput(format!("document {}: {other}", doc.id)),
    };
    for &c in categories {
        match c {
            Category::Perplexity => {
                if let PerplexitySource::Provider(scorer) = &providers.perplexity {
                    let (f, empty) = perplexity_features(tokens, scorer.as_ref()).map_err(ctx)?;
                    if empty {
                        fv.warnings.push("perplexity: no scoreable sentence".into());
                    }
                    fv.put(&f);
                }
            }
            Category::Semantic => fv.put(&semantic_features(tokens, pack)),
            Category::ListLookup => fv.put(&listlookup_features(tokens, &doc.body, &doc.title, pack)),
            Category::Document => fv.put(&document_features(tokens, &doc.body)),
            Category::ErrorBased => {
                if let Some(checker) = &providers.grammar {
                    let n = grammar_error_count(&doc.body, doc.language, checker.as_ref()).map_err(ctx)?;
                    fv.put(&[(GRAMMAR_ERROR_COUNT, n)]);
                }
                fv.put(&[(MULTI_BLANK_COUNT, multi_blank_count(&doc.body) as f64)]);
            }
            Category::Readability => {
                let (f, empty) = readability_features(tokens, pack);
                if empty {
                    fv.warnings.push("readability: no words or sentences".into());
                }
                fv.put(&f);
            }
            Category::AIFeedback => {
                if let Some(oracle) = &providers.chat {
                    let v = aifeedback_feature(&doc.body, doc.language, oracle.as_ref()).map_err(ctx)?;
                    fv.put(&[(AI_FEEDBACK, v)]);
                }
            }
            Category::TextVector => {
                if let Some(embedder) = &providers.embedding {
                    let (mean, dist) = embedding_features(tokens, embedder.as_ref()).map_err(ctx)?;
                    fv.embedding_mean = Some(mean);
                    fv.embedding_dist = Some(dist);
                }
            }
        }
    }
    Ok(fv)
}

/// Add the split-dependent features to a statically extracted vector.
pub fn complete(
    fv: &mut FeatureVector,
    tokens: &TokenizedDocument,
    categories: &BTreeSet<Category>,
    fitted: &FittedState,
) -> Result<()> {
    if categories.contains(&Category::TextVector) {
        if let Some(v) = &fitted.vectorizer {
            fv.tfidf = Some(v.transform(tokens));
        }
    }
    if categories.contains(&Category::Perplexity) {
        if let Some(lm) = &fitted.lm {
            let (f, empty) = perplexity_features(tokens, lm.as_ref())?;
            if empty {
                fv.warnings.push("perplexity: no scoreable sentence".into());
            }
            fv.put(&f);
        }
    }
    Ok(())
}

/// One extracted feature matrix with its row ids, labels and column names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub x: Matrix,
    pub manifest: Vec<String>,
}

impl FeatureMatrix {
    pub fn fingerprint(&self) -> String {
        manifest_fingerprint(&self.manifest)
    }

    /// 1 for AI-written rows.
    pub fn targets(&self) -> Vec<u8> {
        self.labels.iter().map(|l| u8::from(l.is_ai())).collect()
    }

    pub fn ensure_same_manifest(&self, other: &FeatureMatrix) -> Result<()> {
        if self.manifest != other.manifest {
            return Err(Error::Manifest(format!(
                "feature manifests differ ({} vs {} columns)",
                self.manifest.len(),
                other.manifest.len()
            )));
        }
        Ok(())
    }

    /// CSV with `id`, the manifest columns, then `label`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<feature csv>", e);
        let header: Vec<&str> = std::iter::once("id")
            .chain(self.manifest.iter().map(String::as_str))
            .chain(std::iter::once("label"))
            .collect();
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut line = csv_field(id);
            for v in self.x.row(i) {
                line.push(',');
                line.push_str(&v.to_string());
            }
            line.push(',');
            line.push_str(self.labels[i].name());
            writeln!(out, "{line}").map_err(io)?;
        }
        Ok(())
    }

    pub fn write_manifest<W: Write>(&self, mut out: W) -> Result<()> {
        for name in &self.manifest {
            writeln!(out, "{name}").map_err(|e| Error::io("<manifest>", e))?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Stack feature vectors into a matrix with columns in `manifest` order.
pub fn assemble_matrix(
    ids: Vec<String>,
    labels: Vec<Label>,
    vectors: &[&FeatureVector],
    manifest: &[String],
) -> Result<FeatureMatrix> {
    if ids.len() != vectors.len() || labels.len() != vectors.len() {
        return Err(Error::InvalidInput("ids, labels and vectors differ in length".into()));
    }
    let mut data = Vec::with_capacity(vectors.len() * manifest.len());
    for (id, fv) in ids.iter().zip(vectors) {
        let row = fv.select(manifest).map_err(|e| match e {
            Error::Manifest(m) => Error::Manifest(format!("document {id}: {m}")),
            other => other,
        })?;
        data.extend(row);
    }
    Ok(FeatureMatrix {
        x: Matrix::from_vec(vectors.len(), manifest.len(), data)?,
        ids,
        labels,
        manifest: manifest.to_vec(),
    })
}

/// Embedding width shared by `vectors`, or 0 if none carries embeddings.
pub fn common_embedding_dim<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>) -> Result<usize> {
    let mut dim = None;
    for fv in vectors {
        if let Some(d) = fv.embedding_dim() {
            match dim {
                None => dim = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::Manifest(format!("embedding width changed from {prev} to {d}")))
                }
                _ => {}
            }
        }
    }
    Ok(dim.unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Language;
    use crate::providers::DEFAULT_EMBEDDING_DIM;

    fn set(cs: &[Category]) -> BTreeSet<Category> {
        cs.iter().copied().collect()
    }

    #[test]
    fn manifest_sizes() {
        let all = ActiveProviders::all();
        assert_eq!(manifest(&set(&[Category::Readability]), &all, 64).len(), 2);
        assert_eq!(manifest(&set(&[Category::Document]), &all, 64).len(), 19);
        let full = manifest(&FeatureSet::all().categories, &all, DEFAULT_EMBEDDING_DIM);
        assert_eq!(full.len(), 34 + 500 + 64 + 1);
        let no_chat = ActiveProviders { chat: false, ..all };
        assert_eq!(manifest(&FeatureSet::all().categories, &no_chat, 64).len(), 598);
        let distinct: BTreeSet<&String> = full.iter().collect();
        assert_eq!(distinct.len(), full.len());
    }

    #[test]
    fn skip_reasons() {
        let no_chat = ActiveProviders {
            chat: false,
            ..ActiveProviders::all()
        };
        assert_eq!(
            FeatureSet::single(Category::AIFeedback).skip_reason(&no_chat).as_deref(),
            Some("provider:chat")
        );
        assert_eq!(FeatureSet::all().skip_reason(&no_chat), None);
        assert_eq!(FeatureSet::single(Category::Document).skip_reason(&no_chat), None);
    }

    #[test]
    fn feature_set_parsing() {
        assert!(FeatureSet::from_str("all").unwrap().is_all());
        let s: FeatureSet = "readability,semantic".parse().unwrap();
        assert_eq!(s.name, "Semantic+Readability");
        assert!("bogus".parse::<FeatureSet>().is_err());
        assert_eq!(FeatureSet::table_rows().len(), 9);
    }

    #[test]
    fn extraction_end_to_end() {
        let doc = Document {
            id: "d1".into(),
            language: Language::En,
            topic: "science".into(),
            label: Label::AIGenerated,
            title: "Solar Power".into(),
            body: "Solar power is growing fast. However, costs remain high.\n\nSolar power will matter.".into(),
        };
        let providers = ProviderSet::local();
        let cats = FeatureSet::all().categories;
        let tokens = doc.tokenize();
        let mut fv = extract_static(&doc, &tokens, &cats, &providers).unwrap();
        assert!(fv.value(PPL_MEAN).is_none());
        let fitted = FittedState::fit(&cats, &providers, &[&tokens], "fp").unwrap();
        complete(&mut fv, &tokens, &cats, &fitted).unwrap();
        let m = manifest(&cats, &ActiveProviders::of(&providers), fv.embedding_dim().unwrap());
        assert_eq!(fv.manifest(), m);
        let fm = assemble_matrix(vec![doc.id.clone()], vec![doc.label], &[&fv], &m).unwrap();
        assert_eq!(fm.x.cols(), 598);
        assert!(fm.x.all_finite());
        assert_eq!(fv.value(TITLE_REPETITION_COUNT), Some(2.0));
        let mut csv = Vec::new();
        fm.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("id,PPL_mean,"));
        assert!(header.ends_with(",embedding_dist,label"));
        assert!(text.lines().nth(1).unwrap().ends_with(",AIGenerated"));
    }

    #[test]
    fn missing_feature_is_a_manifest_error() {
        let fv = FeatureVector::default();
        let err = assemble_matrix(vec!["x".into()], vec![Label::Human], &[&fv], &[PPL_MEAN.to_string()]).unwrap_err();
        assert!(matches!(err, Error::Manifest(_)));
    }
}
