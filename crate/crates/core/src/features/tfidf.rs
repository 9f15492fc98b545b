use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::TokenizedDocument;

pub const TFIDF_DIM: usize = 500;

/// Vocabulary and IDF weights learned on one training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedVectorizer {
    /// At most [`TFIDF_DIM`] grams, by descending document frequency then lexicographically.
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub fitted_on: String,
}

/// Lowercased 1- and 2-grams of word tokens; bigrams stay inside a sentence.
pub fn grams(doc: &TokenizedDocument) -> Vec<String> {
    let mut out = Vec::new();
    for sentence in doc.sentences() {
        let words: Vec<String> = sentence.words().map(|t| t.key()).collect();
        for (i, w) in words.iter().enumerate() {
            out.push(w.clone());
            if let Some(next) = words.get(i + 1) {
                out.push(format!("{w} {next}"));
            }
        }
    }
    out
}

pub fn fit_tfidf(docs: &[&TokenizedDocument], fitted_on: &str) -> Result<FittedVectorizer> {
    if docs.is_empty() {
        return Err(Error::Training("TF-IDF needs at least one training document".into()));
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in docs {
        let unique: BTreeSet<String> = grams(doc).into_iter().collect();
        for g in unique {
            *df.entry(g).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(TFIDF_DIM);
    let n = docs.len() as f64;
    let idf = ranked
        .iter()
        .map(|(_, d)| ((1.0 + n) / (1.0 + *d as f64)).ln() + 1.0)
        .collect();
    Ok(FittedVectorizer {
        vocabulary: ranked.into_iter().map(|(g, _)| g).collect(),
        idf,
        fitted_on: fitted_on.to_string(),
    })
}

impl FittedVectorizer {
    /// Always [`TFIDF_DIM`] wide; slots past the vocabulary stay 0.
    pub fn transform(&self, doc: &TokenizedDocument) -> Vec<f64> {
        let index: HashMap<&str, usize> = self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, g)| (g.as_str(), i))
            .collect();
        let mut v = vec![0.0; TFIDF_DIM];
        for g in grams(doc) {
            if let Some(&i) = index.get(g.as_str()) {
                v[i] += 1.0;
            }
        }
        for (x, idf) in v.iter_mut().zip(&self.idf) {
            *x *= idf;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

pub fn transform_tfidf(doc: &TokenizedDocument, v: &FittedVectorizer) -> Vec<f64> {
    v.transform(doc)
}
