use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::error::{Error, Result};
use crate::providers::PerplexityProvider;
use crate::textproc::{tokenize, TokenizedDocument};

pub const LM_LAMBDA: f64 = 0.7;
pub const LM_ADD_K: f64 = 0.1;

const BOS: u32 = 0;
const UNK: u32 = 1;

/// Interpolated add-k word bigram model.
///
/// `p(w|v) = λ·(c(v,w)+k)/(c(v·)+k|V|) + (1−λ)·(c(w)+k)/(N+k|V|)` where `|V|`
/// counts the training types plus one UNK type. Every sentence starts from a
/// BOS context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "LmData", try_from = "LmData")]
pub struct BigramLm {
    language: Language,
    ids: HashMap<String, u32>,
    unigram: Vec<u64>,
    context: HashMap<u32, u64>,
    bigram: HashMap<(u32, u32), u64>,
    total: u64,
    fitted_on: String,
}

impl BigramLm {
    /// Fit on the word tokens of `docs`; `fitted_on` names the training split.
    pub fn fit(language: Language, docs: &[&TokenizedDocument], fitted_on: &str) -> Result<Self> {
        let mut lm = BigramLm {
            language,
            ids: HashMap::new(),
            unigram: vec![0, 0],
            context: HashMap::new(),
            bigram: HashMap::new(),
            total: 0,
            fitted_on: fitted_on.to_string(),
        };
        for doc in docs {
            for sentence in doc.sentences() {
                let mut prev = BOS;
                for token in sentence.words() {
                    let next_id = lm.ids.len() as u32 + 2;
                    let id = *lm.ids.entry(token.key()).or_insert(next_id);
                    if id as usize == lm.unigram.len() {
                        lm.unigram.push(0);
                    }
                    lm.unigram[id as usize] += 1;
                    lm.total += 1;
                    *lm.context.entry(prev).or_default() += 1;
                    *lm.bigram.entry((prev, id)).or_default() += 1;
                    prev = id;
                }
            }
        }
        if lm.total == 0 {
            return Err(Error::Training("language model training text has no words".into()));
        }
        Ok(lm)
    }

    pub fn fitted_on(&self) -> &str {
        &self.fitted_on
    }

    /// Types including UNK.
    pub fn vocabulary_size(&self) -> usize {
        self.ids.len() + 1
    }

    fn prob(&self, prev: u32, word: u32) -> f64 {
        let v = self.vocabulary_size() as f64;
        let uni = (self.unigram[word as usize] as f64 + LM_ADD_K) / (self.total as f64 + LM_ADD_K * v);
        let ctx = self.context.get(&prev).copied().unwrap_or(0) as f64;
        let pair = self.bigram.get(&(prev, word)).copied().unwrap_or(0) as f64;
        let bi = (pair + LM_ADD_K) / (ctx + LM_ADD_K * v);
        LM_LAMBDA * bi + (1.0 - LM_LAMBDA) * uni
    }

    /// Perplexity of a sequence of word keys, or `None` when it is empty.
    pub fn perplexity_of(&self, words: &[String]) -> Option<f64> {
        if words.is_empty() {
            return None;
        }
        let mut prev = BOS;
        let mut log_sum = 0.0;
        for w in words {
            let id = self.ids.get(w).copied().unwrap_or(UNK);
            log_sum += self.prob(prev, id).ln();
            prev = id;
        }
        Some((-log_sum / words.len() as f64).exp())
    }
}

/// Serialized form with sorted tables, so saved models are byte-stable.
#[derive(Serialize, Deserialize)]
struct LmData {
    language: Language,
    /// Word of id `i + 2`.
    words: Vec<String>,
    unigram: Vec<u64>,
    context: Vec<(u32, u64)>,
    bigram: Vec<(u32, u32, u64)>,
    total: u64,
    fitted_on: String,
}

impl From<BigramLm> for LmData {
    fn from(lm: BigramLm) -> Self {
        let mut words = vec![String::new(); lm.ids.len()];
        for (w, id) in lm.ids {
            words[id as usize - 2] = w;
        }
        let mut context: Vec<(u32, u64)> = lm.context.into_iter().collect();
        context.sort_unstable();
        let mut bigram: Vec<(u32, u32, u64)> = lm.bigram.into_iter().map(|((a, b), c)| (a, b, c)).collect();
        bigram.sort_unstable();
        LmData {
            language: lm.language,
            words,
            unigram: lm.unigram,
            context,
            bigram,
            total: lm.total,
            fitted_on: lm.fitted_on,
        }
    }
}

impl TryFrom<LmData> for BigramLm {
    type Error = String;

    fn try_from(d: LmData) -> std::result::Result<Self, String> {
        if d.unigram.len() != d.words.len() + 2 {
            return Err("language model tables disagree in size".into());
        }
        let n = d.unigram.len() as u32;
        if d.bigram.iter().any(|&(a, b, _)| a >= n || b >= n) || d.context.iter().any(|&(a, _)| a >= n) {
            return Err("language model references an unknown word id".into());
        }
        Ok(BigramLm {
            language: d.language,
            ids: d.words.into_iter().enumerate().map(|(i, w)| (w, i as u32 + 2)).collect(),
            unigram: d.unigram,
            context: d.context.into_iter().collect(),
            bigram: d.bigram.into_iter().map(|(a, b, c)| ((a, b), c)).collect(),
            total: d.total,
            fitted_on: d.fitted_on,
        })
    }
}

impl PerplexityProvider for BigramLm {
    fn score_perplexity(&self, sentences: &[String], language: Language) -> Result<Vec<f64>> {
        if language != self.language {
            return Err(Error::Config(format!(
                "language model fitted for {} cannot score {language}",
                self.language
            )));
        }
        sentences
            .iter()
            .map(|s| {
                let words: Vec<String> = tokenize(s).iter().filter(|t| t.is_word_like()).map(|t| t.key()).collect();
                self.perplexity_of(&words)
                    .ok_or_else(|| Error::InvalidInput(format!("sentence {s:?} has no words to score")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::LanguagePack;

    fn doc(text: &str) -> TokenizedDocument {
        TokenizedDocument::new(text, LanguagePack::bundled(Language::En))
    }

    fn keys(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn matches_hand_computed_probabilities() {
        // tokens: a b a ; V = {a, b, UNK} = 3, N = 3
        let d = doc("a b a.");
        let lm = BigramLm::fit(Language::En, &[&d], "t").unwrap();
        let (k, l, v, n) = (LM_ADD_K, LM_LAMBDA, 3.0, 3.0);
        let uni = |c: f64| (c + k) / (n + k * v);
        let bi = |pair: f64, ctx: f64| (pair + k) / (ctx + k * v);
        // p(a|BOS) p(b|a)
        let p1 = l * bi(1.0, 1.0) + (1.0 - l) * uni(2.0);
        let p2 = l * bi(1.0, 1.0) + (1.0 - l) * uni(1.0);
        let expected = (-(p1.ln() + p2.ln()) / 2.0).exp();
        let got = lm.perplexity_of(&keys("a b")).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        // unseen word maps to UNK with zero counts
        let p_unk = l * bi(0.0, 1.0) + (1.0 - l) * uni(0.0);
        let got = lm.perplexity_of(&keys("zzz")).unwrap();
        assert!((got - 1.0 / p_unk).abs() < 1e-9);
    }

    #[test]
    fn training_sentence_beats_shuffled() {
        let train = doc("The quick brown fox jumps over the lazy dog near the river bank today.\n\n\
                         Scientists measured the river flow every morning for a whole year.");
        let lm = BigramLm::fit(Language::En, &[&train], "t").unwrap();
        let seen = "The quick brown fox jumps over the lazy dog near the river bank today.".to_string();
        let shuffled = "dog river the today lazy bank brown near fox over quick jumps the The.".to_string();
        let ppl = lm.score_perplexity(&[seen, shuffled], Language::En).unwrap();
        assert!(ppl[0] < ppl[1], "{ppl:?}");
    }

    #[test]
    fn empty_training_and_wrong_language() {
        let d = doc("!!!");
        assert!(BigramLm::fit(Language::En, &[&d], "t").is_err());
        let lm = BigramLm::fit(Language::En, &[&doc("a b.")], "t").unwrap();
        assert!(lm.score_perplexity(&["a".into()], Language::De).is_err());
    }

    #[test]
    fn serde_round_trip_is_exact_and_stable() {
        let d = doc("The cat sat. The dog sat on the mat.");
        let lm = BigramLm::fit(Language::En, &[&d], "t").unwrap();
        let json = serde_json::to_string(&lm).unwrap();
        let back: BigramLm = serde_json::from_str(&json).unwrap();
        assert_eq!(back, lm);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
