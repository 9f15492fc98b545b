use super::{EmbeddingProvider, GrammarProvider, PerplexityProvider};
use crate::corpus::Language;
use crate::error::{Error, Result};
use crate::textproc::{tokenize, LanguagePack, TokenKind};

pub const DEFAULT_EMBEDDING_DIM: usize = 64;
/// Public, fixed seed of the hashed encoder.
pub const EMBEDDING_HASH_SEED: u64 = 0x5645_5249_4449_4354;

/// Scores every scoreable sentence as if drawn uniformly from a vocabulary.
#[derive(Debug, Clone, Copy)]
pub struct UniformScorer {
    pub vocabulary_size: usize,
}

impl PerplexityProvider for UniformScorer {
    fn score_perplexity(&self, sentences: &[String], _language: Language) -> Result<Vec<f64>> {
        if self.vocabulary_size == 0 {
            return Err(Error::Config("uniform scorer needs a non-empty vocabulary".into()));
        }
        Ok(vec![self.vocabulary_size as f64; sentences.len()])
    }
}

/// Counts words missing from the language's spelling dictionary.
///
/// Only Word tokens of at least two characters made purely of letters are
/// checked; the match is on the lowercased form.
#[derive(Debug, Clone, Copy, Default)]
pub struct DictionaryChecker;

impl DictionaryChecker {
    pub fn count(text: &str, pack: &LanguagePack) -> usize {
        tokenize(text)
            .iter()
            .filter(|t| t.kind == TokenKind::Word)
            .map(|t| t.text.to_lowercase())
            .filter(|w| w.chars().count() >= 2 && w.chars().all(char::is_alphabetic))
            .filter(|w| !pack.word_list.contains(w))
            .count()
    }
}

impl GrammarProvider for DictionaryChecker {
    fn check_grammar(&self, text: &str, language: Language) -> Result<usize> {
        Ok(Self::count(text, LanguagePack::bundled(language)))
    }
}

/// Sign-hashed character 3-5 grams, L2-normalized.
#[derive(Debug, Clone, Copy)]
pub struct HashedEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl Default for HashedEmbedder {
    fn default() -> Self {
        HashedEmbedder {
            dim: DEFAULT_EMBEDDING_DIM,
            seed: EMBEDDING_HASH_SEED,
        }
    }
}

impl HashedEmbedder {
    pub fn embed(&self, sentence: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let normalized: String = sentence.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        if normalized.is_empty() {
            return v;
        }
        let chars: Vec<char> = format!(" {normalized} ").chars().collect();
        let mut buf = [0u8; 4];
        for n in 3..=5 {
            for gram in chars.windows(n) {
                let mut h = FNV_OFFSET ^ self.seed;
                for c in gram {
                    for b in c.encode_utf8(&mut buf).bytes() {
                        h ^= u64::from(b);
                        h = h.wrapping_mul(FNV_PRIME);
                    }
                }
                // final avalanche so low bits depend on every byte
                h ^= h >> 33;
                h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
                h ^= h >> 33;
                let bucket = (h % self.dim as u64) as usize;
                v[bucket] += if h >> 63 == 1 { -1.0 } else { 1.0 };
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

impl EmbeddingProvider for HashedEmbedder {
    fn embed_sentences(&self, sentences: &[String], _language: Language) -> Result<Vec<Vec<f64>>> {
        Ok(sentences.iter().map(|s| self.embed(s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_scorer_is_forced() {
        let s = UniformScorer { vocabulary_size: 50 };
        let out = s
            .score_perplexity(&["a b".into(), "c".into()], Language::En)
            .unwrap();
        assert_eq!(out, vec![50.0, 50.0]);
    }

    #[test]
    fn dictionary_checker() {
        let pack = LanguagePack::bundled(Language::En);
        assert_eq!(DictionaryChecker::count("the cat sat on the mat", pack), 0);
        assert_eq!(DictionaryChecker::count("thsi cat", pack), 1);
        // single letters, numbers and hyphenated compounds are not checked
        assert_eq!(DictionaryChecker::count("x 42 qzx-vvb", pack), 0);
    }

    #[test]
    fn embedder_is_deterministic_and_normalized() {
        let e = HashedEmbedder::default();
        let a = e.embed("The cat sat on the mat.");
        let b = e.embed("The cat sat on the mat.");
        assert_eq!(a, b);
        assert_eq!(a.len(), DEFAULT_EMBEDDING_DIM);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(e.embed("   ").iter().all(|&x| x == 0.0));
        assert_ne!(a, e.embed("Completely different words here"));
    }
}
