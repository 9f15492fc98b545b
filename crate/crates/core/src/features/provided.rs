//! Features that go through a provider.

use super::names::*;
use crate::corpus::Language;
use crate::error::{Error, Result};
use crate::providers::{ChatFeedbackProvider, EmbeddingProvider, GrammarProvider, PerplexityProvider};
use crate::textproc::{tokenize, TokenKind, TokenizedDocument};

/// Returns `[mean, max]` and whether every sentence had to be skipped.
pub fn perplexity_features(
    doc: &TokenizedDocument,
    scorer: &dyn PerplexityProvider,
) -> Result<([(&'static str, f64); 2], bool)> {
    let sentences: Vec<String> = doc
        .sentences()
        .filter(|s| s.word_count() > 0)
        .map(|s| s.text.clone())
        .collect();
    if sentences.is_empty() {
        return Ok(([(PPL_MEAN, 0.0), (PPL_MAX, 0.0)], true));
    }
    let ppl = scorer.score_perplexity(&sentences, doc.language)?;
    if ppl.len() != sentences.len() || ppl.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::InvalidInput(
            "perplexity scorer returned invalid values".into(),
        ));
    }
    let mean = ppl.iter().sum::<f64>() / ppl.len() as f64;
    let max = ppl.iter().copied().fold(f64::MIN, f64::max);
    Ok(([(PPL_MEAN, mean), (PPL_MAX, max)], false))
}

pub fn grammar_error_count(body: &str, language: Language, checker: &dyn GrammarProvider) -> Result<f64> {
    Ok(checker.check_grammar(body, language)? as f64)
}

pub fn aifeedback_prompt(language: Language) -> &'static str {
    match language {
        Language::En => "Was the following text generated by ChatGPT?",
        Language::Fr => "Le texte suivant a-t-il été généré par ChatGPT?",
        Language::De => "Wurde der folgende Text von ChatGPT generiert?",
        Language::Es => "¿El siguiente texto fue generado por ChatGPT?",
    }
}

fn fold_accents(s: &str) -> String {
    s.to_lowercase()
        .chars()
        .map(|c| match c {
            'á' | 'à' | 'â' | 'ä' | 'ã' => 'a',
            'é' | 'è' | 'ê' | 'ë' => 'e',
            'í' | 'ì' | 'î' | 'ï' => 'i',
            'ó' | 'ò' | 'ô' | 'ö' | 'õ' => 'o',
            'ú' | 'ù' | 'û' | 'ü' => 'u',
            'ñ' => 'n',
            'ç' => 'c',
            other => other,
        })
        .collect()
}

/// 1.0 if an affirmative word comes first among the first five words of the
/// reply, 0.0 if a negative one does, 0.5 otherwise.
pub fn parse_feedback(reply: &str) -> f64 {
    for token in tokenize(reply).iter().filter(|t| t.kind == TokenKind::Word).take(5) {
        match fold_accents(&token.text).as_str() {
            "yes" | "oui" | "ja" | "si" => return 1.0,
            "no" | "non" | "nein" => return 0.0,
            _ => {}
        }
    }
    0.5
}

pub fn aifeedback_feature(body: &str, language: Language, oracle: &dyn ChatFeedbackProvider) -> Result<f64> {
    let reply = oracle.ask_chat(aifeedback_prompt(language), body, language)?;
    Ok(parse_feedback(&reply))
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Componentwise mean sentence vector and mean pairwise cosine distance.
pub fn embedding_features(doc: &TokenizedDocument, embedder: &dyn EmbeddingProvider) -> Result<(Vec<f64>, f64)> {
    let sentences: Vec<String> = doc.sentences().map(|s| s.text.clone()).collect();
    if sentences.is_empty() {
        // width is unknown without a sentence; ask the embedder for one
        let probe = embedder.embed_sentences(&[String::new()], doc.language)?;
        let dim = probe.first().map_or(0, Vec::len);
        return Ok((vec![0.0; dim], 0.0));
    }
    let vectors = embedder.embed_sentences(&sentences, doc.language)?;
    let dim = vectors.first().map_or(0, Vec::len);
    if vectors.len() != sentences.len() || dim == 0 || vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidInput("embedder returned ragged vectors".into()));
    }
    let mut mean = vec![0.0; dim];
    for v in &vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= vectors.len() as f64);
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            total += 1.0 - cosine(&vectors[i], &vectors[j]);
            pairs += 1;
        }
    }
    let dist = if pairs == 0 { 0.0 } else { total / pairs as f64 };
    Ok((mean, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::{HashedEmbedder, UniformScorer};
    use crate::textproc::LanguagePack;

    fn doc(text: &str) -> TokenizedDocument {
        TokenizedDocument::new(text, LanguagePack::bundled(Language::En))
    }

    struct Fixed(Vec<f64>);

    impl PerplexityProvider for Fixed {
        fn score_perplexity(&self, s: &[String], _: Language) -> Result<Vec<f64>> {
            assert_eq!(s.len(), self.0.len());
            Ok(self.0.clone())
        }
    }

    #[test]
    fn perplexity_examples() {
        let d = doc("One sentence here. Another one there.");
        let (f, empty) = perplexity_features(&d, &UniformScorer { vocabulary_size: 100 }).unwrap();
        assert!(!empty);
        assert_eq!((f[0].1, f[1].1), (100.0, 100.0));
        let (f, _) = perplexity_features(&d, &Fixed(vec![10.0, 30.0])).unwrap();
        assert_eq!((f[0].1, f[1].1), (20.0, 30.0));
        let (f, empty) = perplexity_features(&doc("?!"), &Fixed(vec![])).unwrap();
        assert!(empty);
        assert_eq!((f[0].1, f[1].1), (0.0, 0.0));
    }

    #[test]
    fn feedback_mapping() {
        assert_eq!(parse_feedback("Yes, this text appears to be generated."), 1.0);
        assert_eq!(parse_feedback("Nein, dieser Text wurde von einem Menschen geschrieben."), 0.0);
        assert_eq!(parse_feedback("Es ist unklar, ob der Text generiert wurde."), 0.5);
        assert_eq!(parse_feedback("SÍ, el texto fue generado."), 1.0);
        assert_eq!(parse_feedback("I cannot really tell whether yes or no."), 0.5);
        assert_eq!(parse_feedback("Non."), 0.0);
    }

    struct Stub(Vec<Vec<f64>>);

    impl EmbeddingProvider for Stub {
        fn embed_sentences(&self, _: &[String], _: Language) -> Result<Vec<Vec<f64>>> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn embedding_examples() {
        let e = HashedEmbedder::default();
        let (mean, dist) = embedding_features(&doc("Only one sentence."), &e).unwrap();
        assert_eq!(dist, 0.0);
        assert_eq!(mean.len(), 64);
        let (_, dist) = embedding_features(&doc("Same words here. Same words here."), &e).unwrap();
        assert!(dist.abs() < 1e-12);
        let stub = Stub(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let (mean, dist) = embedding_features(&doc("First. Second."), &stub).unwrap();
        assert_eq!(dist, 1.0);
        assert_eq!(mean, vec![0.5, 0.5]);
    }
}
