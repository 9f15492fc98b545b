use std::collections::BTreeSet;

use proptest::prelude::*;
use veridict::corpus::{Document, Label, Language};
use veridict::features::{
    complete, extract_static, fit_tfidf, grammar_error_count, names, Category, FittedState, FittedVectorizer, TFIDF_DIM,
};
use veridict::providers::{DictionaryChecker, ProviderSet};
use veridict::textproc::{LanguagePack, TokenizedDocument};

fn tokenized(body: &str) -> TokenizedDocument {
    TokenizedDocument::new(body, LanguagePack::bundled(Language::En))
}

/// Independent tf-idf: documents are lowercase words separated by single
/// spaces forming one sentence that ends with a period.
struct Oracle {
    vocabulary: Vec<String>,
    idf: Vec<f64>,
}

fn oracle_grams(doc: &str) -> Vec<String> {
    let words: Vec<&str> = doc.trim_end_matches('.').split(' ').collect();
    let mut out: Vec<String> = words.iter().map(|w| w.to_string()).collect();
    for pair in words.windows(2) {
        out.push(format!("{} {}", pair[0], pair[1]));
    }
    out
}

fn oracle_fit(docs: &[String]) -> Oracle {
    let per_doc: Vec<Vec<String>> = docs.iter().map(|d| oracle_grams(d)).collect();
    let mut candidates: Vec<String> = per_doc.iter().flatten().cloned().collect();
    candidates.sort();
    candidates.dedup();
    let df = |g: &String| per_doc.iter().filter(|grams| grams.contains(g)).count();
    // selection sort by (df desc, gram asc)
    let mut vocabulary = Vec::new();
    while !candidates.is_empty() && vocabulary.len() < TFIDF_DIM {
        let mut best = 0;
        for i in 1..candidates.len() {
            let (a, b) = (&candidates[i], &candidates[best]);
            if df(a) > df(b) || (df(a) == df(b) && a < b) {
                best = i;
            }
        }
        vocabulary.push(candidates.remove(best));
    }
    let n = docs.len() as f64;
    let idf = vocabulary.iter().map(|g| ((1.0 + n) / (1.0 + df(g) as f64)).ln() + 1.0).collect();
    Oracle { vocabulary, idf }
}

fn oracle_transform(o: &Oracle, doc: &str) -> Vec<f64> {
    let grams = oracle_grams(doc);
    let mut v = vec![0.0; TFIDF_DIM];
    for (i, g) in o.vocabulary.iter().enumerate() {
        let tf = grams.iter().filter(|x| *x == g).count() as f64;
        v[i] = tf * o.idf[i];
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

fn tiny_doc() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["ab", "cd", "ef", "gh"]), 1..6)
        .prop_map(|words| format!("{}.", words.join(" ")))
}

proptest! {
    #[test]
    fn tfidf_matches_brute_force(docs in prop::collection::vec(tiny_doc(), 1..=5), probe in tiny_doc()) {
        let tokens: Vec<TokenizedDocument> = docs.iter().map(|d| tokenized(d)).collect();
        let refs: Vec<&TokenizedDocument> = tokens.iter().collect();
        let fitted: FittedVectorizer = fit_tfidf(&refs, "fp").unwrap();
        let oracle = oracle_fit(&docs);
        prop_assert_eq!(&fitted.vocabulary, &oracle.vocabulary);
        prop_assert_eq!(&fitted.idf, &oracle.idf);
        for d in docs.iter().chain(std::iter::once(&probe)) {
            prop_assert_eq!(fitted.transform(&tokenized(d)), oracle_transform(&oracle, d));
        }
    }

    #[test]
    fn tfidf_norm_is_zero_or_one(train in prop::collection::vec("[a-z ]{0,30}\\.", 1..6), probe in "[a-z .,]{0,40}") {
        let tokens: Vec<TokenizedDocument> = train.iter().map(|d| tokenized(d)).collect();
        let refs: Vec<&TokenizedDocument> = tokens.iter().collect();
        let fitted = fit_tfidf(&refs, "fp").unwrap();
        let v = fitted.transform(&tokenized(&probe));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm.abs() < 1e-9 || (norm - 1.0).abs() < 1e-9, "norm {}", norm);
    }

    #[test]
    fn features_stay_in_range(
        body in "[A-Za-zéü'\" .,!?:;0-9\n-]{1,200}",
        title in "[A-Za-z ]{0,12}",
        language in prop::sample::select(Language::ALL.to_vec()),
    ) {
        let doc = Document {
            id: "d".into(),
            language,
            topic: "biology".into(),
            label: Label::Human,
            title,
            body: body.clone(),
        };
        let tokens = doc.tokenize();
        let categories: BTreeSet<Category> = Category::ALL.into_iter().collect();
        let providers = ProviderSet::local();
        let mut fv = extract_static(&doc, &tokens, &categories, &providers).unwrap();
        let train_doc = TokenizedDocument::new("Some training text here. More words follow.", LanguagePack::bundled(language));
        let fitted = FittedState::fit(&categories, &providers, &[&train_doc], "fp").unwrap();
        complete(&mut fv, &tokens, &categories, &fitted).unwrap();

        for (name, &v) in &fv.scalars {
            prop_assert!(v.is_finite(), "{} = {}", name, v);
            if name.ends_with("_relative") {
                prop_assert!((0.0..=1.0).contains(&v), "{} = {}", name, v);
            }
            if name.ends_with("_count") || name.ends_with("_mean") || name.ends_with("_stdev") {
                prop_assert!(v >= 0.0, "{} = {}", name, v);
            }
        }
        let get = |n: &str| fv.value(n).unwrap();
        prop_assert!((-1.0..=1.0).contains(&get(names::SENTIMENT_POLARITY)));
        prop_assert!((0.0..=1.0).contains(&get(names::SENTIMENT_SUBJECTIVITY)));
        prop_assert!((0.0..=100.0).contains(&get(names::FLESCH_READING_EASE)));
        prop_assert!((0.0..=100.0).contains(&get(names::FLESCH_KINCAID_GRADE_LEVEL)));
        prop_assert!((0.0..=2.0).contains(&get(names::EMBEDDING_DIST)));
        prop_assert!(get(names::PPL_MEAN) >= 0.0);
        let tfidf = fv.tfidf.as_ref().unwrap();
        let norm = tfidf.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm.abs() < 1e-9 || (norm - 1.0).abs() < 1e-9);
        // no active slot may be NaN or infinite
        prop_assert!(fv.select(&fv.manifest()).is_ok());
    }

    #[test]
    fn dictionary_sentences_add_no_grammar_errors(
        body in "[A-Za-z .,]{0,120}",
        picks in prop::collection::vec(0usize..50, 1..10),
        language in prop::sample::select(Language::ALL.to_vec()),
    ) {
        let pack = LanguagePack::bundled(language);
        let mut dictionary: Vec<&String> = pack
            .word_list
            .iter()
            .filter(|w| w.chars().count() >= 2 && w.chars().all(char::is_alphabetic))
            .collect();
        dictionary.sort();
        dictionary.truncate(50);
        let sentence: Vec<&str> = picks.iter().map(|&i| dictionary[i % dictionary.len()].as_str()).collect();
        let before = grammar_error_count(&body, language, &DictionaryChecker).unwrap();
        let after = grammar_error_count(&format!("{body} {}.", sentence.join(" ")), language, &DictionaryChecker).unwrap();
        prop_assert!(after <= before, "{} -> {}", before, after);
    }
}

#[test]
fn fitted_state_depends_only_on_training_documents() {
    let categories: BTreeSet<Category> = [Category::TextVector, Category::Perplexity].into_iter().collect();
    let providers = ProviderSet::local();
    let a = tokenized("The river runs fast. The market opens early.");
    let b = tokenized("A school builds new classrooms.");
    let fit_a = FittedState::fit(&categories, &providers, &[&a], "split-a").unwrap();
    let fit_b = FittedState::fit(&categories, &providers, &[&b], "split-b").unwrap();
    assert_eq!(fit_a.fitted_on(), vec!["split-a", "split-a"]);
    assert_ne!(fit_a.vectorizer, fit_b.vectorizer);
    // the probe's own words never enter the vocabulary
    let v = fit_a.vectorizer.as_ref().unwrap();
    assert!(!v.vocabulary.iter().any(|g| g.contains("classrooms")));
}
