//! Features computed from the text and the language pack alone.

use std::collections::{BTreeSet, HashSet};

use super::names::*;
use crate::textproc::{count_syllables, LanguagePack, TokenKind, TokenizedDocument};

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Population standard deviation; 0 for fewer than two values.
fn stdev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn semantic_features(doc: &TokenizedDocument, pack: &LanguagePack) -> [(&'static str, f64); 2] {
    let mut polarity = Vec::new();
    let mut subjectivity = Vec::new();
    for sentence in doc.sentences() {
        let words: Vec<String> = sentence
            .tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Word)
            .map(|t| t.key())
            .collect();
        for (i, w) in words.iter().enumerate() {
            if let Some(&p) = pack.polarity_lexicon.get(w) {
                let negated = words[i.saturating_sub(2)..i].iter().any(|prev| pack.negators.contains(prev));
                polarity.push(if negated { -p } else { p });
            }
            if let Some(&s) = pack.subjectivity_lexicon.get(w) {
                subjectivity.push(s);
            }
        }
    }
    [
        (SENTIMENT_POLARITY, mean(&polarity)),
        (SENTIMENT_SUBJECTIVITY, mean(&subjectivity)),
    ]
}

/// Count non-overlapping case-insensitive occurrences of `needle` that sit on
/// alphanumeric boundaries.
pub fn count_phrase(haystack: &str, needle: &str) -> usize {
    let needle: Vec<char> = needle.trim().to_lowercase().chars().collect();
    if needle.is_empty() {
        return 0;
    }
    let hay: Vec<char> = haystack.to_lowercase().chars().collect();
    let mut count = 0;
    let mut i = 0;
    while i + needle.len() <= hay.len() {
        let end = i + needle.len();
        let bounded_left = i == 0 || !hay[i - 1].is_alphanumeric() || !needle[0].is_alphanumeric();
        let bounded_right =
            end == hay.len() || !hay[end].is_alphanumeric() || !needle[needle.len() - 1].is_alphanumeric();
        if hay[i..end] == needle[..] && bounded_left && bounded_right {
            count += 1;
            i = end;
        } else {
            i += 1;
        }
    }
    count
}

pub fn discourse_marker_count(doc: &TokenizedDocument, pack: &LanguagePack) -> usize {
    let mut markers: Vec<&Vec<String>> = pack.discourse_markers.iter().filter(|m| !m.is_empty()).collect();
    markers.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut count = 0;
    for sentence in doc.sentences() {
        let keys: Vec<String> = sentence.tokens.iter().map(|t| t.key()).collect();
        let mut i = 0;
        while i < keys.len() {
            match markers.iter().find(|m| keys[i..].starts_with(m)) {
                Some(m) => {
                    count += 1;
                    i += m.len();
                }
                None => i += 1,
            }
        }
    }
    count
}

pub fn listlookup_features(
    doc: &TokenizedDocument,
    body: &str,
    title: &str,
    pack: &LanguagePack,
) -> [(&'static str, f64); 6] {
    let words = doc.word_count() as f64;
    let stop = doc.words().filter(|t| pack.stop_words.contains(&t.key())).count() as f64;
    let pronouns = doc.words().filter(|t| pack.personal_pronouns.contains(&t.key())).count() as f64;
    let title_hits = count_phrase(body, title) as f64;
    [
        (STOPWORD_COUNT, stop),
        (DISCOURSE_MARKER_COUNT, discourse_marker_count(doc, pack) as f64),
        (TITLE_REPETITION_COUNT, title_hits),
        (TITLE_REPETITION_RELATIVE, ratio(title_hits, words).min(1.0)),
        (PERSONAL_PRONOUN_COUNT, pronouns),
        (PERSONAL_PRONOUN_RELATIVE, ratio(pronouns, words)),
    ]
}

fn all_cased_upper(word: &str) -> bool {
    word.chars().any(char::is_uppercase) && !word.chars().any(char::is_lowercase)
}

pub fn document_features(doc: &TokenizedDocument, body: &str) -> [(&'static str, f64); 19] {
    let words_per_paragraph: Vec<f64> = doc
        .paragraphs
        .iter()
        .map(|p| p.sentences.iter().map(|s| s.word_count()).sum::<usize>() as f64)
        .collect();
    let sentences_per_paragraph: Vec<f64> = doc.paragraphs.iter().map(|p| p.sentences.len() as f64).collect();
    let words_per_sentence: Vec<f64> = doc.sentences().map(|s| s.word_count() as f64).collect();
    let uniq_per_sentence: Vec<f64> = doc
        .sentences()
        .map(|s| {
            s.tokens
                .iter()
                .filter(|t| t.kind == TokenKind::Word)
                .map(|t| t.text.to_lowercase())
                .collect::<HashSet<_>>()
                .len() as f64
        })
        .collect();
    let pos_per_sentence: Vec<f64> = doc
        .sentences()
        .map(|s| s.tokens.iter().filter_map(|t| t.pos).collect::<BTreeSet<_>>().len() as f64)
        .collect();

    let words = doc.word_count() as f64;
    let word_tokens: Vec<&str> = doc
        .tokens()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.text.as_str())
        .collect();
    let uniq = word_tokens.iter().map(|w| w.to_lowercase()).collect::<HashSet<_>>().len() as f64;
    let upper = word_tokens.iter().filter(|w| all_cased_upper(w)).count() as f64;
    let kind_count = |k: TokenKind| doc.tokens().filter(|t| t.kind == k).count() as f64;

    [
        (WORDS_PER_PARAGRAPH_MEAN, mean(&words_per_paragraph)),
        (WORDS_PER_PARAGRAPH_STDEV, stdev(&words_per_paragraph)),
        (SENTENCES_PER_PARAGRAPH_MEAN, mean(&sentences_per_paragraph)),
        (SENTENCES_PER_PARAGRAPH_STDEV, stdev(&sentences_per_paragraph)),
        (WORDS_PER_SENTENCE_MEAN, mean(&words_per_sentence)),
        (WORDS_PER_SENTENCE_STDEV, stdev(&words_per_sentence)),
        (UNIQ_WORDS_PER_SENTENCE_MEAN, mean(&uniq_per_sentence)),
        (UNIQ_WORDS_PER_SENTENCE_STDEV, stdev(&uniq_per_sentence)),
        (WORDS_COUNT, words),
        (UNIQ_WORDS_COUNT, uniq),
        (UNIQ_WORDS_RELATIVE, ratio(uniq, words)),
        (PARAGRAPH_COUNT, doc.paragraph_count() as f64),
        (SENTENCE_COUNT, doc.sentence_count() as f64),
        (PUNCTUATION_COUNT, kind_count(TokenKind::Punct)),
        (QUOTATION_COUNT, kind_count(TokenKind::Quote)),
        (CHARACTER_COUNT, body.chars().filter(|c| !c.is_whitespace()).count() as f64),
        (UPPERCASE_WORDS_RELATIVE, ratio(upper, word_tokens.len() as f64)),
        (POS_PER_SENTENCE_MEAN, mean(&pos_per_sentence)),
        (SPECIAL_CHAR_COUNT, kind_count(TokenKind::Special)),
    ]
}

/// Maximal runs of two or more consecutive space characters.
pub fn multi_blank_count(body: &str) -> usize {
    let mut runs = 0;
    let mut run = 0;
    for c in body.chars().chain(std::iter::once('\0')) {
        if c == ' ' {
            run += 1;
        } else {
            if run >= 2 {
                runs += 1;
            }
            run = 0;
        }
    }
    runs
}

pub const FRE_BASE: f64 = 206.835;
pub const FRE_WPS: f64 = 1.015;
pub const FRE_SPW: f64 = 84.6;
pub const FKGL_WPS: f64 = 0.39;
pub const FKGL_SPW: f64 = 11.8;
pub const FKGL_BASE: f64 = 15.59;

/// Raw (unclamped) Flesch Reading Ease and Flesch-Kincaid grade.
pub fn flesch(words_per_sentence: f64, syllables_per_word: f64) -> (f64, f64) {
    (
        FRE_BASE - FRE_WPS * words_per_sentence - FRE_SPW * syllables_per_word,
        FKGL_WPS * words_per_sentence + FKGL_SPW * syllables_per_word - FKGL_BASE,
    )
}

/// Returns the features and whether the document was too empty to score.
pub fn readability_features(doc: &TokenizedDocument, pack: &LanguagePack) -> ([(&'static str, f64); 2], bool) {
    let w = doc.word_count() as f64;
    let s = doc.sentence_count() as f64;
    if w == 0.0 || s == 0.0 {
        return ([(FLESCH_READING_EASE, 0.0), (FLESCH_KINCAID_GRADE_LEVEL, 0.0)], true);
    }
    let y: usize = doc
        .tokens()
        .filter(|t| t.kind == TokenKind::Word)
        .filter_map(|t| count_syllables(&t.text, pack).ok())
        .sum();
    let (fre, fkgl) = flesch(w / s, y as f64 / w);
    (
        [
            (FLESCH_READING_EASE, fre.clamp(0.0, 100.0)),
            (FLESCH_KINCAID_GRADE_LEVEL, fkgl.clamp(0.0, 100.0)),
        ],
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Language;

    fn en() -> &'static LanguagePack {
        LanguagePack::bundled(Language::En)
    }

    fn doc(text: &str) -> TokenizedDocument {
        TokenizedDocument::new(text, en())
    }

    fn get<const N: usize>(fs: &[(&'static str, f64); N], name: &str) -> f64 {
        fs.iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn semantic_examples() {
        let mut pack = en().clone();
        pack.polarity_lexicon.clear();
        pack.subjectivity_lexicon.clear();
        let none = semantic_features(&doc("zzz qqq"), &pack);
        assert_eq!((none[0].1, none[1].1), (0.0, 0.0));
        pack.polarity_lexicon.insert("good".into(), 0.7);
        pack.subjectivity_lexicon.insert("good".into(), 0.6);
        let good = semantic_features(&doc("good"), &pack);
        assert_eq!((good[0].1, good[1].1), (0.7, 0.6));
        let not_good = semantic_features(&doc("not good"), &pack);
        assert_eq!(not_good[0].1, -0.7);
        // the negator window is two preceding words
        let far = semantic_features(&doc("not very much good"), &pack);
        assert_eq!(far[0].1, 0.7);
    }

    #[test]
    fn listlookup_examples() {
        let d = doc("the cat and the dog");
        let f = listlookup_features(&d, "the cat and the dog", "", en());
        assert_eq!(get(&f, STOPWORD_COUNT), 3.0);
        assert_eq!(get(&f, TITLE_REPETITION_COUNT), 0.0);
        assert_eq!(get(&f, TITLE_REPETITION_RELATIVE), 0.0);

        let body = "Solar power is growing. Investors love solar power.";
        let f = listlookup_features(&doc(body), body, " Solar Power ", en());
        assert_eq!(get(&f, TITLE_REPETITION_COUNT), 2.0);
        assert_eq!(get(&f, TITLE_REPETITION_RELATIVE), 2.0 / 8.0);
    }

    #[test]
    fn title_matching_respects_word_boundaries() {
        assert_eq!(count_phrase("art, party, art.", "art"), 2);
        assert_eq!(count_phrase("aa aa aaa", "aa"), 2);
        assert_eq!(count_phrase("Solar-Power solar power", "solar power"), 1);
        assert_eq!(count_phrase("anything", ""), 0);
    }

    #[test]
    fn discourse_markers_longest_first() {
        let pack = en();
        // "in addition" is one marker, not "in" plus anything else
        assert_eq!(discourse_marker_count(&doc("In addition, however, it rained."), pack), 2);
        assert_eq!(discourse_marker_count(&doc("The cat sat."), pack), 0);
    }

    #[test]
    fn document_example() {
        let text = "Hello world. Hello again.";
        let f = document_features(&doc(text), text);
        assert_eq!(get(&f, WORDS_COUNT), 4.0);
        assert_eq!(get(&f, UNIQ_WORDS_COUNT), 3.0);
        assert_eq!(get(&f, SENTENCE_COUNT), 2.0);
        assert_eq!(get(&f, WORDS_PER_SENTENCE_MEAN), 2.0);
        assert_eq!(get(&f, WORDS_PER_SENTENCE_STDEV), 0.0);
        assert_eq!(get(&f, PUNCTUATION_COUNT), 2.0);
        assert_eq!(get(&f, PARAGRAPH_COUNT), 1.0);
        assert_eq!(get(&f, SENTENCES_PER_PARAGRAPH_STDEV), 0.0);
        assert_eq!(get(&f, CHARACTER_COUNT), 22.0);
        let f = document_features(&doc("NASA wins."), "NASA wins.");
        assert_eq!(get(&f, UPPERCASE_WORDS_RELATIVE), 0.5);
    }

    #[test]
    fn document_stdev_is_population() {
        let text = "One two three four. Five six.";
        let f = document_features(&doc(text), text);
        assert_eq!(get(&f, WORDS_PER_SENTENCE_MEAN), 3.0);
        assert_eq!(get(&f, WORDS_PER_SENTENCE_STDEV), 1.0);
    }

    #[test]
    fn empty_document_is_all_zero() {
        let f = document_features(&doc(""), "");
        assert!(f.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn multi_blank_example() {
        assert_eq!(multi_blank_count("a  b   c"), 2);
        assert_eq!(multi_blank_count("a b c"), 0);
        assert_eq!(multi_blank_count("trailing  "), 1);
    }

    #[test]
    fn readability_examples() {
        let (f, empty) = readability_features(&doc("The cat sat."), en());
        assert!(!empty);
        assert_eq!(f[0].1, 100.0);
        assert_eq!(f[1].1, 0.0);
        let (raw_fre, raw_fkgl) = flesch(3.0, 1.0);
        assert!((raw_fre - 119.19).abs() < 1e-9);
        assert!((raw_fkgl - -2.62).abs() < 1e-9);
        assert!((flesch(20.0, 2.0).0 - 17.335).abs() < 1e-9);
        let (_, empty) = readability_features(&doc("..."), en());
        assert!(empty);
    }
}
