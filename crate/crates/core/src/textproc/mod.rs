//! Deterministic, rule-based text segmentation.
//!
//! Everything downstream (corpus statistics, all feature categories) sees text
//! only through [`TokenizedDocument`], so the paragraph, sentence and word units
//! are defined exactly once, here.

mod pack;
mod pos;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::error::{Error, Result};

pub use pack::{normalize_key, LanguagePack, RESOURCE_FILES};
pub use pos::pos_tag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
    Quote,
    Special,
}

/// Coarse universal part-of-speech tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Conj,
    Num,
    Part,
    Intj,
    X,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Det => "DET",
            PosTag::Adp => "ADP",
            PosTag::Conj => "CONJ",
            PosTag::Num => "NUM",
            PosTag::Part => "PART",
            PosTag::Intj => "INTJ",
            PosTag::X => "X",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "NOUN" => PosTag::Noun,
            "VERB" => PosTag::Verb,
            "ADJ" => PosTag::Adj,
            "ADV" => PosTag::Adv,
            "PRON" => PosTag::Pron,
            "DET" => PosTag::Det,
            "ADP" => PosTag::Adp,
            "CONJ" => PosTag::Conj,
            "NUM" => PosTag::Num,
            "PART" => PosTag::Part,
            "INTJ" => PosTag::Intj,
            "X" => PosTag::X,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    pub pos: Option<PosTag>,
}

impl Token {
    fn new(text: String, kind: TokenKind) -> Self {
        Token {
            text,
            kind,
            pos: None,
        }
    }

    /// Word and Number tokens are the running words of a text.
    pub fn is_word_like(&self) -> bool {
        matches!(self.kind, TokenKind::Word | TokenKind::Number)
    }

    pub fn key(&self) -> String {
        normalize_key(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word_like())
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paragraph {
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedDocument {
    pub language: Language,
    pub paragraphs: Vec<Paragraph>,
}

impl TokenizedDocument {
    /// Segment, tokenize and POS-tag `body`.
    pub fn new(body: &str, pack: &LanguagePack) -> Self {
        let paragraphs = split_paragraphs(body)
            .into_iter()
            .map(|p| Paragraph {
                sentences: split_sentences(&p, pack)
                    .into_iter()
                    .map(|s| {
                        let mut tokens = tokenize(&s);
                        pos_tag(&mut tokens, pack);
                        Sentence { text: s, tokens }
                    })
                    .filter(|s| !s.tokens.is_empty())
                    .collect(),
            })
            .filter(|p: &Paragraph| !p.sentences.is_empty())
            .collect();
        TokenizedDocument {
            language: pack.language,
            paragraphs,
        }
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.paragraphs.iter().flat_map(|p| p.sentences.iter())
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences().flat_map(|s| s.tokens.iter())
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens().filter(|t| t.is_word_like())
    }

    pub fn paragraph_count(&self) -> usize {
        self.paragraphs.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences().count()
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

/// Split on blank lines (lines holding only whitespace); empty paragraphs are dropped.
pub fn split_paragraphs(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in body.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(current.join("\n").trim().to_string());
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join("\n").trim().to_string());
    }
    out.retain(|p| !p.is_empty());
    out
}

const TERMINATORS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 8] = ['"', '\'', '»', '”', '’', ')', ']', '}'];
const OPENERS: [char; 10] = ['"', '\'', '«', '„', '“', '‘', '(', '[', '¿', '¡'];

/// Rule-based sentence splitter.
///
/// A boundary sits after a run of `.`, `!`, `?` (plus trailing closing quotes or
/// brackets) when whitespace follows and the next character is uppercase, a
/// digit, an opening quote/bracket, or `¿`/`¡`. A lone period never ends a
/// sentence after a known abbreviation, a single letter, or a dotted number.
pub fn split_sentences(paragraph: &str, pack: &LanguagePack) -> Vec<String> {
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !TERMINATORS.contains(&c) {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && TERMINATORS.contains(&chars[i].1) {
            i += 1;
        }
        let run_end = i;
        while i < chars.len() && CLOSERS.contains(&chars[i].1) {
            i += 1;
        }
        let boundary = i;
        let mut j = i;
        while j < chars.len() && chars[j].1.is_whitespace() {
            j += 1;
        }
        if j == boundary || j >= chars.len() {
            continue;
        }
        let next = chars[j].1;
        if !(next.is_uppercase() || next.is_ascii_digit() || OPENERS.contains(&next)) {
            continue;
        }
        let lone_period = run_end - run_start == 1 && chars[run_start].1 == '.';
        if lone_period && boundary == run_end {
            let byte = chars[run_start].0;
            let before = preceding_token(&paragraph[..byte]);
            if is_non_terminal(before, pack) {
                continue;
            }
        }
        let end_byte = if boundary < chars.len() {
            chars[boundary].0
        } else {
            paragraph.len()
        };
        let sentence = paragraph[start..end_byte].trim();
        if !sentence.is_empty() {
            out.push(sentence.to_string());
        }
        start = chars[j].0;
        i = j;
    }
    let tail = paragraph[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

fn preceding_token(prefix: &str) -> &str {
    let start = prefix
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    prefix[start..].trim_start_matches(|c: char| OPENERS.contains(&c))
}

fn is_non_terminal(token: &str, pack: &LanguagePack) -> bool {
    if token.is_empty() {
        return false;
    }
    let lower = token.to_lowercase();
    if pack.abbreviations.contains(&lower) {
        return true;
    }
    let mut letters = token.chars();
    if let (Some(c), None) = (letters.next(), letters.next()) {
        if c.is_alphabetic() {
            return true;
        }
    }
    // "1." or "2.3." style enumerations; longer bare numbers (years) still end sentences
    let numeric = token.chars().all(|c| c.is_ascii_digit() || c == '.')
        && token.chars().any(|c| c.is_ascii_digit());
    numeric && (token.contains('.') || token.len() <= 2)
}

const PUNCT: [char; 13] = ['.', ',', ';', ':', '!', '?', '¿', '¡', '—', '–', '-', '…', '‐'];
const QUOTES: [char; 9] = ['"', '\'', '«', '»', '„', '“', '”', '‘', '’'];
const JOINERS: [char; 4] = ['\'', '’', '-', '‐'];

/// Split a sentence into tokens.
///
/// Words are maximal letter runs, possibly joined by an internal apostrophe or
/// hyphen; numbers are digit runs with internal `.`/`,`; every other
/// non-whitespace character is a single Punct, Quote or Special token.
pub fn tokenize(sentence: &str) -> Vec<Token> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphabetic() {
            let start = i;
            i += 1;
            loop {
                if i < chars.len() && chars[i].is_alphabetic() {
                    i += 1;
                } else if i + 1 < chars.len()
                    && JOINERS.contains(&chars[i])
                    && chars[i + 1].is_alphabetic()
                {
                    i += 2;
                } else {
                    break;
                }
            }
            tokens.push(Token::new(chars[start..i].iter().collect(), TokenKind::Word));
        } else if c.is_ascii_digit() {
            let start = i;
            i += 1;
            loop {
                if i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                } else if i + 1 < chars.len()
                    && (chars[i] == '.' || chars[i] == ',')
                    && chars[i + 1].is_ascii_digit()
                {
                    i += 2;
                } else {
                    break;
                }
            }
            tokens.push(Token::new(chars[start..i].iter().collect(), TokenKind::Number));
        } else {
            let kind = if PUNCT.contains(&c) {
                TokenKind::Punct
            } else if QUOTES.contains(&c) {
                TokenKind::Quote
            } else {
                TokenKind::Special
            };
            tokens.push(Token::new(c.to_string(), kind));
            i += 1;
        }
    }
    tokens
}

/// Count vowel groups using the pack's vowel set.
///
/// English additionally drops a final silent `e` (but not in `-le` endings).
/// The result is at least 1.
pub fn count_syllables(word: &str, pack: &LanguagePack) -> Result<usize> {
    if !word.chars().any(char::is_alphabetic) {
        return Err(Error::InvalidInput(format!("{word:?} contains no letters")));
    }
    let lower: Vec<char> = word.to_lowercase().chars().collect();
    let is_vowel = |c: &char| pack.vowel_set.contains(c);
    let mut groups = 0usize;
    let mut prev = false;
    for c in &lower {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    if pack.language == Language::En {
        let n = lower.len();
        let silent_e = n >= 2
            && lower[n - 1] == 'e'
            && !is_vowel(&lower[n - 2])
            && !(lower[n - 2] == 'l' && n >= 3 && !is_vowel(&lower[n - 3]));
        if silent_e {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn en() -> &'static LanguagePack {
        LanguagePack::bundled(Language::En)
    }

    fn kinds(tokens: &[Token]) -> Vec<TokenKind> {
        tokens.iter().map(|t| t.kind).collect()
    }

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn paragraphs_split_on_blank_lines() {
        assert_eq!(split_paragraphs("A.\n\nB."), vec!["A.", "B."]);
        assert_eq!(split_paragraphs("A.\n \n\nB."), vec!["A.", "B."]);
        assert_eq!(split_paragraphs("A."), vec!["A."]);
        assert!(split_paragraphs("  \n\n ").is_empty());
        assert_eq!(split_paragraphs("line one\nline two"), vec!["line one\nline two"]);
    }

    #[test]
    fn sentences_basic() {
        assert_eq!(split_sentences("I ran. He sat.", en()), vec!["I ran.", "He sat."]);
        assert_eq!(split_sentences("Dr. Smith ran.", en()), vec!["Dr. Smith ran."]);
        let es = LanguagePack::bundled(Language::Es);
        assert_eq!(split_sentences("¿Qué? Sí.", es), vec!["¿Qué?", "Sí."]);
    }

    #[test]
    fn sentences_edge_cases() {
        // lowercase continuation is not a boundary
        assert_eq!(split_sentences("It costs 5 p. per item.", en()).len(), 1);
        // single initials
        assert_eq!(split_sentences("J. Smith wrote it.", en()).len(), 1);
        // enumerations
        assert_eq!(split_sentences("See 2. Then go.", en()).len(), 1);
        // closing quote after terminator
        assert_eq!(
            split_sentences("He said \"stop.\" Then left.", en()),
            vec!["He said \"stop.\"", "Then left."]
        );
        assert_eq!(split_sentences("Wait?! Yes.", en()), vec!["Wait?!", "Yes."]);
        assert_eq!(split_sentences("In 1990. 2000 came.", en()).len(), 2);
        let de = LanguagePack::bundled(Language::De);
        assert_eq!(split_sentences("Das ist z.B. Obst. Gut.", de).len(), 2);
    }

    #[test]
    fn tokenize_examples() {
        let t = tokenize("L'art, vite!");
        assert_eq!(texts(&t), vec!["L'art", ",", "vite", "!"]);
        assert_eq!(
            kinds(&t),
            vec![TokenKind::Word, TokenKind::Punct, TokenKind::Word, TokenKind::Punct]
        );
        let t = tokenize("3.14 m²");
        assert_eq!(texts(&t), vec!["3.14", "m", "²"]);
        assert_eq!(kinds(&t), vec![TokenKind::Number, TokenKind::Word, TokenKind::Special]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_compounds_and_quotes() {
        let t = tokenize("«well-known» 'x' 1,000.");
        assert_eq!(texts(&t), vec!["«", "well-known", "»", "'", "x", "'", "1,000", "."]);
        assert_eq!(kinds(&t)[0], TokenKind::Quote);
        assert_eq!(kinds(&t)[6], TokenKind::Number);
        let t = tokenize("end- of");
        assert_eq!(texts(&t), vec!["end", "-", "of"]);
    }

    #[test]
    fn syllables() {
        assert_eq!(count_syllables("cat", en()).unwrap(), 1);
        assert_eq!(count_syllables("table", en()).unwrap(), 2);
        assert_eq!(count_syllables("make", en()).unwrap(), 1);
        assert_eq!(count_syllables("the", en()).unwrap(), 1);
        assert_eq!(count_syllables("rhythm", en()).unwrap(), 1);
        let de = LanguagePack::bundled(Language::De);
        assert_eq!(count_syllables("Straße", de).unwrap(), 2);
        let fr = LanguagePack::bundled(Language::Fr);
        assert_eq!(count_syllables("été", fr).unwrap(), 2);
        assert!(count_syllables("123", en()).is_err());
        assert!(count_syllables("", en()).is_err());
    }

    #[test]
    fn document_units() {
        let doc = TokenizedDocument::new("A b.\n\nC d.", en());
        assert_eq!(doc.paragraph_count(), 2);
        assert_eq!(doc.sentence_count(), 2);
        assert_eq!(doc.word_count(), 4);
    }

    proptest! {
        #[test]
        fn tokens_cover_every_non_whitespace_char(s in "\\PC{0,60}") {
            let tokens = tokenize(&s);
            let covered: String = tokens.iter().map(|t| t.text.as_str()).collect();
            let expected: String = s.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(covered, expected);
        }

        #[test]
        fn tokenize_is_idempotent(s in "[a-zA-Zéß0-9 .,;:!?'\"«»\\-²%]{0,60}") {
            let tokens = tokenize(&s);
            let joined = tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(tokenize(&joined), tokens);
        }

        #[test]
        fn syllables_at_least_one(w in "[a-zäöüéß]{1,15}") {
            for lang in Language::ALL {
                prop_assert!(count_syllables(&w, LanguagePack::bundled(lang)).unwrap() >= 1);
            }
        }

        #[test]
        fn every_word_gets_a_tag(s in "[A-Za-zÄÖÜäöü0-9 ,.]{0,80}") {
            for lang in Language::ALL {
                let mut tokens = tokenize(&s);
                pos_tag(&mut tokens, LanguagePack::bundled(lang));
                for t in &tokens {
                    prop_assert_eq!(t.pos.is_some(), t.is_word_like());
                }
            }
        }
    }
}
