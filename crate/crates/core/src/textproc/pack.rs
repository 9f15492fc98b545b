//! Per-language word lists and lexicons.
//!
//! Packs ship under `resources/<lang>/` and are compiled into the library, so
//! [`LanguagePack::bundled`] never touches the filesystem. A pack can also be
//! read from a directory with the same layout via [`LanguagePack::from_dir`].

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use super::PosTag;
use crate::corpus::Language;
use crate::error::{Error, Result};

/// File names every pack directory must contain.
pub const RESOURCE_FILES: [&str; 10] = [
    "stopwords.txt",
    "discourse.txt",
    "pronouns.txt",
    "negators.txt",
    "polarity.tsv",
    "subjectivity.tsv",
    "words.txt",
    "abbrev.txt",
    "pos.tsv",
    "vowels.txt",
];

#[derive(Debug, Clone)]
pub struct LanguagePack {
    pub language: Language,
    pub stop_words: HashSet<String>,
    /// Markers stored as lowercase token sequences; multiword markers have len > 1.
    pub discourse_markers: Vec<Vec<String>>,
    pub personal_pronouns: HashSet<String>,
    pub negators: HashSet<String>,
    pub polarity_lexicon: HashMap<String, f64>,
    pub subjectivity_lexicon: HashMap<String, f64>,
    pub word_list: HashSet<String>,
    pub abbreviations: HashSet<String>,
    pub pos_lexicon: HashMap<String, PosTag>,
    pub vowel_set: HashSet<char>,
    /// SHA-256 over the raw resource files, in [`RESOURCE_FILES`] order.
    pub version: String,
}

macro_rules! bundled_files {
    ($lang:literal) => {
        [
            include_str!(concat!("../../../../resources/", $lang, "/stopwords.txt")),
            include_str!(concat!("../../../../resources/", $lang, "/discourse.txt")),
            include_str!(concat!("../../../../resources/", $lang, "/pronouns.txt")),
            include_str!(concat!("../../../../resources/", $lang, "/negators.txt")),
            include_str!(concat!("../../../../resources/", $lang, "/polarity.tsv")),
            include_str!(concat!("../../../../resources/", $lang, "/subjectivity.tsv")),
            include_str!(concat!("../../../../resources/", $lang, "/words.txt")),
            include_str!(concat!("../../../../resources/", $lang, "/abbrev.txt")),
            include_str!(concat!("../../../../resources/", $lang, "/pos.tsv")),
            include_str!(concat!("../../../../resources/", $lang, "/vowels.txt")),
        ]
    };
}

static EN: OnceLock<LanguagePack> = OnceLock::new();
static FR: OnceLock<LanguagePack> = OnceLock::new();
static DE: OnceLock<LanguagePack> = OnceLock::new();
static ES: OnceLock<LanguagePack> = OnceLock::new();

impl LanguagePack {
    /// The compiled-in pack for `language`, parsed once per process.
    pub fn bundled(language: Language) -> &'static LanguagePack {
        let build = |files: [&str; 10]| {
            LanguagePack::parse(language, &files, "bundled")
                .expect("bundled language resources are well-formed")
        };
        match language {
            Language::En => EN.get_or_init(|| build(bundled_files!("en"))),
            Language::Fr => FR.get_or_init(|| build(bundled_files!("fr"))),
            Language::De => DE.get_or_init(|| build(bundled_files!("de"))),
            Language::Es => ES.get_or_init(|| build(bundled_files!("es"))),
        }
    }

    pub fn from_dir(dir: &Path, language: Language) -> Result<LanguagePack> {
        let mut contents = Vec::with_capacity(RESOURCE_FILES.len());
        for name in RESOURCE_FILES {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            contents.push(text);
        }
        let refs: Vec<&str> = contents.iter().map(String::as_str).collect();
        let files: [&str; 10] = refs.try_into().expect("ten resource files");
        LanguagePack::parse(language, &files, &dir.display().to_string())
    }

    fn parse(language: Language, files: &[&str; 10], origin: &str) -> Result<LanguagePack> {
        let mut hasher = Sha256::new();
        for f in files {
            hasher.update((f.len() as u64).to_le_bytes());
            hasher.update(f.as_bytes());
        }
        let version = hex::encode(hasher.finalize());

        let set = |text: &str| -> HashSet<String> { lines(text).map(normalize_key).collect() };
        let discourse_markers = lines(files[1])
            .map(|m| {
                super::tokenize(m)
                    .into_iter()
                    .map(|t| normalize_key(&t.text))
                    .collect::<Vec<_>>()
            })
            .filter(|m| !m.is_empty())
            .collect();

        let pos_lexicon = tsv(files[8], origin, "pos.tsv")?
            .map(|(w, tag)| {
                tag.parse::<PosTag>()
                    .map(|t| (w, t))
                    .map_err(|_| Error::Config(format!("{origin}/pos.tsv: unknown tag {tag:?}")))
            })
            .collect::<Result<HashMap<_, _>>>()?;

        let score_map = |text: &str, name: &str, lo: f64, hi: f64| -> Result<HashMap<String, f64>> {
            tsv(text, origin, name)?
                .map(|(w, s)| {
                    let v: f64 = s
                        .parse()
                        .map_err(|_| Error::Config(format!("{origin}/{name}: bad score {s:?}")))?;
                    if !(lo..=hi).contains(&v) {
                        return Err(Error::Config(format!(
                            "{origin}/{name}: score {v} for {w:?} outside [{lo}, {hi}]"
                        )));
                    }
                    Ok((w, v))
                })
                .collect()
        };

        let pack = LanguagePack {
            language,
            stop_words: set(files[0]),
            discourse_markers,
            personal_pronouns: set(files[2]),
            negators: set(files[3]),
            polarity_lexicon: score_map(files[4], "polarity.tsv", -1.0, 1.0)?,
            subjectivity_lexicon: score_map(files[5], "subjectivity.tsv", 0.0, 1.0)?,
            word_list: set(files[6]),
            abbreviations: set(files[7]),
            pos_lexicon,
            vowel_set: lines(files[9]).flat_map(|l| l.chars().collect::<Vec<_>>()).collect(),
            version,
        };
        if pack.stop_words.is_empty()
            || pack.discourse_markers.is_empty()
            || pack.personal_pronouns.is_empty()
            || pack.vowel_set.is_empty()
        {
            return Err(Error::Config(format!("{origin}: pack has an empty required list")));
        }
        Ok(pack)
    }
}

/// Lowercase and fold typographic apostrophes so lookups are uniform.
pub fn normalize_key(s: &str) -> String {
    s.trim().to_lowercase().replace('\u{2019}', "'")
}

fn lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn tsv<'a>(
    text: &'a str,
    origin: &'a str,
    name: &'a str,
) -> Result<impl Iterator<Item = (String, &'a str)> + 'a> {
    let mut rows = Vec::new();
    for (i, line) in lines(text).enumerate() {
        let (w, v) = line
            .split_once('\t')
            .ok_or_else(|| Error::Config(format!("{origin}/{name}:{}: expected word<TAB>value", i + 1)))?;
        rows.push((normalize_key(w), v.trim()));
    }
    Ok(rows.into_iter())
}
