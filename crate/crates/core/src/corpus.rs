//! Corpus ingestion, validation, statistics and stratified splitting.
//!
//! The canonical on-disk form is JSON Lines with exactly the fields
//! `id, language, topic, label, title, body`. The directory adapter reads the
//! file-per-article layout `<lang>/<label>/<topic>_<nn>.txt` (first line is
//! the title) into the same in-memory model.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::textproc::{LanguagePack, TokenizedDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "EN")]
    En,
    #[serde(rename = "FR")]
    Fr,
    #[serde(rename = "DE")]
    De,
    #[serde(rename = "ES")]
    Es,
}

impl Language {
    pub const ALL: [Language; 4] = [Language::En, Language::Fr, Language::De, Language::Es];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "EN",
            Language::Fr => "FR",
            Language::De => "DE",
            Language::Es => "ES",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EN" => Ok(Language::En),
            "FR" => Ok(Language::Fr),
            "DE" => Ok(Language::De),
            "ES" => Ok(Language::Es),
            _ => Err(Error::InvalidInput(format!("unknown language {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Human,
    AIGenerated,
    AIRephrased,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Human, Label::AIGenerated, Label::AIRephrased];

    pub fn name(self) -> &'static str {
        match self {
            Label::Human => "Human",
            Label::AIGenerated => "AIGenerated",
            Label::AIRephrased => "AIRephrased",
        }
    }

    /// Binary target: 1 for either AI class.
    pub fn is_ai(self) -> bool {
        !matches!(self, Label::Human)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let folded: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match folded.as_str() {
            "human" => Ok(Label::Human),
            "aigenerated" | "generated" => Ok(Label::AIGenerated),
            "airephrased" | "rephrased" => Ok(Label::AIRephrased),
            _ => Err(Error::InvalidInput(format!("unknown label {s:?}"))),
        }
    }
}

/// The ten topics of the released corpus, lowercased.
pub const TOPICS: [&str; 10] = [
    "biology",
    "chemistry",
    "geography",
    "history",
    "it",
    "music",
    "politics",
    "religion",
    "sports",
    "visual arts",
];

/// Prompts that produced the AI documents. Kept as documentation of the
/// corpus provenance; nothing in this crate generates text.
pub fn generation_prompt(language: Language) -> &'static str {
    match language {
        Language::En => "Generate a text on the following topic: <topic>",
        Language::Fr => "Rédigez un texte sur le thème suivant: <topic>",
        Language::De => "Erstelle einen Text zum folgenden Thema: <topic>",
        Language::Es => "Genera un texto sobre el siguiente tema: <topic>",
    }
}

pub fn rephrasing_prompt(language: Language) -> &'static str {
    match language {
        Language::En => "Rephrase the following text: <topic>",
        Language::Fr => "Reformulez le texte suivant: <topic>",
        Language::De => "Formuliere den folgenden Text um: <topic>",
        Language::Es => "Reformule el siguiente texto: <topic>",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub language: Language,
    pub topic: String,
    pub label: Label,
    pub title: String,
    pub body: String,
}

impl Document {
    pub fn tokenize(&self) -> TokenizedDocument {
        TokenizedDocument::new(&self.body, LanguagePack::bundled(self.language))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Directory,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "directory" | "dir" => Ok(CorpusFormat::Directory),
            _ => Err(Error::InvalidInput(format!("unknown corpus format {s:?}"))),
        }
    }
}

impl CorpusFormat {
    /// Directory if `path` is a directory, JSON Lines otherwise.
    pub fn detect(path: &Path) -> CorpusFormat {
        if path.is_dir() {
            CorpusFormat::Directory
        } else {
            CorpusFormat::Jsonl
        }
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Document>> {
    let docs = match format {
        CorpusFormat::Jsonl => {
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            read_jsonl(std::io::BufReader::new(file), &path.display().to_string())?
        }
        CorpusFormat::Directory => read_directory(path)?,
    };
    check_unique_ids(&docs)?;
    Ok(docs)
}

/// Parse JSON Lines; `source` names the input in error messages.
pub fn read_jsonl<R: BufRead>(reader: R, source: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let location = format!("{source}:{}", idx + 1);
        let line = line.map_err(|e| Error::Malformed {
            location: location.clone(),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut doc: Document = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            location: location.clone(),
            message: e.to_string(),
        })?;
        normalize(&mut doc);
        check_document(&doc).map_err(|message| Error::Malformed { location, message })?;
        docs.push(doc);
    }
    check_unique_ids(&docs)?;
    Ok(docs)
}

pub fn write_jsonl<W: Write>(docs: &[Document], mut out: W) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("<jsonl writer>", e))?;
    }
    Ok(())
}

fn read_directory(root: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for lang_dir in sorted_entries(root)? {
        if !lang_dir.is_dir() {
            continue;
        }
        let lang_name = file_name(&lang_dir);
        let language: Language = lang_name.parse().map_err(|_| Error::Malformed {
            location: lang_dir.display().to_string(),
            message: format!("unknown language directory {lang_name:?}"),
        })?;
        for label_dir in sorted_entries(&lang_dir)? {
            if !label_dir.is_dir() {
                continue;
            }
            let label_name = file_name(&label_dir);
            let label: Label = label_name.parse().map_err(|_| Error::Malformed {
                location: label_dir.display().to_string(),
                message: format!("unknown label directory {label_name:?}"),
            })?;
            for file in sorted_entries(&label_dir)? {
                if file.extension().and_then(|e| e.to_str()) != Some("txt") {
                    continue;
                }
                docs.push(read_article(&file, language, label)?);
            }
        }
    }
    Ok(docs)
}

fn read_article(path: &Path, language: Language, label: Label) -> Result<Document> {
    let location = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let topic = match stem.rsplit_once('_') {
        Some((topic, nn)) if !topic.is_empty() && nn.chars().all(|c| c.is_ascii_digit()) => {
            topic.replace('_', " ").to_lowercase()
        }
        _ => {
            return Err(Error::Malformed {
                location,
                message: "file name must be <topic>_<nn>.txt".into(),
            })
        }
    };
    let text = normalize_newlines(&raw);
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let (title, body) = text.split_once('\n').unwrap_or((text, ""));
    let mut doc = Document {
        id: format!(
            "{}-{}-{}",
            language.code().to_lowercase(),
            label.name().to_lowercase(),
            stem.to_lowercase()
        ),
        language,
        topic,
        label,
        title: title.trim().to_string(),
        body: body.trim_matches('\n').to_string(),
    };
    normalize(&mut doc);
    check_document(&doc).map_err(|message| Error::Malformed { location, message })?;
    Ok(doc)
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut entries = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn normalize_newlines(s: &str) -> String {
    s.replace("\r\n", "\n").replace('\r', "\n")
}

fn normalize(doc: &mut Document) {
    doc.body = normalize_newlines(&doc.body);
    doc.title = normalize_newlines(&doc.title);
    doc.topic = doc.topic.trim().to_lowercase();
}

fn check_document(doc: &Document) -> std::result::Result<(), String> {
    if doc.id.trim().is_empty() {
        return Err("empty id".into());
    }
    if doc.body.trim().is_empty() {
        return Err(format!("document {:?} has an empty body", doc.id));
    }
    Ok(())
}

fn check_unique_ids(docs: &[Document]) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for doc in docs {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateId(doc.id.clone()));
        }
    }
    Ok(())
}

/// Schema violations for a loaded corpus. `paper_complete` additionally
/// requires every topic to be one of [`TOPICS`].
pub fn validate(docs: &[Document], paper_complete: bool) -> Vec<String> {
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for doc in docs {
        if let Err(e) = check_document(doc) {
            problems.push(e);
        }
        if !seen.insert(doc.id.as_str()) {
            problems.push(format!("duplicate id {:?}", doc.id));
        }
        if paper_complete && !TOPICS.contains(&doc.topic.as_str()) {
            problems.push(format!("document {:?}: unknown topic {:?}", doc.id, doc.topic));
        }
    }
    problems
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub paragraphs: usize,
    pub sentences: usize,
    pub words: usize,
}

/// Paragraph, sentence and word totals per (language, label).
pub fn corpus_stats(docs: &[Document]) -> BTreeMap<(Language, Label), Counts> {
    use rayon::prelude::*;

    let per_doc: Vec<((Language, Label), Counts)> = docs
        .par_iter()
        .map(|doc| {
            let tok = doc.tokenize();
            (
                (doc.language, doc.label),
                Counts {
                    paragraphs: tok.paragraph_count(),
                    sentences: tok.sentence_count(),
                    words: tok.word_count(),
                },
            )
        })
        .collect();
    let mut out: BTreeMap<(Language, Label), Counts> = BTreeMap::new();
    for (key, c) in per_doc {
        let entry = out.entry(key).or_default();
        entry.paragraphs += c.paragraphs;
        entry.sentences += c.sentences;
        entry.words += c.words;
    }
    out
}

/// Binary detection task: human text against one kind of AI text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(alias = "generated")]
    Generated,
    #[serde(alias = "rephrased")]
    Rephrased,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Generated, Task::Rephrased];

    pub fn ai_label(self) -> Label {
        match self {
            Task::Generated => Label::AIGenerated,
            Task::Rephrased => Label::AIRephrased,
        }
    }

    pub fn selects(self, label: Label) -> bool {
        label == Label::Human || label == self.ai_label()
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Generated => "Generated",
            Task::Rephrased => "Rephrased",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "generated" => Ok(Task::Generated),
            "rephrased" => Ok(Task::Rephrased),
            _ => Err(Error::InvalidInput(format!("unknown task {s:?}"))),
        }
    }
}

pub const TRAIN_FRACTION: f64 = 0.8;
pub const VAL_FRACTION: f64 = 0.1;
pub const TEST_FRACTION: f64 = 0.1;
pub const MIN_DOCS_PER_CLASS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub task: Task,
    pub language: Language,
    pub train_ids: BTreeSet<String>,
    pub val_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
}

impl SplitPlan {
    pub fn len(&self) -> usize {
        self.train_ids.len() + self.val_ids.len() + self.test_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stable digest of the training ids; fitted state records it.
    pub fn train_fingerprint(&self) -> String {
        fingerprint_ids(self.train_ids.iter().map(String::as_str))
    }
}

pub fn fingerprint_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> String {
    let mut sorted: Vec<&str> = ids.into_iter().collect();
    sorted.sort_unstable();
    let mut h = Sha256::new();
    for id in sorted {
        h.update(id.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..16])
}

/// Seeded stratified 80/10/10 split over (label, topic) cells.
///
/// Each cell is shuffled and gets `floor(0.1 n)` validation and test documents.
/// If flooring leaves a class below `round(0.1 N_class)`, the shortfall is
/// taken from the cells with the largest fractional remainders, test first,
/// never emptying a cell's training share. Everything else goes to training.
pub fn make_split(docs: &[Document], task: Task, language: Language, seed: u64) -> Result<SplitPlan> {
    let mut cells: BTreeMap<(Label, &str), Vec<&str>> = BTreeMap::new();
    for doc in docs {
        if doc.language == language && task.selects(doc.label) {
            cells
                .entry((doc.label, doc.topic.as_str()))
                .or_default()
                .push(doc.id.as_str());
        }
    }
    for label in [Label::Human, task.ai_label()] {
        let n: usize = cells
            .iter()
            .filter(|((l, _), _)| *l == label)
            .map(|(_, v)| v.len())
            .sum();
        if n < MIN_DOCS_PER_CLASS {
            return Err(Error::Stratify(format!(
                "{language} {label}: {n} documents, need at least {MIN_DOCS_PER_CLASS}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled: BTreeMap<(Label, &str), Vec<&str>> = BTreeMap::new();
    for (key, mut ids) in cells {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        shuffled.insert(key, ids);
    }

    let mut plan = SplitPlan {
        seed,
        task,
        language,
        train_ids: BTreeSet::new(),
        val_ids: BTreeSet::new(),
        test_ids: BTreeSet::new(),
    };
    for label in [Label::Human, task.ai_label()] {
        let class_cells: Vec<(&(Label, &str), &Vec<&str>)> =
            shuffled.iter().filter(|((l, _), _)| *l == label).collect();
        let sizes: Vec<usize> = class_cells.iter().map(|(_, ids)| ids.len()).collect();
        let total: usize = sizes.iter().sum();
        let test = allocate(&sizes, TEST_FRACTION, total, &vec![0; sizes.len()]);
        let val = allocate(&sizes, VAL_FRACTION, total, &test);
        for (((_, ids), nv), nt) in class_cells.iter().zip(&val).zip(&test) {
            for (i, id) in ids.iter().enumerate() {
                let target = if i < *nv {
                    &mut plan.val_ids
                } else if i < nv + nt {
                    &mut plan.test_ids
                } else {
                    &mut plan.train_ids
                };
                target.insert((*id).to_string());
            }
        }
    }
    Ok(plan)
}

/// Per-cell counts for one held-out set; `taken` is what another held-out set
/// already claimed from each cell.
fn allocate(sizes: &[usize], fraction: f64, total: usize, taken: &[usize]) -> Vec<usize> {
    let mut alloc: Vec<usize> = sizes.iter().map(|&n| (n as f64 * fraction).floor() as usize).collect();
    let target = (total as f64 * fraction).round() as usize;
    let mut assigned: usize = alloc.iter().sum();
    if assigned < target {
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        let frac = |i: usize| sizes[i] as f64 * fraction - alloc[i] as f64;
        order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
        for i in order {
            if assigned >= target {
                break;
            }
            // leave at least one training document per cell
            if alloc[i] + taken[i] + 2 <= sizes[i] {
                alloc[i] += 1;
                assigned += 1;
            }
        }
    }
    alloc
}
