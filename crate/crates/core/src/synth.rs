//! Deterministic synthetic data for tests, benchmarks and smoke runs.
//!
//! The text generator is not a language model; it only produces documents
//! whose style statistics differ between labels in roughly the directions
//! reported for real human and machine text.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, Label, Language, TOPICS};
use crate::matrix::Matrix;

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; u1 in (0, 1] keeps ln finite
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Two isotropic Gaussian clouds in `p` dimensions with means at
/// `-separation/2` and `+separation/2` on every axis. Rows alternate classes.
pub fn gaussian_clouds(per_class: usize, p: usize, separation: f64, seed: u64) -> (Matrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * per_class * p);
    let mut y = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        for class in [0u8, 1] {
            let centre = if class == 1 { separation / 2.0 } else { -separation / 2.0 };
            data.extend((0..p).map(|_| centre + standard_normal(&mut rng)));
            y.push(class);
        }
    }
    (Matrix::from_vec(y.len(), p, data).expect("shape is consistent"), y)
}

struct Lexicon {
    nouns: &'static [&'static str],
    verbs: &'static [&'static str],
    adjectives: &'static [&'static str],
    function: &'static [&'static str],
    markers: &'static [&'static str],
    pronouns: &'static [&'static str],
    typos: &'static [&'static str],
}

fn lexicon(language: Language) -> Lexicon {
    match language {
        Language::En => Lexicon {
            nouns: &["city", "market", "energy", "school", "team", "river", "policy", "health", "music", "science", "family", "season", "report", "company", "village"],
            verbs: &["improves", "changes", "supports", "needs", "shows", "builds", "affects", "creates", "reaches", "follows"],
            adjectives: &["important", "new", "local", "significant", "complex", "modern", "small", "essential", "strong", "crucial"],
            function: &["the", "a", "of", "in", "and", "for", "with", "on", "to", "that"],
            markers: &["Furthermore,", "Moreover,", "In addition,", "However,", "Overall,", "In conclusion,"],
            pronouns: &["I", "we", "he", "she", "they", "you"],
            typos: &["teh", "recieve", "goverment", "wich", "becuase"],
        },
        Language::Fr => Lexicon {
            nouns: &["ville", "marché", "énergie", "école", "équipe", "rivière", "politique", "santé", "musique", "science", "famille", "saison", "rapport", "entreprise", "village"],
            verbs: &["améliore", "change", "soutient", "montre", "construit", "influence", "crée", "atteint", "suit", "propose"],
            adjectives: &["important", "nouveau", "local", "essentiel", "complexe", "moderne", "petit", "fort", "crucial", "durable"],
            function: &["le", "la", "de", "et", "pour", "avec", "dans", "sur", "que", "une"],
            markers: &["De plus,", "En outre,", "Cependant,", "Par ailleurs,", "En conclusion,", "Ainsi,"],
            pronouns: &["je", "nous", "il", "elle", "ils", "vous"],
            typos: &["gouvernment", "sucès", "developement", "interressant", "apparament"],
        },
        Language::De => Lexicon {
            nouns: &["Stadt", "Markt", "Energie", "Schule", "Mannschaft", "Fluss", "Politik", "Gesundheit", "Musik", "Wissenschaft", "Familie", "Saison", "Bericht", "Firma", "Dorf"],
            verbs: &["verbessert", "verändert", "unterstützt", "zeigt", "baut", "beeinflusst", "schafft", "erreicht", "folgt", "braucht"],
            adjectives: &["wichtig", "neu", "lokal", "wesentlich", "komplex", "modern", "klein", "stark", "entscheidend", "nachhaltig"],
            function: &["der", "die", "das", "und", "mit", "für", "in", "auf", "von", "eine"],
            markers: &["Außerdem", "Darüber hinaus", "Jedoch", "Insgesamt", "Zudem", "Schließlich"],
            pronouns: &["ich", "wir", "er", "sie", "ihr", "du"],
            typos: &["Regirung", "warscheinlich", "Addresse", "seperat", "endgültigt"],
        },
        Language::Es => Lexicon {
            nouns: &["ciudad", "mercado", "energía", "escuela", "equipo", "río", "política", "salud", "música", "ciencia", "familia", "temporada", "informe", "empresa", "pueblo"],
            verbs: &["mejora", "cambia", "apoya", "muestra", "construye", "afecta", "crea", "alcanza", "sigue", "necesita"],
            adjectives: &["importante", "nuevo", "local", "esencial", "complejo", "moderno", "pequeño", "fuerte", "crucial", "sostenible"],
            function: &["el", "la", "de", "y", "para", "con", "en", "sobre", "que", "una"],
            markers: &["Además,", "Sin embargo,", "Por otro lado,", "En conclusión,", "Asimismo,", "Por lo tanto,"],
            pronouns: &["yo", "nosotros", "él", "ella", "ellos", "usted"],
            typos: &["goberno", "exito", "desarollo", "interesante", "aparentemente"],
        },
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn sentence(lex: &Lexicon, label: Label, rng: &mut ChaCha8Rng) -> String {
    // AI text: longer, evenly sized sentences with markers and adjectives;
    // human text: uneven lengths, pronouns, numbers, quotes, typos.
    let (lo, hi) = match label {
        Label::Human => (4, 22),
        Label::AIGenerated => (14, 19),
        Label::AIRephrased => (9, 20),
    };
    let len = rng.random_range(lo..=hi);
    let mut words: Vec<String> = Vec::with_capacity(len + 2);
    let marker_p = match label {
        Label::Human => 0.05,
        Label::AIGenerated => 0.45,
        Label::AIRephrased => 0.25,
    };
    if rng.random_bool(marker_p) {
        words.push(lex.markers.choose(rng).unwrap().to_string());
    }
    if label == Label::Human && rng.random_bool(0.4) {
        words.push(lex.pronouns.choose(rng).unwrap().to_string());
    }
    while words.len() < len {
        let w = match rng.random_range(0..10) {
            0..=3 => lex.function.choose(rng).unwrap().to_string(),
            4..=5 => lex.nouns.choose(rng).unwrap().to_string(),
            6 => lex.verbs.choose(rng).unwrap().to_string(),
            7 if label != Label::Human => lex.adjectives.choose(rng).unwrap().to_string(),
            7 => rng.random_range(2..2030).to_string(),
            8 if label == Label::Human && rng.random_bool(0.15) => lex.typos.choose(rng).unwrap().to_string(),
            _ => lex.nouns.choose(rng).unwrap().to_string(),
        };
        words.push(w);
    }
    if label == Label::Human && rng.random_bool(0.15) {
        let i = rng.random_range(0..words.len());
        words[i] = format!("\"{}\"", words[i]);
    }
    let mut text = words.join(" ");
    text = capitalize(&text);
    let end = match label {
        Label::Human if rng.random_bool(0.1) => "!",
        Label::Human if rng.random_bool(0.1) => "?",
        _ => ".",
    };
    text.push_str(end);
    if label == Label::Human && rng.random_bool(0.05) {
        text = text.replacen(' ', "  ", 1);
    }
    text
}

/// One synthetic document.
pub fn synthetic_document(language: Language, label: Label, topic: &str, index: usize, seed: u64) -> Document {
    let lex = lexicon(language);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((language as u64) << 40) | ((label as u64) << 32) | index as u64);
    let paragraphs = match label {
        Label::Human => rng.random_range(2..=7),
        _ => rng.random_range(3..=5),
    };
    let mut body = Vec::with_capacity(paragraphs);
    for _ in 0..paragraphs {
        let sentences = match label {
            Label::Human => rng.random_range(1..=6),
            _ => rng.random_range(3..=4),
        };
        let para: Vec<String> = (0..sentences).map(|_| sentence(&lex, label, &mut rng)).collect();
        body.push(para.join(" "));
    }
    let title = capitalize(topic);
    Document {
        id: format!("{}-{}-{index:03}", language.code().to_lowercase(), label.name().to_lowercase()),
        language,
        topic: topic.to_string(),
        label,
        title: title.clone(),
        body: format!("{title} {}", body.join("\n\n")),
    }
}

/// `per_label` documents per (language, label), topics assigned round-robin.
pub fn synthetic_corpus(languages: &[Language], per_label: usize, seed: u64) -> Vec<Document> {
    let mut docs = Vec::new();
    for &language in languages {
        for label in [Label::Human, Label::AIGenerated, Label::AIRephrased] {
            for i in 0..per_label {
                docs.push(synthetic_document(language, label, TOPICS[i % TOPICS.len()], i, seed));
            }
        }
    }
    docs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate;

    #[test]
    fn clouds_are_deterministic_and_balanced() {
        let (a, ya) = gaussian_clouds(10, 3, 3.0, 7);
        let (b, yb) = gaussian_clouds(10, 3, 3.0, 7);
        assert_eq!(a, b);
        assert_eq!(ya, yb);
        assert_eq!(ya.iter().filter(|&&t| t == 1).count(), 10);
    }

    #[test]
    fn corpus_is_valid_and_deterministic() {
        let docs = synthetic_corpus(&Language::ALL, 12, 1);
        assert_eq!(docs.len(), 4 * 3 * 12);
        assert!(validate(&docs, false).is_empty(), "{:?}", validate(&docs, false));
        assert_eq!(docs, synthetic_corpus(&Language::ALL, 12, 1));
        assert_ne!(docs[0].body, synthetic_corpus(&Language::ALL, 12, 2)[0].body);
    }
}
