use super::{LanguagePack, PosTag, Token, TokenKind};
use crate::corpus::Language;

/// Assign coarse tags to Word and Number tokens in place.
///
/// Lookup order: lexicon, then (German only) capitalization, then suffix rules,
/// then capitalization for the other languages, then `X`.
pub fn pos_tag(tokens: &mut [Token], pack: &LanguagePack) {
    let mut first_word = true;
    for tok in tokens.iter_mut() {
        tok.pos = match tok.kind {
            TokenKind::Number => Some(PosTag::Num),
            TokenKind::Word => {
                let tag = tag_word(&tok.text, !first_word, pack);
                first_word = false;
                Some(tag)
            }
            _ => None,
        };
    }
}

fn tag_word(word: &str, mid_sentence: bool, pack: &LanguagePack) -> PosTag {
    let key = super::normalize_key(word);
    if let Some(tag) = pack.pos_lexicon.get(&key) {
        return *tag;
    }
    let capitalized = word.chars().next().is_some_and(char::is_uppercase);
    if pack.language == Language::De && capitalized && mid_sentence {
        return PosTag::Noun;
    }
    if let Some(tag) = suffix_tag(&key, pack.language) {
        return tag;
    }
    if capitalized && mid_sentence {
        return PosTag::Noun;
    }
    PosTag::X
}

fn suffix_tag(word: &str, language: Language) -> Option<PosTag> {
    let rules: &[(&str, PosTag)] = match language {
        Language::En => &[
            ("ly", PosTag::Adv),
            ("ing", PosTag::Verb),
            ("ed", PosTag::Verb),
            ("ize", PosTag::Verb),
            ("ise", PosTag::Verb),
            ("ous", PosTag::Adj),
            ("ful", PosTag::Adj),
            ("able", PosTag::Adj),
            ("ible", PosTag::Adj),
            ("ive", PosTag::Adj),
            ("less", PosTag::Adj),
            ("ical", PosTag::Adj),
            ("tion", PosTag::Noun),
            ("sion", PosTag::Noun),
            ("ment", PosTag::Noun),
            ("ness", PosTag::Noun),
            ("ity", PosTag::Noun),
            ("ism", PosTag::Noun),
            ("ist", PosTag::Noun),
            ("er", PosTag::Noun),
            ("s", PosTag::Noun),
        ],
        Language::Fr => &[
            ("ement", PosTag::Adv),
            ("amment", PosTag::Adv),
            ("emment", PosTag::Adv),
            ("aient", PosTag::Verb),
            ("ait", PosTag::Verb),
            ("er", PosTag::Verb),
            ("ir", PosTag::Verb),
            ("ée", PosTag::Verb),
            ("é", PosTag::Verb),
            ("euse", PosTag::Adj),
            ("eux", PosTag::Adj),
            ("ique", PosTag::Adj),
            ("able", PosTag::Adj),
            ("ive", PosTag::Adj),
            ("if", PosTag::Adj),
            ("elle", PosTag::Adj),
            ("tion", PosTag::Noun),
            ("isme", PosTag::Noun),
            ("ité", PosTag::Noun),
            ("eur", PosTag::Noun),
            ("age", PosTag::Noun),
        ],
        Language::De => &[
            ("lich", PosTag::Adj),
            ("isch", PosTag::Adj),
            ("ig", PosTag::Adj),
            ("bar", PosTag::Adj),
            ("los", PosTag::Adj),
            ("sam", PosTag::Adj),
            ("ung", PosTag::Noun),
            ("heit", PosTag::Noun),
            ("keit", PosTag::Noun),
            ("schaft", PosTag::Noun),
            ("tion", PosTag::Noun),
            ("en", PosTag::Verb),
            ("te", PosTag::Verb),
            ("t", PosTag::Verb),
        ],
        Language::Es => &[
            ("mente", PosTag::Adv),
            ("ando", PosTag::Verb),
            ("iendo", PosTag::Verb),
            ("ado", PosTag::Verb),
            ("ido", PosTag::Verb),
            ("ar", PosTag::Verb),
            ("er", PosTag::Verb),
            ("ir", PosTag::Verb),
            ("oso", PosTag::Adj),
            ("osa", PosTag::Adj),
            ("ivo", PosTag::Adj),
            ("iva", PosTag::Adj),
            ("able", PosTag::Adj),
            ("ible", PosTag::Adj),
            ("al", PosTag::Adj),
            ("ción", PosTag::Noun),
            ("dad", PosTag::Noun),
            ("ismo", PosTag::Noun),
            ("ista", PosTag::Noun),
            ("miento", PosTag::Noun),
        ],
    };
    rules
        .iter()
        .find(|(suffix, _)| word.len() > suffix.len() + 1 && word.ends_with(suffix))
        .map(|(_, tag)| *tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize;

    fn tags(text: &str, lang: Language) -> Vec<Option<PosTag>> {
        let mut t = tokenize(text);
        pos_tag(&mut t, LanguagePack::bundled(lang));
        t.into_iter().map(|t| t.pos).collect()
    }

    #[test]
    fn lexicon_lookup() {
        assert_eq!(tags("the", Language::En), vec![Some(PosTag::Det)]);
    }

    #[test]
    fn german_capitalization() {
        assert_eq!(tags("ein Haus", Language::De)[1], Some(PosTag::Noun));
        assert_eq!(tags("das Quxbrumel", Language::De)[1], Some(PosTag::Noun));
    }

    #[test]
    fn numbers_and_punct() {
        assert_eq!(tags("42 .", Language::En), vec![Some(PosTag::Num), None]);
    }

    #[test]
    fn suffix_and_fallback() {
        assert_eq!(tags("zorbingly", Language::En), vec![Some(PosTag::Adv)]);
        assert_eq!(tags("xqz", Language::En), vec![Some(PosTag::X)]);
        assert_eq!(tags("a Xqz", Language::En)[1], Some(PosTag::Noun));
    }
}
