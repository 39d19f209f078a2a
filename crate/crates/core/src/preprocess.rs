//! Text normalization: Turkish-aware lowercasing, sentence splitting and
//! token cleaning. Everything here is a pure function.

use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

/// Leading or trailing punctuation/symbol run on a token.
static EDGE_PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\p{P}\p{S}]+|[\p{P}\p{S}]+$").unwrap());

/// Tokens made only of digits and punctuation carry no lexical content.
static NUMERIC_OR_PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\p{Nd}\p{P}\p{S}]+$").unwrap());

const TERMINATORS: [char; 4] = ['.', '!', '?', '…'];

/// A cleaned, lowercased token sequence ready for tagging.
///
/// Tokens are never empty, never purely numeric or punctuation, and are
/// already in their Turkish-lowercased form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenizedSentence(Vec<String>);

impl TokenizedSentence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lowercases with the Turkish mapping (`İ`→`i`, `I`→`ı`) after NFC
/// composition. Every other character follows its Unicode lowercase mapping.
pub fn normalize_case(text: &str) -> String {
    let composed: String = text.nfc().collect();
    let mut out = String::with_capacity(composed.len());
    for c in composed.chars() {
        match c {
            'İ' => out.push('i'),
            'I' => out.push('ı'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    // Lowercasing can emit decomposed sequences (e.g. from precomposed
    // titlecase letters); recompose so the result is a fixed point.
    if unicode_normalization::is_nfc(&out) {
        out
    } else {
        out.nfc().collect()
    }
}

/// Splits after `.`, `!`, `?` or `…` when followed by whitespace or end of
/// input. Segments keep their terminator and are trimmed; empty ones vanish.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !TERMINATORS.contains(&c) {
            continue;
        }
        let at_boundary = chars.peek().is_none_or(|&(_, next)| next.is_whitespace());
        if at_boundary {
            let end = i + c.len_utf8();
            push_segment(&mut out, &text[start..end]);
            start = end;
        }
    }
    push_segment(&mut out, &text[start..]);
    out
}

fn push_segment(out: &mut Vec<String>, seg: &str) {
    let seg = seg.trim();
    if !seg.is_empty() {
        out.push(seg.to_string());
    }
}

/// Splits on whitespace, strips edge punctuation, and drops tokens with no
/// lexical content. Case normalization is re-applied so callers may pass raw
/// sentences.
pub fn tokenize(sentence: &str) -> TokenizedSentence {
    let lowered = normalize_case(sentence);
    let tokens = lowered
        .split_whitespace()
        .filter_map(|raw| {
            let trimmed = EDGE_PUNCT.replace_all(raw, "");
            if trimmed.is_empty() || NUMERIC_OR_PUNCT.is_match(&trimmed) {
                None
            } else {
                Some(trimmed.into_owned())
            }
        })
        .collect();
    TokenizedSentence(tokens)
}

/// The full pipeline: normalize case, split sentences, tokenize each, and
/// drop sentences left empty.
pub fn preprocess_document(text: &str) -> Vec<TokenizedSentence> {
    split_sentences(&normalize_case(text))
        .iter()
        .map(|s| tokenize(s))
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &TokenizedSentence) -> Vec<&str> {
        s.tokens().iter().map(String::as_str).collect()
    }

    #[test]
    fn turkish_dotted_and_dotless_i() {
        assert_eq!(normalize_case("İstanbul Büyük"), "istanbul büyük");
        assert_eq!(normalize_case("ILIK SU"), "ılık su");
        assert_eq!(normalize_case(""), "");
        // Decomposed I + combining dot above composes to İ first.
        assert_eq!(normalize_case("I\u{307}zmir"), "izmir");
    }

    #[test]
    fn sentence_terminators() {
        assert_eq!(
            split_sentences("bugün hava güzel. yarın yağmur var mı?"),
            vec!["bugün hava güzel.", "yarın yağmur var mı?"]
        );
        assert_eq!(split_sentences("tek cümle"), vec!["tek cümle"]);
        assert_eq!(split_sentences("a! b? c."), vec!["a!", "b?", "c."]);
        assert_eq!(split_sentences("bekle… geldi"), vec!["bekle…", "geldi"]);
        // Terminator not followed by whitespace does not split.
        assert_eq!(split_sentences("3.5 kilo"), vec!["3.5 kilo"]);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn tokenize_strips_and_drops() {
        assert_eq!(toks(&tokenize("kedi, süt içti.")), ["kedi", "süt", "içti"]);
        assert_eq!(toks(&tokenize("3 kedi 5 köpek")), ["kedi", "köpek"]);
        assert!(tokenize("").is_empty());
        assert_eq!(
            toks(&tokenize("\"Ankara'da\" 12:30 -- iyi-kötü")),
            ["ankara'da", "iyi-kötü"]
        );
    }

    #[test]
    fn document_pipeline() {
        let doc = preprocess_document("Kedi UYUDU. Köpek, havladı!");
        assert_eq!(doc.len(), 2);
        assert_eq!(toks(&doc[0]), ["kedi", "uyudu"]);
        assert_eq!(toks(&doc[1]), ["köpek", "havladı"]);
        assert!(preprocess_document("123. 456!").is_empty());
        let iyi = preprocess_document("İYİ.");
        assert_eq!(iyi.len(), 1);
        assert_eq!(toks(&iyi[0]), ["iyi"]);
    }
}
