//! Labeled corpora and the tab-separated corpus file format.
//!
//! One `token<TAB>tag` pair per line, a blank line after each sentence, and
//! `#`-prefixed comment lines. The reader applies no text preprocessing:
//! stored corpora are expected to be clean already.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The 20-sentence synthetic corpus shipped with the crate.
pub const SAMPLE_CORPUS: &str = include_str!("../data/sample_corpus.tsv");

/// Unlabeled raw text matching the sample corpus vocabulary, for bootstrap runs.
pub const SAMPLE_RAW_TEXT: &str = include_str!("../data/sample_raw.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("token and tag counts differ ({tokens} vs {tags})")]
    LengthMismatch { tokens: usize, tags: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One sentence of `(token, tag)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    tokens: Vec<String>,
    tags: Vec<String>,
}

impl LabeledSentence {
    pub fn new(tokens: Vec<String>, tags: Vec<String>) -> Result<Self, CorpusError> {
        if tokens.len() != tags.len() {
            return Err(CorpusError::LengthMismatch {
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        Ok(Self { tokens, tags })
    }

    pub fn from_pairs<S: Into<String>, U: Into<String>>(pairs: impl IntoIterator<Item = (S, U)>) -> Self {
        let (tokens, tags) = pairs.into_iter().map(|(w, t)| (w.into(), t.into())).unzip();
        Self { tokens, tags }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn tags_mut(&mut self) -> &mut [String] {
        &mut self.tags
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.tokens
            .iter()
            .map(String::as_str)
            .zip(self.tags.iter().map(String::as_str))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    sentences: Vec<LabeledSentence>,
}

impl LabeledCorpus {
    pub fn new(sentences: Vec<LabeledSentence>) -> Self {
        Self { sentences }
    }

    pub fn sentences(&self) -> &[LabeledSentence] {
        &self.sentences
    }

    pub fn into_sentences(self) -> Vec<LabeledSentence> {
        self.sentences
    }

    pub fn push(&mut self, sentence: LabeledSentence) {
        self.sentences.push(sentence);
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(LabeledSentence::len).sum()
    }

    /// The bundled sample corpus.
    pub fn sample() -> Self {
        parse(SAMPLE_CORPUS).expect("bundled sample corpus is well formed")
    }
}

impl FromIterator<LabeledSentence> for LabeledCorpus {
    fn from_iter<I: IntoIterator<Item = LabeledSentence>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

pub fn parse(text: &str) -> Result<LabeledCorpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut current = LabeledSentence::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let malformed = |reason: &str| CorpusError::Malformed {
            line: idx + 1,
            reason: reason.to_string(),
        };
        let (token, tag) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected token<TAB>tag"))?;
        if tag.contains('\t') {
            return Err(malformed("more than one tab"));
        }
        if token.is_empty() || tag.is_empty() {
            return Err(malformed("empty token or tag"));
        }
        current.tokens.push(token.to_string());
        current.tags.push(tag.to_string());
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(LabeledCorpus { sentences })
}

pub fn load(path: impl AsRef<Path>) -> Result<LabeledCorpus, CorpusError> {
    parse(&std::fs::read_to_string(path)?)
}

/// Writes sentences separated by one blank line, with no trailing blank line.
pub fn write_to<W: fmt::Write>(out: &mut W, sentences: &[LabeledSentence]) -> fmt::Result {
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            out.write_char('\n')?;
        }
        for (w, t) in s.pairs() {
            writeln!(out, "{w}\t{t}")?;
        }
    }
    Ok(())
}

pub fn to_string(corpus: &LabeledCorpus) -> String {
    let mut s = String::new();
    write_to(&mut s, corpus.sentences()).expect("writing to a String cannot fail");
    s
}

pub fn save(path: impl AsRef<Path>, corpus: &LabeledCorpus) -> Result<(), CorpusError> {
    std::fs::write(path, to_string(corpus))?;
    Ok(())
}
