//! Raw text in, tagged document with per-tag word frequencies out.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, LabeledCorpus, LabeledSentence};
use crate::nn::{best_real_tags, NnError, SequenceScorer};
use crate::preprocess::preprocess_document;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum TagError {
    #[error("no tokens left after cleaning the input")]
    EmptyAfterCleaning,
    #[error("unsupported export format {0:?} (expected tsv or structured)")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Model(#[from] NnError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Text,
    Document { filename: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
    /// Probability of the chosen tag.
    pub confidences: Vec<f64>,
    /// Token was unknown to the model's vocabulary.
    pub oov: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub word: String,
    pub count: usize,
}

/// Tag → words sorted by descending count, then ascending word.
pub type Frequencies = BTreeMap<String, Vec<WordCount>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub sentences: Vec<TaggedSentence>,
    pub frequencies: Frequencies,
    pub source: Source,
}

impl TaggedDocument {
    pub fn new(sentences: Vec<TaggedSentence>, source: Source) -> Self {
        let frequencies = compute_frequencies(&sentences);
        Self {
            sentences,
            frequencies,
            source,
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    /// Tokens with their predicted tags, as a labeled corpus.
    pub fn to_corpus(&self) -> LabeledCorpus {
        self.sentences
            .iter()
            .map(|s| LabeledSentence::new(s.tokens.clone(), s.tags.clone()).expect("equal-length token and tag lists"))
            .collect()
    }
}

pub fn tag_text<T: Scalar, M: SequenceScorer<T> + ?Sized>(text: &str, model: &M) -> Result<TaggedDocument, TagError> {
    tag_with_source(text, model, Source::Text)
}

pub fn tag_with_source<T: Scalar, M: SequenceScorer<T> + ?Sized>(
    text: &str,
    model: &M,
    source: Source,
) -> Result<TaggedDocument, TagError> {
    let cleaned = preprocess_document(text);
    if cleaned.is_empty() {
        return Err(TagError::EmptyAfterCleaning);
    }
    let vocab = model.vocabulary();
    let mut sentences = Vec::with_capacity(cleaned.len());
    for sentence in cleaned {
        let tokens = sentence.into_tokens();
        let ids = vocab.encode_tokens(&tokens);
        let probs = model.tag_probs(&ids)?;
        if probs.rows() != tokens.len() {
            return Err(NnError::DimensionMismatch {
                what: "probability rows",
                expected: tokens.len(),
                got: probs.rows(),
            }
            .into());
        }
        let best = best_real_tags(&probs);
        sentences.push(TaggedSentence {
            oov: tokens.iter().map(|t| vocab.is_oov(t)).collect(),
            tags: best
                .iter()
                .map(|&(id, _)| vocab.tag(id).unwrap_or_default().to_string())
                .collect(),
            confidences: best.iter().map(|&(_, p)| p.to_f64_lossless()).collect(),
            tokens,
        });
    }
    Ok(TaggedDocument::new(sentences, source))
}

pub fn compute_frequencies(sentences: &[TaggedSentence]) -> Frequencies {
    let mut counts: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
    for s in sentences {
        for (w, t) in s.tokens.iter().zip(&s.tags) {
            *counts.entry(t).or_default().entry(w).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(tag, words)| {
            let mut list: Vec<WordCount> = words
                .into_iter()
                .map(|(w, count)| WordCount {
                    word: w.to_string(),
                    count,
                })
                .collect();
            list.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
            (tag.to_string(), list)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    /// The corpus file format, directly usable for training.
    Tsv,
    /// JSON of the whole document.
    Structured,
}

impl FromStr for ExportFormat {
    type Err = TagError;

    fn from_str(s: &str) -> Result<Self, TagError> {
        match s {
            "tsv" => Ok(ExportFormat::Tsv),
            "structured" | "json" => Ok(ExportFormat::Structured),
            other => Err(TagError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn export_analysis(doc: &TaggedDocument, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Tsv => corpus::to_string(&doc.to_corpus()).into_bytes(),
        ExportFormat::Structured => serde_json::to_vec_pretty(doc).expect("tagged documents serialize"),
    }
}
