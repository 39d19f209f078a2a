//! Dense integer ids for words and tags, with reserved padding and
//! out-of-vocabulary slots.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledCorpus;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const PAD_WORD: &str = "<PAD>";
pub const OOV_WORD: &str = "<OOV>";
pub const PAD_TAG: &str = "-PAD-";

pub const PAD_WORD_ID: usize = 0;
pub const OOV_WORD_ID: usize = 1;
pub const PAD_TAG_ID: usize = 0;

/// First id available to a real word.
pub const FIRST_WORD_ID: usize = 2;
/// First id available to a real tag.
pub const FIRST_TAG_ID: usize = 1;

#[derive(Debug, Error, PartialEq)]
pub enum VocabError {
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("sequence of length {len} exceeds target length {target}")]
    TooLong { len: usize, target: usize },
    #[error("id {id} out of range for {size} entries")]
    IdOutOfRange { id: usize, size: usize },
    #[error("tag {0:?} is reserved")]
    ReservedTag(String),
    #[error("unknown tag {0:?}")]
    UnknownTag(String),
    #[error("invalid word/tag list: {0}")]
    InvalidLists(String),
}

/// Word and tag dictionaries. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabLists", into = "VocabLists")]
pub struct Vocabulary {
    words: Vec<String>,
    tags: Vec<String>,
    word_ids: HashMap<String, usize>,
    tag_ids: HashMap<String, usize>,
}

/// Wire form: the two ordered id → string lists, sentinels included.
#[derive(Serialize, Deserialize)]
pub struct VocabLists {
    pub words: Vec<String>,
    pub tags: Vec<String>,
}

impl TryFrom<VocabLists> for Vocabulary {
    type Error = VocabError;

    fn try_from(lists: VocabLists) -> Result<Self, VocabError> {
        Vocabulary::from_lists(lists.words, lists.tags)
    }
}

impl From<Vocabulary> for VocabLists {
    fn from(v: Vocabulary) -> Self {
        VocabLists {
            words: v.words,
            tags: v.tags,
        }
    }
}

impl Vocabulary {
    /// Assigns ids in first-occurrence order: words from 2, tags from 1.
    pub fn build(corpus: &LabeledCorpus) -> Result<Self, VocabError> {
        if corpus.is_empty() {
            return Err(VocabError::EmptyCorpus);
        }
        let mut words = vec![PAD_WORD.to_string(), OOV_WORD.to_string()];
        let mut tags = vec![PAD_TAG.to_string()];
        let mut word_ids: HashMap<String, usize> = words.iter().cloned().zip(0..).collect();
        let mut tag_ids: HashMap<String, usize> = HashMap::from([(PAD_TAG.to_string(), PAD_TAG_ID)]);
        for sentence in corpus.sentences() {
            for (w, t) in sentence.pairs() {
                if t == PAD_TAG {
                    return Err(VocabError::ReservedTag(t.to_string()));
                }
                if !word_ids.contains_key(w) {
                    word_ids.insert(w.to_string(), words.len());
                    words.push(w.to_string());
                }
                if !tag_ids.contains_key(t) {
                    tag_ids.insert(t.to_string(), tags.len());
                    tags.push(t.to_string());
                }
            }
        }
        Ok(Self {
            words,
            tags,
            word_ids,
            tag_ids,
        })
    }

    /// Rebuilds from ordered lists, e.g. when loading a model file.
    pub fn from_lists(words: Vec<String>, tags: Vec<String>) -> Result<Self, VocabError> {
        if words.get(PAD_WORD_ID).map(String::as_str) != Some(PAD_WORD)
            || words.get(OOV_WORD_ID).map(String::as_str) != Some(OOV_WORD)
        {
            return Err(VocabError::InvalidLists("missing word sentinels".into()));
        }
        if tags.get(PAD_TAG_ID).map(String::as_str) != Some(PAD_TAG) {
            return Err(VocabError::InvalidLists("missing -PAD- tag".into()));
        }
        let word_ids: HashMap<String, usize> = words.iter().cloned().zip(0..).collect();
        let tag_ids: HashMap<String, usize> = tags.iter().cloned().zip(0..).collect();
        if word_ids.len() != words.len() || tag_ids.len() != tags.len() {
            return Err(VocabError::InvalidLists("duplicate entries".into()));
        }
        Ok(Self {
            words,
            tags,
            word_ids,
            tag_ids,
        })
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Number of tags including `-PAD-`.
    pub fn tag_count(&self) -> usize {
        self.tags.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    /// Real tags, in id order, without `-PAD-`.
    pub fn real_tags(&self) -> &[String] {
        &self.tags[FIRST_TAG_ID..]
    }

    /// Id of a real word, or `None` for unknown words and sentinel strings.
    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.word_ids.get(word).copied().filter(|&id| id >= FIRST_WORD_ID)
    }

    pub fn tag_id(&self, tag: &str) -> Option<usize> {
        self.tag_ids.get(tag).copied()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn tag(&self, id: usize) -> Option<&str> {
        self.tags.get(id).map(String::as_str)
    }

    pub fn is_oov(&self, word: &str) -> bool {
        self.word_id(word).is_none()
    }

    /// Known words map to their id, everything else to the OOV id.
    pub fn encode_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens
            .iter()
            .map(|t| self.word_id(t.as_ref()).unwrap_or(OOV_WORD_ID))
            .collect()
    }

    /// Real tags only; `-PAD-` and unknown tags are rejected.
    pub fn encode_tags<S: AsRef<str>>(&self, tags: &[S]) -> Result<Vec<usize>, VocabError> {
        tags.iter()
            .map(|t| {
                let t = t.as_ref();
                match self.tag_id(t) {
                    Some(PAD_TAG_ID) => Err(VocabError::ReservedTag(t.to_string())),
                    Some(id) => Ok(id),
                    None => Err(VocabError::UnknownTag(t.to_string())),
                }
            })
            .collect()
    }
}

/// A labeled sentence in id space, possibly padded for storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSentence {
    pub word_ids: Vec<usize>,
    pub tag_ids: Vec<usize>,
    pub true_length: usize,
}

impl EncodedSentence {
    pub fn encode(tokens: &[String], tags: &[String], vocab: &Vocabulary) -> Result<Self, VocabError> {
        Ok(Self {
            word_ids: vocab.encode_tokens(tokens),
            tag_ids: vocab.encode_tags(tags)?,
            true_length: tokens.len(),
        })
    }

    /// Pads both id lists to `target_len` with the PAD ids.
    pub fn padded(&self, target_len: usize) -> Result<Self, VocabError> {
        Ok(Self {
            word_ids: pad_to(&self.word_ids, target_len, PAD_WORD_ID)?,
            tag_ids: pad_to(&self.tag_ids, target_len, PAD_TAG_ID)?,
            true_length: self.true_length,
        })
    }

    /// The real (unpadded) prefix.
    pub fn real_words(&self) -> &[usize] {
        &self.word_ids[..self.true_length]
    }

    pub fn real_tags(&self) -> &[usize] {
        &self.tag_ids[..self.true_length]
    }
}

pub fn pad_to(ids: &[usize], target_len: usize, pad_id: usize) -> Result<Vec<usize>, VocabError> {
    if ids.len() > target_len {
        return Err(VocabError::TooLong {
            len: ids.len(),
            target: target_len,
        });
    }
    let mut out = Vec::with_capacity(target_len);
    out.extend_from_slice(ids);
    out.resize(target_len, pad_id);
    Ok(out)
}

pub fn longest_sentence(corpus: &LabeledCorpus) -> Result<usize, VocabError> {
    corpus
        .sentences()
        .iter()
        .map(|s| s.len())
        .max()
        .ok_or(VocabError::EmptyCorpus)
}

/// Encodes a corpus and pads every sentence to the longest sentence length.
pub fn encode_padded(corpus: &LabeledCorpus, vocab: &Vocabulary) -> Result<Vec<EncodedSentence>, VocabError> {
    let max_len = longest_sentence(corpus)?;
    corpus
        .sentences()
        .iter()
        .map(|s| EncodedSentence::encode(s.tokens(), s.tags(), vocab)?.padded(max_len))
        .collect()
}

/// `len × n_tags` indicator matrix.
pub fn one_hot<T: Scalar>(tag_ids: &[usize], n_tags: usize) -> Result<Matrix<T>, VocabError> {
    let mut m = Matrix::zeros(tag_ids.len(), n_tags);
    for (row, &id) in tag_ids.iter().enumerate() {
        if id >= n_tags {
            return Err(VocabError::IdOutOfRange { id, size: n_tags });
        }
        m.set(row, id, T::one());
    }
    Ok(m)
}
