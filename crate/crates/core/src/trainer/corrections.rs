use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::corpus::{LabeledCorpus, LabeledSentence};
use crate::tagger::TaggedDocument;

/// A user's fix to one predicted tag of a stored analysis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub id: String,
    pub analysis_id: String,
    pub sentence_index: usize,
    pub token_index: usize,
    pub original_tag: String,
    pub corrected_tag: String,
    pub submitted_at: DateTime<Utc>,
}

/// Appends one labeled sentence per corrected analysis sentence: the
/// predicted tags with corrected positions overwritten. For repeated
/// corrections of the same token the latest `submitted_at` wins (input order
/// breaks exact ties). New sentences are ordered by analysis id, then
/// sentence index.
pub fn merge_corrections<'a, F>(
    corpus: &LabeledCorpus,
    corrections: &[Correction],
    lookup: F,
) -> Result<LabeledCorpus, TrainError>
where
    F: Fn(&str) -> Option<&'a TaggedDocument>,
{
    let mut latest: BTreeMap<(&str, usize, usize), &Correction> = BTreeMap::new();
    for c in corrections {
        let key = (c.analysis_id.as_str(), c.sentence_index, c.token_index);
        match latest.get(&key) {
            Some(prev) if prev.submitted_at > c.submitted_at => {}
            _ => {
                latest.insert(key, c);
            }
        }
    }

    let mut grouped: BTreeMap<(&str, usize), Vec<&Correction>> = BTreeMap::new();
    for ((analysis, sentence, _), c) in latest {
        grouped.entry((analysis, sentence)).or_default().push(c);
    }

    let mut merged = corpus.clone();
    for ((analysis_id, sentence_index), fixes) in grouped {
        let doc = lookup(analysis_id).ok_or_else(|| TrainError::DanglingReference(analysis_id.to_string()))?;
        let out_of_range = |token_index| TrainError::IndexOutOfRange {
            analysis_id: analysis_id.to_string(),
            sentence_index,
            token_index,
        };
        let tagged = doc
            .sentences
            .get(sentence_index)
            .ok_or_else(|| out_of_range(fixes[0].token_index))?;
        let mut sentence = LabeledSentence::new(tagged.tokens.clone(), tagged.tags.clone())
            .map_err(|_| out_of_range(fixes[0].token_index))?;
        for fix in fixes {
            let slot = sentence
                .tags_mut()
                .get_mut(fix.token_index)
                .ok_or_else(|| out_of_range(fix.token_index))?;
            *slot = fix.corrected_tag.clone();
        }
        merged.push(sentence);
    }
    Ok(merged)
}
