use std::fmt;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::corpus::LabeledCorpus;
use crate::nn::{best_real_tags, SequenceScorer};
use crate::scalar::Scalar;
use crate::vocab::FIRST_TAG_ID;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagStats {
    pub tag: String,
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tokens: usize,
    pub token_accuracy: f64,
    /// Real tags in id order.
    pub per_tag: Vec<TagStats>,
    pub oov_tokens: usize,
    /// `None` when the corpus has no out-of-vocabulary tokens.
    pub oov_accuracy: Option<f64>,
    /// `confusion[gold][predicted]` over all tag ids, `-PAD-` included.
    pub confusion: Vec<Vec<usize>>,
}

/// Greedy per-token argmax against gold tags.
pub fn evaluate<T: Scalar, M: SequenceScorer<T> + ?Sized>(
    model: &M,
    corpus: &LabeledCorpus,
) -> Result<EvalReport, TrainError> {
    if corpus.token_count() == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let vocab = model.vocabulary();
    let n_tags = vocab.tag_count();
    let mut confusion = vec![vec![0usize; n_tags]; n_tags];
    let (mut correct, mut total, mut oov_correct, mut oov_total) = (0, 0, 0, 0);

    for sentence in corpus.sentences().iter().filter(|s| !s.is_empty()) {
        let gold = vocab.encode_tags(sentence.tags())?;
        let ids = vocab.encode_tokens(sentence.tokens());
        let probs = model.tag_probs(&ids)?;
        for ((&g, (p, _)), token) in gold.iter().zip(best_real_tags(&probs)).zip(sentence.tokens()) {
            confusion[g][p] += 1;
            total += 1;
            let hit = g == p;
            correct += hit as usize;
            if vocab.is_oov(token) {
                oov_total += 1;
                oov_correct += hit as usize;
            }
        }
    }

    let per_tag = (FIRST_TAG_ID..n_tags)
        .map(|t| {
            let support: usize = confusion[t].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[t]).sum();
            let tp = confusion[t][t];
            TagStats {
                tag: vocab.tag(t).unwrap_or_default().to_string(),
                precision: ratio(tp, predicted),
                recall: ratio(tp, support),
                support,
            }
        })
        .collect();

    Ok(EvalReport {
        tokens: total,
        token_accuracy: ratio(correct, total),
        per_tag,
        oov_tokens: oov_total,
        oov_accuracy: (oov_total > 0).then(|| ratio(oov_correct, oov_total)),
        confusion,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tokens          {}", self.tokens)?;
        writeln!(f, "token accuracy  {:.4}", self.token_accuracy)?;
        match self.oov_accuracy {
            Some(a) => writeln!(f, "oov accuracy    {a:.4} ({} tokens)", self.oov_tokens)?,
            None => writeln!(f, "oov accuracy    n/a (0 tokens)")?,
        }
        let width = self
            .per_tag
            .iter()
            .map(|s| s.tag.chars().count())
            .max()
            .unwrap_or(3)
            .max(3);
        writeln!(f)?;
        writeln!(f, "{:<width$}  precision  recall  support", "tag")?;
        for s in &self.per_tag {
            writeln!(
                f,
                "{:<width$}  {:>9.4}  {:>6.4}  {:>7}",
                s.tag, s.precision, s.recall, s.support
            )?;
        }
        Ok(())
    }
}
