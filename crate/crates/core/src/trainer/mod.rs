//! Mini-batch training with Adam, data splitting, evaluation, and merging
//! user corrections back into the training corpus.

mod adam;
mod corrections;
mod eval;
mod split;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledCorpus;
use crate::nn::{batch_loss_and_gradients, Blstm, Example, NnError};
use crate::scalar::Scalar;
use crate::vocab::{VocabError, Vocabulary};

pub use adam::Adam;
pub use corrections::{merge_corrections, Correction};
pub use eval::{evaluate, EvalReport, TagStats};
pub use split::train_test_split;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("corpus too small to split: {train} train / {test} test sentences")]
    TooSmall { train: usize, test: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown tag {0:?}")]
    UnknownTag(String),
    #[error("correction references unknown analysis {0:?}")]
    DanglingReference(String),
    #[error("correction index out of range: analysis {analysis_id:?}, sentence {sentence_index}, token {token_index}")]
    IndexOutOfRange {
        analysis_id: String,
        sentence_index: usize,
        token_index: usize,
    },
    #[error(transparent)]
    Model(#[from] NnError),
    #[error(transparent)]
    Vocab(VocabError),
}

impl From<VocabError> for TrainError {
    fn from(e: VocabError) -> Self {
        match e {
            VocabError::EmptyCorpus => TrainError::EmptyCorpus,
            VocabError::UnknownTag(t) | VocabError::ReservedTag(t) => TrainError::UnknownTag(t),
            other => TrainError::Vocab(other),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub split_ratio: f64,
    pub embed_dim: usize,
    pub hidden_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 42,
            split_ratio: 0.8,
            embed_dim: 64,
            hidden_dim: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::InvalidConfig(msg.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad("adam_epsilon must be positive");
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad("split_ratio must lie strictly between 0 and 1");
        }
        if self.embed_dim == 0 || self.hidden_dim == 0 {
            return bad("embed_dim and hidden_dim must be positive");
        }
        Ok(())
    }
}

/// A trained model and the mean token loss of every epoch.
#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub model: Blstm<T>,
    pub loss_history: Vec<f64>,
}

/// Trains from scratch. Fully deterministic in `(corpus, config)`.
pub fn train<T: Scalar>(corpus: &LabeledCorpus, config: &TrainConfig) -> Result<TrainOutcome<T>, TrainError> {
    train_with_progress(corpus, config, |_, _| {})
}

/// As [`train`], calling `on_epoch(epoch, mean_loss)` after each epoch.
pub fn train_with_progress<T: Scalar>(
    corpus: &LabeledCorpus,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome<T>, TrainError> {
    config.validate()?;
    let vocab = Vocabulary::build(corpus)?;
    let examples = encode_examples(corpus, &vocab)?;
    if examples.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = Blstm::<T>::init(vocab, config.embed_dim, config.hidden_dim, &mut rng);
    let mut adam = Adam::new(model.params(), config);
    let mut grads = model.params().zeros_like();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut batch: Vec<Example> = Vec::with_capacity(config.batch_size);
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut token_sum = 0usize;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| examples[i].clone()));
            let tokens: usize = batch.iter().map(Example::masked_count).sum();
            let loss = batch_loss_and_gradients(model.params(), &batch, &mut grads)?;
            adam.step(model.params_mut(), &grads);
            loss_sum += loss.to_f64_lossless() * tokens as f64;
            token_sum += tokens;
        }
        let mean = loss_sum / token_sum as f64;
        on_epoch(epoch, mean);
        history.push(mean);
    }
    Ok(TrainOutcome {
        model,
        loss_history: history,
    })
}

/// True-length examples; empty sentences are skipped.
pub fn encode_examples(corpus: &LabeledCorpus, vocab: &Vocabulary) -> Result<Vec<Example>, TrainError> {
    corpus
        .sentences()
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            Ok(Example::new(
                vocab.encode_tokens(s.tokens()),
                vocab.encode_tags(s.tags())?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabeledSentence;

    fn tiny() -> LabeledCorpus {
        LabeledCorpus::new(vec![
            LabeledSentence::from_pairs([("ben", "PRON"), ("geldim", "VERB")]),
            LabeledSentence::from_pairs([("sen", "PRON"), ("gittin", "VERB")]),
            LabeledSentence::from_pairs([("kedi", "NOUN"), ("uyudu", "VERB")]),
            LabeledSentence::from_pairs([("büyük", "ADJ"), ("kedi", "NOUN"), ("geldi", "VERB")]),
            LabeledSentence::from_pairs([("o", "PRON"), ("uyudu", "VERB")]),
        ])
    }

    fn small_config(seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: 15,
            batch_size: 2,
            learning_rate: 0.01,
            seed,
            embed_dim: 8,
            hidden_dim: 6,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig {
                epochs: 0,
                ..Default::default()
            },
            TrainConfig {
                batch_size: 0,
                ..Default::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
            TrainConfig {
                split_ratio: 1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(bad.validate(), Err(TrainError::InvalidConfig(_))));
        }
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let r = train::<f64>(&LabeledCorpus::default(), &small_config(1));
        assert_eq!(r.unwrap_err(), TrainError::EmptyCorpus);
    }

    #[test]
    fn loss_decreases_across_seeds() {
        for seed in 0..5 {
            let out = train::<f64>(&tiny(), &small_config(seed)).unwrap();
            let h = &out.loss_history;
            assert_eq!(h.len(), 15);
            assert!(h.last() < h.first(), "seed {seed}: {h:?}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = train::<f64>(&tiny(), &small_config(9)).unwrap();
        let b = train::<f64>(&tiny(), &small_config(9)).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.loss_history, b.loss_history);
        let c = train::<f64>(&tiny(), &small_config(10)).unwrap();
        assert_ne!(a.model, c.model);
    }

    #[test]
    fn single_precision_training_runs() {
        let out = train::<f32>(&tiny(), &small_config(3)).unwrap();
        assert!(out.model.params().is_finite());
        assert!(out.loss_history.last() < out.loss_history.first());
    }
}
