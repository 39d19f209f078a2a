//! Bidirectional LSTM tagger: forward pass, loss, backpropagation through
//! time, finite-difference verification and the binary model format.

mod backprop;
pub mod gradcheck;
mod io;
mod loss;
mod lstm;
mod model;

use rand::Rng;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::vocab::{VocabError, Vocabulary, FIRST_TAG_ID};

pub use backprop::{backward, batch_loss, batch_loss_and_gradients, Example, Gradients};
pub use gradcheck::{gradient_check, max_relative_error, numeric_gradients, GradCheckReport};
pub use io::{deserialize, serialize, FORMAT_VERSION, MAGIC};
pub use loss::{masked_cross_entropy, softmax, PROB_FLOOR};
pub use lstm::{lstm_cell, lstm_sequence, Direction, LstmParams, LstmState};
pub use model::{Blstm, Hyper, OutputParams, Params, TENSOR_NAMES};

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("id {id} out of range for {size} rows")]
    IdOutOfRange { id: usize, size: usize },
    #[error("every position is masked out")]
    AllMasked,
    #[error("finite-difference step must be positive and finite")]
    InvalidEpsilon,
    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersionMismatch { found: u8, expected: u8 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

impl NnError {
    pub(crate) fn dims(what: &'static str, expected: usize, got: usize) -> Self {
        NnError::DimensionMismatch { what, expected, got }
    }
}

/// Anything that turns a true-length id sequence into per-token tag
/// distributions. Implemented by [`Blstm`]; test doubles implement it too.
pub trait SequenceScorer<T: Scalar> {
    fn vocabulary(&self) -> &Vocabulary;

    /// `len × tag_count` matrix whose rows are probability distributions.
    fn tag_probs(&self, word_ids: &[usize]) -> Result<Matrix<T>, NnError>;
}

/// Per-row argmax over real tags (`-PAD-` is never chosen); ties go to the
/// lowest tag id. Returns `(tag id, probability)` per row.
pub fn best_real_tags<T: Scalar>(probs: &Matrix<T>) -> Vec<(usize, T)> {
    probs
        .iter_rows()
        .map(|row| {
            let mut best = (FIRST_TAG_ID, row[FIRST_TAG_ID]);
            for (id, &p) in row.iter().enumerate().skip(FIRST_TAG_ID + 1) {
                if p > best.1 {
                    best = (id, p);
                }
            }
            best
        })
        .collect()
}

pub(crate) fn fill_glorot<T: Scalar, R: Rng>(m: &mut Matrix<T>, rng: &mut R) {
    let r = (6.0 / (m.rows() + m.cols()) as f64).sqrt();
    fill_uniform(m, r, rng);
}

/// Overwrites every entry with a draw from `U[-r, r]`.
pub fn fill_uniform<T: Scalar, R: Rng>(m: &mut Matrix<T>, r: f64, rng: &mut R) {
    for v in m.as_mut_slice() {
        *v = T::from_f64_rounded(rng.random_range(-r..=r));
    }
}
