//! Part-of-speech tagging for Turkish with a bidirectional LSTM.
//!
//! The numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the double-precision types used by training, the
//! service and the command line.

pub mod corpus;
pub mod hmm;
pub mod matrix;
pub mod nn;
pub mod preprocess;
pub mod scalar;
pub mod tagger;
pub mod trainer;
pub mod vocab;

pub use corpus::{LabeledCorpus, LabeledSentence};
pub use matrix::Matrix;
pub use nn::{Blstm, NnError, SequenceScorer};
pub use scalar::Scalar;
pub use tagger::{TaggedDocument, TaggedSentence};
pub use trainer::{Correction, TrainConfig};
pub use vocab::Vocabulary;

/// Double-precision model; the default everywhere.
pub type BlstmModel = Blstm<f64>;
/// Single-precision model, e.g. for memory-constrained inference.
pub type BlstmModelF32 = Blstm<f32>;
pub type Params = nn::Params<f64>;
pub type Gradients = nn::Gradients<f64>;
/// `seq_len × n_tags` rows of tag probabilities.
pub type TagProbabilities = Matrix<f64>;
