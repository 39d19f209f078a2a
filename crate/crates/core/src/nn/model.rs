use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::softmax_in_place;
use super::lstm::{self, Direction, LstmParams, StepCache};
use super::{NnError, SequenceScorer};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::vocab::{EncodedSentence, Vocabulary};

/// Parameter blocks in model-file order.
pub const TENSOR_NAMES: [&str; 19] = [
    "embedding",
    "forward.w_forget",
    "forward.w_update",
    "forward.w_candidate",
    "forward.w_output",
    "forward.b_forget",
    "forward.b_update",
    "forward.b_candidate",
    "forward.b_output",
    "backward.w_forget",
    "backward.w_update",
    "backward.w_candidate",
    "backward.w_output",
    "backward.b_forget",
    "backward.b_update",
    "backward.b_candidate",
    "backward.b_output",
    "output.w_y",
    "output.b_y",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyper {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub n_tags: usize,
}

/// Tag projection over the concatenated `[forward, backward]` hidden state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputParams<T> {
    /// `n_tags × 2·hidden`
    pub w_y: Matrix<T>,
    /// `n_tags × 1`
    pub b_y: Matrix<T>,
}

/// Every trainable tensor. Also the shape of a gradient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    /// `vocab × embed`; row 0 is PAD, row 1 is OOV.
    pub embedding: Matrix<T>,
    pub forward: LstmParams<T>,
    pub backward: LstmParams<T>,
    pub output: OutputParams<T>,
}

impl<T: Scalar> Params<T> {
    pub fn zeros(hyper: Hyper, vocab_size: usize) -> Self {
        Self {
            embedding: Matrix::zeros(vocab_size, hyper.embed_dim),
            forward: LstmParams::zeros(hyper.embed_dim, hyper.hidden_dim),
            backward: LstmParams::zeros(hyper.embed_dim, hyper.hidden_dim),
            output: OutputParams {
                w_y: Matrix::zeros(hyper.n_tags, 2 * hyper.hidden_dim),
                b_y: Matrix::zeros(hyper.n_tags, 1),
            },
        }
    }

    pub fn init<R: Rng>(hyper: Hyper, vocab_size: usize, rng: &mut R) -> Self {
        let mut embedding = Matrix::zeros(vocab_size, hyper.embed_dim);
        super::fill_glorot(&mut embedding, rng);
        let forward = LstmParams::init(hyper.embed_dim, hyper.hidden_dim, rng);
        let backward = LstmParams::init(hyper.embed_dim, hyper.hidden_dim, rng);
        let mut w_y = Matrix::zeros(hyper.n_tags, 2 * hyper.hidden_dim);
        super::fill_glorot(&mut w_y, rng);
        Self {
            embedding,
            forward,
            backward,
            output: OutputParams {
                w_y,
                b_y: Matrix::zeros(hyper.n_tags, 1),
            },
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|t| t.fill(T::zero()));
        z
    }

    pub fn tensors(&self) -> [&Matrix<T>; 19] {
        let [f0, f1, f2, f3, f4, f5, f6, f7] = self.forward.tensors();
        let [g0, g1, g2, g3, g4, g5, g6, g7] = self.backward.tensors();
        [
            &self.embedding,
            f0,
            f1,
            f2,
            f3,
            f4,
            f5,
            f6,
            f7,
            g0,
            g1,
            g2,
            g3,
            g4,
            g5,
            g6,
            g7,
            &self.output.w_y,
            &self.output.b_y,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix<T>; 19] {
        let [f0, f1, f2, f3, f4, f5, f6, f7] = self.forward.tensors_mut();
        let [g0, g1, g2, g3, g4, g5, g6, g7] = self.backward.tensors_mut();
        [
            &mut self.embedding,
            f0,
            f1,
            f2,
            f3,
            f4,
            f5,
            f6,
            f7,
            g0,
            g1,
            g2,
            g3,
            g4,
            g5,
            g6,
            g7,
            &mut self.output.w_y,
            &mut self.output.b_y,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn hyper(&self) -> Hyper {
        Hyper {
            embed_dim: self.embedding.cols(),
            hidden_dim: self.forward.hidden_dim(),
            n_tags: self.output.w_y.rows(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    /// Checks every block against `hyper` and the vocabulary sizes.
    pub fn validate(&self, hyper: Hyper, vocab_size: usize) -> Result<(), NnError> {
        let expected = Params::<T>::zeros(hyper, vocab_size);
        for (name_idx, (got, want)) in self.tensors().iter().zip(expected.tensors()).enumerate() {
            if got.shape() != want.shape() {
                let what = TENSOR_NAMES[name_idx];
                let (g, w) = if got.rows() != want.rows() {
                    (got.rows(), want.rows())
                } else {
                    (got.cols(), want.cols())
                };
                return Err(NnError::dims(what, w, g));
            }
        }
        Ok(())
    }

    /// Token embeddings for a true-length sequence.
    pub(crate) fn embed(&self, word_ids: &[usize]) -> Result<Vec<&[T]>, NnError> {
        word_ids
            .iter()
            .map(|&id| {
                if id < self.embedding.rows() {
                    Ok(self.embedding.row(id))
                } else {
                    Err(NnError::IdOutOfRange {
                        id,
                        size: self.embedding.rows(),
                    })
                }
            })
            .collect()
    }

    pub(crate) fn forward_pass(&self, word_ids: &[usize]) -> Result<ForwardPass<T>, NnError> {
        let xs = self.embed(word_ids)?;
        let fwd = lstm::run(&xs, &self.forward, Direction::Forward);
        let bwd = lstm::run(&xs, &self.backward, Direction::Backward);
        let n = word_ids.len();
        let h = self.forward.hidden_dim();
        let n_tags = self.output.w_y.rows();

        let mut merged = Vec::with_capacity(n);
        let mut probs = Matrix::zeros(n, n_tags);
        for t in 0..n {
            let mut hcat = Vec::with_capacity(2 * h);
            hcat.extend_from_slice(&fwd[t].a);
            // backward caches are in processing order: position t is step n-1-t
            hcat.extend_from_slice(&bwd[n - 1 - t].a);
            let row = probs.row_mut(t);
            self.output
                .w_y
                .matvec_into(&hcat, Some(self.output.b_y.as_slice()), row);
            softmax_in_place(row);
            merged.push(hcat);
        }
        Ok(ForwardPass {
            fwd,
            bwd,
            merged,
            probs,
        })
    }

    pub fn tag_probs(&self, word_ids: &[usize]) -> Result<Matrix<T>, NnError> {
        Ok(self.forward_pass(word_ids)?.probs)
    }

    /// The mirror-image network: directions exchanged and the output
    /// projection's column halves swapped. On reversed input it yields the
    /// reversed probability rows.
    pub fn with_directions_swapped(&self) -> Self {
        let mut out = self.clone();
        std::mem::swap(&mut out.forward, &mut out.backward);
        let h = self.forward.hidden_dim();
        for r in 0..self.output.w_y.rows() {
            let row = out.output.w_y.row_mut(r);
            let (a, b) = row.split_at_mut(h);
            a.swap_with_slice(b);
        }
        out
    }
}

pub(crate) struct ForwardPass<T> {
    pub fwd: Vec<StepCache<T>>,
    pub bwd: Vec<StepCache<T>>,
    /// `[a_fwd, a_bwd]` per position.
    pub merged: Vec<Vec<T>>,
    pub probs: Matrix<T>,
}

/// A trained tagger: parameters plus the dictionaries that give them meaning.
#[derive(Clone, Debug, PartialEq)]
pub struct Blstm<T> {
    params: Params<T>,
    vocab: Vocabulary,
}

impl<T: Scalar> Blstm<T> {
    pub fn new(params: Params<T>, vocab: Vocabulary) -> Result<Self, NnError> {
        let hyper = params.hyper();
        if hyper.n_tags != vocab.tag_count() {
            return Err(NnError::dims("tag count", vocab.tag_count(), hyper.n_tags));
        }
        params.validate(hyper, vocab.word_count())?;
        if params.backward.input_dim() != hyper.embed_dim || params.forward.input_dim() != hyper.embed_dim {
            return Err(NnError::dims("lstm input", hyper.embed_dim, params.forward.input_dim()));
        }
        Ok(Self { params, vocab })
    }

    /// Fresh model with random initialization drawn from `rng`.
    pub fn init<R: Rng>(vocab: Vocabulary, embed_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let hyper = Hyper {
            embed_dim,
            hidden_dim,
            n_tags: vocab.tag_count(),
        };
        let params = Params::init(hyper, vocab.word_count(), rng);
        Self { params, vocab }
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    /// Mutable access for optimizers. Shapes must be left intact.
    pub fn params_mut(&mut self) -> &mut Params<T> {
        &mut self.params
    }

    pub fn into_parts(self) -> (Params<T>, Vocabulary) {
        (self.params, self.vocab)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn hyper(&self) -> Hyper {
        self.params.hyper()
    }

    /// Per-token tag distributions for a true-length sequence.
    pub fn tag_probs(&self, word_ids: &[usize]) -> Result<Matrix<T>, NnError> {
        self.params.tag_probs(word_ids)
    }

    /// One probability matrix per stored sentence, each computed over the
    /// sentence's true length only, so padding never affects the result.
    pub fn tag_probs_batch(&self, batch: &[EncodedSentence]) -> Result<Vec<Matrix<T>>, NnError> {
        batch.iter().map(|s| self.tag_probs(s.real_words())).collect()
    }
}

impl<T: Scalar> SequenceScorer<T> for Blstm<T> {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn tag_probs(&self, word_ids: &[usize]) -> Result<Matrix<T>, NnError> {
        Blstm::tag_probs(self, word_ids)
    }
}
