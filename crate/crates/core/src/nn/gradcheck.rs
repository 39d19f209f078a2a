//! Central finite-difference verification of the analytic gradients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::backprop::{batch_loss, batch_loss_and_gradients, Example, Gradients};
use super::model::{Blstm, Hyper, Params, TENSOR_NAMES};
use super::NnError;
use crate::corpus::{LabeledCorpus, LabeledSentence};
use crate::scalar::Scalar;
use crate::vocab::Vocabulary;

/// Relative errors below this denominator are measured against it instead.
const DENOM_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Tensor name and flat index of the worst component.
    pub worst: (&'static str, usize),
    pub parameters_checked: usize,
}

/// `(L(θ+ε) − L(θ−ε)) / 2ε` for every scalar parameter.
pub fn numeric_gradients<T: Scalar>(params: &Params<T>, batch: &[Example], eps: T) -> Result<Gradients<T>, NnError> {
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(NnError::InvalidEpsilon);
    }
    let mut probe = params.clone();
    let mut out = params.zeros_like();
    let two_eps = eps + eps;
    for ti in 0..TENSOR_NAMES.len() {
        for k in 0..params.tensors()[ti].len() {
            let orig = params.tensors()[ti].as_slice()[k];
            probe.tensors_mut()[ti].as_mut_slice()[k] = orig + eps;
            let plus = batch_loss(&probe, batch)?;
            probe.tensors_mut()[ti].as_mut_slice()[k] = orig - eps;
            let minus = batch_loss(&probe, batch)?;
            probe.tensors_mut()[ti].as_mut_slice()[k] = orig;
            out.tensors_mut()[ti].as_mut_slice()[k] = (plus - minus) / two_eps;
        }
    }
    Ok(out)
}

/// `max |a − n| / max(|a| + |n|, 1e-12)` over all components.
pub fn max_relative_error<T: Scalar>(analytic: &Gradients<T>, numeric: &Gradients<T>) -> GradCheckReport {
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: (TENSOR_NAMES[0], 0),
        parameters_checked: 0,
    };
    for (ti, (a, n)) in analytic.tensors().iter().zip(numeric.tensors()).enumerate() {
        for (k, (&ga, &gn)) in a.as_slice().iter().zip(n.as_slice()).enumerate() {
            let (ga, gn) = (ga.to_f64_lossless(), gn.to_f64_lossless());
            let err = (ga - gn).abs() / (ga.abs() + gn.abs()).max(DENOM_FLOOR);
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst = (TENSOR_NAMES[ti], k);
            }
            report.parameters_checked += 1;
        }
    }
    report
}

pub fn gradient_check<T: Scalar>(model: &Blstm<T>, batch: &[Example], eps: T) -> Result<GradCheckReport, NnError> {
    let numeric = numeric_gradients(model.params(), batch, eps)?;
    let mut analytic = model.params().zeros_like();
    batch_loss_and_gradients(model.params(), batch, &mut analytic)?;
    Ok(max_relative_error(&analytic, &numeric))
}

/// Small seeded model for gradient checking: three words, three output
/// classes (`-PAD-` plus two tags), embed 3, hidden 4, weights uniform in
/// ±0.5, and one 3-token sentence.
pub fn fixture(seed: u64) -> (Blstm<f64>, Vec<Example>) {
    let corpus = LabeledCorpus::new(vec![LabeledSentence::from_pairs([
        ("ali", "NOUN"),
        ("topu", "NOUN"),
        ("attı", "VERB"),
    ])]);
    let vocab = Vocabulary::build(&corpus).expect("fixture corpus is non-empty");
    let hyper = Hyper {
        embed_dim: 3,
        hidden_dim: 4,
        n_tags: vocab.tag_count(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Params::<f64>::zeros(hyper, vocab.word_count());
    for t in params.tensors_mut() {
        super::fill_uniform(t, 0.5, &mut rng);
    }
    let sentence = &corpus.sentences()[0];
    let example = Example::new(
        vocab.encode_tokens(sentence.tokens()),
        vocab
            .encode_tags(sentence.tags())
            .expect("fixture tags are in the vocabulary"),
    );
    let model = Blstm::new(params, vocab).expect("fixture shapes are consistent");
    (model, vec![example])
}
