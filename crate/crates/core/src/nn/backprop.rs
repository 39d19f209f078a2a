//! Exact gradients of the masked cross-entropy through the output
//! projection, both LSTM directions, and the embedding rows.

use super::loss::PROB_FLOOR;
use super::lstm::{LstmParams, StepCache};
use super::model::Params;
use super::NnError;
use crate::scalar::Scalar;

/// Gradients share the parameter layout.
pub type Gradients<T> = Params<T>;

/// One true-length training sequence. `mask[t] == false` excludes position
/// `t` from the loss (the token still feeds the recurrence).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub word_ids: Vec<usize>,
    pub tag_ids: Vec<usize>,
    pub mask: Vec<bool>,
}

impl Example {
    pub fn new(word_ids: Vec<usize>, tag_ids: Vec<usize>) -> Self {
        let mask = vec![true; word_ids.len()];
        Self {
            word_ids,
            tag_ids,
            mask,
        }
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    fn check<T: Scalar>(&self, params: &Params<T>) -> Result<(), NnError> {
        let n = self.word_ids.len();
        if self.tag_ids.len() != n {
            return Err(NnError::dims("gold tag count", n, self.tag_ids.len()));
        }
        if self.mask.len() != n {
            return Err(NnError::dims("mask length", n, self.mask.len()));
        }
        let n_tags = params.output.w_y.rows();
        if let Some(&id) = self.tag_ids.iter().find(|&&id| id >= n_tags) {
            return Err(NnError::IdOutOfRange { id, size: n_tags });
        }
        Ok(())
    }
}

fn total_count(batch: &[Example]) -> Result<usize, NnError> {
    match batch.iter().map(Example::masked_count).sum() {
        0 => Err(NnError::AllMasked),
        m => Ok(m),
    }
}

fn nll<T: Scalar>(p_gold: T) -> T {
    -p_gold.max(T::lit(PROB_FLOOR)).ln()
}

/// Summed (not averaged) negative log-likelihood over unmasked positions.
fn sentence_nll<T: Scalar>(params: &Params<T>, ex: &Example) -> Result<T, NnError> {
    ex.check(params)?;
    let probs = params.tag_probs(&ex.word_ids)?;
    Ok((0..ex.word_ids.len())
        .filter(|&t| ex.mask[t])
        .map(|t| nll(probs.get(t, ex.tag_ids[t])))
        .sum())
}

/// Mean masked cross-entropy over every unmasked token of the batch.
pub fn batch_loss<T: Scalar>(params: &Params<T>, batch: &[Example]) -> Result<T, NnError> {
    let count = total_count(batch)?;
    let mut total = T::zero();
    for ex in batch {
        total += sentence_nll(params, ex)?;
    }
    Ok(total / T::from_usize(count).expect("count fits in scalar"))
}

/// Overwrites `grads` with the gradient of [`batch_loss`] and returns the loss.
pub fn batch_loss_and_gradients<T: Scalar>(
    params: &Params<T>,
    batch: &[Example],
    grads: &mut Gradients<T>,
) -> Result<T, NnError> {
    let count = total_count(batch)?;
    let scale = T::one() / T::from_usize(count).expect("count fits in scalar");
    grads.tensors_mut().into_iter().for_each(|t| t.fill(T::zero()));
    let mut total = T::zero();
    for ex in batch {
        total += accumulate(params, ex, scale, grads)?;
    }
    Ok(total * scale)
}

/// Loss and gradients for a single sequence.
pub fn backward<T: Scalar>(
    word_ids: &[usize],
    gold_tag_ids: &[usize],
    mask: &[bool],
    params: &Params<T>,
) -> Result<(T, Gradients<T>), NnError> {
    let ex = Example {
        word_ids: word_ids.to_vec(),
        tag_ids: gold_tag_ids.to_vec(),
        mask: mask.to_vec(),
    };
    let mut grads = params.zeros_like();
    let loss = batch_loss_and_gradients(params, std::slice::from_ref(&ex), &mut grads)?;
    Ok((loss, grads))
}

/// Adds `scale · ∂(Σ nll)/∂θ` for one sequence into `grads`; returns Σ nll.
fn accumulate<T: Scalar>(params: &Params<T>, ex: &Example, scale: T, grads: &mut Gradients<T>) -> Result<T, NnError> {
    ex.check(params)?;
    let n = ex.word_ids.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let pass = params.forward_pass(&ex.word_ids)?;
    let h = params.forward.hidden_dim();
    let n_tags = params.output.w_y.rows();
    let floor = T::lit(PROB_FLOOR);

    let mut loss = T::zero();
    // Hidden-state gradients from the output layer, by input position.
    let mut d_fwd = vec![vec![T::zero(); h]; n];
    let mut d_bwd = vec![vec![T::zero(); h]; n];
    let mut d_logits = vec![T::zero(); n_tags];
    let mut d_merged = vec![T::zero(); 2 * h];
    for t in (0..n).filter(|&t| ex.mask[t]) {
        let row = pass.probs.row(t);
        let gold = ex.tag_ids[t];
        loss += nll(row[gold]);
        if row[gold] < floor {
            // The clamp is flat here.
            continue;
        }
        for (k, d) in d_logits.iter_mut().enumerate() {
            let hot = if k == gold { T::one() } else { T::zero() };
            *d = (row[k] - hot) * scale;
        }
        grads.output.w_y.add_outer(&d_logits, &pass.merged[t]);
        for (b, d) in grads.output.b_y.as_mut_slice().iter_mut().zip(&d_logits) {
            *b += *d;
        }
        d_merged.fill(T::zero());
        params.output.w_y.matvec_transposed_acc(&d_logits, &mut d_merged);
        d_fwd[t].copy_from_slice(&d_merged[..h]);
        d_bwd[t].copy_from_slice(&d_merged[h..]);
    }

    // Forward direction processes positions 0..n; step k is position k.
    let dx_fwd = through_time(&params.forward, &mut grads.forward, &pass.fwd, &d_fwd);
    // Backward direction processes n-1..0; step k is position n-1-k.
    d_bwd.reverse();
    let mut dx_bwd = through_time(&params.backward, &mut grads.backward, &pass.bwd, &d_bwd);
    dx_bwd.reverse();

    for (t, &id) in ex.word_ids.iter().enumerate() {
        let row = grads.embedding.row_mut(id);
        for ((g, a), b) in row.iter_mut().zip(&dx_fwd[t]).zip(&dx_bwd[t]) {
            *g += *a + *b;
        }
    }
    Ok(loss)
}

/// Backpropagation through one direction. `d_hidden[k]` is the external
/// gradient on the hidden output of step `k` (processing order). Returns the
/// input gradient of every step, also in processing order.
fn through_time<T: Scalar>(
    p: &LstmParams<T>,
    g: &mut LstmParams<T>,
    caches: &[StepCache<T>],
    d_hidden: &[Vec<T>],
) -> Vec<Vec<T>> {
    let h = p.hidden_dim();
    let one = T::one();
    let mut dx = vec![Vec::new(); caches.len()];
    let mut da_next = vec![T::zero(); h];
    let mut dc_next = vec![T::zero(); h];
    let mut d_pre_f = vec![T::zero(); h];
    let mut d_pre_i = vec![T::zero(); h];
    let mut d_pre_c = vec![T::zero(); h];
    let mut d_pre_o = vec![T::zero(); h];

    for k in (0..caches.len()).rev() {
        let s = &caches[k];
        for j in 0..h {
            let da = d_hidden[k][j] + da_next[j];
            let (f, i, cand, o, tc) = (s.forget[j], s.update[j], s.candidate[j], s.output[j], s.tanh_c[j]);
            let dc = da * o * (one - tc * tc) + dc_next[j];
            d_pre_o[j] = da * tc * o * (one - o);
            d_pre_i[j] = dc * cand * i * (one - i);
            d_pre_c[j] = dc * i * (one - cand * cand);
            d_pre_f[j] = dc * s.c_prev[j] * f * (one - f);
            dc_next[j] = dc * f;
        }
        let mut dz = vec![T::zero(); s.z.len()];
        for (w, gw, gb, d) in [
            (&p.w_forget, &mut g.w_forget, &mut g.b_forget, &d_pre_f),
            (&p.w_update, &mut g.w_update, &mut g.b_update, &d_pre_i),
            (&p.w_candidate, &mut g.w_candidate, &mut g.b_candidate, &d_pre_c),
            (&p.w_output, &mut g.w_output, &mut g.b_output, &d_pre_o),
        ] {
            gw.add_outer(d, &s.z);
            for (b, v) in gb.as_mut_slice().iter_mut().zip(d.iter()) {
                *b += *v;
            }
            w.matvec_transposed_acc(d, &mut dz);
        }
        da_next.copy_from_slice(&dz[..h]);
        dx[k] = dz.split_off(h);
    }
    dx
}
