use super::NnError;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Probabilities are clamped here before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Max-shifted softmax; safe for large logits.
pub fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place<T: Scalar>(z: &mut [T]) {
    let Some(max) = z.iter().copied().reduce(T::max) else {
        return;
    };
    let mut sum = T::zero();
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}

/// Index of the hot entry in a one-hot row.
pub(crate) fn hot_index<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Mean negative log-likelihood of the gold tags over unmasked positions.
pub fn masked_cross_entropy<T: Scalar>(probs: &Matrix<T>, targets: &Matrix<T>, mask: &[bool]) -> Result<T, NnError> {
    if probs.shape() != targets.shape() {
        return Err(NnError::dims("target rows", probs.rows(), targets.rows()));
    }
    if mask.len() != probs.rows() {
        return Err(NnError::dims("mask length", probs.rows(), mask.len()));
    }
    let floor = T::lit(PROB_FLOOR);
    let mut total = T::zero();
    let mut count = 0usize;
    for ((p_row, t_row), _) in probs.iter_rows().zip(targets.iter_rows()).zip(mask).filter(|(_, &m)| m) {
        total -= p_row[hot_index(t_row)].max(floor).ln();
        count += 1;
    }
    if count == 0 {
        return Err(NnError::AllMasked);
    }
    Ok(total / T::from_usize(count).expect("count fits in scalar"))
}
