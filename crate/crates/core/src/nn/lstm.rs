//! A single LSTM layer: gated cell update and directional sequence runs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NnError;
use crate::matrix::Matrix;
use crate::scalar::{sigmoid, Scalar};

/// Weights of one LSTM direction. Each gate matrix is
/// `hidden × (hidden + input)` and acts on `[a_prev, x]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmParams<T> {
    pub w_forget: Matrix<T>,
    pub w_update: Matrix<T>,
    pub w_candidate: Matrix<T>,
    pub w_output: Matrix<T>,
    pub b_forget: Matrix<T>,
    pub b_update: Matrix<T>,
    pub b_candidate: Matrix<T>,
    pub b_output: Matrix<T>,
}

impl<T: Scalar> LstmParams<T> {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let w = || Matrix::zeros(hidden_dim, hidden_dim + input_dim);
        let b = || Matrix::zeros(hidden_dim, 1);
        Self {
            w_forget: w(),
            w_update: w(),
            w_candidate: w(),
            w_output: w(),
            b_forget: b(),
            b_update: b(),
            b_candidate: b(),
            b_output: b(),
        }
    }

    /// Glorot-uniform weights, zero biases except a forget bias of 1.
    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden_dim);
        for w in [&mut p.w_forget, &mut p.w_update, &mut p.w_candidate, &mut p.w_output] {
            super::fill_glorot(w, rng);
        }
        p.b_forget.fill(T::one());
        p
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_forget.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_forget.cols() - self.hidden_dim()
    }

    /// Weight matrices then bias columns, in model-file order.
    pub fn tensors(&self) -> [&Matrix<T>; 8] {
        [
            &self.w_forget,
            &self.w_update,
            &self.w_candidate,
            &self.w_output,
            &self.b_forget,
            &self.b_update,
            &self.b_candidate,
            &self.b_output,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix<T>; 8] {
        [
            &mut self.w_forget,
            &mut self.w_update,
            &mut self.w_candidate,
            &mut self.w_output,
            &mut self.b_forget,
            &mut self.b_update,
            &mut self.b_candidate,
            &mut self.b_output,
        ]
    }

    pub(crate) fn check_shapes(&self) -> Result<(), NnError> {
        let w_shape = self.w_forget.shape();
        let h = w_shape.0;
        if w_shape.1 < h {
            return Err(NnError::dims("lstm weight columns", h, w_shape.1));
        }
        for w in [&self.w_update, &self.w_candidate, &self.w_output] {
            if w.shape() != w_shape {
                return Err(NnError::dims("lstm gate weight rows", h, w.rows()));
            }
        }
        for b in [&self.b_forget, &self.b_update, &self.b_candidate, &self.b_output] {
            if b.shape() != (h, 1) {
                return Err(NnError::dims("lstm bias length", h, b.rows()));
            }
        }
        Ok(())
    }
}

/// Hidden activation and cell state after a step.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState<T> {
    pub a: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Scalar> LstmState<T> {
    pub fn zeros(hidden_dim: usize) -> Self {
        Self {
            a: vec![T::zero(); hidden_dim],
            c: vec![T::zero(); hidden_dim],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    /// Input positions in processing order.
    pub(crate) fn positions(self, len: usize) -> Box<dyn Iterator<Item = usize>> {
        match self {
            Direction::Forward => Box::new(0..len),
            Direction::Backward => Box::new((0..len).rev()),
        }
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Clone, Debug)]
pub(crate) struct StepCache<T> {
    pub z: Vec<T>,
    pub forget: Vec<T>,
    pub update: Vec<T>,
    pub candidate: Vec<T>,
    pub output: Vec<T>,
    pub c_prev: Vec<T>,
    pub c: Vec<T>,
    pub tanh_c: Vec<T>,
    pub a: Vec<T>,
}

pub(crate) fn step<T: Scalar>(x: &[T], prev_a: &[T], prev_c: &[T], p: &LstmParams<T>) -> StepCache<T> {
    let h = p.hidden_dim();
    let mut z = Vec::with_capacity(h + x.len());
    z.extend_from_slice(prev_a);
    z.extend_from_slice(x);

    let gate = |w: &Matrix<T>, b: &Matrix<T>, act: fn(T) -> T| {
        let mut out = vec![T::zero(); h];
        w.matvec_into(&z, Some(b.as_slice()), &mut out);
        out.iter_mut().for_each(|v| *v = act(*v));
        out
    };
    let forget = gate(&p.w_forget, &p.b_forget, sigmoid);
    let update = gate(&p.w_update, &p.b_update, sigmoid);
    let candidate = gate(&p.w_candidate, &p.b_candidate, T::tanh);
    let output = gate(&p.w_output, &p.b_output, sigmoid);

    let c: Vec<T> = (0..h)
        .map(|k| update[k] * candidate[k] + forget[k] * prev_c[k])
        .collect();
    let tanh_c: Vec<T> = c.iter().map(|v| v.tanh()).collect();
    let a = output.iter().zip(&tanh_c).map(|(&o, &t)| o * t).collect();

    StepCache {
        z,
        forget,
        update,
        candidate,
        output,
        c_prev: prev_c.to_vec(),
        c,
        tanh_c,
        a,
    }
}

/// One LSTM step from `prev` on input `x`.
pub fn lstm_cell<T: Scalar>(x: &[T], prev: &LstmState<T>, params: &LstmParams<T>) -> Result<LstmState<T>, NnError> {
    params.check_shapes()?;
    let h = params.hidden_dim();
    if x.len() != params.input_dim() {
        return Err(NnError::dims("lstm input", params.input_dim(), x.len()));
    }
    if prev.a.len() != h || prev.c.len() != h {
        return Err(NnError::dims("lstm state", h, prev.a.len().max(prev.c.len())));
    }
    let s = step(x, &prev.a, &prev.c, params);
    Ok(LstmState { a: s.a, c: s.c })
}

/// Runs from a zero state; caches are returned in processing order.
pub(crate) fn run<T: Scalar>(xs: &[&[T]], p: &LstmParams<T>, dir: Direction) -> Vec<StepCache<T>> {
    let h = p.hidden_dim();
    let mut caches: Vec<StepCache<T>> = Vec::with_capacity(xs.len());
    let zero = vec![T::zero(); h];
    for pos in dir.positions(xs.len()) {
        let cache = match caches.last() {
            Some(prev) => step(xs[pos], &prev.a, &prev.c, p),
            None => step(xs[pos], &zero, &zero, p),
        };
        caches.push(cache);
    }
    caches
}

/// Hidden activations for every input, aligned to input positions even when
/// the direction is backward.
pub fn lstm_sequence<T: Scalar>(xs: &[Vec<T>], params: &LstmParams<T>, dir: Direction) -> Result<Vec<Vec<T>>, NnError> {
    params.check_shapes()?;
    if let Some(bad) = xs.iter().find(|x| x.len() != params.input_dim()) {
        return Err(NnError::dims("lstm input", params.input_dim(), bad.len()));
    }
    let views: Vec<&[T]> = xs.iter().map(Vec::as_slice).collect();
    Ok(aligned_hidden(run(&views, params, dir), dir))
}

pub(crate) fn aligned_hidden<T: Scalar>(caches: Vec<StepCache<T>>, dir: Direction) -> Vec<Vec<T>> {
    let mut hidden: Vec<Vec<T>> = caches.into_iter().map(|c| c.a).collect();
    if dir == Direction::Backward {
        hidden.reverse();
    }
    hidden
}
