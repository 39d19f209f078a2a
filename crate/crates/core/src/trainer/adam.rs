use super::TrainConfig;
use crate::nn::{Gradients, Params};
use crate::scalar::Scalar;

/// Adam with bias-corrected first and second moment estimates.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    t: i32,
    m: Params<T>,
    v: Params<T>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(params: &Params<T>, config: &TrainConfig) -> Self {
        Self {
            lr: T::lit(config.learning_rate),
            beta1: T::lit(config.adam_beta1),
            beta2: T::lit(config.adam_beta2),
            eps: T::lit(config.adam_epsilon),
            t: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, params: &mut Params<T>, grads: &Gradients<T>) {
        self.t += 1;
        let one = T::one();
        let c1 = one - self.beta1.powi(self.t);
        let c2 = one - self.beta2.powi(self.t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut());
        for (((p, g), m), v) in tensors {
            let items = p
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice());
            for (((p, &g), m), v) in items {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Hyper;

    #[test]
    fn first_step_moves_each_weight_by_learning_rate() {
        // With bias correction, step one is lr · g / (|g| + eps) ≈ lr · sign(g).
        let hyper = Hyper {
            embed_dim: 1,
            hidden_dim: 1,
            n_tags: 2,
        };
        let mut params = Params::<f64>::zeros(hyper, 3);
        let mut grads = params.zeros_like();
        grads.output.w_y.as_mut_slice()[0] = 0.5;
        grads.output.w_y.as_mut_slice()[1] = -2.0;
        let mut adam = Adam::new(&params, &TrainConfig::default());
        adam.step(&mut params, &grads);
        let w = params.output.w_y.as_slice();
        assert!((w[0] + 1e-3).abs() < 1e-10);
        assert!((w[1] - 1e-3).abs() < 1e-10);
        assert_eq!(w[2], 0.0);
        assert_eq!(adam.steps(), 1);
    }
}
