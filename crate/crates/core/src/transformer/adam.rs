use super::tensor::{Matrix, Scalar};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moments, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<Matrix<T>>,
    pub v: Vec<Matrix<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &[Matrix<T>]) -> Self {
        let zeros: Vec<Matrix<T>> = params
            .iter()
            .map(|p| Matrix::zeros(p.rows, p.cols))
            .collect();
        AdamState {
            step: 0,
            beta1: BETA1,
            beta2: BETA2,
            eps: EPSILON,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn update(&mut self, params: &mut [Matrix<T>], grads: &[Matrix<T>], lr: f64) {
        assert_eq!(params.len(), grads.len());
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (T::c(self.beta1), T::c(self.beta2));
        let (one_b1, one_b2) = (T::c(1.0 - self.beta1), T::c(1.0 - self.beta2));
        let c1 = T::c(1.0 / (1.0 - self.beta1.powi(t)));
        let c2 = T::c(1.0 / (1.0 - self.beta2.powi(t)));
        let (lr, eps) = (T::c(lr), T::c(self.eps));
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for (((p, &g), m), v) in p
                .data
                .iter_mut()
                .zip(&g.data)
                .zip(&mut m.data)
                .zip(&mut v.data)
            {
                *m = b1 * *m + one_b1 * g;
                *v = b2 * *v + one_b2 * g * g;
                let mhat = *m * c1;
                let vhat = *v * c2;
                *p = *p - lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}
