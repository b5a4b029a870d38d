//! Adam optimizer over dense matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Per-parameter optimizer state. Defaults: beta1 = 0.9, beta2 = 0.999,
/// eps = 1e-8, learning rate 0.01.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState<T> {
    pub first_moment: Matrix<T>,
    pub second_moment: Matrix<T>,
    pub step: u64,
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(rows: usize, cols: usize, learning_rate: T) -> Self {
        AdamState {
            first_moment: Matrix::zeros(rows, cols),
            second_moment: Matrix::zeros(rows, cols),
            step: 0,
            learning_rate,
            beta1: T::from_f64(0.9),
            beta2: T::from_f64(0.999),
            epsilon: T::from_f64(1e-8),
        }
    }

    /// In-place bias-corrected update of `param` from `grad`.
    pub fn apply(&mut self, param: &mut Matrix<T>, grad: &Matrix<T>) -> Result<()> {
        if param.shape() != self.first_moment.shape() || grad.shape() != param.shape() {
            return Err(Error::Contract(format!(
                "adam_step shapes disagree: param {}, grad {}, state {}",
                param.dims(),
                grad.dims(),
                self.first_moment.dims()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let one = T::one();
        let bc1 = one - self.beta1.powi(t);
        let bc2 = one - self.beta2.powi(t);
        for idx in 0..param.data().len() {
            let g = grad.data()[idx];
            let m = &mut self.first_moment.data_mut()[idx];
            *m = self.beta1 * *m + (one - self.beta1) * g;
            let m_hat = *m / bc1;
            let v = &mut self.second_moment.data_mut()[idx];
            *v = self.beta2 * *v + (one - self.beta2) * g * g;
            let v_hat = *v / bc2;
            param.data_mut()[idx] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Functional form of one Adam update; returns the new parameter and state.
pub fn adam_step<T: Scalar>(
    param: &Matrix<T>,
    grad: &Matrix<T>,
    state: &AdamState<T>,
) -> Result<(Matrix<T>, AdamState<T>)> {
    let mut p = param.clone();
    let mut s = state.clone();
    s.apply(&mut p, grad)?;
    Ok((p, s))
}
