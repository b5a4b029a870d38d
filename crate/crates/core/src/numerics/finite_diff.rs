//! Central-difference gradient oracle.
//!
//! Used throughout the test suites to validate every hand-derived backward
//! pass; it must stay independent of those implementations.

use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Central differences `(f(x + h e_ij) - f(x - h e_ij)) / 2h` per entry.
pub fn finite_diff_gradient<T, F>(loss_fn: F, at: &Matrix<T>, h: T) -> Matrix<T>
where
    T: Scalar,
    F: Fn(&Matrix<T>) -> T,
{
    debug_assert!(h > T::zero());
    let mut grad = Matrix::zeros(at.rows(), at.cols());
    let mut probe = at.clone();
    let two_h = T::from_f64(2.0) * h;
    for idx in 0..at.data().len() {
        let orig = probe.data()[idx];
        probe.data_mut()[idx] = orig + h;
        let plus = loss_fn(&probe);
        probe.data_mut()[idx] = orig - h;
        let minus = loss_fn(&probe);
        probe.data_mut()[idx] = orig;
        grad.data_mut()[idx] = (plus - minus) / two_h;
    }
    grad
}

/// Relative Frobenius error between an analytic gradient and the oracle.
pub fn gradient_rel_err<T: Scalar>(analytic: &Matrix<T>, oracle: &Matrix<T>) -> T {
    let denom = oracle.frobenius_norm().max(T::from_f64(1e-8));
    analytic
        .sub(oracle)
        .map(|d| d.frobenius_norm() / denom)
        .unwrap_or_else(|_| T::infinity())
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    #[test]
    fn sum_of_squares_gradient() {
        let f = |m: &M| m.data().iter().map(|x| x * x).sum::<f64>();
        let at = M::from_rows(&[&[3.0]]);
        let g = finite_diff_gradient(f, &at, 1e-5);
        assert!((g[(0, 0)] - 6.0).abs() < 1e-8);
    }

    #[test]
    fn constant_function_zero_gradient() {
        let f = |_: &M| 4.25f64;
        let g = finite_diff_gradient(f, &M::zeros(2, 3), 1e-5);
        assert_eq!(g, M::zeros(2, 3));
    }
}
