//! Closed-form block optima of the alignment-regularized linear objectives
//! and their verification against the stated gradients and plain gradient
//! descent.
//!
//! Both objectives hold the other graph's representation fixed; the
//! reconstruction form here is the unsquashed one (no sigmoid), matching
//! the gradients it is checked against.

use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct FixedPointReport<T> {
    pub u_star: Matrix<T>,
    /// Frobenius norm of the stated gradient evaluated at `u_star`.
    pub gradient_norm: f64,
    /// Distance of the gradient-descent iterate from `u_star`, relative.
    pub iterative_distance: f64,
}

/// Inverse of a symmetric positive definite matrix via its
/// eigendecomposition; errors when the matrix is numerically singular.
fn sym_inverse<T: Scalar>(m: &Matrix<T>, context: &str) -> Result<Matrix<T>> {
    let (q, vals) = sym_eig(m);
    let vmax = vals.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let mut scaled = Matrix::zeros(q.rows(), q.cols());
    for (j, &v) in vals.iter().enumerate() {
        if v.abs() <= T::from_f64(1e-12) * vmax.max(T::min_positive_value()) {
            return Err(Error::Singular(format!(
                "{}: eigenvalue {:e} of a {}x{} system",
                context,
                v.to_f64(),
                m.rows(),
                m.cols()
            )));
        }
        let inv = T::one() / v;
        for i in 0..q.rows() {
            scaled[(i, j)] = q[(i, j)] * inv;
        }
    }
    scaled.matmul_transpose(&q)
}

fn descend_quadratic<T: Scalar>(
    grad: impl Fn(&Matrix<T>) -> Result<Matrix<T>>,
    shape: (usize, usize),
    step: T,
    u_star: &Matrix<T>,
    max_iters: usize,
) -> Result<f64> {
    let mut u = Matrix::<T>::zeros(shape.0, shape.1);
    let denom = u_star.frobenius_norm().max(T::one());
    for _ in 0..max_iters {
        let g = grad(&u)?;
        u.add_assign_scaled(&g, -step)?;
        let dist = u.sub(u_star)?.frobenius_norm() / denom;
        if dist.to_f64() < 1e-6 {
            break;
        }
    }
    Ok((u.sub(u_star)?.frobenius_norm() / denom).to_f64())
}

/// Optimum of
/// `(1-beta) alpha_a |U - T_a|^2 + beta |U R - P U_b|^2` over `U`:
/// `U* = ((1-beta) alpha_a T_a + beta P U_b R^T) ((1-beta) alpha_a I + beta R R^T)^{-1}`.
pub fn soft_reg_fixed_point<T: Scalar>(
    t_a: &Matrix<T>,
    u_b_star: &Matrix<T>,
    align: &Matrix<T>,
    r: &Matrix<T>,
    alpha_a: T,
    beta: T,
) -> Result<FixedPointReport<T>> {
    let one = T::one();
    let w_fit = (one - beta) * alpha_a;
    let d_a = t_a.cols();
    let mut bracket = r.matmul_transpose(r)?.scale(beta);
    for i in 0..d_a {
        bracket[(i, i)] += w_fit;
    }
    let inv = sym_inverse(&bracket, &format!("soft fixed point at beta = {}", beta.to_f64()))?;
    let pu_b = align.matmul(u_b_star)?;
    let rhs = t_a.scale(w_fit).add(&pu_b.matmul_transpose(r)?.scale(beta))?;
    let u_star = rhs.matmul(&inv)?;

    // stated gradient: 2 (1-beta) alpha_a (U - T_a) + 2 beta (U R - P U_b) R^T
    let grad_at = |u: &Matrix<T>| -> Result<Matrix<T>> {
        let fit = u.sub(t_a)?.scale(T::from_f64(2.0) * w_fit);
        let misalign = u.matmul(r)?.sub(&pu_b)?;
        fit.add(&misalign.matmul_transpose(r)?.scale(T::from_f64(2.0) * beta))
    };
    let gradient_norm = grad_at(&u_star)?.frobenius_norm().to_f64();

    // Lipschitz constant of the gradient: 2 (w_fit + beta |R|_2^2)
    let (_, s, _) = crate::numerics::svd(r);
    let r_top = s.first().copied().unwrap_or_else(T::zero);
    let lip = T::from_f64(2.0) * (w_fit + beta * r_top * r_top);
    let step = one / lip.max(T::min_positive_value());
    let iterative_distance =
        descend_quadratic(grad_at, t_a.shape(), step, &u_star, 200_000)?;
    Ok(FixedPointReport {
        u_star,
        gradient_norm,
        iterative_distance,
    })
}

/// Optimum of
/// `(1-beta) alpha_a |U - T_a|^2 + beta |U R U_b^T - P|^2` over `U`:
/// `U* = ((1-beta) alpha_a T_a + beta P U_b R^T) ((1-beta) alpha_a I + beta R U_b^T U_b R^T)^{-1}`.
pub fn recon_fixed_point<T: Scalar>(
    t_a: &Matrix<T>,
    u_b_star: &Matrix<T>,
    align: &Matrix<T>,
    r: &Matrix<T>,
    alpha_a: T,
    beta: T,
) -> Result<FixedPointReport<T>> {
    let one = T::one();
    let w_fit = (one - beta) * alpha_a;
    let d_a = t_a.cols();
    let gram_b = u_b_star.transpose_matmul(u_b_star)?;
    let mut bracket = r.matmul(&gram_b)?.matmul_transpose(r)?.scale(beta);
    for i in 0..d_a {
        bracket[(i, i)] += w_fit;
    }
    let inv = sym_inverse(
        &bracket,
        &format!("reconstruction fixed point at beta = {}", beta.to_f64()),
    )?;
    let pu_b = align.matmul(u_b_star)?;
    let rhs = t_a.scale(w_fit).add(&pu_b.matmul_transpose(r)?.scale(beta))?;
    let u_star = rhs.matmul(&inv)?;

    // stated gradient:
    // 2 (1-beta) alpha_a (U - T_a) + 2 beta (U R U_b^T - P) U_b R^T
    let grad_at = |u: &Matrix<T>| -> Result<Matrix<T>> {
        let fit = u.sub(t_a)?.scale(T::from_f64(2.0) * w_fit);
        let resid = u.matmul(r)?.matmul_transpose(u_b_star)?.sub(align)?;
        let push = resid.matmul(u_b_star)?.matmul_transpose(r)?;
        fit.add(&push.scale(T::from_f64(2.0) * beta))
    };
    let gradient_norm = grad_at(&u_star)?.frobenius_norm().to_f64();

    let (_, s, _) = crate::numerics::svd(&r.matmul(&gram_b)?.matmul_transpose(r)?);
    let top = s.first().copied().unwrap_or_else(T::zero);
    let lip = T::from_f64(2.0) * (w_fit + beta * top);
    let step = one / lip.max(T::min_positive_value());
    let iterative_distance =
        descend_quadratic(grad_at, t_a.shape(), step, &u_star, 200_000)?;
    Ok(FixedPointReport {
        u_star,
        gradient_norm,
        iterative_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_for, Stream};
    use rand::Rng;

    type M = Matrix<f64>;

    fn random_setup(
        n_a: usize,
        n_b: usize,
        d_a: usize,
        d_b: usize,
        seed: u64,
    ) -> (M, M, M, M) {
        let mut rng = rng_for(seed, Stream::Experiment, 40);
        let t_a = M::from_fn(n_a, d_a, |_, _| rng.gen_range(-1.0..1.0));
        let u_b = M::from_fn(n_b, d_b, |_, _| rng.gen_range(-1.0..1.0));
        let mut align = M::zeros(n_a, n_b);
        for i in 0..n_a.min(n_b) {
            if rng.gen_bool(0.4) {
                align[(i, i)] = 1.0;
            }
        }
        let r = M::from_fn(d_a, d_b, |_, _| rng.gen_range(-1.0..1.0));
        (t_a, u_b, align, r)
    }

    #[test]
    fn beta_zero_returns_spectral_target() {
        let (t_a, u_b, align, r) = random_setup(6, 5, 3, 2, 1);
        let soft = soft_reg_fixed_point(&t_a, &u_b, &align, &r, 0.5, 0.0).unwrap();
        assert!(soft.u_star.rel_err(&t_a) < 1e-12);
        let recon = recon_fixed_point(&t_a, &u_b, &align, &r, 0.5, 0.0).unwrap();
        assert!(recon.u_star.rel_err(&t_a) < 1e-12);
    }

    #[test]
    fn beta_one_identity_transform_matches_mapped_partner() {
        // beta = 1, R = I (square): U* = P U_b
        let (t_a, u_b, align, _) = random_setup(6, 5, 3, 3, 2);
        let r = M::identity(3);
        let rep = soft_reg_fixed_point(&t_a, &u_b, &align, &r, 0.5, 1.0).unwrap();
        let expected = align.matmul(&u_b).unwrap();
        assert!(rep.u_star.rel_err(&expected) < 1e-10);
    }

    #[test]
    fn beta_one_orthonormal_partner_reconstruction() {
        // U_b with orthonormal columns, R = I, beta = 1:
        // U* = P U_b (U_b^T U_b)^{-1} = P U_b
        let mut rng = rng_for(9, Stream::Experiment, 41);
        let raw = M::from_fn(6, 3, |_, _| rng.gen_range(-1.0..1.0));
        let (q, _, _) = crate::numerics::svd(&raw);
        let mut u_b = M::zeros(6, 3);
        for i in 0..6 {
            for j in 0..3 {
                u_b[(i, j)] = q[(i, j)];
            }
        }
        let t_a = M::from_fn(4, 3, |_, _| rng.gen_range(-1.0..1.0));
        let mut align = M::zeros(4, 6);
        align[(0, 1)] = 1.0;
        align[(2, 4)] = 1.0;
        let r = M::identity(3);
        let rep = recon_fixed_point(&t_a, &u_b, &align, &r, 0.5, 1.0).unwrap();
        let expected = align.matmul(&u_b).unwrap();
        assert!(rep.u_star.rel_err(&expected) < 1e-8);
    }

    #[test]
    fn gradient_vanishes_and_descent_converges_on_random_instances() {
        for seed in 0..10 {
            let (t_a, u_b, align, r) = random_setup(7, 6, 3, 2, 50 + seed);
            let soft = soft_reg_fixed_point(&t_a, &u_b, &align, &r, 0.5, 0.5).unwrap();
            assert!(
                soft.gradient_norm <= 1e-8,
                "seed {seed}: soft gradient norm {}",
                soft.gradient_norm
            );
            assert!(
                soft.iterative_distance <= 1e-4,
                "seed {seed}: soft descent distance {}",
                soft.iterative_distance
            );
            let recon = recon_fixed_point(&t_a, &u_b, &align, &r, 0.5, 0.5).unwrap();
            assert!(
                recon.gradient_norm <= 1e-8,
                "seed {seed}: recon gradient norm {}",
                recon.gradient_norm
            );
            assert!(
                recon.iterative_distance <= 1e-4,
                "seed {seed}: recon descent distance {}",
                recon.iterative_distance
            );
        }
    }

    #[test]
    fn singular_bracket_is_reported() {
        // beta = 1 with R = 0 makes the system singular
        let (t_a, u_b, align, _) = random_setup(5, 5, 2, 2, 3);
        let r = M::zeros(2, 2);
        match soft_reg_fixed_point(&t_a, &u_b, &align, &r, 0.5, 1.0) {
            Err(Error::Singular(msg)) => assert!(msg.contains("beta")),
            other => panic!("expected singular system, got {:?}", other.map(|_| ())),
        }
    }
}
