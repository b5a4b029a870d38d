//! Alignment terms: hard and soft representation penalties and the
//! alignment-reconstruction objective.

use crate::crossnet::config::RegScope;
use crate::error::{Error, Result};
use crate::graph::Alignment;
use crate::numerics::{sigmoid, Matrix};
use crate::scalar::Scalar;

fn partner_sums<T: Scalar>(
    u_b: &Matrix<T>,
    alignment: &Alignment,
    n_a: usize,
) -> (Matrix<T>, Vec<bool>) {
    let mut sums = Matrix::zeros(n_a, u_b.cols());
    let mut has_partner = vec![false; n_a];
    for (i, j) in alignment.positives() {
        has_partner[i] = true;
        for k in 0..u_b.cols() {
            sums[(i, k)] += u_b[(j, k)];
        }
    }
    (sums, has_partner)
}

/// Squared Frobenius distance between graph A's representations and the
/// alignment-mapped representations of graph B.
///
/// With `RegScope::AllRows` this is the plain `|U_A - P U_B|_F^2`; the
/// default drops rows of `U_A` without any aligned partner.
pub fn hard_reg<T: Scalar>(
    u_a: &Matrix<T>,
    u_b: &Matrix<T>,
    alignment: &Alignment,
    scope: RegScope,
) -> Result<T> {
    hard_reg_grad(u_a, u_b, alignment, scope).map(|(h, _, _)| h)
}

pub fn hard_reg_grad<T: Scalar>(
    u_a: &Matrix<T>,
    u_b: &Matrix<T>,
    alignment: &Alignment,
    scope: RegScope,
) -> Result<(T, Matrix<T>, Matrix<T>)> {
    if u_a.cols() != u_b.cols() {
        return Err(Error::Config(format!(
            "hard regularization needs equal dims, got {} and {}",
            u_a.cols(),
            u_b.cols()
        )));
    }
    let (sums, has_partner) = partner_sums(u_b, alignment, u_a.rows());
    let mut h = T::zero();
    let mut du_a = Matrix::zeros(u_a.rows(), u_a.cols());
    let mut du_b = Matrix::zeros(u_b.rows(), u_b.cols());
    let two = T::from_f64(2.0);
    for i in 0..u_a.rows() {
        if scope == RegScope::AlignedRowsOnly && !has_partner[i] {
            continue;
        }
        for k in 0..u_a.cols() {
            let diff = u_a[(i, k)] - sums[(i, k)];
            h += diff * diff;
            du_a[(i, k)] += two * diff;
        }
    }
    for (i, j) in alignment.positives() {
        if scope == RegScope::AlignedRowsOnly && !has_partner[i] {
            continue;
        }
        for k in 0..u_a.cols() {
            let diff = u_a[(i, k)] - sums[(i, k)];
            du_b[(j, k)] -= two * diff;
        }
    }
    Ok((h, du_a, du_b))
}

/// Soft variant: `|U_A R - P U_B|_F^2` with a learned `d_A x d_B`
/// transform, same row scope as [`hard_reg`].
pub fn soft_reg<T: Scalar>(
    u_a: &Matrix<T>,
    u_b: &Matrix<T>,
    r: &Matrix<T>,
    alignment: &Alignment,
    scope: RegScope,
) -> Result<T> {
    soft_reg_grad(u_a, u_b, r, alignment, scope).map(|(h, ..)| h)
}

pub fn soft_reg_grad<T: Scalar>(
    u_a: &Matrix<T>,
    u_b: &Matrix<T>,
    r: &Matrix<T>,
    alignment: &Alignment,
    scope: RegScope,
) -> Result<(T, Matrix<T>, Matrix<T>, Matrix<T>)> {
    if r.rows() != u_a.cols() || r.cols() != u_b.cols() {
        return Err(Error::shape(
            "soft_reg transform",
            format!("{}x{}", u_a.cols(), u_b.cols()),
            r.dims(),
        ));
    }
    let mapped = u_a.matmul(r)?;
    let (sums, has_partner) = partner_sums(u_b, alignment, u_a.rows());
    let mut h = T::zero();
    // gradient with respect to the mapped rows
    let mut d_mapped = Matrix::zeros(mapped.rows(), mapped.cols());
    let mut du_b = Matrix::zeros(u_b.rows(), u_b.cols());
    let two = T::from_f64(2.0);
    for i in 0..u_a.rows() {
        if scope == RegScope::AlignedRowsOnly && !has_partner[i] {
            continue;
        }
        for k in 0..mapped.cols() {
            let diff = mapped[(i, k)] - sums[(i, k)];
            h += diff * diff;
            d_mapped[(i, k)] = two * diff;
        }
    }
    for (i, j) in alignment.positives() {
        if scope == RegScope::AlignedRowsOnly && !has_partner[i] {
            continue;
        }
        for k in 0..mapped.cols() {
            du_b[(j, k)] -= d_mapped[(i, k)];
        }
    }
    let du_a = d_mapped.matmul_transpose(r)?;
    let dr = u_a.transpose_matmul(&d_mapped)?;
    Ok((h, du_a, du_b, dr))
}

/// Alignment reconstruction: squared error of `sigmoid(u_i^T R u_j)`
/// against the pair label, summed over the observed (masked) entries only.
pub fn align_recon_loss<T: Scalar>(
    u_a: &Matrix<T>,
    u_b: &Matrix<T>,
    r: &Matrix<T>,
    alignment: &Alignment,
) -> Result<T> {
    align_recon_grad(u_a, u_b, r, alignment).map(|(h, ..)| h)
}

pub fn align_recon_grad<T: Scalar>(
    u_a: &Matrix<T>,
    u_b: &Matrix<T>,
    r: &Matrix<T>,
    alignment: &Alignment,
) -> Result<(T, Matrix<T>, Matrix<T>, Matrix<T>)> {
    if r.rows() != u_a.cols() || r.cols() != u_b.cols() {
        return Err(Error::shape(
            "align_recon transform",
            format!("{}x{}", u_a.cols(), u_b.cols()),
            r.dims(),
        ));
    }
    let d_a = u_a.cols();
    let d_b = u_b.cols();
    let mut h = T::zero();
    let mut du_a = Matrix::zeros(u_a.rows(), d_a);
    let mut du_b = Matrix::zeros(u_b.rows(), d_b);
    let mut dr = Matrix::zeros(d_a, d_b);
    let two = T::from_f64(2.0);
    for &(i, j, label) in &alignment.pairs {
        // r_ub = R u_b[j], score = u_a[i] . r_ub
        let mut score = T::zero();
        let mut r_ub = vec![T::zero(); d_a];
        for p in 0..d_a {
            let mut acc = T::zero();
            for q in 0..d_b {
                acc += r[(p, q)] * u_b[(j, q)];
            }
            r_ub[p] = acc;
            score += u_a[(i, p)] * acc;
        }
        let prob = sigmoid(score);
        let err = prob - T::from_f64(label as f64);
        h += err * err;
        let dscore = two * err * prob * (T::one() - prob);
        for p in 0..d_a {
            du_a[(i, p)] += dscore * r_ub[p];
        }
        for q in 0..d_b {
            let mut acc = T::zero();
            for p in 0..d_a {
                acc += u_a[(i, p)] * r[(p, q)];
            }
            du_b[(j, q)] += dscore * acc;
        }
        for p in 0..d_a {
            for q in 0..d_b {
                dr[(p, q)] += dscore * u_a[(i, p)] * u_b[(j, q)];
            }
        }
    }
    Ok((h, du_a, du_b, dr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_gradient;

    type M = Matrix<f64>;

    #[test]
    fn hard_reg_no_pairs_all_rows_is_norm() {
        let u_a = M::from_rows(&[&[1.0, 2.0], &[3.0, 0.0]]);
        let u_b = M::zeros(2, 2);
        let empty = Alignment::empty((2, 2));
        let h = hard_reg(&u_a, &u_b, &empty, RegScope::AllRows).unwrap();
        assert_eq!(h, 1.0 + 4.0 + 9.0);
        // masked form drops everything
        let h = hard_reg(&u_a, &u_b, &empty, RegScope::AlignedRowsOnly).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn hard_reg_matching_rows_is_zero() {
        let u_a = M::from_rows(&[&[1.0, 2.0], &[0.0, 0.0]]);
        let u_b = M::from_rows(&[&[9.0, 9.0], &[1.0, 2.0]]);
        let align = Alignment::new(vec![(0, 1, 1)], (2, 2)).unwrap();
        assert_eq!(hard_reg(&u_a, &u_b, &align, RegScope::AllRows).unwrap(), 0.0);
        assert_eq!(
            hard_reg(&u_a, &u_b, &align, RegScope::AlignedRowsOnly).unwrap(),
            0.0
        );
    }

    #[test]
    fn hard_reg_single_mismatched_pair() {
        // u_a = (1, 0) vs u_b = (0, 1): difference (1, -1), squared norm 2.
        let u_a = M::from_rows(&[&[1.0, 0.0]]);
        let u_b = M::from_rows(&[&[0.0, 1.0]]);
        let align = Alignment::new(vec![(0, 0, 1)], (1, 1)).unwrap();
        let h = hard_reg(&u_a, &u_b, &align, RegScope::AlignedRowsOnly).unwrap();
        assert_eq!(h, 2.0);
    }

    #[test]
    fn masked_scope_ignores_unaligned_rows() {
        let u_a = M::from_rows(&[&[1.0, 0.0], &[5.0, 5.0]]);
        let u_b = M::from_rows(&[&[0.0, 1.0]]);
        let align = Alignment::new(vec![(0, 0, 1)], (2, 1)).unwrap();
        let masked = hard_reg(&u_a, &u_b, &align, RegScope::AlignedRowsOnly).unwrap();
        assert_eq!(masked, 2.0);
        let full = hard_reg(&u_a, &u_b, &align, RegScope::AllRows).unwrap();
        assert_eq!(full, 2.0 + 50.0);
    }

    #[test]
    fn soft_reg_zero_cases() {
        let u_a = M::from_rows(&[&[1.0, 2.0]]);
        let u_b = M::from_rows(&[&[3.0]]);
        let r = M::zeros(2, 1);
        let empty = Alignment::empty((1, 1));
        assert_eq!(
            soft_reg(&u_a, &u_b, &r, &empty, RegScope::AlignedRowsOnly).unwrap(),
            0.0
        );
    }

    #[test]
    fn soft_reg_exact_match_through_transform() {
        // u_a = (2), R = (0.5), u_b = (1): mapped = 1 = partner.
        let u_a = M::from_rows(&[&[2.0]]);
        let u_b = M::from_rows(&[&[1.0]]);
        let r = M::from_rows(&[&[0.5]]);
        let align = Alignment::new(vec![(0, 0, 1)], (1, 1)).unwrap();
        let h = soft_reg(&u_a, &u_b, &r, &align, RegScope::AlignedRowsOnly).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn soft_reg_with_identity_equals_hard_reg_exactly() {
        let u_a = M::from_rows(&[&[0.3, -1.2], &[2.0, 0.4], &[0.0, 1.0]]);
        let u_b = M::from_rows(&[&[1.0, 0.5], &[-0.7, 0.1]]);
        let align = Alignment::new(vec![(0, 1, 1), (2, 0, 1)], (3, 2)).unwrap();
        let id = M::identity(2);
        for scope in [RegScope::AlignedRowsOnly, RegScope::AllRows] {
            let hard = hard_reg(&u_a, &u_b, &align, scope).unwrap();
            let soft = soft_reg(&u_a, &u_b, &id, &align, scope).unwrap();
            assert_eq!(hard, soft);
        }
    }

    #[test]
    fn align_recon_examples() {
        let u_a = M::zeros(1, 2);
        let u_b = M::zeros(1, 2);
        let r = M::zeros(2, 2);
        let empty = Alignment::empty((1, 1));
        assert_eq!(align_recon_loss(&u_a, &u_b, &r, &empty).unwrap(), 0.0);
        // score 0 => sigmoid 0.5; positive label: (0.5 - 1)^2
        let pos = Alignment::new(vec![(0, 0, 1)], (1, 1)).unwrap();
        let h = align_recon_loss(&u_a, &u_b, &r, &pos).unwrap();
        assert!((h - 0.25).abs() < 1e-15);
        let neg = Alignment::new(vec![(0, 0, 0)], (1, 1)).unwrap();
        let h = align_recon_loss(&u_a, &u_b, &r, &neg).unwrap();
        assert!((h - 0.25).abs() < 1e-15);
    }

    fn grads_match_fd(
        f: impl Fn(&M) -> f64,
        analytic: &M,
        at: &M,
        what: &str,
    ) {
        let fd = finite_diff_gradient(f, at, 1e-6);
        let rel = crate::numerics::gradient_rel_err(analytic, &fd);
        assert!(rel < 1e-6, "{what} gradient off by {rel}");
    }

    #[test]
    fn regularizer_gradients_match_finite_differences() {
        let u_a = M::from_rows(&[&[0.3, -1.2], &[2.0, 0.4], &[0.1, 0.9]]);
        let u_b = M::from_rows(&[&[1.0, 0.5], &[-0.7, 0.1]]);
        let r = M::from_rows(&[&[0.2, -0.4], &[0.8, 0.3]]);
        let align = Alignment::new(vec![(0, 1, 1), (2, 0, 1), (1, 0, 0)], (3, 2)).unwrap();

        for scope in [RegScope::AlignedRowsOnly, RegScope::AllRows] {
            let (_, da, db) = hard_reg_grad(&u_a, &u_b, &align, scope).unwrap();
            grads_match_fd(
                |m| hard_reg(m, &u_b, &align, scope).unwrap(),
                &da,
                &u_a,
                "hard dU_A",
            );
            grads_match_fd(
                |m| hard_reg(&u_a, m, &align, scope).unwrap(),
                &db,
                &u_b,
                "hard dU_B",
            );

            let (_, da, db, dr) = soft_reg_grad(&u_a, &u_b, &r, &align, scope).unwrap();
            grads_match_fd(
                |m| soft_reg(m, &u_b, &r, &align, scope).unwrap(),
                &da,
                &u_a,
                "soft dU_A",
            );
            grads_match_fd(
                |m| soft_reg(&u_a, m, &r, &align, scope).unwrap(),
                &db,
                &u_b,
                "soft dU_B",
            );
            grads_match_fd(
                |m| soft_reg(&u_a, &u_b, m, &align, scope).unwrap(),
                &dr,
                &r,
                "soft dR",
            );
        }

        let (_, da, db, dr) = align_recon_grad(&u_a, &u_b, &r, &align).unwrap();
        grads_match_fd(
            |m| align_recon_loss(m, &u_b, &r, &align).unwrap(),
            &da,
            &u_a,
            "recon dU_A",
        );
        grads_match_fd(
            |m| align_recon_loss(&u_a, m, &r, &align).unwrap(),
            &db,
            &u_b,
            "recon dU_B",
        );
        grads_match_fd(
            |m| align_recon_loss(&u_a, &u_b, m, &align).unwrap(),
            &dr,
            &r,
            "recon dR",
        );
    }
}
