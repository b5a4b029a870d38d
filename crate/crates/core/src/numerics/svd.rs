//! Singular value decomposition, symmetric eigendecomposition, and the
//! Moore–Penrose pseudoinverse.
//!
//! One-sided Jacobi for the SVD and cyclic Jacobi for symmetric matrices.
//! Both are plenty accurate for the matrix sizes this crate works with and
//! keep the kernel free of external linear-algebra backends.

use crate::error::Result;
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Relative threshold below which singular values are treated as zero.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Thin SVD `m = u * diag(s) * v^T` with `s` non-increasing and non-negative.
///
/// `u` is `rows x k`, `v` is `cols x k`, `k = min(rows, cols)`. Columns of
/// `u` belonging to zero singular values are left as zero vectors; the
/// product reconstruction is unaffected.
pub fn svd<T: Scalar>(m: &Matrix<T>) -> (Matrix<T>, Vec<T>, Matrix<T>) {
    if m.rows() < m.cols() {
        let (u, s, v) = svd(&m.transpose());
        return (v, s, u);
    }
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut v = Matrix::<T>::identity(cols);

    let eps = T::from_f64(1e-15);
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for i in 0..rows {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    alpha += aip * aip;
                    beta += aiq * aiq;
                    gamma += aip * aiq;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() + T::min_positive_value() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::from_f64(2.0) * gamma);
                let t = {
                    let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                    sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..cols {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<T> = (0..cols)
        .map(|j| {
            let mut acc = T::zero();
            for i in 0..rows {
                acc += a[(i, j)] * a[(i, j)];
            }
            acc.sqrt()
        })
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let mut u = Matrix::<T>::zeros(rows, cols);
    let mut s = vec![T::zero(); cols];
    let mut v_sorted = Matrix::<T>::zeros(cols, cols);
    for (jj, &j) in order.iter().enumerate() {
        let sj = norms[j];
        s[jj] = sj;
        if sj > T::zero() {
            for i in 0..rows {
                u[(i, jj)] = a[(i, j)] / sj;
            }
        }
        for i in 0..cols {
            v_sorted[(i, jj)] = v[(i, j)];
        }
    }
    (u, s, v_sorted)
}

/// Eigendecomposition `a = q * diag(vals) * q^T` of a symmetric matrix,
/// eigenvalues sorted by decreasing magnitude.
pub fn sym_eig<T: Scalar>(a: &Matrix<T>) -> (Matrix<T>, Vec<T>) {
    let n = a.rows();
    debug_assert_eq!(n, a.cols(), "sym_eig expects a square matrix");
    let mut m = a.clone();
    let mut q = Matrix::<T>::identity(n);

    let scale = m.max_abs().max(T::min_positive_value());
    let tol = T::from_f64(1e-15) * scale;
    for _ in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for r in (p + 1)..n {
                off = off.max(m[(p, r)].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = m[(p, r)];
                if apq.abs() <= tol * T::from_f64(1e-2) {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(r, r)];
                let theta = (aqq - app) / (T::from_f64(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, r)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(r, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkq = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkq;
                    q[(k, r)] = s * qkp + c * qkq;
                }
            }
        }
    }

    let mut vals: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[y].abs().partial_cmp(&vals[x].abs()).unwrap());
    let sorted_vals: Vec<T> = order.iter().map(|&i| vals[i]).collect();
    let mut q_sorted = Matrix::<T>::zeros(n, n);
    for (jj, &j) in order.iter().enumerate() {
        for i in 0..n {
            q_sorted[(i, jj)] = q[(i, j)];
        }
    }
    vals = sorted_vals;
    (q_sorted, vals)
}

/// Moore–Penrose pseudoinverse with singular values below
/// `tol * s_max` treated as zero.
pub fn pseudoinverse<T: Scalar>(m: &Matrix<T>, tol: T) -> Result<Matrix<T>> {
    let (u, s, v) = svd(m);
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let thresh = tol * smax;
    // v * diag(1/s) * u^T
    let k = s.len();
    let mut vs = Matrix::<T>::zeros(v.rows(), k);
    for j in 0..k {
        if s[j] > thresh && s[j] > T::zero() {
            let inv = T::one() / s[j];
            for i in 0..v.rows() {
                vs[(i, j)] = v[(i, j)] * inv;
            }
        }
    }
    vs.matmul_transpose(&u)
}
