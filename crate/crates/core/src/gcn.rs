//! Two-layer GCN: forward pass, inner-product decoder, reconstruction loss,
//! and the analytic backward pass.
//!
//! Forward shape, with `X_eff = X * Q` when a feature transform is present:
//!
//! ```text
//! Z1 = A_hat * X_eff * W1      H1 = relu(Z1)
//! Z2 = A_hat * H1 * W2         U  = row_softmax(Z2)   (or identity)
//! ```
//!
//! The layer count is fixed at two.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::numerics::matrix::{row_softmax, sigmoid};
use crate::numerics::Matrix;
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

/// Output nonlinearity of the second layer. Row-softmax is the default;
/// identity is offered because softmax rows constrain the decoder's
/// inner products severely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalActivation {
    #[default]
    RowSoftmax,
    Identity,
}

/// Owned per-graph parameters.
#[derive(Debug, Clone)]
pub struct GcnParams<T> {
    pub w1: Matrix<T>,
    pub w2: Matrix<T>,
    pub q: Option<Matrix<T>>,
    pub final_activation: FinalActivation,
}

/// Borrowed view used by the cross-network trainer, whose parameters live
/// in shared slots.
#[derive(Clone, Copy)]
pub struct GcnParamsView<'a, T> {
    pub w1: &'a Matrix<T>,
    pub w2: &'a Matrix<T>,
    pub q: Option<&'a Matrix<T>>,
    pub final_activation: FinalActivation,
}

impl<T: Scalar> GcnParams<T> {
    pub fn view(&self) -> GcnParamsView<'_, T> {
        GcnParamsView {
            w1: &self.w1,
            w2: &self.w2,
            q: self.q.as_deref_matrix(),
            final_activation: self.final_activation,
        }
    }
}

// Small helper so `Option<Matrix<T>>` turns into `Option<&Matrix<T>>`.
trait AsDerefMatrix<T> {
    fn as_deref_matrix(&self) -> Option<&Matrix<T>>;
}

impl<T> AsDerefMatrix<T> for Option<Matrix<T>> {
    fn as_deref_matrix(&self) -> Option<&Matrix<T>> {
        self.as_ref()
    }
}

/// Intermediate products kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    /// `A_hat * X_eff`
    pub p1: Matrix<T>,
    pub z1: Matrix<T>,
    pub h1: Matrix<T>,
    /// `A_hat * H1`
    pub p2: Matrix<T>,
    pub u: Matrix<T>,
}

/// Gradients with respect to the parameters of one GCN.
#[derive(Debug, Clone)]
pub struct GcnGrads<T> {
    pub w1: Matrix<T>,
    pub w2: Matrix<T>,
    pub q: Option<Matrix<T>>,
}

/// Glorot-uniform parameter initialization, deterministic under `seed`.
///
/// `input_dim` is the dimension the first layer actually sees (the shared
/// dimension when a feature transform is present); `q_dims = (m, m_hat)`
/// requests a transform matrix.
pub fn init_params<T: Scalar>(
    input_dim: usize,
    d: usize,
    q_dims: Option<(usize, usize)>,
    final_activation: FinalActivation,
    seed: u64,
) -> GcnParams<T> {
    let mut rng = rng_for(seed, Stream::Init, 0);
    let w1 = glorot(input_dim, d, &mut rng);
    let w2 = glorot(d, d, &mut rng);
    let q = q_dims.map(|(m, m_hat)| glorot(m, m_hat, &mut rng));
    GcnParams {
        w1,
        w2,
        q,
        final_activation,
    }
}

pub(crate) fn glorot<T: Scalar>(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Matrix<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Matrix::from_fn(fan_in, fan_out, |_, _| {
        T::from_f64(rng.gen_range(-limit..limit))
    })
}

/// Forward pass; returns the representations and the cache for backward.
pub fn gcn_forward<T: Scalar>(
    adj: &NormalizedAdjacency<T>,
    x: &Matrix<T>,
    p: GcnParamsView<'_, T>,
) -> Result<(Matrix<T>, ForwardCache<T>)> {
    let a_hat = &adj.matrix;
    if a_hat.rows() != x.rows() {
        return Err(Error::shape(
            "gcn_forward",
            format!("{} feature rows", a_hat.rows()),
            x.dims(),
        ));
    }
    let x_eff = match p.q {
        Some(q) => x.matmul(q)?,
        None => x.clone(),
    };
    if x_eff.cols() != p.w1.rows() {
        return Err(Error::shape(
            "gcn_forward W1",
            format!("{} input cols", x_eff.cols()),
            p.w1.dims(),
        ));
    }
    let p1 = a_hat.matmul(&x_eff)?;
    let z1 = p1.matmul(p.w1)?;
    let h1 = z1.map(|v| if v > T::zero() { v } else { T::zero() });
    let p2 = a_hat.matmul(&h1)?;
    let z2 = p2.matmul(p.w2)?;
    let u = match p.final_activation {
        FinalActivation::RowSoftmax => row_softmax(&z2),
        FinalActivation::Identity => z2,
    };
    let cache = ForwardCache {
        p1,
        z1,
        h1,
        p2,
        u: u.clone(),
    };
    Ok((u, cache))
}

/// Inner-product decoder: entrywise sigmoid of `U * U^T`.
pub fn decode<T: Scalar>(u: &Matrix<T>) -> Matrix<T> {
    let gram = u
        .matmul_transpose(u)
        .expect("U * U^T is always well-shaped");
    gram.map(sigmoid)
}

// NaN-preserving probability clamp; `Float::max` would swallow NaN and
// hide divergence from the training loop.
fn clamp_prob<T: Scalar>(p: T) -> T {
    let eps = T::prob_eps();
    if p < eps {
        eps
    } else if p > T::one() - eps {
        T::one() - eps
    } else {
        p
    }
}

fn clamped_log_sigmoid<T: Scalar>(s: T) -> T {
    clamp_prob(sigmoid(s)).ln()
}

fn clamped_log_one_minus_sigmoid<T: Scalar>(s: T) -> T {
    clamp_prob(T::one() - sigmoid(s)).ln()
}

/// Weighted cross-entropy reconstruction loss.
///
/// Positive pairs contribute `-w * log(sigmoid(u_i . u_j))`; sampled
/// negatives contribute `-log(1 - sigmoid(u_i . u_j))`. Without the
/// negative term the optimum is degenerate (all inner products diverge).
pub fn recon_loss<T: Scalar>(
    u: &Matrix<T>,
    positives: &[(usize, usize, T)],
    negatives: &[(usize, usize)],
) -> T {
    let mut loss = T::zero();
    for &(i, j, w) in positives {
        let s = u.dot_rows(i, u, j);
        loss -= w * clamped_log_sigmoid(s);
    }
    for &(i, j) in negatives {
        let s = u.dot_rows(i, u, j);
        loss -= clamped_log_one_minus_sigmoid(s);
    }
    loss
}

/// Loss plus its gradient with respect to `U`.
pub fn recon_loss_grad<T: Scalar>(
    u: &Matrix<T>,
    positives: &[(usize, usize, T)],
    negatives: &[(usize, usize)],
) -> (T, Matrix<T>) {
    let mut loss = T::zero();
    let mut du = Matrix::zeros(u.rows(), u.cols());
    let d = u.cols();
    for &(i, j, w) in positives {
        let s = u.dot_rows(i, u, j);
        loss -= w * clamped_log_sigmoid(s);
        let coeff = -w * (T::one() - sigmoid(s));
        for k in 0..d {
            let uik = u[(i, k)];
            let ujk = u[(j, k)];
            du[(i, k)] += coeff * ujk;
            du[(j, k)] += coeff * uik;
        }
    }
    for &(i, j) in negatives {
        let s = u.dot_rows(i, u, j);
        loss -= clamped_log_one_minus_sigmoid(s);
        let coeff = sigmoid(s);
        for k in 0..d {
            let uik = u[(i, k)];
            let ujk = u[(j, k)];
            du[(i, k)] += coeff * ujk;
            du[(j, k)] += coeff * uik;
        }
    }
    (loss, du)
}

/// Row-softmax Jacobian applied to an upstream gradient.
pub(crate) fn softmax_backward<T: Scalar>(u: &Matrix<T>, du: &Matrix<T>) -> Matrix<T> {
    let mut out = Matrix::zeros(u.rows(), u.cols());
    for i in 0..u.rows() {
        let urow = u.row(i);
        let grow = du.row(i);
        let dot: T = urow.iter().zip(grow).map(|(&a, &b)| a * b).sum();
        let orow = out.row_mut(i);
        for k in 0..urow.len() {
            orow[k] = urow[k] * (grow[k] - dot);
        }
    }
    out
}

/// Chain rule from `dL/dU` back to the parameter gradients.
///
/// The ReLU subgradient at zero is taken as zero; the row-softmax Jacobian
/// is applied exactly. Requires the cache produced by the matching forward.
pub fn gcn_backward<T: Scalar>(
    cache: &ForwardCache<T>,
    du: &Matrix<T>,
    p: GcnParamsView<'_, T>,
    adj: &NormalizedAdjacency<T>,
    x: &Matrix<T>,
) -> Result<GcnGrads<T>> {
    if du.shape() != cache.u.shape() {
        return Err(Error::Contract(format!(
            "stale cache: dU is {}, cached U is {}",
            du.dims(),
            cache.u.dims()
        )));
    }
    let a_hat = &adj.matrix;
    let dz2 = match p.final_activation {
        FinalActivation::RowSoftmax => softmax_backward(&cache.u, du),
        FinalActivation::Identity => du.clone(),
    };
    let dw2 = cache.p2.transpose_matmul(&dz2)?;
    // dH1 = A_hat^T dZ2 W2^T; A_hat is symmetric.
    let dh1 = a_hat.matmul(&dz2)?.matmul_transpose(p.w2)?;
    let dz1 = dh1.hadamard(&cache.z1.map(|v| if v > T::zero() { T::one() } else { T::zero() }))?;
    let dw1 = cache.p1.transpose_matmul(&dz1)?;
    let dq = match p.q {
        Some(_) => {
            let dx_eff = a_hat.matmul(&dz1)?.matmul_transpose(p.w1)?;
            Some(x.transpose_matmul(&dx_eff)?)
        }
        None => None,
    };
    Ok(GcnGrads {
        w1: dw1,
        w2: dw2,
        q: dq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize_adjacency, Graph};
    use crate::numerics::{finite_diff_gradient, Matrix};

    type M = Matrix<f64>;

    fn toy_graph(n: usize, seed: u64) -> (Graph<f64>, NormalizedAdjacency<f64>) {
        let mut rng = rng_for(seed, Stream::Synthetic, 7);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(0.45) {
                    edges.push((i, j, rng.gen_range(0.5..2.0)));
                }
            }
        }
        if edges.is_empty() {
            edges.push((0, 1, 1.0));
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        let adj = normalize_adjacency(&g);
        (g, adj)
    }

    #[test]
    fn zero_w1_gives_uniform_softmax_rows() {
        let (g, adj) = toy_graph(4, 0);
        let d = 3;
        let params = GcnParams {
            w1: M::zeros(4, d),
            w2: M::identity(d),
            q: None,
            final_activation: FinalActivation::RowSoftmax,
        };
        let (u, _) = gcn_forward(&adj, &g.features, params.view()).unwrap();
        for i in 0..4 {
            for k in 0..d {
                assert!((u[(i, k)] - 1.0 / d as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_node_softmax_is_one() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let adj = normalize_adjacency(&g);
        let params = GcnParams {
            w1: M::from_rows(&[&[2.0]]),
            w2: M::from_rows(&[&[1.0]]),
            q: None,
            final_activation: FinalActivation::RowSoftmax,
        };
        let (u, _) = gcn_forward(&adj, &g.features, params.view()).unwrap();
        assert_eq!(u[(0, 0)], 1.0);
    }

    /// Independent straight-line re-evaluation of the forward pass on plain
    /// nested vectors, used as a second implementation oracle.
    fn forward_oracle(
        a: &M,
        x: &M,
        w1: &M,
        w2: &M,
        softmax: bool,
    ) -> Vec<Vec<f64>> {
        let n = a.rows();
        let m = x.cols();
        let d = w1.cols();
        let mm = |lhs: &Vec<Vec<f64>>, rhs: &M| -> Vec<Vec<f64>> {
            let (rk, rc) = rhs.shape();
            assert_eq!(lhs[0].len(), rk);
            (0..lhs.len())
                .map(|i| {
                    (0..rc)
                        .map(|j| (0..rk).map(|k| lhs[i][k] * rhs[(k, j)]).sum())
                        .collect()
                })
                .collect()
        };
        let amat: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let xmat: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
        let ax = {
            let mut out = vec![vec![0.0; m]; n];
            for i in 0..n {
                for j in 0..m {
                    out[i][j] = (0..n).map(|k| amat[i][k] * xmat[k][j]).sum();
                }
            }
            out
        };
        let z1 = mm(&ax, w1);
        let h1: Vec<Vec<f64>> = z1
            .iter()
            .map(|r| r.iter().map(|&v| v.max(0.0)).collect())
            .collect();
        let ah = {
            let mut out = vec![vec![0.0; d]; n];
            for i in 0..n {
                for j in 0..d {
                    out[i][j] = (0..n).map(|k| amat[i][k] * h1[k][j]).sum();
                }
            }
            out
        };
        let z2 = mm(&ah, w2);
        if !softmax {
            return z2;
        }
        z2.iter()
            .map(|row| {
                let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = row.iter().map(|&v| (v - mx).exp()).collect();
                let s: f64 = exps.iter().sum();
                exps.iter().map(|&e| e / s).collect()
            })
            .collect()
    }

    #[test]
    fn forward_matches_straight_line_oracle() {
        let (g, adj) = toy_graph(6, 3);
        let params = init_params::<f64>(6, 3, None, FinalActivation::RowSoftmax, 11);
        let (u, _) = gcn_forward(&adj, &g.features, params.view()).unwrap();
        let oracle = forward_oracle(&adj.matrix, &g.features, &params.w1, &params.w2, true);
        for i in 0..6 {
            for k in 0..3 {
                assert!((u[(i, k)] - oracle[i][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let (g, adj) = toy_graph(5, 4);
        let params = init_params::<f64>(5, 2, None, FinalActivation::RowSoftmax, 9);
        let (u1, _) = gcn_forward(&adj, &g.features, params.view()).unwrap();
        let (u2, _) = gcn_forward(&adj, &g.features, params.view()).unwrap();
        assert_eq!(u1, u2);
    }

    #[test]
    fn decode_values_and_symmetry() {
        let u = M::zeros(3, 2);
        let d = decode(&u);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[(i, j)], 0.5);
            }
        }
        let u = M::identity(2);
        let d = decode(&u);
        assert!((d[(0, 0)] - sigmoid(1.0f64)).abs() < 1e-15);
        assert_eq!(d[(0, 1)], 0.5);
        let u = M::from_rows(&[&[0.3, -1.0], &[2.0, 0.7], &[-0.5, 0.1]]);
        let d = decode(&u);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[(i, j)], d[(j, i)]);
                assert!(d[(i, j)] > 0.0 && d[(i, j)] < 1.0);
            }
        }
    }

    #[test]
    fn recon_loss_edge_values() {
        let u = M::zeros(2, 2);
        assert_eq!(recon_loss(&u, &[], &[]), 0.0);
        // single positive with weight 2 at inner product 0: -2 log(1/2)
        let loss = recon_loss(&u, &[(0, 1, 2.0)], &[]);
        assert!((loss - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        // large inner product drives the positive term to zero
        let u = M::from_rows(&[&[6.0, 0.0], &[6.0, 0.0]]);
        let loss = recon_loss(&u, &[(0, 1, 1.0)], &[]);
        assert!(loss < 1e-12);
    }

    #[test]
    fn zero_upstream_gradient_zeroes_parameters() {
        let (g, adj) = toy_graph(5, 8);
        let params = init_params::<f64>(5, 3, None, FinalActivation::RowSoftmax, 2);
        let (u, cache) = gcn_forward(&adj, &g.features, params.view()).unwrap();
        let du = M::zeros(u.rows(), u.cols());
        let grads = gcn_backward(&cache, &du, params.view(), &adj, &g.features).unwrap();
        assert_eq!(grads.w1, M::zeros(5, 3));
        assert_eq!(grads.w2, M::zeros(3, 3));
    }

    fn check_gradients(final_act: FinalActivation, with_q: bool, seed: u64) {
        let n = 8;
        let (g, adj) = toy_graph(n, seed);
        let m_hat = if with_q { 4 } else { n };
        let params = init_params::<f64>(
            m_hat,
            3,
            if with_q { Some((n, m_hat)) } else { None },
            final_act,
            seed + 100,
        );
        let positives = g.links();
        let negatives = sample_training_negatives(&g, positives.len(), 1, seed).unwrap_or_default();

        let loss_at = |w1: &M, w2: &M, q: Option<&M>| -> f64 {
            let view = GcnParamsView {
                w1,
                w2,
                q,
                final_activation: final_act,
            };
            let (u, _) = gcn_forward(&adj, &g.features, view).unwrap();
            recon_loss(&u, &positives, &negatives)
        };

        let (u, cache) = gcn_forward(&adj, &g.features, params.view()).unwrap();
        let (_, du) = recon_loss_grad(&u, &positives, &negatives);
        let grads = gcn_backward(&cache, &du, params.view(), &adj, &g.features).unwrap();

        let h = 1e-5;
        let fd_w1 = finite_diff_gradient(
            |w1| loss_at(w1, &params.w2, params.q.as_ref()),
            &params.w1,
            h,
        );
        let fd_w2 = finite_diff_gradient(
            |w2| loss_at(&params.w1, w2, params.q.as_ref()),
            &params.w2,
            h,
        );
        let rel = crate::numerics::finite_diff::gradient_rel_err(&grads.w1, &fd_w1);
        assert!(rel < 1e-4, "w1 gradient off by {rel}");
        let rel = crate::numerics::finite_diff::gradient_rel_err(&grads.w2, &fd_w2);
        assert!(rel < 1e-4, "w2 gradient off by {rel}");
        if with_q {
            let fd_q = finite_diff_gradient(
                |q| loss_at(&params.w1, &params.w2, Some(q)),
                params.q.as_ref().unwrap(),
                h,
            );
            let rel =
                crate::numerics::finite_diff::gradient_rel_err(grads.q.as_ref().unwrap(), &fd_q);
            assert!(rel < 1e-4, "q gradient off by {rel}");
        }
    }

    use crate::graph::sample_training_negatives;
    use crate::rng::{rng_for, Stream};
    use rand::Rng;

    #[test]
    fn backward_matches_finite_differences_softmax() {
        check_gradients(FinalActivation::RowSoftmax, false, 1);
    }

    #[test]
    fn backward_matches_finite_differences_identity() {
        check_gradients(FinalActivation::Identity, false, 2);
    }

    #[test]
    fn backward_matches_finite_differences_with_q() {
        check_gradients(FinalActivation::RowSoftmax, true, 3);
        check_gradients(FinalActivation::Identity, true, 4);
    }

    #[test]
    fn init_params_deterministic_and_bounded() {
        let a = init_params::<f64>(7, 3, Some((9, 7)), FinalActivation::RowSoftmax, 42);
        let b = init_params::<f64>(7, 3, Some((9, 7)), FinalActivation::RowSoftmax, 42);
        assert_eq!(a.w1, b.w1);
        assert_eq!(a.w2, b.w2);
        assert_eq!(a.q, b.q);
        let c = init_params::<f64>(7, 3, Some((9, 7)), FinalActivation::RowSoftmax, 43);
        assert_ne!(a.w1, c.w1);
        let limit = (6.0f64 / (7.0 + 3.0)).sqrt();
        assert!(a.w1.data().iter().all(|v| v.abs() <= limit));
    }

    #[test]
    fn loss_decreases_along_gradient() {
        let (g, adj) = toy_graph(6, 12);
        let mut params = init_params::<f64>(6, 3, None, FinalActivation::RowSoftmax, 5);
        let positives = g.links();
        let negatives = sample_training_negatives(&g, positives.len(), 1, 1).unwrap();
        let mut last = f64::INFINITY;
        for _ in 0..10 {
            let (u, cache) = gcn_forward(&adj, &g.features, params.view()).unwrap();
            let (loss, du) = recon_loss_grad(&u, &positives, &negatives);
            assert!(loss >= 0.0);
            assert!(loss <= last + 1e-12, "loss increased: {last} -> {loss}");
            last = loss;
            let grads = gcn_backward(&cache, &du, params.view(), &adj, &g.features).unwrap();
            params.w1.add_assign_scaled(&grads.w1, -1e-3).unwrap();
            params.w2.add_assign_scaled(&grads.w2, -1e-3).unwrap();
        }
    }
}
