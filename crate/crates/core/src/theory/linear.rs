//! Linear-setting analysis: spectral regression targets, the closed-form
//! optimum, and the capacity (no-transfer) experiment.
//!
//! The linear code path is separate from the training engine: identity
//! activations and a squared loss against the spectral target
//! `|A_hat^2 X Theta - target|_F^2`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{pseudoinverse, sym_eig, Matrix};
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

/// Spectral regression target of one graph: leading eigenvectors scaled by
/// square roots of the singular values.
#[derive(Debug, Clone)]
pub struct LinearTarget<T> {
    /// `n x rank` orthonormal columns.
    pub basis: Matrix<T>,
    pub sqrt_singulars: Vec<T>,
    pub rank: usize,
}

impl<T: Scalar> LinearTarget<T> {
    /// The matrix `basis * diag(sqrt_singulars)`.
    pub fn target_matrix(&self) -> Matrix<T> {
        let mut t = Matrix::zeros(self.basis.rows(), self.rank);
        for j in 0..self.rank {
            for i in 0..self.basis.rows() {
                t[(i, j)] = self.basis[(i, j)] * self.sqrt_singulars[j];
            }
        }
        t
    }
}

/// Builds the target from a symmetric matrix: eigenpairs sorted by
/// magnitude, truncated at `eps_rank` relative to the largest singular
/// value.
pub fn linear_target<T: Scalar>(a: &Matrix<T>, eps_rank: T) -> LinearTarget<T> {
    let (q, vals) = sym_eig(a);
    let smax = vals.first().map(|v| v.abs()).unwrap_or_else(T::zero);
    let thresh = eps_rank * smax;
    let rank = vals
        .iter()
        .take_while(|v| v.abs() > thresh && v.abs() > T::zero())
        .count();
    let mut basis = Matrix::zeros(q.rows(), rank);
    let mut sqrt_singulars = Vec::with_capacity(rank);
    for j in 0..rank {
        for i in 0..q.rows() {
            basis[(i, j)] = q[(i, j)];
        }
        sqrt_singulars.push(vals[j].abs().sqrt());
    }
    LinearTarget {
        basis,
        sqrt_singulars,
        rank,
    }
}

/// Squared loss of the linear model: `|A_hat^2 X theta - target|_F^2`.
pub fn linear_loss<T: Scalar>(
    a_hat: &Matrix<T>,
    x: &Matrix<T>,
    theta: &Matrix<T>,
    target: &Matrix<T>,
) -> Result<T> {
    let m = a_hat.matmul(a_hat)?.matmul(x)?;
    let diff = m.matmul(theta)?.sub(target)?;
    Ok(diff.frobenius_norm().powi(2))
}

/// Closed-form optimum `pinv(X^T A_hat^4 X) X^T A_hat^2 target`.
pub fn closed_form_theta<T: Scalar>(
    a_hat: &Matrix<T>,
    x: &Matrix<T>,
    target: &LinearTarget<T>,
) -> Result<Matrix<T>> {
    let a2 = a_hat.matmul(a_hat)?;
    let m = a2.matmul(x)?;
    let normal = m.transpose_matmul(&m)?;
    let rhs = m.transpose_matmul(&target.target_matrix())?;
    pseudoinverse(&normal, T::from_f64(crate::numerics::DEFAULT_PINV_TOL))?.matmul(&rhs)
}

/// Gradient of [`linear_loss`] in `theta`: `2 M^T (M theta - target)` with
/// `M = A_hat^2 X`.
pub fn linear_loss_grad<T: Scalar>(
    a_hat: &Matrix<T>,
    x: &Matrix<T>,
    theta: &Matrix<T>,
    target: &Matrix<T>,
) -> Result<Matrix<T>> {
    let m = a_hat.matmul(a_hat)?.matmul(x)?;
    let resid = m.matmul(theta)?.sub(target)?;
    Ok(m.transpose_matmul(&resid)?.scale(T::from_f64(2.0)))
}

/// Trains the linear model by accelerated gradient descent from zero and
/// returns `(final_theta, final_loss)`. The step size comes from the top
/// singular value of `M = A_hat^2 X`.
pub fn gd_train_linear<T: Scalar>(
    a_hat: &Matrix<T>,
    x: &Matrix<T>,
    target: &LinearTarget<T>,
    max_iters: usize,
    stop_at_loss: Option<T>,
) -> Result<(Matrix<T>, T)> {
    let a2 = a_hat.matmul(a_hat)?;
    let m = a2.matmul(x)?;
    let t = target.target_matrix();
    let (_, s, _) = crate::numerics::svd(&m);
    let smax = s.first().copied().unwrap_or_else(T::one);
    let lip = T::from_f64(2.0) * smax * smax;
    let step = T::one() / lip.max(T::min_positive_value());

    let mut theta = Matrix::<T>::zeros(x.cols(), t.cols());
    let mut look = theta.clone();
    let mut best = (theta.clone(), T::infinity());
    for iter in 0..max_iters {
        let resid = m.matmul(&look)?.sub(&t)?;
        let loss = resid.frobenius_norm().powi(2);
        if loss < best.1 {
            best = (look.clone(), loss);
        }
        if stop_at_loss.map_or(false, |stop| loss <= stop) {
            break;
        }
        let grad = m.transpose_matmul(&resid)?.scale(T::from_f64(2.0));
        let mut next = look.clone();
        next.add_assign_scaled(&grad, -step)?;
        // Nesterov momentum schedule (iter + 1) / (iter + 4)
        let momentum = T::from_f64((iter + 1) as f64 / (iter + 4) as f64);
        let mut extrapolated = next.clone();
        let delta = next.sub(&theta)?;
        extrapolated.add_assign_scaled(&delta, momentum)?;
        theta = next;
        look = extrapolated;
    }
    Ok(best)
}

/// Which weight stack the capacity experiment shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharedSet {
    W2,
    W1W2,
}

/// One linear-setting instance: propagation matrix, features, and the
/// symmetric matrix whose spectrum defines the target.
#[derive(Debug, Clone)]
pub struct LinearInstance<T> {
    pub a: Matrix<T>,
    pub a_hat: Matrix<T>,
    pub x: Matrix<T>,
}

/// Random weighted graph instance with the standard normalization.
pub fn random_linear_instance<T: Scalar>(
    n: usize,
    m: usize,
    edge_p: f64,
    seed: u64,
) -> LinearInstance<T> {
    let mut rng = rng_for(seed, Stream::Synthetic, 20);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(edge_p) {
                edges.push((i, j, T::from_f64(rng.gen_range(0.5..2.0))));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, (1).min(n - 1), T::one()));
    }
    let g = crate::graph::Graph::from_edges(n, &edges).expect("valid random graph");
    let a_hat = crate::graph::normalize_adjacency(&g).matrix;
    let x = Matrix::from_fn(n, m, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::from_f64(z)
    });
    LinearInstance {
        a: g.adjacency,
        a_hat,
        x,
    }
}

#[derive(Debug, Clone)]
pub struct NoTransferReport {
    pub joint_loss: f64,
    pub independent_loss: f64,
    /// `(joint - independent) / independent`.
    pub relative_gap: f64,
    pub capacity: usize,
    pub d: usize,
}

/// Conjugate gradients on `op(x) = rhs` under the Frobenius inner product;
/// `op` must be symmetric positive semidefinite.
fn cg_solve<T: Scalar>(
    op: impl Fn(&Matrix<T>) -> Result<Matrix<T>>,
    rhs: &Matrix<T>,
    x0: Matrix<T>,
    iters: usize,
) -> Result<Matrix<T>> {
    let dot = |a: &Matrix<T>, b: &Matrix<T>| -> T {
        a.data().iter().zip(b.data()).map(|(&p, &q)| p * q).sum()
    };
    let mut x = x0;
    let mut r = rhs.sub(&op(&x)?)?;
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let scale = dot(rhs, rhs).max(T::min_positive_value());
    for _ in 0..iters {
        if rs <= T::from_f64(1e-28) * scale {
            break;
        }
        let ap = op(&p)?;
        let denom = dot(&p, &ap);
        if denom <= T::zero() {
            break;
        }
        let alpha = rs / denom;
        x.add_assign_scaled(&p, alpha)?;
        r.add_assign_scaled(&ap, -alpha)?;
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        let mut p_new = r.clone();
        p_new.add_assign_scaled(&p, beta)?;
        p = p_new;
        rs = rs_new;
    }
    Ok(x)
}

struct JointState<T> {
    /// Per-graph first-layer matrices; all point at index 0 when shared.
    w1: Vec<Matrix<T>>,
    w2: Matrix<T>,
    b: Vec<Matrix<T>>,
    share_w1: bool,
}

impl<T: Scalar> JointState<T> {
    fn loss(&self, ms: &[Matrix<T>], targets: &[Matrix<T>]) -> Result<T> {
        let mut total = T::zero();
        for i in 0..ms.len() {
            let w1 = if self.share_w1 { &self.w1[0] } else { &self.w1[i] };
            let pred = ms[i].matmul(w1)?.matmul(&self.w2)?.matmul(&self.b[i])?;
            total += pred.sub(&targets[i])?.frobenius_norm().powi(2);
        }
        Ok(total)
    }
}

/// Joint training of the shared-parameter linear stack by block-coordinate
/// least squares (each block solved by conjugate gradients), compared
/// against the sum of unconstrained closed-form optima.
pub fn no_transfer_experiment<T: Scalar>(
    instances: &[LinearInstance<T>],
    d: usize,
    shared: SharedSet,
    eps_rank: T,
    seed: u64,
) -> Result<NoTransferReport> {
    let k = instances.len();
    if k == 0 {
        return Err(Error::Contract("need at least one graph".into()));
    }
    let targets: Vec<LinearTarget<T>> = instances
        .iter()
        .map(|inst| linear_target(&inst.a, eps_rank))
        .collect();
    let capacity: usize = targets.iter().map(|t| t.rank).sum();
    let target_mats: Vec<Matrix<T>> = targets.iter().map(|t| t.target_matrix()).collect();
    let ms: Vec<Matrix<T>> = instances
        .iter()
        .map(|inst| Ok(inst.a_hat.matmul(&inst.a_hat)?.matmul(&inst.x)?))
        .collect::<Result<_>>()?;

    // unconstrained optima
    let mut independent = T::zero();
    for (inst, target) in instances.iter().zip(&targets) {
        let theta = closed_form_theta(&inst.a_hat, &inst.x, target)?;
        independent += linear_loss(&inst.a_hat, &inst.x, &theta, &target.target_matrix())?;
    }

    if k == 1 {
        // nothing is shared across graphs; the joint model is the model
        return Ok(NoTransferReport {
            joint_loss: independent.to_f64(),
            independent_loss: independent.to_f64(),
            relative_gap: 0.0,
            capacity,
            d,
        });
    }

    let share_w1 = shared == SharedSet::W1W2;
    if share_w1 {
        let m0 = instances[0].x.cols();
        if instances.iter().any(|inst| inst.x.cols() != m0) {
            return Err(Error::Config(
                "sharing the first layer requires equal feature counts".into(),
            ));
        }
    }

    let mut best: Option<(T, JointState<T>)> = None;
    for restart in 0..2u64 {
        let mut rng = rng_for(seed, Stream::Experiment, 30 + restart);
        let mut normal = || T::from_f64(<StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng) * 0.3);
        let mut state = JointState {
            w1: (0..k)
                .map(|i| {
                    let m_cols = instances[i].x.cols();
                    Matrix::from_fn(m_cols, d, |_, _| normal())
                })
                .collect(),
            w2: Matrix::from_fn(d, d, |_, _| normal()),
            b: (0..k)
                .map(|i| Matrix::from_fn(d, targets[i].rank, |_, _| normal()))
                .collect(),
            share_w1,
        };
        let mut last = state.loss(&ms, &target_mats)?;
        for _outer in 0..400 {
            // B blocks: plain least squares per graph
            for i in 0..k {
                let w1 = if share_w1 { &state.w1[0] } else { &state.w1[i] };
                let f = ms[i].matmul(w1)?.matmul(&state.w2)?;
                let pinv = pseudoinverse(&f, T::from_f64(crate::numerics::DEFAULT_PINV_TOL))?;
                state.b[i] = pinv.matmul(&target_mats[i])?;
            }
            // W1 blocks
            if share_w1 {
                let gs: Vec<Matrix<T>> = (0..k)
                    .map(|i| state.w2.matmul(&state.b[i]))
                    .collect::<Result<_>>()?;
                let rhs = {
                    let mut acc = Matrix::zeros(instances[0].x.cols(), d);
                    for i in 0..k {
                        acc = acc.add(&ms[i].transpose_matmul(&target_mats[i].matmul_transpose(&gs[i])?)?)?;
                    }
                    acc
                };
                let op = |w: &Matrix<T>| -> Result<Matrix<T>> {
                    let mut acc = Matrix::zeros(w.rows(), w.cols());
                    for i in 0..k {
                        let t = ms[i].matmul(w)?.matmul(&gs[i])?;
                        acc = acc.add(&ms[i].transpose_matmul(&t.matmul_transpose(&gs[i])?)?)?;
                    }
                    Ok(acc)
                };
                state.w1[0] = cg_solve(op, &rhs, state.w1[0].clone(), 400)?;
            } else {
                for i in 0..k {
                    let g = state.w2.matmul(&state.b[i])?;
                    let rhs = ms[i].transpose_matmul(&target_mats[i].matmul_transpose(&g)?)?;
                    let op = |w: &Matrix<T>| -> Result<Matrix<T>> {
                        let t = ms[i].matmul(w)?.matmul(&g)?;
                        ms[i].transpose_matmul(&t.matmul_transpose(&g)?)
                    };
                    state.w1[i] = cg_solve(op, &rhs, state.w1[i].clone(), 400)?;
                }
            }
            // W2 block
            {
                let cs: Vec<Matrix<T>> = (0..k)
                    .map(|i| {
                        let w1 = if share_w1 { &state.w1[0] } else { &state.w1[i] };
                        ms[i].matmul(w1)
                    })
                    .collect::<Result<_>>()?;
                let rhs = {
                    let mut acc = Matrix::zeros(d, d);
                    for i in 0..k {
                        acc = acc.add(
                            &cs[i].transpose_matmul(&target_mats[i].matmul_transpose(&state.b[i])?)?,
                        )?;
                    }
                    acc
                };
                let op = |w: &Matrix<T>| -> Result<Matrix<T>> {
                    let mut acc = Matrix::zeros(d, d);
                    for i in 0..k {
                        let t = cs[i].matmul(w)?.matmul(&state.b[i])?;
                        acc = acc.add(&cs[i].transpose_matmul(&t.matmul_transpose(&state.b[i])?)?)?;
                    }
                    Ok(acc)
                };
                state.w2 = cg_solve(op, &rhs, state.w2.clone(), 400)?;
            }
            let now = state.loss(&ms, &target_mats)?;
            if !now.to_f64().is_finite() {
                return Err(Error::Diverged {
                    epoch: _outer,
                    loss: now.to_f64(),
                });
            }
            let converged = (last - now).abs() <= T::from_f64(1e-14) * (T::one() + last.abs());
            last = now;
            if converged {
                break;
            }
        }
        let final_loss = state.loss(&ms, &target_mats)?;
        if best.as_ref().map_or(true, |(b, _)| final_loss < *b) {
            best = Some((final_loss, state));
        }
    }
    let (joint, _) = best.expect("at least one restart ran");
    let independent_f = independent.to_f64();
    let relative_gap = (joint.to_f64() - independent_f) / independent_f.max(1e-300);
    Ok(NoTransferReport {
        joint_loss: joint.to_f64(),
        independent_loss: independent_f,
        relative_gap,
        capacity,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    #[test]
    fn identity_target_has_full_rank_and_unit_roots() {
        let t = linear_target(&M::identity(3), 1e-9);
        assert_eq!(t.rank, 3);
        for s in &t.sqrt_singulars {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_outer_product_detected() {
        let v = M::from_rows(&[&[1.0], &[2.0], &[-0.5]]);
        let a = v.matmul_transpose(&v).unwrap();
        let t = linear_target(&a, 1e-9);
        assert_eq!(t.rank, 1);
    }

    #[test]
    fn psd_target_reconstructs() {
        // A = V V^T is PSD, so basis * diag(sqrt) multiplied back equals A
        let mut rng = rng_for(3, Stream::Synthetic, 0);
        let v = M::from_fn(5, 2, |_, _| rng.gen_range(-1.0..1.0));
        let a = v.matmul_transpose(&v).unwrap();
        let t = linear_target(&a, 1e-9);
        assert_eq!(t.rank, 2);
        let tm = t.target_matrix();
        let rec = tm.matmul_transpose(&tm).unwrap();
        assert!(rec.sub(&a).unwrap().frobenius_norm() < 1e-8);
    }

    #[test]
    fn closed_form_identity_case() {
        // A_hat = I, X = I: normal equations give theta = target
        let a = M::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let target = linear_target(&a, 1e-9);
        let theta = closed_form_theta(&M::identity(2), &M::identity(2), &target).unwrap();
        assert!(theta.rel_err(&target.target_matrix()) < 1e-10);
    }

    #[test]
    fn closed_form_satisfies_normal_equations() {
        for seed in 0..5 {
            let inst = random_linear_instance::<f64>(8, 4, 0.5, seed);
            let target = linear_target(&inst.a, 1e-9);
            let theta = closed_form_theta(&inst.a_hat, &inst.x, &target).unwrap();
            let grad =
                linear_loss_grad(&inst.a_hat, &inst.x, &theta, &target.target_matrix()).unwrap();
            assert!(
                grad.frobenius_norm() < 1e-8,
                "seed {seed}: residual gradient {}",
                grad.frobenius_norm()
            );
        }
    }

    #[test]
    fn gradient_descent_reaches_closed_form_loss() {
        for seed in 0..5 {
            let inst = random_linear_instance::<f64>(8, 4, 0.5, 100 + seed);
            let target = linear_target(&inst.a, 1e-9);
            let theta = closed_form_theta(&inst.a_hat, &inst.x, &target).unwrap();
            let best = linear_loss(&inst.a_hat, &inst.x, &theta, &target.target_matrix()).unwrap();
            let (_, reached) = gd_train_linear(
                &inst.a_hat,
                &inst.x,
                &target,
                200_000,
                Some(best * (1.0 + 5e-5)),
            )
            .unwrap();
            assert!(best > 0.0, "seed {seed}: want a nonzero residual instance");
            assert!(
                (reached - best) / best < 1e-4,
                "seed {seed}: gd loss {reached} vs optimum {best}"
            );
        }
    }

    fn bipartite(a: usize, b: usize) -> LinearInstance<f64> {
        // complete bipartite adjacency has rank two
        let n = a + b;
        let mut edges = Vec::new();
        for i in 0..a {
            for j in 0..b {
                edges.push((i, a + j, 1.0));
            }
        }
        let g = crate::graph::Graph::from_edges(n, &edges).unwrap();
        let a_hat = crate::graph::normalize_adjacency(&g).matrix;
        let mut rng = rng_for((a * 31 + b) as u64, Stream::Synthetic, 21);
        let x = M::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
        LinearInstance {
            a: g.adjacency,
            a_hat,
            x,
        }
    }

    #[test]
    fn two_rank2_graphs_no_transfer_at_capacity() {
        let instances = [bipartite(2, 3), bipartite(2, 2)];
        for inst in &instances {
            assert_eq!(linear_target(&inst.a, 1e-9).rank, 2);
        }
        let report = no_transfer_experiment(&instances, 4, SharedSet::W2, 1e-9, 7).unwrap();
        assert_eq!(report.capacity, 4);
        assert!(
            report.relative_gap.abs() <= 1e-3,
            "gap {} too large",
            report.relative_gap
        );
        let tight = no_transfer_experiment(&instances, 1, SharedSet::W2, 1e-9, 7).unwrap();
        assert!(
            tight.relative_gap > 1e-2,
            "capacity-starved gap {} unexpectedly small",
            tight.relative_gap
        );
    }

    #[test]
    fn single_graph_gap_is_exactly_zero() {
        let instances = [bipartite(2, 3)];
        let report = no_transfer_experiment(&instances, 2, SharedSet::W2, 1e-9, 1).unwrap();
        assert_eq!(report.relative_gap, 0.0);
    }

    use crate::rng::{rng_for, Stream};
    use rand::Rng;
}
