//! Relational GCN encoder, diagonal bilinear (core-tensor) decoder,
//! relational loss, and cross-network training for relation classification.
//!
//! Per layer, messages are summed over relation types with per-(node,
//! relation) neighbor-count normalizers, plus a dedicated self-loop weight
//! matrix (without it, featureless isolated nodes collapse to zero).

use std::collections::HashSet;

use rand::Rng;

use crate::crossnet::{
    align_recon_grad, hard_reg_grad, soft_reg_grad, AlignMode, Gradients, ModelConfig, ParamStore,
    QMode, Sharing, SlotId, Strategy, VariantId,
};
use crate::error::{Error, Result};
use crate::gcn::glorot;
use crate::graph::{Alignment, RelationalGraph, TripleSplit};
use crate::numerics::matrix::{row_softmax, sigmoid};
use crate::numerics::{AdamState, Matrix};
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

/// How the per-(node, relation) normalizer is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizerKind {
    /// `c_{i,r}` = number of `r`-neighbors of node `i`.
    #[default]
    PerNodeNeighborCount,
    /// One constant per relation: the mean neighbor count over nodes that
    /// have any `r`-neighbor.
    GlobalPerRelation,
}

/// Row-normalized propagation matrices, one per relation.
#[derive(Debug, Clone)]
pub struct RelNormalizer<T> {
    pub propagation: Vec<Matrix<T>>,
}

impl<T: Scalar> RelNormalizer<T> {
    pub fn build(rg: &RelationalGraph<T>, kind: NormalizerKind) -> Self {
        let n = rg.entity_count();
        let n_r = rg.relation_count();
        let mut adj = vec![Matrix::<T>::zeros(n, n); n_r];
        for &(h, t, r) in &rg.triples {
            adj[r][(h, t)] = T::one();
        }
        let mut propagation = Vec::with_capacity(n_r);
        for a in adj {
            let counts: Vec<T> = (0..n)
                .map(|i| a.row(i).iter().copied().sum::<T>())
                .collect();
            let scale: Vec<T> = match kind {
                NormalizerKind::PerNodeNeighborCount => counts
                    .iter()
                    .map(|&c| if c > T::zero() { T::one() / c } else { T::zero() })
                    .collect(),
                NormalizerKind::GlobalPerRelation => {
                    let active: Vec<T> =
                        counts.iter().copied().filter(|&c| c > T::zero()).collect();
                    let mean = if active.is_empty() {
                        T::one()
                    } else {
                        active.iter().copied().sum::<T>() / T::from_f64(active.len() as f64)
                    };
                    counts.iter().map(|_| T::one() / mean).collect()
                }
            };
            let mut p = a;
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] = p[(i, j)] * scale[i];
                }
            }
            propagation.push(p);
        }
        RelNormalizer { propagation }
    }
}

/// Slot wiring of one relational GCN within a cross-network model.
#[derive(Debug, Clone)]
pub struct RelWiring {
    /// Per-relation first-layer matrices.
    pub w1: Vec<SlotId>,
    pub w1_self: SlotId,
    /// Per-relation second-layer matrices.
    pub w2: Vec<SlotId>,
    pub w2_self: SlotId,
    /// Rows are the per-relation diagonals of the scoring tensor.
    pub core: SlotId,
    pub q: Option<SlotId>,
}

/// Whether per-relation tensors may be shared across different schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelSharingMode {
    /// Share the self-loop matrices plus the leading
    /// `min(n_R_a, n_R_b)` relation slots by index.
    #[default]
    IndexTruncation,
    /// Require identical relation counts and share every slot.
    FullSchema,
}

/// Cross-network relational model.
#[derive(Debug, Clone)]
pub struct RelModel<T> {
    pub config: ModelConfig,
    pub store: ParamStore<T>,
    wiring: Vec<RelWiring>,
    r_slot: Option<SlotId>,
}

fn supported_variant(config: &ModelConfig) -> Result<()> {
    let ok = match (config.sharing, config.q_mode, config.align_mode, config.strategy) {
        (_, _, _, Strategy::PretrainAThenB | Strategy::PretrainBThenA) => false,
        (Sharing::ShareW1W2, QMode::AToB | QMode::BToA, _, _) => false,
        (_, _, AlignMode::Hard, _) => false,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(
            "relational pipeline supports separated, m1, m2, m5, m11, m12, m13".into(),
        ))
    }
}

impl<T: Scalar> RelModel<T> {
    pub fn build(
        config: ModelConfig,
        graphs: &[&RelationalGraph<T>],
        sharing_mode: RelSharingMode,
        seed: u64,
    ) -> Result<Self> {
        supported_variant(&config)?;
        let feature_dims: Vec<usize> = graphs.iter().map(|g| g.features.cols()).collect();
        config.validate(&feature_dims)?;
        let k = graphs.len();
        if k != 2 {
            return Err(Error::Config("relational models compose two graphs".into()));
        }
        let rel_counts: Vec<usize> = graphs.iter().map(|g| g.relation_count()).collect();
        let shared_rels = match sharing_mode {
            RelSharingMode::IndexTruncation => *rel_counts.iter().min().unwrap(),
            RelSharingMode::FullSchema => {
                if rel_counts[0] != rel_counts[1] {
                    return Err(Error::Config(format!(
                        "full per-relation sharing needs matching schemas, got {} and {} relations",
                        rel_counts[0], rel_counts[1]
                    )));
                }
                rel_counts[0]
            }
        };
        let d = config.dims[0];
        let mut rng = rng_for(seed, Stream::Init, 1);
        let mut store = ParamStore::new();

        // shared slots first, in a fixed order
        let share_w1 = config.sharing == Sharing::ShareW1W2;
        let share_w2 = matches!(config.sharing, Sharing::ShareW2 | Sharing::ShareW1W2);
        let shared_input = config.shared_input_dim(&feature_dims);
        let shared_w1: Vec<SlotId> = if share_w1 {
            let input = shared_input.unwrap();
            (0..shared_rels)
                .map(|r| store.add(format!("shared.w1.r{}", r), glorot(input, d, &mut rng)))
                .collect()
        } else {
            Vec::new()
        };
        let shared_w1_self = if share_w1 {
            let input = shared_input.unwrap();
            Some(store.add("shared.w1.self", glorot(input, d, &mut rng)))
        } else {
            None
        };
        let shared_w2: Vec<SlotId> = if share_w2 {
            (0..shared_rels)
                .map(|r| store.add(format!("shared.w2.r{}", r), glorot(d, d, &mut rng)))
                .collect()
        } else {
            Vec::new()
        };
        let shared_w2_self = if share_w2 {
            Some(store.add("shared.w2.self", glorot(d, d, &mut rng)))
        } else {
            None
        };

        let mut wiring = Vec::with_capacity(k);
        for (g, rg) in graphs.iter().enumerate() {
            let n_r = rg.relation_count();
            let m = rg.features.cols();
            let q = match config.q_mode {
                QMode::Both => {
                    let m_hat = shared_input.unwrap();
                    Some(store.add(format!("g{}.q", g), glorot(m, m_hat, &mut rng)))
                }
                _ => None,
            };
            let input = if share_w1 { shared_input.unwrap() } else { m };
            let w1: Vec<SlotId> = (0..n_r)
                .map(|r| {
                    if share_w1 && r < shared_rels {
                        shared_w1[r]
                    } else {
                        store.add(format!("g{}.w1.r{}", g, r), glorot(input, d, &mut rng))
                    }
                })
                .collect();
            let w1_self = match shared_w1_self {
                Some(id) => id,
                None => store.add(format!("g{}.w1.self", g), glorot(input, d, &mut rng)),
            };
            let w2: Vec<SlotId> = (0..n_r)
                .map(|r| {
                    if share_w2 && r < shared_rels {
                        shared_w2[r]
                    } else {
                        store.add(format!("g{}.w2.r{}", g, r), glorot(d, d, &mut rng))
                    }
                })
                .collect();
            let w2_self = match shared_w2_self {
                Some(id) => id,
                None => store.add(format!("g{}.w2.self", g), glorot(d, d, &mut rng)),
            };
            // the scoring tensor stays per graph: its rows are tied to the
            // graph's own relation schema
            let core = store.add(format!("g{}.core", g), glorot(n_r, d, &mut rng));
            wiring.push(RelWiring {
                w1,
                w1_self,
                w2,
                w2_self,
                core,
                q,
            });
        }

        let r_slot = if config.align_mode.needs_r() {
            Some(store.add(
                "align.r0_1",
                glorot(config.dims[0], config.dims[1], &mut rng),
            ))
        } else {
            None
        };

        Ok(RelModel {
            config,
            store,
            wiring,
            r_slot,
        })
    }

    pub fn wiring(&self, g: usize) -> &RelWiring {
        &self.wiring[g]
    }

    pub fn r_matrix(&self) -> Option<&Matrix<T>> {
        self.r_slot.map(|id| self.store.get(id))
    }

    pub fn r_slot(&self) -> Option<SlotId> {
        self.r_slot
    }

    pub fn zero_grads(&self) -> Gradients<T> {
        Gradients::zeros_like(&self.store)
    }
}

/// Intermediates kept for the relational backward pass.
pub struct RelForwardCache<T> {
    x_eff: Matrix<T>,
    /// `P_r x_eff` per relation.
    px: Vec<Matrix<T>>,
    z1: Matrix<T>,
    h1: Matrix<T>,
    /// `P_r h1` per relation.
    ph: Vec<Matrix<T>>,
    pub u: Matrix<T>,
}

/// Forward pass with per-relation message passing and self-loop terms.
pub fn rgcn_forward<T: Scalar>(
    norm: &RelNormalizer<T>,
    x: &Matrix<T>,
    model: &RelModel<T>,
    g: usize,
    include_self_loop: bool,
) -> Result<(Matrix<T>, RelForwardCache<T>)> {
    let w = model.wiring(g);
    let store = &model.store;
    if norm.propagation.len() != w.w1.len() {
        return Err(Error::shape(
            "rgcn_forward",
            format!("{} relations", w.w1.len()),
            format!("{} propagation matrices", norm.propagation.len()),
        ));
    }
    let x_eff = match w.q {
        Some(q) => x.matmul(store.get(q))?,
        None => x.clone(),
    };
    let n = x_eff.rows();
    let d = store.get(w.w1_self).cols();

    let mut px = Vec::with_capacity(norm.propagation.len());
    let mut z1 = if include_self_loop {
        x_eff.matmul(store.get(w.w1_self))?
    } else {
        Matrix::zeros(n, d)
    };
    for (r, p) in norm.propagation.iter().enumerate() {
        let pxr = p.matmul(&x_eff)?;
        z1 = z1.add(&pxr.matmul(store.get(w.w1[r]))?)?;
        px.push(pxr);
    }
    let h1 = z1.map(|v| if v > T::zero() { v } else { T::zero() });

    let mut ph = Vec::with_capacity(norm.propagation.len());
    let mut z2 = if include_self_loop {
        h1.matmul(store.get(w.w2_self))?
    } else {
        Matrix::zeros(n, d)
    };
    for (r, p) in norm.propagation.iter().enumerate() {
        let phr = p.matmul(&h1)?;
        z2 = z2.add(&phr.matmul(store.get(w.w2[r]))?)?;
        ph.push(phr);
    }
    let u = row_softmax(&z2);
    let cache = RelForwardCache {
        x_eff,
        px,
        z1,
        h1,
        ph,
        u: u.clone(),
    };
    Ok((u, cache))
}

/// Gradients for one relational GCN, indexed like its wiring.
pub struct RelGcnGrads<T> {
    pub w1: Vec<Matrix<T>>,
    pub w1_self: Matrix<T>,
    pub w2: Vec<Matrix<T>>,
    pub w2_self: Matrix<T>,
    pub q: Option<Matrix<T>>,
}

pub fn rgcn_backward<T: Scalar>(
    cache: &RelForwardCache<T>,
    du: &Matrix<T>,
    norm: &RelNormalizer<T>,
    x: &Matrix<T>,
    model: &RelModel<T>,
    g: usize,
    include_self_loop: bool,
) -> Result<RelGcnGrads<T>> {
    let w = model.wiring(g);
    let store = &model.store;
    if du.shape() != cache.u.shape() {
        return Err(Error::Contract(format!(
            "stale cache: dU is {}, cached U is {}",
            du.dims(),
            cache.u.dims()
        )));
    }
    let dz2 = crate::gcn::softmax_backward(&cache.u, du);
    let mut dw2 = Vec::with_capacity(w.w2.len());
    let mut dh1 = if include_self_loop {
        dz2.matmul_transpose(store.get(w.w2_self))?
    } else {
        Matrix::zeros(dz2.rows(), dz2.cols())
    };
    let dw2_self = if include_self_loop {
        cache.h1.transpose_matmul(&dz2)?
    } else {
        Matrix::zeros(dz2.cols(), dz2.cols())
    };
    for (r, p) in norm.propagation.iter().enumerate() {
        dw2.push(cache.ph[r].transpose_matmul(&dz2)?);
        let t = dz2.matmul_transpose(store.get(w.w2[r]))?;
        dh1 = dh1.add(&p.transpose_matmul(&t)?)?;
    }
    let dz1 = dh1.hadamard(&cache.z1.map(|v| if v > T::zero() { T::one() } else { T::zero() }))?;
    let mut dw1 = Vec::with_capacity(w.w1.len());
    let dw1_self = if include_self_loop {
        cache.x_eff.transpose_matmul(&dz1)?
    } else {
        Matrix::zeros(cache.x_eff.cols(), dz1.cols())
    };
    for (r, _) in norm.propagation.iter().enumerate() {
        dw1.push(cache.px[r].transpose_matmul(&dz1)?);
    }
    let dq = match w.q {
        Some(_) => {
            let mut dx_eff = if include_self_loop {
                dz1.matmul_transpose(store.get(w.w1_self))?
            } else {
                Matrix::zeros(dz1.rows(), cache.x_eff.cols())
            };
            for (r, p) in norm.propagation.iter().enumerate() {
                let t = dz1.matmul_transpose(store.get(w.w1[r]))?;
                dx_eff = dx_eff.add(&p.transpose_matmul(&t)?)?;
            }
            Some(x.transpose_matmul(&dx_eff)?)
        }
        None => None,
    };
    Ok(RelGcnGrads {
        w1: dw1,
        w1_self: dw1_self,
        w2: dw2,
        w2_self: dw2_self,
        q: dq,
    })
}

/// Diagonal bilinear score `sigmoid(sum_k u_h[k] * core[r][k] * u_t[k])`.
pub fn distmult_score<T: Scalar>(
    u: &Matrix<T>,
    core: &Matrix<T>,
    triple: (usize, usize, usize),
) -> T {
    let (h, t, r) = triple;
    let mut s = T::zero();
    for k in 0..u.cols() {
        s += u[(h, k)] * core[(r, k)] * u[(t, k)];
    }
    sigmoid(s)
}

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

/// Cross-entropy over positive triples and corrupted negatives.
pub fn relational_loss<T: Scalar>(
    u: &Matrix<T>,
    core: &Matrix<T>,
    positives: &[(usize, usize, usize)],
    negatives: &[(usize, usize, usize)],
) -> T {
    let mut loss = T::zero();
    for &tr in positives {
        loss -= clamp_prob(distmult_score(u, core, tr)).ln();
    }
    for &tr in negatives {
        loss -= clamp_prob(T::one() - distmult_score(u, core, tr)).ln();
    }
    loss
}

/// Loss plus gradients with respect to `u` and the core tensor rows.
pub fn relational_loss_grad<T: Scalar>(
    u: &Matrix<T>,
    core: &Matrix<T>,
    positives: &[(usize, usize, usize)],
    negatives: &[(usize, usize, usize)],
) -> (T, Matrix<T>, Matrix<T>) {
    let mut loss = T::zero();
    let mut du = Matrix::zeros(u.rows(), u.cols());
    let mut dcore = Matrix::zeros(core.rows(), core.cols());
    let mut accumulate = |triple: (usize, usize, usize), positive: bool| {
        let (h, t, r) = triple;
        let p = distmult_score(u, core, triple);
        if positive {
            loss -= clamp_prob(p).ln();
        } else {
            loss -= clamp_prob(T::one() - p).ln();
        }
        let dscore = if positive { p - T::one() } else { p };
        for k in 0..u.cols() {
            let uh = u[(h, k)];
            let ut = u[(t, k)];
            let c = core[(r, k)];
            du[(h, k)] += dscore * c * ut;
            du[(t, k)] += dscore * c * uh;
            dcore[(r, k)] += dscore * uh * ut;
        }
    };
    for &tr in positives {
        accumulate(tr, true);
    }
    for &tr in negatives {
        accumulate(tr, false);
    }
    drop(accumulate);
    (loss, du, dcore)
}

/// Uniformly corrupts the head or tail of each positive, avoiding known
/// training triples.
pub fn corrupt_triples<T: Scalar>(
    rg: &RelationalGraph<T>,
    positives: &[(usize, usize, usize)],
    seed: u64,
) -> Result<Vec<(usize, usize, usize)>> {
    let n = rg.entity_count();
    if n < 2 {
        return Err(Error::Sampling("need at least two entities".into()));
    }
    let known: HashSet<(usize, usize, usize)> = positives.iter().copied().collect();
    let mut rng = rng_for(seed, Stream::TrainNegatives, 2);
    let mut out = Vec::with_capacity(positives.len());
    for &(h, t, r) in positives {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::Sampling(
                    "exceeded retry budget corrupting triples".into(),
                ));
            }
            let candidate = if rng.gen_bool(0.5) {
                (rng.gen_range(0..n), t, r)
            } else {
                (h, rng.gen_range(0..n), r)
            };
            if candidate != (h, t, r) && !known.contains(&candidate) {
                out.push(candidate);
                break;
            }
        }
    }
    Ok(out)
}

/// Per-graph relational training inputs.
pub struct RelGraphData<T> {
    pub norm: RelNormalizer<T>,
    pub features: Matrix<T>,
    pub positives: Vec<(usize, usize, usize)>,
    pub negatives: Vec<(usize, usize, usize)>,
}

impl<T: Scalar> RelModel<T> {
    /// Combined relational objective, mirroring the link-task weighting:
    /// `(1 - beta) * alpha_i` per graph plus `beta` on the alignment term.
    pub fn combined_loss_grad(
        &self,
        data: &[RelGraphData<T>],
        alignment: Option<&Alignment>,
        include_self_loop: bool,
    ) -> Result<(T, Gradients<T>)> {
        if data.len() != 2 {
            return Err(Error::Config("relational models compose two graphs".into()));
        }
        let beta = if self.config.align_mode == AlignMode::None {
            T::zero()
        } else {
            T::from_f64(self.config.beta)
        };
        let mut grads = self.zero_grads();
        let mut total = T::zero();
        let mut states = Vec::with_capacity(2);
        for (g, gd) in data.iter().enumerate() {
            let weight = (T::one() - beta) * T::from_f64(self.config.alpha[g]);
            let (u, cache) = rgcn_forward(&gd.norm, &gd.features, self, g, include_self_loop)?;
            let core = self.store.get(self.wiring(g).core);
            let (loss_g, du_g, dcore) =
                relational_loss_grad(&u, core, &gd.positives, &gd.negatives);
            total += weight * loss_g;
            grads.accumulate(self.wiring(g).core, &dcore, weight)?;
            states.push((u, cache, du_g.scale(weight)));
        }
        if beta > T::zero() {
            let alignment = alignment.ok_or_else(|| {
                Error::Config("alignment term requested but no alignment supplied".into())
            })?;
            let (h, du_a, du_b, dr) = {
                let (u_a, _, _) = &states[0];
                let (u_b, _, _) = &states[1];
                match self.config.align_mode {
                    AlignMode::Soft => {
                        let r = self.r_matrix().expect("soft mode builds R");
                        let (h, da, db, dr) =
                            soft_reg_grad(u_a, u_b, r, alignment, self.config.reg_scope)?;
                        (h, da, db, Some(dr))
                    }
                    AlignMode::Reconstruction => {
                        let r = self.r_matrix().expect("reconstruction mode builds R");
                        let (h, da, db, dr) = align_recon_grad(u_a, u_b, r, alignment)?;
                        (h, da, db, Some(dr))
                    }
                    AlignMode::Hard => {
                        let (h, da, db) =
                            hard_reg_grad(u_a, u_b, alignment, self.config.reg_scope)?;
                        (h, da, db, None)
                    }
                    AlignMode::None => unreachable!("beta is zero when align_mode is none"),
                }
            };
            total += beta * h;
            states[0].2.add_assign_scaled(&du_a, beta)?;
            states[1].2.add_assign_scaled(&du_b, beta)?;
            if let (Some(dr), Some(slot)) = (dr, self.r_slot) {
                grads.accumulate(slot, &dr, beta)?;
            }
        }
        for (g, gd) in data.iter().enumerate() {
            let (_, cache, du) = &states[g];
            let gg = rgcn_backward(cache, du, &gd.norm, &gd.features, self, g, include_self_loop)?;
            let w = self.wiring(g);
            for (r, dw) in gg.w1.iter().enumerate() {
                grads.accumulate(w.w1[r], dw, T::one())?;
            }
            grads.accumulate(w.w1_self, &gg.w1_self, T::one())?;
            for (r, dw) in gg.w2.iter().enumerate() {
                grads.accumulate(w.w2[r], dw, T::one())?;
            }
            grads.accumulate(w.w2_self, &gg.w2_self, T::one())?;
            if let (Some(q), Some(dq)) = (w.q, gg.q) {
                grads.accumulate(q, &dq, T::one())?;
            }
        }
        Ok((total, grads))
    }

    pub fn combined_loss(
        &self,
        data: &[RelGraphData<T>],
        alignment: Option<&Alignment>,
        include_self_loop: bool,
    ) -> Result<T> {
        self.combined_loss_grad(data, alignment, include_self_loop)
            .map(|(l, _)| l)
    }
}

/// Trains a relational cross-network model and returns the loss trace.
pub fn cross_rgcn_train<T: Scalar>(
    model: &mut RelModel<T>,
    graphs: &[&RelationalGraph<T>],
    train_triples: &[Vec<(usize, usize, usize)>],
    alignment: Option<&Alignment>,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    cross_rgcn_train_with_callback(
        model,
        graphs,
        train_triples,
        alignment,
        epochs,
        learning_rate,
        seed,
        |_, _| Ok(()),
    )
}

/// As [`cross_rgcn_train`], invoking `callback(epoch, model)` after every
/// optimizer step.
#[allow(clippy::too_many_arguments)]
pub fn cross_rgcn_train_with_callback<T: Scalar>(
    model: &mut RelModel<T>,
    graphs: &[&RelationalGraph<T>],
    train_triples: &[Vec<(usize, usize, usize)>],
    alignment: Option<&Alignment>,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
    mut callback: impl FnMut(usize, &RelModel<T>) -> Result<()>,
) -> Result<Vec<f64>> {
    if epochs == 0 {
        return Err(Error::Contract("epochs must be >= 1".into()));
    }
    let mut data: Vec<RelGraphData<T>> = graphs
        .iter()
        .zip(train_triples)
        .map(|(rg, triples)| RelGraphData {
            norm: RelNormalizer::build(rg, NormalizerKind::PerNodeNeighborCount),
            features: rg.features.clone(),
            positives: triples.clone(),
            negatives: Vec::new(),
        })
        .collect();
    let mut optim: Vec<AdamState<T>> = model
        .store
        .ids()
        .map(|id| {
            let m = model.store.get(id);
            AdamState::new(m.rows(), m.cols(), T::from_f64(learning_rate))
        })
        .collect();
    let mut trace = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        for (g, rg) in graphs.iter().enumerate() {
            let neg_seed = seed.wrapping_add(
                0x9e37_79b9_7f4a_7c15u64.wrapping_mul((epoch as u64) * 2 + g as u64 + 1),
            );
            data[g].negatives = corrupt_triples(rg, &data[g].positives, neg_seed)?;
        }
        let (loss, grads) = model.combined_loss_grad(&data, alignment, true)?;
        let loss = loss.to_f64();
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        trace.push(loss);
        for (idx, id) in model.store.ids().enumerate() {
            let grad = grads.get(id).clone();
            optim[idx].apply(model.store.get_mut(id), &grad)?;
        }
        callback(epoch, model)?;
    }
    Ok(trace)
}

/// Builds the model for a variant and trains it on pre-split triples.
pub fn train_variant<T: Scalar>(
    variant: VariantId,
    graphs: &[&RelationalGraph<T>],
    splits: &[TripleSplit],
    alignment: Option<&Alignment>,
    d: usize,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<(RelModel<T>, Vec<f64>)> {
    if !VariantId::relational_set().contains(&variant) {
        return Err(Error::Config(format!(
            "variant {} is not part of the relational pipeline",
            variant
        )));
    }
    let config = variant.config(d, None);
    let mut model = RelModel::build(config, graphs, RelSharingMode::IndexTruncation, seed)?;
    let train_triples: Vec<Vec<(usize, usize, usize)>> =
        splits.iter().map(|s| s.train.clone()).collect();
    let trace = cross_rgcn_train(
        &mut model,
        graphs,
        &train_triples,
        alignment,
        epochs,
        learning_rate,
        seed,
    )?;
    Ok((model, trace))
}
