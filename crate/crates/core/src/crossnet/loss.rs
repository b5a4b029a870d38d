//! Combined two-graph loss and its K-graph generalization.
//!
//! The two-graph objective weights each reconstruction task by
//! `(1 - beta) * alpha_i` and the alignment term by `beta`. The K-graph
//! form takes per-graph weights and per-pair weights directly; the
//! two-graph form is its special case under that weight mapping.

use crate::crossnet::config::AlignMode;
use crate::crossnet::params::{CrossModel, Gradients};
use crate::crossnet::reg::{align_recon_grad, hard_reg_grad, soft_reg_grad};
use crate::error::{Error, Result};
use crate::gcn::{gcn_backward, gcn_forward, recon_loss_grad, ForwardCache};
use crate::graph::{Alignment, NormalizedAdjacency};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Per-graph training inputs for one loss evaluation.
#[derive(Debug, Clone)]
pub struct GraphData<T> {
    pub adj: NormalizedAdjacency<T>,
    pub features: Matrix<T>,
    pub positives: Vec<(usize, usize, T)>,
    pub negatives: Vec<(usize, usize)>,
}

/// Loss value with its per-task decomposition.
#[derive(Debug, Clone)]
pub struct LossBreakdown<T> {
    pub total: T,
    pub per_graph: Vec<T>,
    pub align_terms: Vec<T>,
}

struct ForwardState<T> {
    u: Matrix<T>,
    cache: ForwardCache<T>,
    du: Matrix<T>,
}

impl<T: Scalar> CrossModel<T> {
    /// Two-graph combined loss; `alignment` may be `None` only when the
    /// configuration carries no alignment term.
    pub fn combined_loss(
        &self,
        data: &[GraphData<T>],
        alignment: Option<&Alignment>,
    ) -> Result<T> {
        self.combined_loss_grad(data, alignment)
            .map(|(breakdown, _)| breakdown.total)
    }

    pub fn combined_loss_grad(
        &self,
        data: &[GraphData<T>],
        alignment: Option<&Alignment>,
    ) -> Result<(LossBreakdown<T>, Gradients<T>)> {
        if data.len() != 2 || self.graph_count() != 2 {
            return Err(Error::Config(
                "combined loss is the two-graph objective; use the multi-graph loss for K > 2"
                    .into(),
            ));
        }
        let beta = if self.config.align_mode == AlignMode::None {
            T::zero()
        } else {
            T::from_f64(self.config.beta)
        };
        let graph_weights: Vec<T> = self
            .config
            .alpha
            .iter()
            .map(|&a| (T::one() - beta) * T::from_f64(a))
            .collect();
        let pair_terms: Vec<PairTerm<'_>> = if beta > T::zero() {
            let alignment = alignment.ok_or_else(|| {
                Error::Config("alignment term requested but no alignment supplied".into())
            })?;
            vec![PairTerm {
                pair: (0, 1),
                weight: beta.to_f64(),
                alignment,
            }]
        } else {
            Vec::new()
        };
        self.loss_weighted(data, &graph_weights, &pair_terms)
    }

    /// K-graph objective: per-graph weights `alpha` (as given, no `beta`
    /// scaling) plus `gamma`-weighted alignment terms per listed pair.
    pub fn multi_graph_loss_grad(
        &self,
        data: &[GraphData<T>],
        alignments: &[((usize, usize), &Alignment)],
        gammas: &[f64],
    ) -> Result<(LossBreakdown<T>, Gradients<T>)> {
        if data.len() != self.graph_count() {
            return Err(Error::Config(format!(
                "model has {} graphs, got {} data blocks",
                self.graph_count(),
                data.len()
            )));
        }
        if alignments.len() != gammas.len() {
            return Err(Error::Config(
                "each alignment pair needs exactly one gamma weight".into(),
            ));
        }
        if self.config.align_mode == AlignMode::Hard {
            return Err(Error::Config(
                "the multi-graph objective supports soft and reconstruction terms only".into(),
            ));
        }
        let graph_weights: Vec<T> = self.config.alpha.iter().map(|&a| T::from_f64(a)).collect();
        let pair_terms: Vec<PairTerm<'_>> = alignments
            .iter()
            .zip(gammas)
            .map(|(&(pair, alignment), &weight)| PairTerm {
                pair,
                weight,
                alignment,
            })
            .collect();
        self.loss_weighted(data, &graph_weights, &pair_terms)
    }

    pub fn multi_graph_loss(
        &self,
        data: &[GraphData<T>],
        alignments: &[((usize, usize), &Alignment)],
        gammas: &[f64],
    ) -> Result<T> {
        self.multi_graph_loss_grad(data, alignments, gammas)
            .map(|(b, _)| b.total)
    }

    fn loss_weighted(
        &self,
        data: &[GraphData<T>],
        graph_weights: &[T],
        pair_terms: &[PairTerm<'_>],
    ) -> Result<(LossBreakdown<T>, Gradients<T>)> {
        let k = data.len();
        for term in pair_terms {
            let (i, j) = term.pair;
            if i >= k || j >= k || i >= j {
                return Err(Error::Config(format!(
                    "alignment term names invalid pair ({}, {})",
                    i, j
                )));
            }
            if self.config.align_mode.needs_r() && self.r_slot(term.pair).is_none() {
                return Err(Error::Config(format!(
                    "no transform matrix was built for alignment pair ({}, {})",
                    i, j
                )));
            }
        }

        let mut grads = self.zero_grads();
        let mut per_graph = vec![T::zero(); k];
        let mut align_terms = Vec::with_capacity(pair_terms.len());
        let mut total = T::zero();

        // Graphs enter the computation only if their own task has weight or
        // an active alignment term touches them.
        let mut active = vec![false; k];
        for g in 0..k {
            if graph_weights[g] > T::zero() {
                active[g] = true;
            }
        }
        for term in pair_terms {
            if term.weight > 0.0 {
                active[term.pair.0] = true;
                active[term.pair.1] = true;
            }
        }

        let mut states: Vec<Option<ForwardState<T>>> = Vec::with_capacity(k);
        for g in 0..k {
            if !active[g] {
                states.push(None);
                continue;
            }
            let (u, cache) = gcn_forward(&data[g].adj, &data[g].features, self.view(g))?;
            let (loss_g, du_g) = recon_loss_grad(&u, &data[g].positives, &data[g].negatives);
            per_graph[g] = loss_g;
            total += graph_weights[g] * loss_g;
            let du = du_g.scale(graph_weights[g]);
            states.push(Some(ForwardState { u, cache, du }));
        }

        for term in pair_terms {
            if term.weight == 0.0 {
                align_terms.push(T::zero());
                continue;
            }
            let (ga, gb) = term.pair;
            let weight = T::from_f64(term.weight);
            let (u_a, u_b) = match (&states[ga], &states[gb]) {
                (Some(a), Some(b)) => (&a.u, &b.u),
                _ => unreachable!("alignment pair marked active"),
            };
            let (h, du_a, du_b, dr) = match self.config.align_mode {
                AlignMode::None => {
                    return Err(Error::Config(
                        "alignment term weighted but align_mode is none".into(),
                    ))
                }
                AlignMode::Hard => {
                    let (h, da, db) =
                        hard_reg_grad(u_a, u_b, term.alignment, self.config.reg_scope)?;
                    (h, da, db, None)
                }
                AlignMode::Soft => {
                    let r = self.r_matrix(term.pair).expect("checked above");
                    let (h, da, db, dr) =
                        soft_reg_grad(u_a, u_b, r, term.alignment, self.config.reg_scope)?;
                    (h, da, db, Some(dr))
                }
                AlignMode::Reconstruction => {
                    let r = self.r_matrix(term.pair).expect("checked above");
                    let (h, da, db, dr) = align_recon_grad(u_a, u_b, r, term.alignment)?;
                    (h, da, db, Some(dr))
                }
            };
            align_terms.push(h);
            total += weight * h;
            if let Some(state) = states[ga].as_mut() {
                state.du.add_assign_scaled(&du_a, weight)?;
            }
            if let Some(state) = states[gb].as_mut() {
                state.du.add_assign_scaled(&du_b, weight)?;
            }
            if let Some(dr) = dr {
                let slot = self.r_slot(term.pair).expect("checked above");
                grads.accumulate(slot, &dr, weight)?;
            }
        }

        for g in 0..k {
            let Some(state) = &states[g] else { continue };
            let gcn_grads = gcn_backward(
                &state.cache,
                &state.du,
                self.view(g),
                &data[g].adj,
                &data[g].features,
            )?;
            let wiring = self.wiring(g);
            grads.accumulate(wiring.w1, &gcn_grads.w1, T::one())?;
            grads.accumulate(wiring.w2, &gcn_grads.w2, T::one())?;
            if let (Some(q_slot), Some(dq)) = (wiring.q, gcn_grads.q) {
                grads.accumulate(q_slot, &dq, T::one())?;
            }
        }

        Ok((
            LossBreakdown {
                total,
                per_graph,
                align_terms,
            },
            grads,
        ))
    }
}

struct PairTerm<'a> {
    pair: (usize, usize),
    weight: f64,
    alignment: &'a Alignment,
}
