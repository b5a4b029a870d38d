//! Parameter storage for cross-network models.
//!
//! All weight matrices live in one slot arena; sharing wires two graphs'
//! views to the same slot, so shared parameters coincide physically and a
//! gradient step can never make the views drift apart.

use crate::crossnet::config::{ModelConfig, QMode, Sharing};
use crate::error::{Error, Result};
use crate::gcn::{glorot, GcnParamsView};
use crate::numerics::Matrix;
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotId(pub(crate) usize);

/// Arena of named parameter matrices.
#[derive(Debug, Clone)]
pub struct ParamStore<T> {
    slots: Vec<Matrix<T>>,
    names: Vec<String>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            slots: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, m: Matrix<T>) -> SlotId {
        self.slots.push(m);
        self.names.push(name.into());
        SlotId(self.slots.len() - 1)
    }

    pub fn get(&self, id: SlotId) -> &Matrix<T> {
        &self.slots[id.0]
    }

    pub fn get_mut(&mut self, id: SlotId) -> &mut Matrix<T> {
        &mut self.slots[id.0]
    }

    pub fn name(&self, id: SlotId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SlotId> {
        (0..self.slots.len()).map(SlotId)
    }

    pub fn find(&self, name: &str) -> Option<SlotId> {
        self.names.iter().position(|n| n == name).map(SlotId)
    }
}

impl<T: Scalar> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradient matrices parallel to a store's slots.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    pub slots: Vec<Matrix<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(store: &ParamStore<T>) -> Self {
        Gradients {
            slots: store
                .ids()
                .map(|id| {
                    let m = store.get(id);
                    Matrix::zeros(m.rows(), m.cols())
                })
                .collect(),
        }
    }

    pub fn accumulate(&mut self, id: SlotId, grad: &Matrix<T>, weight: T) -> Result<()> {
        self.slots[id.0].add_assign_scaled(grad, weight)
    }

    pub fn get(&self, id: SlotId) -> &Matrix<T> {
        &self.slots[id.0]
    }
}

/// Per-graph slot references.
#[derive(Debug, Clone)]
pub struct GraphWiring {
    pub w1: SlotId,
    pub w2: SlotId,
    pub q: Option<SlotId>,
}

/// A cross-network model: configuration, parameter arena, per-graph wiring,
/// and transform matrices for the alignment terms.
#[derive(Debug, Clone)]
pub struct CrossModel<T> {
    pub config: ModelConfig,
    pub store: ParamStore<T>,
    wiring: Vec<GraphWiring>,
    r_slots: Vec<((usize, usize), SlotId)>,
}

impl<T: Scalar> CrossModel<T> {
    /// Builds parameter storage for `config` over graphs with the given
    /// feature counts. `align_pairs` lists the graph pairs carrying an
    /// alignment term (always `[(0, 1)]` for two graphs).
    ///
    /// Initialization order is fixed (shared slots, per-graph slots,
    /// transform slots last) so that configurations differing only in the
    /// alignment term draw identical weights from the same seed.
    pub fn build(
        config: ModelConfig,
        feature_dims: &[usize],
        align_pairs: &[(usize, usize)],
        seed: u64,
    ) -> Result<Self> {
        config.validate(feature_dims)?;
        let k = config.graph_count();
        let mut rng = rng_for(seed, Stream::Init, 0);
        let mut store = ParamStore::new();

        let shared_w1 = if config.sharing == Sharing::ShareW1W2 {
            let input = config.shared_input_dim(feature_dims).unwrap();
            Some(store.add("shared.w1", glorot(input, config.dims[0], &mut rng)))
        } else {
            None
        };
        let shared_w2 = if matches!(config.sharing, Sharing::ShareW2 | Sharing::ShareW1W2) {
            let d = config.dims[0];
            Some(store.add("shared.w2", glorot(d, d, &mut rng)))
        } else {
            None
        };

        let mut wiring = Vec::with_capacity(k);
        for g in 0..k {
            let d = config.dims[g];
            let w1 = match shared_w1 {
                Some(id) => id,
                None => store.add(format!("g{}.w1", g), glorot(feature_dims[g], d, &mut rng)),
            };
            let w2 = match shared_w2 {
                Some(id) => id,
                None => store.add(format!("g{}.w2", g), glorot(d, d, &mut rng)),
            };
            let q = match config.q_mode {
                QMode::None => None,
                QMode::Both => {
                    let m_hat = config.shared_input_dim(feature_dims).unwrap();
                    Some(store.add(format!("g{}.q", g), glorot(feature_dims[g], m_hat, &mut rng)))
                }
                QMode::AToB if g == 0 => Some(store.add(
                    "g0.q",
                    glorot(feature_dims[0], feature_dims[1], &mut rng),
                )),
                QMode::BToA if g == 1 => Some(store.add(
                    "g1.q",
                    glorot(feature_dims[1], feature_dims[0], &mut rng),
                )),
                _ => None,
            };
            wiring.push(GraphWiring { w1, w2, q });
        }

        let mut r_slots = Vec::new();
        if config.align_mode.needs_r() {
            for &(i, j) in align_pairs {
                if i >= k || j >= k || i >= j {
                    return Err(Error::Config(format!(
                        "alignment pair ({}, {}) invalid for {} graphs",
                        i, j, k
                    )));
                }
                let r = glorot(config.dims[i], config.dims[j], &mut rng);
                r_slots.push(((i, j), store.add(format!("align.r{}_{}", i, j), r)));
            }
        }

        Ok(CrossModel {
            config,
            store,
            wiring,
            r_slots,
        })
    }

    pub fn graph_count(&self) -> usize {
        self.wiring.len()
    }

    pub fn wiring(&self, g: usize) -> &GraphWiring {
        &self.wiring[g]
    }

    pub fn view(&self, g: usize) -> GcnParamsView<'_, T> {
        let w = &self.wiring[g];
        GcnParamsView {
            w1: self.store.get(w.w1),
            w2: self.store.get(w.w2),
            q: w.q.map(|id| self.store.get(id)),
            final_activation: self.config.final_activation,
        }
    }

    pub fn r_slot(&self, pair: (usize, usize)) -> Option<SlotId> {
        self.r_slots
            .iter()
            .find(|(p, _)| *p == pair)
            .map(|(_, id)| *id)
    }

    pub fn r_matrix(&self, pair: (usize, usize)) -> Option<&Matrix<T>> {
        self.r_slot(pair).map(|id| self.store.get(id))
    }

    pub fn zero_grads(&self) -> Gradients<T> {
        Gradients::zeros_like(&self.store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossnet::config::VariantId;

    #[test]
    fn separated_has_private_slots() {
        let model: CrossModel<f64> =
            CrossModel::build(VariantId::Separated.config(3, None), &[5, 6], &[], 1).unwrap();
        assert_ne!(model.wiring(0).w2, model.wiring(1).w2);
        assert_ne!(model.wiring(0).w1, model.wiring(1).w1);
        assert_eq!(model.store.len(), 4);
    }

    #[test]
    fn share_w2_uses_one_slot() {
        let model: CrossModel<f64> =
            CrossModel::build(VariantId::M5.config(3, None), &[5, 6], &[], 1).unwrap();
        assert_eq!(model.wiring(0).w2, model.wiring(1).w2);
        assert_ne!(model.wiring(0).w1, model.wiring(1).w1);
    }

    #[test]
    fn m11_shares_both_with_transforms() {
        let model: CrossModel<f64> =
            CrossModel::build(VariantId::M11.config(3, None), &[5, 6], &[], 1).unwrap();
        assert_eq!(model.wiring(0).w1, model.wiring(1).w1);
        assert_eq!(model.wiring(0).w2, model.wiring(1).w2);
        let q0 = model.store.get(model.wiring(0).q.unwrap());
        let q1 = model.store.get(model.wiring(1).q.unwrap());
        assert_eq!(q0.shape(), (5, 5));
        assert_eq!(q1.shape(), (6, 5));
        assert_eq!(model.store.get(model.wiring(0).w1).shape(), (5, 3));
    }

    #[test]
    fn one_sided_transform_targets_other_feature_space() {
        let model: CrossModel<f64> =
            CrossModel::build(VariantId::M9.config(3, None), &[5, 6], &[], 1).unwrap();
        let q0 = model.store.get(model.wiring(0).q.unwrap());
        assert_eq!(q0.shape(), (5, 6));
        assert!(model.wiring(1).q.is_none());
        assert_eq!(model.store.get(model.wiring(0).w1).shape(), (6, 3));
    }

    #[test]
    fn alignment_variants_add_r_last_keeping_common_prefix() {
        let m11: CrossModel<f64> =
            CrossModel::build(VariantId::M11.config(3, None), &[5, 6], &[(0, 1)], 7).unwrap();
        let m13: CrossModel<f64> =
            CrossModel::build(VariantId::M13.config(3, None), &[5, 6], &[(0, 1)], 7).unwrap();
        for id in m11.store.ids() {
            let name = m11.store.name(id);
            let other = m13.store.find(name).unwrap();
            assert_eq!(m11.store.get(id), m13.store.get(other), "slot {name} differs");
        }
        assert!(m13.r_matrix((0, 1)).is_some());
        assert!(m11.r_matrix((0, 1)).is_none());
    }
}
