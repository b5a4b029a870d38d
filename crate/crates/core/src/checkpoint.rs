//! Versioned JSON checkpoints: named weight matrices with shapes plus the
//! model configuration. Values round-trip exactly (shortest-representation
//! float serialization), so a reloaded model scores identically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crossnet::{CrossModel, ModelConfig};
use crate::error::{Error, Result};
use crate::eval::{write_atomic, write_json};
use crate::numerics::Matrix;
use crate::relational::RelModel;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub task: String,
    pub config: ModelConfig,
    pub slots: Vec<NamedMatrix>,
}

fn collect_slots(store: &crate::crossnet::ParamStore<f64>) -> Vec<NamedMatrix> {
    store
        .ids()
        .map(|id| {
            let m = store.get(id);
            NamedMatrix {
                name: store.name(id).to_string(),
                rows: m.rows(),
                cols: m.cols(),
                data: m.data().to_vec(),
            }
        })
        .collect()
}

pub fn from_cross(model: &CrossModel<f64>, task: &str) -> Checkpoint {
    Checkpoint {
        version: CHECKPOINT_VERSION,
        task: task.to_string(),
        config: model.config.clone(),
        slots: collect_slots(&model.store),
    }
}

pub fn from_rel(model: &RelModel<f64>, task: &str) -> Checkpoint {
    Checkpoint {
        version: CHECKPOINT_VERSION,
        task: task.to_string(),
        config: model.config.clone(),
        slots: collect_slots(&model.store),
    }
}

pub fn save(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    write_json(path, ckpt)
}

/// Compact save used by the CLI (single line per matrix would still be
/// large; plain JSON keeps it diffable).
pub fn save_compact(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut bytes = serde_json::to_vec(ckpt)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::Contract(format!(
            "checkpoint version {} unsupported (expected {})",
            ckpt.version, CHECKPOINT_VERSION
        )));
    }
    Ok(ckpt)
}

fn apply_slots(
    slots: &[NamedMatrix],
    store: &mut crate::crossnet::ParamStore<f64>,
) -> Result<()> {
    for named in slots {
        let id = store.find(&named.name).ok_or_else(|| {
            Error::Contract(format!("checkpoint slot '{}' not in model", named.name))
        })?;
        let current = store.get(id);
        if current.shape() != (named.rows, named.cols) {
            return Err(Error::shape(
                "checkpoint restore",
                current.dims(),
                format!("{}x{}", named.rows, named.cols),
            ));
        }
        *store.get_mut(id) = Matrix::from_vec(named.rows, named.cols, named.data.clone())?;
    }
    Ok(())
}

/// Overwrites a freshly built model's weights with checkpoint values,
/// matching slots by name.
pub fn apply_to_cross(ckpt: &Checkpoint, model: &mut CrossModel<f64>) -> Result<()> {
    if ckpt.slots.len() != model.store.len() {
        return Err(Error::Contract(format!(
            "checkpoint has {} slots, model has {}",
            ckpt.slots.len(),
            model.store.len()
        )));
    }
    apply_slots(&ckpt.slots, &mut model.store)
}

pub fn apply_to_rel(ckpt: &Checkpoint, model: &mut RelModel<f64>) -> Result<()> {
    if ckpt.slots.len() != model.store.len() {
        return Err(Error::Contract(format!(
            "checkpoint has {} slots, model has {}",
            ckpt.slots.len(),
            model.store.len()
        )));
    }
    apply_slots(&ckpt.slots, &mut model.store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossnet::VariantId;

    #[test]
    fn cross_checkpoint_round_trips_exactly() {
        let model: CrossModel<f64> =
            CrossModel::build(VariantId::M13.config(3, None), &[5, 6], &[(0, 1)], 11).unwrap();
        let ckpt = from_cross(&model, "link");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save(&path, &ckpt).unwrap();
        let loaded = load(&path).unwrap();
        let mut rebuilt: CrossModel<f64> =
            CrossModel::build(loaded.config.clone(), &[5, 6], &[(0, 1)], 999).unwrap();
        apply_to_cross(&loaded, &mut rebuilt).unwrap();
        for id in model.store.ids() {
            let name = model.store.name(id);
            let other = rebuilt.store.find(name).unwrap();
            assert_eq!(model.store.get(id), rebuilt.store.get(other), "{name}");
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let model: CrossModel<f64> =
            CrossModel::build(VariantId::M5.config(3, None), &[5, 6], &[], 1).unwrap();
        let ckpt = from_cross(&model, "link");
        let mut other: CrossModel<f64> =
            CrossModel::build(VariantId::M5.config(4, None), &[5, 6], &[], 1).unwrap();
        assert!(apply_to_cross(&ckpt, &mut other).is_err());
    }

    #[test]
    fn version_gate() {
        let model: CrossModel<f64> =
            CrossModel::build(VariantId::M5.config(3, None), &[5, 6], &[], 1).unwrap();
        let mut ckpt = from_cross(&model, "link");
        ckpt.version = 99;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        write_json(&path, &ckpt).unwrap();
        assert!(load(&path).is_err());
    }
}
