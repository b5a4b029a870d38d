//! Shared flag plumbing: model hyperparameters with config-file fallback.

use std::path::PathBuf;

use clap::Args;
use crossgcn::config_file::ConfigFile;
use crossgcn::crossnet::VariantId;
use crossgcn::error::{Error, Result};

#[derive(Args, Debug, Clone)]
pub struct ModelFlags {
    /// Model variant: separated or m1..m13.
    #[arg(long)]
    pub model: Option<String>,
    /// Weight of graph A's task (graph B gets 1 - alpha_a).
    #[arg(long)]
    pub alpha_a: Option<f64>,
    /// Weight of the alignment task.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Per-pair alignment weight for runs with more than two graphs;
    /// accepted for config compatibility, unused by two-graph commands.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Representation dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Shared input dimension for transform-based sharing (defaults to the
    /// smaller feature count).
    #[arg(long)]
    pub mhat: Option<usize>,
    /// Training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub variant: VariantId,
    pub alpha_a: f64,
    pub beta: Option<f64>,
    pub dim: usize,
    pub mhat: Option<usize>,
    pub epochs: usize,
    pub lr: f64,
}

impl ModelFlags {
    pub fn resolve(&self) -> Result<ResolvedModel> {
        let file = match &self.config {
            Some(path) => ConfigFile::read(path)?,
            None => ConfigFile::default(),
        };
        let model_name = self
            .model
            .clone()
            .or_else(|| file.get("model").map(str::to_string))
            .unwrap_or_else(|| "m13".to_string());
        let variant: VariantId = model_name.parse()?;
        let alpha_a = match self.alpha_a {
            Some(v) => v,
            None => file.get_parsed("alpha_a")?.unwrap_or(0.5),
        };
        if !(0.0..=1.0).contains(&alpha_a) {
            return Err(Error::Config(format!("alpha_a {} outside [0, 1]", alpha_a)));
        }
        let beta = match self.beta {
            Some(v) => Some(v),
            None => file.get_parsed("beta")?,
        };
        let gamma = match self.gamma {
            Some(v) => Some(v),
            None => file.get_parsed("gamma")?,
        };
        if gamma.is_some() {
            log::warn!("--gamma only affects runs with more than two graphs; ignored here");
        }
        let dim = match self.dim {
            Some(v) => v,
            None => file.get_parsed("dim")?.unwrap_or(64),
        };
        let mhat = match self.mhat {
            Some(v) => Some(v),
            None => file.get_parsed("mhat")?,
        };
        let epochs = match self.epochs {
            Some(v) => v,
            None => file.get_parsed("epochs")?.unwrap_or(200),
        };
        let lr = match self.lr {
            Some(v) => v,
            None => file.get_parsed("lr")?.unwrap_or(0.01),
        };
        Ok(ResolvedModel {
            variant,
            alpha_a,
            beta,
            dim,
            mhat,
            epochs,
            lr,
        })
    }
}
