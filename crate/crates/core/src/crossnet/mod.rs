//! Cross-network composition: parameter sharing, representation-space
//! regularization, alignment reconstruction, training strategies, and the
//! K-graph generalization.

mod config;
mod loss;
mod params;
mod reg;
mod train;

pub use config::{AlignMode, ModelConfig, QMode, RegScope, Sharing, Strategy, VariantId};
pub use loss::{GraphData, LossBreakdown};
pub use params::{CrossModel, Gradients, GraphWiring, ParamStore, SlotId};
pub use reg::{
    align_recon_grad, align_recon_loss, hard_reg, hard_reg_grad, soft_reg, soft_reg_grad,
};
pub use train::{train, train_with_callback, TrainOptions, TrainSetup};
