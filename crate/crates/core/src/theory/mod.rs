//! Machine checks of the linear-setting results: closed-form optima, the
//! capacity (no-transfer) argument, alignment fixed points, the positive-
//! transfer study, and the dimension sweep.

mod fixed_point;
mod linear;
mod suite;
mod sweep;
mod transfer;

pub use fixed_point::{recon_fixed_point, soft_reg_fixed_point, FixedPointReport};
pub use linear::{
    closed_form_theta, gd_train_linear, linear_loss, linear_loss_grad, linear_target,
    no_transfer_experiment, random_linear_instance, LinearInstance, LinearTarget,
    NoTransferReport, SharedSet,
};
pub use suite::{
    closed_form_checks, fixed_point_checks, no_transfer_checks, positive_transfer_checks,
    rank2_pair, run_standard_checks, SuiteOptions, TheoryCheck,
};
pub use sweep::{d_sweep, d_sweep_csv, DSweepRow};
pub use transfer::{
    median, positive_transfer_grid, positive_transfer_point, sin_between, transfer_csv,
    TransferPoint,
};
