//! Metrics, experiment orchestration, and report output.

mod experiment;
mod metrics;
mod ranking;
mod report;

pub use experiment::{
    evaluate_link_model, run_link_experiment, run_relation_experiment, run_sweep,
    ExperimentSettings, LinkData, RelData, SweepAxis,
};
pub use metrics::{auc, average_precision, harmonic_overall};
pub use ranking::{mrr_hits, RankingMetrics};
pub use report::{
    sig6, write_atomic, write_json, MetricMap, MetricSummary, MetricsReport, SeedOutcome,
};
