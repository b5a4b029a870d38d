//! Representation-dimension sweep: how much cross-network training helps
//! as the embedding dimension grows.

use crate::error::Result;
use crate::crossnet::VariantId;
use crate::eval::{run_link_experiment, sig6, ExperimentSettings, LinkData};
use crate::graph::{Alignment, Graph};
use crate::theory::transfer::median;

#[derive(Debug, Clone)]
pub struct DSweepRow {
    pub d: usize,
    pub model: String,
    pub auc_mean: f64,
    pub auc_median: f64,
    /// Median of the per-seed paired differences against the separated
    /// baseline at the same dimension.
    pub improvement_median: f64,
    pub per_seed_auc: Vec<f64>,
}

/// Trains every variant at every dimension over the shared seed list on
/// fixed data, reporting test-set overall AUC and its improvement over the
/// separated baseline.
pub fn d_sweep(
    graphs: (Graph<f64>, Graph<f64>),
    alignment: Alignment,
    d_values: &[usize],
    variants: &[VariantId],
    base: &ExperimentSettings,
) -> Result<Vec<DSweepRow>> {
    let data = LinkData::Loaded(Box::new((graphs.0, graphs.1, alignment)));
    let mut rows = Vec::new();
    for &d in d_values {
        // baseline first so improvements can pair per seed
        let sep = run_link_experiment(
            &ExperimentSettings {
                variant: VariantId::Separated,
                d,
                ..base.clone()
            },
            &data,
        )?;
        let sep_auc: Vec<f64> = sep.per_seed.iter().map(|s| s.overall_test["auc"]).collect();
        for &variant in variants {
            let per_seed_auc: Vec<f64> = if variant == VariantId::Separated {
                sep_auc.clone()
            } else {
                run_link_experiment(
                    &ExperimentSettings {
                        variant,
                        d,
                        ..base.clone()
                    },
                    &data,
                )?
                .per_seed
                .iter()
                .map(|s| s.overall_test["auc"])
                .collect()
            };
            let mut diffs: Vec<f64> = per_seed_auc
                .iter()
                .zip(&sep_auc)
                .map(|(v, s)| v - s)
                .collect();
            let auc_mean = per_seed_auc.iter().sum::<f64>() / per_seed_auc.len() as f64;
            rows.push(DSweepRow {
                d,
                model: variant.to_string(),
                auc_mean: sig6(auc_mean),
                auc_median: sig6(median(&mut per_seed_auc.clone())),
                improvement_median: sig6(median(&mut diffs)),
                per_seed_auc,
            });
        }
    }
    Ok(rows)
}

/// CSV rendering (`d,model,auc_mean,auc_median,improvement_median`).
pub fn d_sweep_csv(rows: &[DSweepRow]) -> String {
    let mut csv = String::from("d,model,auc_mean,auc_median,improvement_median\n");
    for row in rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.d, row.model, row.auc_mean, row.auc_median, row.improvement_median
        ));
    }
    csv
}
