//! Compares the separated baseline against the sharing variants on the
//! default synthetic pair and prints median test AUCs.
//!
//! Run with: `cargo run --release -p crossgcn --example transfer_demo`

use crossgcn::crossnet::VariantId;
use crossgcn::eval::{run_link_experiment, ExperimentSettings, LinkData};
use crossgcn::synth::SyntheticPairSpec;
use crossgcn::theory::median;

fn main() -> crossgcn::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(16);
    let epochs: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(120);
    let seeds: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(10);
    let restarts: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(1);

    let noise: f64 = std::env::var("DEMO_NOISE")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.0);
    let data = LinkData::Synthetic(SyntheticPairSpec {
        feature_noise: noise,
        ..Default::default()
    });
    let m_hat: Option<usize> = std::env::var("DEMO_MHAT")
        .ok()
        .and_then(|v| v.parse().ok());
    let lr: f64 = std::env::var("DEMO_LR")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.01);
    let base = ExperimentSettings {
        d,
        m_hat,
        epochs,
        learning_rate: lr,
        eval_every: 5,
        restarts,
        seeds: (0..seeds).collect(),
        ..Default::default()
    };
    println!("d = {d}, epochs = {epochs}, {seeds} seeds, {restarts} restart(s), noise = {noise}, lr = {lr}");
    println!("model      median-auc  per-seed");
    let mut baseline: Vec<f64> = Vec::new();
    for variant in [
        VariantId::Separated,
        VariantId::M5,
        VariantId::M11,
        VariantId::M13,
    ] {
        let settings = ExperimentSettings {
            variant,
            ..base.clone()
        };
        let report = run_link_experiment(&settings, &data)?;
        let aucs: Vec<f64> = report
            .per_seed
            .iter()
            .map(|s| s.overall_test["auc"])
            .collect();
        if variant == VariantId::Separated {
            baseline = aucs.clone();
        }
        let violations = aucs
            .iter()
            .zip(&baseline)
            .filter(|(v, b)| **v < **b - 0.005)
            .count();
        println!(
            "{:<10} {:.4}      {:?}  (below baseline in {} seeds)",
            variant.to_string(),
            median(&mut aucs.clone()),
            aucs.iter().map(|a| (a * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            violations
        );
    }
    Ok(())
}
