//! `crossgcn evaluate`: score a saved checkpoint on a seeded split.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use crossgcn::checkpoint;
use crossgcn::crossnet::CrossModel;
use crossgcn::error::{Error, Result};
use crossgcn::eval::{evaluate_link_model, sig6, write_json};
use crossgcn::graph::{load_relational, split_links, split_triples};
use crossgcn::relational::{RelModel, RelSharingMode};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub graph_a: PathBuf,
    #[arg(long)]
    pub graph_b: PathBuf,
    #[arg(long)]
    pub features_a: Option<PathBuf>,
    #[arg(long)]
    pub features_b: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_parser = ["link", "relation"], default_value = "link")]
    pub task: String,
    /// Split seed; must match the training run to score the same held-out
    /// sets.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct EvalReport {
    task: String,
    model_config: crossgcn::crossnet::ModelConfig,
    seed: u64,
    validation: Vec<BTreeMap<String, f64>>,
    test: Vec<BTreeMap<String, f64>>,
}

fn round_map(mut m: BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    for v in m.values_mut() {
        *v = sig6(*v);
    }
    m
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let ckpt = checkpoint::load(&args.checkpoint)?;
    if ckpt.task != args.task {
        return Err(Error::Contract(format!(
            "checkpoint was trained for task '{}', asked to evaluate '{}'",
            ckpt.task, args.task
        )));
    }
    match args.task.as_str() {
        "link" => {
            let (ga, gb) = super::load_graph_pair(
                &args.graph_a,
                &args.graph_b,
                args.features_a.as_ref(),
                args.features_b.as_ref(),
            )?;
            let graphs = vec![ga, gb];
            let splits = vec![
                split_links(&graphs[0], (8, 1, 1), args.seed)?,
                split_links(
                    &graphs[1],
                    (8, 1, 1),
                    args.seed.wrapping_add(super::GRAPH_B_SPLIT_OFFSET),
                )?,
            ];
            let feature_dims = [graphs[0].feature_count(), graphs[1].feature_count()];
            let mut model =
                CrossModel::build(ckpt.config.clone(), &feature_dims, &[(0, 1)], 0)?;
            checkpoint::apply_to_cross(&ckpt, &mut model)?;
            let (val, test) = evaluate_link_model(&model, &graphs, &splits)?;
            let report = EvalReport {
                task: args.task,
                model_config: ckpt.config,
                seed: args.seed,
                validation: val.into_iter().map(round_map).collect(),
                test: test.into_iter().map(round_map).collect(),
            };
            write_json(&args.out.join("eval_report.json"), &report)?;
        }
        "relation" => {
            let ga = load_relational::<f64>(&args.graph_a)?;
            let gb = load_relational::<f64>(&args.graph_b)?;
            let splits = vec![
                split_triples(&ga, (8, 1, 1), args.seed)?,
                split_triples(
                    &gb,
                    (8, 1, 1),
                    args.seed.wrapping_add(super::GRAPH_B_SPLIT_OFFSET),
                )?,
            ];
            let mut model = RelModel::build(
                ckpt.config.clone(),
                &[&ga, &gb],
                RelSharingMode::IndexTruncation,
                0,
            )?;
            checkpoint::apply_to_rel(&ckpt, &mut model)?;
            let metrics =
                |eval: &[(usize, usize, usize)], g: usize, rg| -> Result<BTreeMap<String, f64>> {
                    let norm = crossgcn::relational::RelNormalizer::build(
                        rg,
                        crossgcn::relational::NormalizerKind::PerNodeNeighborCount,
                    );
                    let (u, _) =
                        crossgcn::relational::rgcn_forward(&norm, &rg.features, &model, g, true)?;
                    let core = model.store.get(model.wiring(g).core);
                    let m = crossgcn::eval::mrr_hits(&u, core, eval, &rg.triples, &[1, 3])?;
                    let mut out = BTreeMap::new();
                    out.insert("mrr_raw".into(), m.mrr_raw);
                    out.insert("mrr_filtered".into(), m.mrr_filtered);
                    out.insert("hits1".into(), m.hits[0].1);
                    out.insert("hits3".into(), m.hits[1].1);
                    Ok(out)
                };
            let report = EvalReport {
                task: args.task,
                model_config: ckpt.config,
                seed: args.seed,
                validation: vec![
                    round_map(metrics(&splits[0].validation, 0, &ga)?),
                    round_map(metrics(&splits[1].validation, 1, &gb)?),
                ],
                test: vec![
                    round_map(metrics(&splits[0].test, 0, &ga)?),
                    round_map(metrics(&splits[1].test, 1, &gb)?),
                ],
            };
            write_json(&args.out.join("eval_report.json"), &report)?;
        }
        other => unreachable!("clap rejects task {other}"),
    }
    Ok(())
}
