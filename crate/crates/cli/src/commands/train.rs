//! `crossgcn train`: one seeded training run with checkpoint and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use crossgcn::checkpoint;
use crossgcn::crossnet::{CrossModel, TrainOptions, TrainSetup};
use crossgcn::error::Result;
use crossgcn::eval::{evaluate_link_model, sig6, write_atomic, write_json};
use crossgcn::graph::{load_relational, split_links, split_triples};
use crossgcn::relational::train_variant;

use crate::settings::ModelFlags;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Edge TSV (link task) or triple TSV (relation task) for graph A.
    #[arg(long)]
    pub graph_a: PathBuf,
    /// Edge TSV (link task) or triple TSV (relation task) for graph B.
    #[arg(long)]
    pub graph_b: PathBuf,
    /// Alignment TSV (`id_a<TAB>id_b`); required by alignment-using models.
    #[arg(long)]
    pub alignment: Option<PathBuf>,
    #[arg(long)]
    pub features_a: Option<PathBuf>,
    #[arg(long)]
    pub features_b: Option<PathBuf>,
    /// Label-0 pairs sampled per alignment positive.
    #[arg(long, default_value_t = 1.0)]
    pub align_negative_ratio: f64,
    #[arg(long, value_parser = ["link", "relation"], default_value = "link")]
    pub task: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Serialize)]
struct TrainReport {
    task: String,
    model: String,
    seed: u64,
    epochs: usize,
    learning_rate: f64,
    final_loss: f64,
    validation: Vec<BTreeMap<String, f64>>,
    test: Vec<BTreeMap<String, f64>>,
}

fn round_map(mut m: BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    for v in m.values_mut() {
        *v = sig6(*v);
    }
    m
}

fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (e, l) in trace.iter().enumerate() {
        writeln!(out, "{},{}", e, sig6(*l)).unwrap();
    }
    out
}

pub fn run(args: TrainArgs) -> Result<()> {
    let resolved = args.model.resolve()?;
    let started = Instant::now();
    match args.task.as_str() {
        "link" => run_link(&args, &resolved)?,
        "relation" => run_relation(&args, &resolved)?,
        other => unreachable!("clap rejects task {other}"),
    }
    log::info!("train finished in {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn run_link(args: &TrainArgs, resolved: &crate::settings::ResolvedModel) -> Result<()> {
    let (ga, gb) = super::load_graph_pair(
        &args.graph_a,
        &args.graph_b,
        args.features_a.as_ref(),
        args.features_b.as_ref(),
    )?;
    let alignment = super::load_alignment_or_empty(
        args.alignment.as_ref(),
        &ga,
        &gb,
        args.align_negative_ratio,
        args.seed,
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
    let mut config = resolved.variant.config(resolved.dim, resolved.mhat);
    config.alpha = vec![resolved.alpha_a, 1.0 - resolved.alpha_a];
    if let Some(beta) = resolved.beta {
        config.beta = beta;
    }
    let mut model = CrossModel::build(config, &feature_dims, &[(0, 1)], args.seed)?;
    let opts = TrainOptions {
        epochs: resolved.epochs,
        learning_rate: resolved.lr,
        negatives_per_positive: 1,
        resample_negatives: true,
    };
    let setup = TrainSetup {
        graphs: &graphs,
        splits: &splits,
        alignment: Some(&alignment),
    };
    let trace = crossgcn::crossnet::train(&mut model, &setup, &opts, args.seed)?;

    let (val, test) = evaluate_link_model(&model, &graphs, &splits)?;
    let report = TrainReport {
        task: "link".into(),
        model: resolved.variant.to_string(),
        seed: args.seed,
        epochs: resolved.epochs,
        learning_rate: resolved.lr,
        final_loss: sig6(*trace.last().unwrap_or(&f64::NAN)),
        validation: val.into_iter().map(round_map).collect(),
        test: test.into_iter().map(round_map).collect(),
    };
    checkpoint::save_compact(
        &args.out.join("checkpoint.json"),
        &checkpoint::from_cross(&model, "link"),
    )?;
    write_atomic(&args.out.join("loss_trace.csv"), trace_csv(&trace).as_bytes())?;
    write_json(&args.out.join("train_report.json"), &report)?;
    Ok(())
}

fn run_relation(args: &TrainArgs, resolved: &crate::settings::ResolvedModel) -> Result<()> {
    let ga = load_relational::<f64>(&args.graph_a)?;
    let gb = load_relational::<f64>(&args.graph_b)?;
    let alignment = match args.alignment.as_ref() {
        Some(path) => {
            // resolve by entity id through temporary lookup graphs
            crossgcn::graph::Alignment::new(
                std::fs::read_to_string(path)?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|line| {
                        let mut parts = line.trim_end_matches('\r').split('\t');
                        let a = parts.next().unwrap_or_default();
                        let b = parts.next().unwrap_or_default();
                        let i = ga
                            .entity_ids
                            .iter()
                            .position(|x| x == a)
                            .ok_or_else(|| crossgcn::error::Error::UnknownId {
                                id: a.to_string(),
                                path: path.display().to_string(),
                            })?;
                        let j = gb
                            .entity_ids
                            .iter()
                            .position(|x| x == b)
                            .ok_or_else(|| crossgcn::error::Error::UnknownId {
                                id: b.to_string(),
                                path: path.display().to_string(),
                            })?;
                        Ok((i, j, 1u8))
                    })
                    .collect::<Result<Vec<_>>>()?,
                (ga.entity_count(), gb.entity_count()),
            )?
            .with_sampled_negatives(args.align_negative_ratio, args.seed)?
        }
        None => crossgcn::graph::Alignment::empty((ga.entity_count(), gb.entity_count())),
    };
    let splits = vec![
        split_triples(&ga, (8, 1, 1), args.seed)?,
        split_triples(
            &gb,
            (8, 1, 1),
            args.seed.wrapping_add(super::GRAPH_B_SPLIT_OFFSET),
        )?,
    ];
    let (model, trace) = train_variant(
        resolved.variant,
        &[&ga, &gb],
        &splits,
        Some(&alignment),
        resolved.dim,
        resolved.epochs,
        resolved.lr,
        args.seed,
    )?;

    let metrics = |eval: &[(usize, usize, usize)], g: usize, rg| -> Result<BTreeMap<String, f64>> {
        let norm = crossgcn::relational::RelNormalizer::build(
            rg,
            crossgcn::relational::NormalizerKind::PerNodeNeighborCount,
        );
        let (u, _) = crossgcn::relational::rgcn_forward(&norm, &rg.features, &model, g, true)?;
        let core = model.store.get(model.wiring(g).core);
        let m = crossgcn::eval::mrr_hits(&u, core, eval, &rg.triples, &[1, 3])?;
        let mut out = BTreeMap::new();
        out.insert("mrr_raw".into(), m.mrr_raw);
        out.insert("mrr_filtered".into(), m.mrr_filtered);
        out.insert("hits1".into(), m.hits[0].1);
        out.insert("hits3".into(), m.hits[1].1);
        Ok(out)
    };
    let report = TrainReport {
        task: "relation".into(),
        model: resolved.variant.to_string(),
        seed: args.seed,
        epochs: resolved.epochs,
        learning_rate: resolved.lr,
        final_loss: sig6(*trace.last().unwrap_or(&f64::NAN)),
        validation: vec![
            round_map(metrics(&splits[0].validation, 0, &ga)?),
            round_map(metrics(&splits[1].validation, 1, &gb)?),
        ],
        test: vec![
            round_map(metrics(&splits[0].test, 0, &ga)?),
            round_map(metrics(&splits[1].test, 1, &gb)?),
        ],
    };
    checkpoint::save_compact(
        &args.out.join("checkpoint.json"),
        &checkpoint::from_rel(&model, "relation"),
    )?;
    write_atomic(&args.out.join("loss_trace.csv"), trace_csv(&trace).as_bytes())?;
    write_json(&args.out.join("train_report.json"), &report)?;
    Ok(())
}
