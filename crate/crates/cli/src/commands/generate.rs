//! `crossgcn generate`: synthetic pair to TSV/CSV files.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use crossgcn::error::Result;
use crossgcn::eval::{write_atomic, write_json};
use crossgcn::graph::Graph;
use crossgcn::synth::{generate_synthetic_pair, SyntheticPairSpec};

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Output directory for the generated files.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    #[arg(long, default_value_t = 50)]
    pub nodes_per_block: usize,
    /// Within-block edge probability of the latent graph.
    #[arg(long, default_value_t = 0.2)]
    pub intra: f64,
    /// Cross-block edge probability of the latent graph.
    #[arg(long, default_value_t = 0.02)]
    pub inter: f64,
    /// Probability each view keeps a latent edge.
    #[arg(long, default_value_t = 0.7)]
    pub keep: f64,
    /// Fraction of nodes exposed as alignment positives.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Feature noise level; identity features when zero.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

fn edges_tsv(g: &Graph<f64>) -> String {
    let mut out = String::new();
    for (i, j, w) in g.links() {
        writeln!(out, "{}\t{}\t{}", g.node_ids[i], g.node_ids[j], w).unwrap();
    }
    out
}

fn features_csv(g: &Graph<f64>) -> String {
    let m = g.feature_count();
    let mut out = String::from("id");
    for k in 0..m {
        write!(out, ",f{}", k).unwrap();
    }
    out.push('\n');
    for i in 0..g.node_count() {
        write!(out, "{}", g.node_ids[i]).unwrap();
        for &v in g.features.row(i) {
            write!(out, ",{}", v).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn run(args: GenerateArgs) -> Result<()> {
    let spec = SyntheticPairSpec {
        blocks: args.blocks,
        nodes_per_block: args.nodes_per_block,
        intra_p: args.intra,
        inter_p: args.inter,
        keep_p: args.keep,
        aligned_fraction: args.rho,
        feature_noise: args.noise,
        seed: args.seed,
    };
    let pair = generate_synthetic_pair::<f64>(&spec)?;

    write_atomic(&args.out.join("graph_a.tsv"), edges_tsv(&pair.graph_a).as_bytes())?;
    write_atomic(&args.out.join("graph_b.tsv"), edges_tsv(&pair.graph_b).as_bytes())?;

    let mut alignment = String::new();
    for (i, j) in pair.alignment.positives() {
        writeln!(
            alignment,
            "{}\t{}",
            pair.graph_a.node_ids[i], pair.graph_b.node_ids[j]
        )
        .unwrap();
    }
    write_atomic(&args.out.join("alignment.tsv"), alignment.as_bytes())?;

    let mut truth = String::new();
    for &(i, j) in &pair.ground_truth {
        writeln!(
            truth,
            "{}\t{}",
            pair.graph_a.node_ids[i], pair.graph_b.node_ids[j]
        )
        .unwrap();
    }
    write_atomic(&args.out.join("ground_truth.tsv"), truth.as_bytes())?;

    write_atomic(
        &args.out.join("features_a.csv"),
        features_csv(&pair.graph_a).as_bytes(),
    )?;
    write_atomic(
        &args.out.join("features_b.csv"),
        features_csv(&pair.graph_b).as_bytes(),
    )?;
    write_json(&args.out.join("pair_meta.json"), &spec)?;

    log::info!(
        "wrote pair: {} nodes per view, {} / {} edges, {} alignment positives",
        spec.node_count(),
        pair.graph_a.links().len(),
        pair.graph_b.links().len(),
        pair.alignment.positives().count()
    );
    Ok(())
}
