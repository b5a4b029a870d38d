pub mod evaluate;
pub mod generate;
pub mod sweep;
pub mod theory;
pub mod train;

use std::path::{Path, PathBuf};

use crossgcn::error::Result;
use crossgcn::graph::{load_alignment, load_graph, Alignment, FeatureSpec, Graph};

/// Loads the two link-task graphs with optional feature files.
pub fn load_graph_pair(
    graph_a: &Path,
    graph_b: &Path,
    features_a: Option<&PathBuf>,
    features_b: Option<&PathBuf>,
) -> Result<(Graph<f64>, Graph<f64>)> {
    let fa = match features_a {
        Some(p) => FeatureSpec::File(p),
        None => FeatureSpec::Identity,
    };
    let fb = match features_b {
        Some(p) => FeatureSpec::File(p),
        None => FeatureSpec::Identity,
    };
    Ok((load_graph(graph_a, fa)?, load_graph(graph_b, fb)?))
}

pub fn load_alignment_or_empty(
    path: Option<&PathBuf>,
    ga: &Graph<f64>,
    gb: &Graph<f64>,
    negative_ratio: f64,
    seed: u64,
) -> Result<Alignment> {
    match path {
        Some(p) => load_alignment(p, ga, gb, negative_ratio, seed),
        None => Ok(Alignment::empty((ga.node_count(), gb.node_count()))),
    }
}

/// Seed offset used for graph B's split so the two graphs never share a
/// shuffle stream. Matches the experiment driver.
pub const GRAPH_B_SPLIT_OFFSET: u64 = 0x517c_c1b7_2722_0a95;
