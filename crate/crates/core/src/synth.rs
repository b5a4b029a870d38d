//! Synthetic partially aligned graph pairs.
//!
//! One latent block-structured "world" graph is sampled, then two views are
//! formed by independently dropping edges and perturbing features. A
//! fraction of the shared nodes is exposed as alignment positives. This is
//! the desk-scale stand-in for a pair of real collaboration networks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Alignment, Graph, RelationalGraph};
use crate::numerics::Matrix;
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticPairSpec {
    pub blocks: usize,
    pub nodes_per_block: usize,
    /// Within-block edge probability of the world graph.
    pub intra_p: f64,
    /// Cross-block edge probability of the world graph.
    pub inter_p: f64,
    /// Probability each view keeps a world edge.
    pub keep_p: f64,
    /// Fraction of shared nodes exposed as alignment positives.
    pub aligned_fraction: f64,
    /// Standard deviation of additive feature noise on the one-hot rows.
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticPairSpec {
    fn default() -> Self {
        SyntheticPairSpec {
            blocks: 4,
            nodes_per_block: 50,
            intra_p: 0.2,
            inter_p: 0.02,
            keep_p: 0.7,
            aligned_fraction: 0.1,
            feature_noise: 0.0,
            seed: 0,
        }
    }
}

impl SyntheticPairSpec {
    pub fn validate(&self) -> Result<()> {
        if self.blocks == 0 || self.nodes_per_block == 0 {
            return Err(Error::Contract("need at least one node".into()));
        }
        for (name, p) in [
            ("intra_p", self.intra_p),
            ("inter_p", self.inter_p),
            ("keep_p", self.keep_p),
            ("aligned_fraction", self.aligned_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Contract(format!("{} = {} outside [0, 1]", name, p)));
            }
        }
        if self.feature_noise < 0.0 {
            return Err(Error::Contract("feature_noise must be >= 0".into()));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.blocks * self.nodes_per_block
    }
}

/// The generated pair plus the full latent correspondence.
pub struct SyntheticPair<T> {
    pub graph_a: Graph<T>,
    pub graph_b: Graph<T>,
    pub alignment: Alignment,
    /// Every latent node pair, including the unexposed ones.
    pub ground_truth: Vec<(usize, usize)>,
}

/// Samples the pair. Deterministic given `spec.seed`.
pub fn generate_synthetic_pair<T: Scalar>(spec: &SyntheticPairSpec) -> Result<SyntheticPair<T>> {
    spec.validate()?;
    let n = spec.node_count();
    let mut world_rng = rng_for(spec.seed, Stream::Synthetic, 0);
    let mut world_edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let same_block = i / spec.nodes_per_block == j / spec.nodes_per_block;
            let p = if same_block { spec.intra_p } else { spec.inter_p };
            if world_rng.gen_bool(p) {
                world_edges.push((i, j));
            }
        }
    }

    let view = |view_idx: u64, id_prefix: &str| -> Result<Graph<T>> {
        let mut rng = rng_for(spec.seed, Stream::Synthetic, 1 + view_idx);
        let mut edges = Vec::new();
        for &(i, j) in &world_edges {
            if rng.gen_bool(spec.keep_p) {
                edges.push((i, j, T::one()));
            }
        }
        let mut features = Matrix::<T>::identity(n);
        if spec.feature_noise > 0.0 {
            for v in features.data_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += T::from_f64(spec.feature_noise * z);
            }
        }
        let ids = (0..n).map(|i| format!("{}{}", id_prefix, i)).collect();
        let mut adj = Matrix::<T>::zeros(n, n);
        for (i, j, w) in edges {
            adj[(i, j)] += w;
            adj[(j, i)] += w;
        }
        Graph::new(adj, features, ids)
    };
    let graph_a = view(0, "a")?;
    let graph_b = view(1, "b")?;

    let ground_truth: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    let exposed = ((spec.aligned_fraction * n as f64).round() as usize).min(n);
    let mut align_rng = rng_for(spec.seed, Stream::Synthetic, 3);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..order.len()).rev() {
        let j = align_rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut pairs: Vec<(usize, usize, u8)> =
        order[..exposed].iter().map(|&i| (i, i, 1)).collect();
    pairs.sort_unstable();
    let alignment = Alignment::new(pairs, (n, n))?
        .with_sampled_negatives(1.0, spec.seed ^ 0x5eed_a11a)?;

    Ok(SyntheticPair {
        graph_a,
        graph_b,
        alignment,
        ground_truth,
    })
}

/// Connectivity check used to calibrate the default spec.
pub fn is_connected<T: Scalar>(g: &Graph<T>) -> bool {
    let n = g.node_count();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && g.adjacency[(i, j)] > T::zero() {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

/// Desk-scale relational analog: block-structured typed triples, two views
/// by independent subsampling, alignment over a fraction of entities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticRelationalSpec {
    pub blocks: usize,
    pub nodes_per_block: usize,
    pub relations: usize,
    pub intra_p: f64,
    pub inter_p: f64,
    pub keep_p: f64,
    pub aligned_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticRelationalSpec {
    fn default() -> Self {
        SyntheticRelationalSpec {
            blocks: 3,
            nodes_per_block: 20,
            relations: 2,
            intra_p: 0.12,
            inter_p: 0.01,
            keep_p: 0.7,
            aligned_fraction: 0.15,
            seed: 0,
        }
    }
}

pub struct SyntheticRelationalPair<T> {
    pub graph_a: RelationalGraph<T>,
    pub graph_b: RelationalGraph<T>,
    pub alignment: Alignment,
}

pub fn generate_relational_pair<T: Scalar>(
    spec: &SyntheticRelationalSpec,
) -> Result<SyntheticRelationalPair<T>> {
    if spec.blocks == 0 || spec.nodes_per_block == 0 || spec.relations == 0 {
        return Err(Error::Contract("degenerate relational spec".into()));
    }
    let n = spec.blocks * spec.nodes_per_block;
    let mut world_rng = rng_for(spec.seed, Stream::Synthetic, 10);
    let mut world: Vec<(usize, usize, usize)> = Vec::new();
    for r in 0..spec.relations {
        for h in 0..n {
            for t in 0..n {
                if h == t {
                    continue;
                }
                let same_block = h / spec.nodes_per_block == t / spec.nodes_per_block;
                let p = if same_block { spec.intra_p } else { spec.inter_p };
                if world_rng.gen_bool(p) {
                    world.push((h, t, r));
                }
            }
        }
    }
    let view = |view_idx: u64| -> Result<RelationalGraph<T>> {
        let mut rng = rng_for(spec.seed, Stream::Synthetic, 11 + view_idx);
        let triples: Vec<(usize, usize, usize)> = world
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(spec.keep_p))
            .collect();
        RelationalGraph::from_triples(n, spec.relations, triples)
    };
    let graph_a = view(0)?;
    let graph_b = view(1)?;
    let exposed = ((spec.aligned_fraction * n as f64).round() as usize).min(n);
    let mut align_rng = rng_for(spec.seed, Stream::Synthetic, 13);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..order.len()).rev() {
        let j = align_rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut pairs: Vec<(usize, usize, u8)> =
        order[..exposed].iter().map(|&i| (i, i, 1)).collect();
    pairs.sort_unstable();
    let alignment =
        Alignment::new(pairs, (n, n))?.with_sampled_negatives(1.0, spec.seed ^ 0x7e1a)?;
    Ok(SyntheticRelationalPair {
        graph_a,
        graph_b,
        alignment,
    })
}
