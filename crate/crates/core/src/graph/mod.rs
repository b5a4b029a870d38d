//! Graph, alignment, and relational-graph data model.

mod io;
mod split;

pub use io::{load_alignment, load_features, load_graph, load_relational, FeatureSpec};
pub use split::{sample_training_negatives, split_links, split_triples, LinkSplit, TripleSplit};

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

/// Weighted undirected graph with node features.
///
/// The adjacency matrix is symmetric with zero diagonal and non-negative
/// weights; features default to one-hot rows when no file is supplied.
#[derive(Debug, Clone)]
pub struct Graph<T> {
    pub adjacency: Matrix<T>,
    pub features: Matrix<T>,
    pub node_ids: Vec<String>,
}

impl<T: Scalar> Graph<T> {
    pub fn new(adjacency: Matrix<T>, features: Matrix<T>, node_ids: Vec<String>) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(Error::shape("Graph adjacency", "square", adjacency.dims()));
        }
        if features.rows() != n {
            return Err(Error::shape(
                "Graph features",
                format!("{} rows", n),
                features.dims(),
            ));
        }
        if node_ids.len() != n {
            return Err(Error::Contract(format!(
                "expected {} node ids, got {}",
                n,
                node_ids.len()
            )));
        }
        for i in 0..n {
            if adjacency[(i, i)] != T::zero() {
                return Err(Error::Contract(format!(
                    "adjacency diagonal must be zero before normalization (node {})",
                    i
                )));
            }
            for j in 0..n {
                let w = adjacency[(i, j)];
                if w < T::zero() {
                    return Err(Error::Contract(format!(
                        "negative edge weight at ({}, {})",
                        i, j
                    )));
                }
                if (w - adjacency[(j, i)]).abs() > T::zero() {
                    return Err(Error::Contract(format!(
                        "adjacency not symmetric at ({}, {})",
                        i, j
                    )));
                }
            }
        }
        if !features.is_finite() {
            return Err(Error::NumericDomain("non-finite feature entries".into()));
        }
        Ok(Graph {
            adjacency,
            features,
            node_ids,
        })
    }

    /// Graph from an upper-triangle weighted edge list with identity features.
    pub fn from_edges(n: usize, edges: &[(usize, usize, T)]) -> Result<Self> {
        let mut adj = Matrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::Contract(format!("bad edge ({}, {})", i, j)));
            }
            adj[(i, j)] += w;
            adj[(j, i)] += w;
        }
        let ids = (0..n).map(|i| format!("n{}", i)).collect();
        Graph::new(adj, Matrix::identity(n), ids)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    /// Upper-triangle observed links `(i, j, weight)`, `i < j`.
    pub fn links(&self) -> Vec<(usize, usize, T)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.adjacency[(i, j)];
                if w > T::zero() {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|x| x == id)
    }
}

/// Which exponent the degree scaling uses. The standard symmetric
/// normalization divides by sqrt-degrees; the positive variant multiplies
/// and is exposed only for ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeExponent {
    #[default]
    NegativeHalf,
    PositiveHalf,
}

/// Symmetrically normalized adjacency with unit self-loops.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency<T> {
    pub matrix: Matrix<T>,
}

/// Three-step recipe: add unit self-loops, take row-sum degrees, scale both
/// sides by the degree exponent.
pub fn normalize_adjacency<T: Scalar>(g: &Graph<T>) -> NormalizedAdjacency<T> {
    normalize_adjacency_with(g, DegreeExponent::NegativeHalf)
}

pub fn normalize_adjacency_with<T: Scalar>(
    g: &Graph<T>,
    exponent: DegreeExponent,
) -> NormalizedAdjacency<T> {
    let n = g.node_count();
    let mut tilde = g.adjacency.clone();
    for i in 0..n {
        tilde[(i, i)] += T::one();
    }
    let scales: Vec<T> = (0..n)
        .map(|i| {
            let deg: T = tilde.row(i).iter().copied().sum();
            match exponent {
                DegreeExponent::NegativeHalf => T::one() / deg.sqrt(),
                DegreeExponent::PositiveHalf => deg.sqrt(),
            }
        })
        .collect();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // scale product first so symmetry is exact, not approximate
            m[(i, j)] = tilde[(i, j)] * (scales[i] * scales[j]);
        }
    }
    NormalizedAdjacency { matrix: m }
}

/// Observed cross-graph node pairs. Label 1 marks an observed alignment;
/// label 0 marks an observed non-alignment sampled into the mask.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize, u8)>,
    pub dims: (usize, usize),
}

impl Alignment {
    pub fn new(pairs: Vec<(usize, usize, u8)>, dims: (usize, usize)) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j, label) in &pairs {
            if i >= dims.0 || j >= dims.1 {
                return Err(Error::Contract(format!(
                    "alignment pair ({}, {}) out of range for dims {:?}",
                    i, j, dims
                )));
            }
            if label > 1 {
                return Err(Error::Contract("alignment labels must be 0 or 1".into()));
            }
            if !seen.insert((i, j)) {
                return Err(Error::Contract(format!(
                    "duplicate alignment pair ({}, {})",
                    i, j
                )));
            }
        }
        Ok(Alignment { pairs, dims })
    }

    pub fn empty(dims: (usize, usize)) -> Self {
        Alignment { pairs: Vec::new(), dims }
    }

    pub fn positives(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().filter(|p| p.2 == 1).map(|p| (p.0, p.1))
    }

    pub fn negatives(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().filter(|p| p.2 == 0).map(|p| (p.0, p.1))
    }

    /// Adds `ratio * positives` uniformly sampled label-0 pairs from the
    /// complement of the current pair set.
    pub fn with_sampled_negatives(mut self, ratio: f64, seed: u64) -> Result<Self> {
        let n_pos = self.positives().count();
        let want = (ratio * n_pos as f64).floor() as usize;
        if want == 0 {
            return Ok(self);
        }
        let (na, nb) = self.dims;
        if na * nb <= self.pairs.len() + want {
            return Err(Error::Sampling(
                "alignment too dense to sample negatives".into(),
            ));
        }
        let mut taken: std::collections::HashSet<(usize, usize)> =
            self.pairs.iter().map(|p| (p.0, p.1)).collect();
        let mut rng = rng_for(seed, Stream::AlignmentNegatives, 0);
        let mut added = 0;
        let mut attempts = 0usize;
        let max_attempts = 1000 * want + 1000;
        while added < want {
            attempts += 1;
            if attempts > max_attempts {
                return Err(Error::Sampling(
                    "exceeded retry budget sampling alignment negatives".into(),
                ));
            }
            let i = rng.gen_range(0..na);
            let j = rng.gen_range(0..nb);
            if taken.insert((i, j)) {
                self.pairs.push((i, j, 0));
                added += 1;
            }
        }
        Ok(self)
    }
}

/// Relational graph: entities, typed directed links, relation schema.
#[derive(Debug, Clone)]
pub struct RelationalGraph<T> {
    pub entity_ids: Vec<String>,
    pub relation_ids: Vec<String>,
    pub triples: Vec<(usize, usize, usize)>,
    pub features: Matrix<T>,
}

impl<T: Scalar> RelationalGraph<T> {
    pub fn new(
        entity_ids: Vec<String>,
        relation_ids: Vec<String>,
        triples: Vec<(usize, usize, usize)>,
        features: Matrix<T>,
    ) -> Result<Self> {
        let n = entity_ids.len();
        let n_r = relation_ids.len();
        let mut seen = std::collections::HashSet::new();
        for &(h, t, r) in &triples {
            if h >= n || t >= n || r >= n_r {
                return Err(Error::Contract(format!(
                    "triple ({}, {}, {}) out of range",
                    h, t, r
                )));
            }
            if !seen.insert((h, t, r)) {
                return Err(Error::Contract(format!(
                    "duplicate triple ({}, {}, {})",
                    h, t, r
                )));
            }
        }
        if features.rows() != n {
            return Err(Error::shape(
                "RelationalGraph features",
                format!("{} rows", n),
                features.dims(),
            ));
        }
        Ok(RelationalGraph {
            entity_ids,
            relation_ids,
            triples,
            features,
        })
    }

    /// Triples with identity features and synthetic ids, for tests.
    pub fn from_triples(n: usize, n_r: usize, triples: Vec<(usize, usize, usize)>) -> Result<Self> {
        RelationalGraph::new(
            (0..n).map(|i| format!("e{}", i)).collect(),
            (0..n_r).map(|r| format!("r{}", r)).collect(),
            triples,
            Matrix::identity(n),
        )
    }

    pub fn entity_count(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_ids.len()
    }
}
