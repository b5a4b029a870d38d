//! TSV/CSV loaders for graphs, alignments, triples, and features.
//!
//! Formats (normative):
//! - edge list: `src_id<TAB>dst_id<TAB>weight`, no header
//! - alignment: `id_a<TAB>id_b`, no header
//! - triples: `head<TAB>relation<TAB>tail`, no header
//! - features: CSV with a header row of column names, one row per node id
//!   (first column is the node id)

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::graph::{Alignment, Graph, RelationalGraph};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Where node features come from.
pub enum FeatureSpec<'a> {
    /// One-hot rows: X = I_n, feature count equals node count.
    Identity,
    /// CSV file path.
    File(&'a Path),
}

struct Interner {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            ids: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Loads a weighted undirected graph from a TSV edge list. Duplicate edges
/// have their weights summed. Node ids are interned in first-appearance
/// order (source before destination, rows in file order).
pub fn load_graph<T: Scalar>(edge_path: &Path, features: FeatureSpec<'_>) -> Result<Graph<T>> {
    let text = fs::read_to_string(edge_path)?;
    let mut interner = Interner::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (src, dst, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(d), Some(w), None) => (s, d, w),
            _ => {
                return Err(parse_err(
                    edge_path,
                    lineno + 1,
                    "expected 'src<TAB>dst<TAB>weight'",
                ))
            }
        };
        let weight: f64 = w
            .parse()
            .map_err(|_| parse_err(edge_path, lineno + 1, format!("bad weight '{}'", w)))?;
        if weight < 0.0 {
            return Err(Error::Contract(format!(
                "negative weight {} at {}:{}",
                weight,
                edge_path.display(),
                lineno + 1
            )));
        }
        if src == dst {
            return Err(Error::Contract(format!(
                "self-loop '{}' at {}:{}",
                src,
                edge_path.display(),
                lineno + 1
            )));
        }
        let i = interner.intern(src);
        let j = interner.intern(dst);
        edges.push((i, j, weight));
    }
    if interner.ids.is_empty() {
        return Err(Error::EmptyInput(format!(
            "edge file {} has no rows",
            edge_path.display()
        )));
    }
    let n = interner.ids.len();
    let mut adj = Matrix::<T>::zeros(n, n);
    for (i, j, w) in edges {
        let w = T::from_f64(w);
        adj[(i, j)] += w;
        adj[(j, i)] += w;
    }
    let feats = match features {
        FeatureSpec::Identity => Matrix::identity(n),
        FeatureSpec::File(p) => load_features(p, &interner.ids)?,
    };
    Graph::new(adj, feats, interner.ids)
}

/// Loads a feature CSV and reorders rows to match `node_ids`.
pub fn load_features<T: Scalar>(path: &Path, node_ids: &[String]) -> Result<Matrix<T>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::EmptyInput(format!("feature file {}", path.display())))?;
    let m = header.trim_end_matches('\r').split(',').count() - 1;
    let mut by_id: HashMap<String, Vec<f64>> = HashMap::new();
    for (lineno, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let id = parts
            .next()
            .ok_or_else(|| parse_err(path, lineno + 1, "missing node id"))?;
        let vals: Vec<f64> = parts
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| parse_err(path, lineno + 1, format!("bad value '{}'", v)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != m {
            return Err(parse_err(
                path,
                lineno + 1,
                format!("expected {} values, got {}", m, vals.len()),
            ));
        }
        by_id.insert(id.to_string(), vals);
    }
    let mut data = Vec::with_capacity(node_ids.len() * m);
    for id in node_ids {
        let row = by_id.get(id).ok_or_else(|| Error::UnknownId {
            id: id.clone(),
            path: path.display().to_string(),
        })?;
        data.extend(row.iter().map(|&x| T::from_f64(x)));
    }
    Matrix::from_vec(node_ids.len(), m, data)
}

/// Loads alignment pairs and samples `negative_ratio * positives` label-0
/// pairs from the complement. Duplicate rows are dropped with a warning.
pub fn load_alignment<T: Scalar>(
    path: &Path,
    graph_a: &Graph<T>,
    graph_b: &Graph<T>,
    negative_ratio: f64,
    seed: u64,
) -> Result<Alignment> {
    let text = fs::read_to_string(path)?;
    let mut pairs: Vec<(usize, usize, u8)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (ida, idb) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(path, lineno + 1, "expected 'id_a<TAB>id_b'")),
        };
        let i = graph_a.index_of(ida).ok_or_else(|| Error::UnknownId {
            id: ida.to_string(),
            path: path.display().to_string(),
        })?;
        let j = graph_b.index_of(idb).ok_or_else(|| Error::UnknownId {
            id: idb.to_string(),
            path: path.display().to_string(),
        })?;
        if !seen.insert((i, j)) {
            warn!(
                "duplicate alignment row '{}\t{}' at {}:{} dropped",
                ida,
                idb,
                path.display(),
                lineno + 1
            );
            continue;
        }
        pairs.push((i, j, 1));
    }
    let alignment = Alignment::new(pairs, (graph_a.node_count(), graph_b.node_count()))?;
    alignment.with_sampled_negatives(negative_ratio, seed)
}

/// Loads a relational graph from a triple TSV. Entities and relations are
/// interned in first-appearance order; duplicate triples are dropped.
pub fn load_relational<T: Scalar>(path: &Path) -> Result<RelationalGraph<T>> {
    let text = fs::read_to_string(path)?;
    let mut entities = Interner::new();
    let mut relations = Interner::new();
    let mut triples = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (h, r, t) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(h), Some(r), Some(t), None) => (h, r, t),
            _ => {
                return Err(parse_err(
                    path,
                    lineno + 1,
                    "expected 'head<TAB>relation<TAB>tail'",
                ))
            }
        };
        let hi = entities.intern(h);
        let ri = relations.intern(r);
        let ti = entities.intern(t);
        if seen.insert((hi, ti, ri)) {
            triples.push((hi, ti, ri));
        }
    }
    if triples.is_empty() {
        return Err(Error::EmptyInput(format!(
            "triple file {} has no rows",
            path.display()
        )));
    }
    let n = entities.ids.len();
    RelationalGraph::new(
        entities.ids,
        relations.ids,
        triples,
        Matrix::identity(n),
    )
}
