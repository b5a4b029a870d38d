//! Train/validation/test splitting and negative sampling.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, RelationalGraph};
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

/// Link-prediction split: the positive sets partition the observed links;
/// validation and test carry balanced sampled negatives.
#[derive(Debug, Clone)]
pub struct LinkSplit<T> {
    pub train: Vec<(usize, usize, T)>,
    pub validation: Vec<(usize, usize, T)>,
    pub test: Vec<(usize, usize, T)>,
    pub negatives_val: Vec<(usize, usize)>,
    pub negatives_test: Vec<(usize, usize)>,
}

/// Splits observed upper-triangle links by `ratios` (e.g. `(8, 1, 1)`),
/// deterministically under `seed`, and samples one negative per positive
/// for validation and test.
pub fn split_links<T: Scalar>(
    g: &Graph<T>,
    ratios: (u32, u32, u32),
    seed: u64,
) -> Result<LinkSplit<T>> {
    let mut links = g.links();
    if links.len() < 10 {
        return Err(Error::Contract(format!(
            "need at least 10 observed links to split, found {}",
            links.len()
        )));
    }
    let mut rng = rng_for(seed, Stream::Split, 0);
    links.shuffle(&mut rng);

    let total = links.len();
    let denom = (ratios.0 + ratios.1 + ratios.2) as usize;
    let n_val = total * ratios.1 as usize / denom;
    let n_test = total * ratios.2 as usize / denom;
    let n_train = total - n_val - n_test;

    let train = links[..n_train].to_vec();
    let validation = links[n_train..n_train + n_val].to_vec();
    let test = links[n_train + n_val..].to_vec();

    let forbidden: HashSet<(usize, usize)> = g.links().iter().map(|&(i, j, _)| (i, j)).collect();
    let negatives =
        sample_distinct_nonlinks(g.node_count(), &forbidden, n_val + n_test, &mut rng)?;
    let negatives_val = negatives[..n_val].to_vec();
    let negatives_test = negatives[n_val..].to_vec();

    Ok(LinkSplit {
        train,
        validation,
        test,
        negatives_val,
        negatives_test,
    })
}

fn sample_distinct_nonlinks(
    n: usize,
    forbidden: &HashSet<(usize, usize)>,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(usize, usize)>> {
    let candidates = n * (n - 1) / 2;
    if candidates <= forbidden.len() + count {
        return Err(Error::Sampling(format!(
            "graph too dense: {} non-link pairs available, {} requested",
            candidates.saturating_sub(forbidden.len()),
            count
        )));
    }
    let mut out = Vec::with_capacity(count);
    let mut taken = HashSet::new();
    let mut attempts = 0usize;
    let budget = 1000 * count + 1000;
    while out.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Sampling(
                "exceeded retry budget sampling non-links".into(),
            ));
        }
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let pair = (i.min(j), i.max(j));
        if forbidden.contains(&pair) || taken.contains(&pair) {
            continue;
        }
        taken.insert(pair);
        out.push(pair);
    }
    Ok(out)
}

/// Uniform non-link pairs for the training loss, `k_per_positive` per
/// positive link, sampled independently (repeats across the list allowed).
/// Callers advance `seed` per epoch to resample.
pub fn sample_training_negatives<T: Scalar>(
    g: &Graph<T>,
    train_positives: usize,
    k_per_positive: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if k_per_positive == 0 {
        return Err(Error::Contract("k_per_positive must be >= 1".into()));
    }
    let n = g.node_count();
    let forbidden: HashSet<(usize, usize)> = g.links().iter().map(|&(i, j, _)| (i, j)).collect();
    let candidates = n * (n - 1) / 2;
    if candidates <= forbidden.len() {
        return Err(Error::Sampling("graph is complete: no non-links".into()));
    }
    let want = train_positives * k_per_positive;
    let mut rng = rng_for(seed, Stream::TrainNegatives, 0);
    let mut out = Vec::with_capacity(want);
    let mut attempts = 0usize;
    let budget = 1000 * want + 1000;
    while out.len() < want {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Sampling(
                "exceeded retry budget sampling training negatives".into(),
            ));
        }
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let pair = (i.min(j), i.max(j));
        if forbidden.contains(&pair) {
            continue;
        }
        out.push(pair);
    }
    Ok(out)
}

/// Relational split mirroring [`split_links`] over triples.
#[derive(Debug, Clone)]
pub struct TripleSplit {
    pub train: Vec<(usize, usize, usize)>,
    pub validation: Vec<(usize, usize, usize)>,
    pub test: Vec<(usize, usize, usize)>,
}

pub fn split_triples<T: Scalar>(
    rg: &RelationalGraph<T>,
    ratios: (u32, u32, u32),
    seed: u64,
) -> Result<TripleSplit> {
    if rg.triples.len() < 10 {
        return Err(Error::Contract(format!(
            "need at least 10 triples to split, found {}",
            rg.triples.len()
        )));
    }
    let mut triples = rg.triples.clone();
    let mut rng = rng_for(seed, Stream::Split, 1);
    triples.shuffle(&mut rng);
    let total = triples.len();
    let denom = (ratios.0 + ratios.1 + ratios.2) as usize;
    let n_val = total * ratios.1 as usize / denom;
    let n_test = total * ratios.2 as usize / denom;
    let n_train = total - n_val - n_test;
    Ok(TripleSplit {
        train: triples[..n_train].to_vec(),
        validation: triples[n_train..n_train + n_val].to_vec(),
        test: triples[n_train + n_val..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn hundred_link_graph() -> Graph<f64> {
        // Path + extra chords: exactly 100 links on 60 nodes.
        let mut edges = Vec::new();
        for i in 0..59 {
            edges.push((i, i + 1, 1.0));
        }
        let mut k = 0;
        'outer: for i in 0..60 {
            for j in (i + 2)..60 {
                edges.push((i, j, 1.0));
                k += 1;
                if k == 41 {
                    break 'outer;
                }
            }
        }
        Graph::from_edges(60, &edges).unwrap()
    }

    #[test]
    fn eight_one_one_counts() {
        let g = hundred_link_graph();
        assert_eq!(g.links().len(), 100);
        let s = split_links(&g, (8, 1, 1), 42).unwrap();
        assert_eq!(s.train.len(), 80);
        assert_eq!(s.validation.len(), 10);
        assert_eq!(s.test.len(), 10);
        assert_eq!(s.negatives_val.len(), 10);
        assert_eq!(s.negatives_test.len(), 10);
    }

    #[test]
    fn same_seed_identical_split() {
        let g = hundred_link_graph();
        let a = split_links(&g, (8, 1, 1), 7).unwrap();
        let b = split_links(&g, (8, 1, 1), 7).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.validation, b.validation);
        assert_eq!(a.test, b.test);
        assert_eq!(a.negatives_val, b.negatives_val);
        assert_eq!(a.negatives_test, b.negatives_test);
    }

    #[test]
    fn different_seeds_differ() {
        let g = hundred_link_graph();
        let a = split_links(&g, (8, 1, 1), 1).unwrap();
        let b = split_links(&g, (8, 1, 1), 2).unwrap();
        assert_ne!(a.train, b.train);
    }

    #[test]
    fn split_partitions_links() {
        let g = hundred_link_graph();
        let s = split_links(&g, (8, 1, 1), 3).unwrap();
        let mut all: Vec<(usize, usize)> = s
            .train
            .iter()
            .chain(&s.validation)
            .chain(&s.test)
            .map(|&(i, j, _)| (i, j))
            .collect();
        all.sort_unstable();
        let before = all.len();
        all.dedup();
        assert_eq!(before, all.len(), "splits overlap");
        let mut observed: Vec<(usize, usize)> =
            g.links().iter().map(|&(i, j, _)| (i, j)).collect();
        observed.sort_unstable();
        assert_eq!(all, observed);
    }

    #[test]
    fn negatives_avoid_observed_links() {
        let g = hundred_link_graph();
        let s = split_links(&g, (8, 1, 1), 9).unwrap();
        let observed: HashSet<(usize, usize)> =
            g.links().iter().map(|&(i, j, _)| (i, j)).collect();
        for p in s.negatives_val.iter().chain(&s.negatives_test) {
            assert!(!observed.contains(p));
        }
    }

    #[test]
    fn training_negatives_count_and_exclusion() {
        let g = hundred_link_graph();
        let negs = sample_training_negatives(&g, 80, 1, 5).unwrap();
        assert_eq!(negs.len(), 80);
        let observed: HashSet<(usize, usize)> =
            g.links().iter().map(|&(i, j, _)| (i, j)).collect();
        for p in &negs {
            assert!(!observed.contains(p));
        }
    }

    #[test]
    fn complete_graph_sampling_fails() {
        let mut edges = Vec::new();
        for i in 0..6 {
            for j in (i + 1)..6 {
                edges.push((i, j, 1.0));
            }
        }
        let g = Graph::from_edges(6, &edges).unwrap();
        assert!(matches!(
            sample_training_negatives(&g, 10, 1, 0),
            Err(Error::Sampling(_))
        ));
    }

    #[test]
    fn triple_split_partitions() {
        let rg = RelationalGraph::<f64>::from_triples(
            10,
            2,
            (0..10)
                .flat_map(|h| [(h, (h + 1) % 10, 0), (h, (h + 2) % 10, 1)])
                .collect(),
        )
        .unwrap();
        let s = split_triples(&rg, (8, 1, 1), 4).unwrap();
        assert_eq!(s.train.len() + s.validation.len() + s.test.len(), 20);
        assert_eq!(s.validation.len(), 2);
        assert_eq!(s.test.len(), 2);
    }
}
