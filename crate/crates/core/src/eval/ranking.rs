//! Entity-ranking metrics for relation classification: raw and filtered
//! mean reciprocal rank, Hits@k.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::relational::distmult_score;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RankingMetrics {
    pub mrr_raw: f64,
    pub mrr_filtered: f64,
    /// Filtered Hits@k per requested k, in input order.
    pub hits: Vec<(usize, f64)>,
    pub n_rankings: usize,
}

/// Ranks every test triple against all candidate heads and all candidate
/// tails. Raw ranks count every competitor; filtered ranks drop candidates
/// that form another known-true triple. Ties take the average rank of the
/// tied block.
pub fn mrr_hits<T: Scalar>(
    u: &Matrix<T>,
    core: &Matrix<T>,
    test_triples: &[(usize, usize, usize)],
    known_triples: &[(usize, usize, usize)],
    k_list: &[usize],
) -> Result<RankingMetrics> {
    if test_triples.is_empty() {
        return Err(Error::Contract("empty test set".into()));
    }
    let n = u.rows();
    let known: HashSet<(usize, usize, usize)> = known_triples.iter().copied().collect();
    let mut rr_raw_sum = 0.0;
    let mut rr_filt_sum = 0.0;
    let mut hit_counts = vec![0usize; k_list.len()];
    let mut n_rankings = 0usize;

    for &(h, t, r) in test_triples {
        for head_side in [true, false] {
            let target_score = distmult_score(u, core, (h, t, r)).to_f64();
            let mut better_raw = 0usize;
            let mut tied_raw = 0usize;
            let mut better_filt = 0usize;
            let mut tied_filt = 0usize;
            for cand in 0..n {
                let triple = if head_side { (cand, t, r) } else { (h, cand, r) };
                let is_target = if head_side { cand == h } else { cand == t };
                if is_target {
                    continue;
                }
                let s = distmult_score(u, core, triple).to_f64();
                let known_true = known.contains(&triple);
                if s > target_score {
                    better_raw += 1;
                    if !known_true {
                        better_filt += 1;
                    }
                } else if s == target_score {
                    tied_raw += 1;
                    if !known_true {
                        tied_filt += 1;
                    }
                }
            }
            let raw_rank = better_raw as f64 + (tied_raw as f64 + 2.0) / 2.0;
            let filt_rank = better_filt as f64 + (tied_filt as f64 + 2.0) / 2.0;
            rr_raw_sum += 1.0 / raw_rank;
            rr_filt_sum += 1.0 / filt_rank;
            for (ki, &k) in k_list.iter().enumerate() {
                if filt_rank <= k as f64 {
                    hit_counts[ki] += 1;
                }
            }
            n_rankings += 1;
        }
    }
    Ok(RankingMetrics {
        mrr_raw: rr_raw_sum / n_rankings as f64,
        mrr_filtered: rr_filt_sum / n_rankings as f64,
        hits: k_list
            .iter()
            .zip(hit_counts)
            .map(|(&k, c)| (k, c as f64 / n_rankings as f64))
            .collect(),
        n_rankings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    #[test]
    fn single_triple_ranked_first() {
        // a negative core entry lets the opposite-sign pair (0, 1) beat
        // every candidate, including the same-sign self pairs
        let u = M::from_rows(&[&[1.0], &[-1.0], &[0.0]]);
        let core = M::from_rows(&[&[-1.0]]);
        let m = mrr_hits(&u, &core, &[(0, 1, 0)], &[(0, 1, 0)], &[1, 3]).unwrap();
        assert_eq!(m.mrr_raw, 1.0);
        assert_eq!(m.mrr_filtered, 1.0);
        assert_eq!(m.hits[0], (1, 1.0));
        assert_eq!(m.hits[1], (3, 1.0));
        assert_eq!(m.n_rankings, 2);
    }

    #[test]
    fn reciprocal_rank_arithmetic() {
        // ranks 1, 2, 4 give MRR (1 + 1/2 + 1/4) / 3
        let rr: f64 = (1.0 + 0.5 + 0.25) / 3.0;
        assert!((rr - 0.5833333333333334).abs() < 1e-12);
    }

    #[test]
    fn filtered_rank_removes_known_competitor() {
        // Three entities. Scoring puts candidate 2 above the target head 0
        // for the test triple (0, 1, r), but (2, 1, r) is a known triple,
        // so filtering removes it and the filtered rank improves.
        let u = M::from_rows(&[&[0.5, 0.0], &[1.0, 0.0], &[2.0, 0.0]]);
        let core = M::from_rows(&[&[1.0, 1.0]]);
        let test = [(0usize, 1usize, 0usize)];
        let known = [(0, 1, 0), (2, 1, 0), (1, 2, 0)];
        let m = mrr_hits(&u, &core, &test, &known, &[1]).unwrap();
        assert!(
            m.mrr_filtered > m.mrr_raw,
            "filtered {} should exceed raw {}",
            m.mrr_filtered,
            m.mrr_raw
        );

        // brute-force the head-side ranking for this construction:
        // scores for candidates (c, 1, r): c=0 target; c=1 self pair,
        // c=2 higher. Raw head rank = 2, filtered head rank counts only
        // candidate 1.
        let s_target = distmult_score(&u, &core, (0, 1, 0));
        let s2 = distmult_score(&u, &core, (2, 1, 0));
        assert!(s2 > s_target);
    }

    #[test]
    fn filtered_never_below_raw_on_random_cases() {
        use rand::Rng;
        let mut rng = crate::rng::rng_for(77, crate::rng::Stream::Experiment, 2);
        for _ in 0..50 {
            let n = rng.gen_range(3..8);
            let u = M::from_fn(n, 3, |_, _| rng.gen_range(-1.0..1.0));
            let core = M::from_fn(2, 3, |_, _| rng.gen_range(-1.0..1.0));
            let mut triples = Vec::new();
            for h in 0..n {
                for t in 0..n {
                    if h != t && rng.gen_bool(0.3) {
                        triples.push((h, t, rng.gen_range(0..2)));
                    }
                }
            }
            if triples.len() < 2 {
                continue;
            }
            let test = &triples[..triples.len() / 2];
            let m = mrr_hits(&u, &core, test, &triples, &[1, 3]).unwrap();
            assert!(m.mrr_filtered >= m.mrr_raw - 1e-12);
        }
    }

    #[test]
    fn empty_test_set_rejected() {
        let u = M::zeros(2, 2);
        let core = M::zeros(1, 2);
        assert!(mrr_hits(&u, &core, &[], &[], &[1]).is_err());
    }
}
