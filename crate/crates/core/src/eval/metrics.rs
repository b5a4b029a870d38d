//! Ranking metrics for link prediction: AUC, average precision, and the
//! harmonic-mean aggregate across graphs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probability that a random positive outranks a random negative, with
/// half credit for ties (the rank-sum form).
pub fn auc<T: Scalar>(pos_scores: &[T], neg_scores: &[T]) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::Contract(
            "auc needs non-empty positive and negative score lists".into(),
        ));
    }
    // merged ascending ranking with average ranks on ties
    let mut merged: Vec<(T, bool)> = pos_scores
        .iter()
        .map(|&s| (s, true))
        .chain(neg_scores.iter().map(|&s| (s, false)))
        .collect();
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores must be orderable"));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < merged.len() {
        let mut j = i;
        while j + 1 < merged.len() && merged[j + 1].0 == merged[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the average rank
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for item in &merged[i..=j] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let p = pos_scores.len() as f64;
    let n = neg_scores.len() as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * n))
}

/// Average precision over the merged ranking, scores descending, ties
/// broken by stable input order with positives listed before negatives.
pub fn average_precision<T: Scalar>(pos_scores: &[T], neg_scores: &[T]) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::Contract(
            "average_precision needs non-empty score lists".into(),
        ));
    }
    let ranking = merged_ranking(pos_scores, neg_scores);
    let mut hits = 0usize;
    let mut precision_sum = 0.0f64;
    for (k, &is_pos) in ranking.iter().enumerate() {
        if is_pos {
            hits += 1;
            precision_sum += hits as f64 / (k + 1) as f64;
        }
    }
    Ok(precision_sum / pos_scores.len() as f64)
}

/// Label sequence of the merged descending ranking (true = positive).
pub(crate) fn merged_ranking<T: Scalar>(pos_scores: &[T], neg_scores: &[T]) -> Vec<bool> {
    let mut merged: Vec<(T, bool)> = pos_scores
        .iter()
        .map(|&s| (s, true))
        .chain(neg_scores.iter().map(|&s| (s, false)))
        .collect();
    // stable sort: equal scores keep input order (positives first)
    merged.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores must be orderable"));
    merged.into_iter().map(|(_, is_pos)| is_pos).collect()
}

/// Harmonic mean `K / sum(1 / v_k)`; every value must be positive.
pub fn harmonic_overall(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Contract("harmonic mean of nothing".into()));
    }
    let mut denom = 0.0;
    for &v in values {
        if v <= 0.0 {
            return Err(Error::Contract(format!(
                "harmonic mean needs positive values, got {}",
                v
            )));
        }
        denom += 1.0 / v;
    }
    Ok(values.len() as f64 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Pairwise-counting reference.
    fn auc_oracle(pos: &[f64], neg: &[f64]) -> f64 {
        let mut num = 0.0;
        for &p in pos {
            for &n in neg {
                if p > n {
                    num += 1.0;
                } else if p == n {
                    num += 0.5;
                }
            }
        }
        num / (pos.len() as f64 * neg.len() as f64)
    }

    /// Rank-by-rank precision-sum reference. The merged list is built by a
    /// stable insertion sort (positives enter first), independent of the
    /// implementation's sort.
    fn ap_oracle(pos: &[f64], neg: &[f64]) -> f64 {
        let mut ranking: Vec<(f64, bool)> = Vec::new();
        for &s in pos.iter() {
            let at = ranking.iter().position(|&(t, _)| t < s).unwrap_or(ranking.len());
            ranking.insert(at, (s, true));
        }
        for &s in neg.iter() {
            let at = ranking.iter().position(|&(t, _)| t < s).unwrap_or(ranking.len());
            ranking.insert(at, (s, false));
        }
        let mut hits = 0usize;
        let mut acc = 0.0;
        for (k, &(_, is_pos)) in ranking.iter().enumerate() {
            if is_pos {
                hits += 1;
                acc += hits as f64 / (k + 1) as f64;
            }
        }
        acc / pos.len() as f64
    }

    #[test]
    fn auc_separable_and_tied() {
        assert_eq!(auc(&[0.9], &[0.1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5, 0.5], &[0.5]).unwrap(), 0.5);
        // 4 comparisons, 3 wins
        assert_eq!(auc(&[0.9, 0.3], &[0.5, 0.1]).unwrap(), 0.75);
    }

    #[test]
    fn auc_empty_is_contract_error() {
        assert!(auc::<f64>(&[], &[0.1]).is_err());
        assert!(auc::<f64>(&[0.1], &[]).is_err());
    }

    #[test]
    fn ap_hand_cases() {
        // single positive ranked first
        assert_eq!(average_precision(&[0.9], &[0.1]).unwrap(), 1.0);
        // ranking (neg, pos): precision at the positive is 1/2
        assert_eq!(average_precision(&[0.2], &[0.8]).unwrap(), 0.5);
        // ranking (pos, neg, pos): (1 + 2/3) / 2
        let ap = average_precision(&[0.9, 0.3], &[0.5]).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn metrics_match_bruteforce_on_1000_random_cases() {
        let mut rng = crate::rng::rng_for(2024, crate::rng::Stream::Experiment, 0);
        for case in 0..1000 {
            let np = rng.gen_range(1..12);
            let nn = rng.gen_range(1..12);
            // coarse grid scores force plenty of ties
            let pos: Vec<f64> = (0..np).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
            let neg: Vec<f64> = (0..nn).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
            let fast = auc(&pos, &neg).unwrap();
            let slow = auc_oracle(&pos, &neg);
            assert_eq!(fast, slow, "auc mismatch in case {case}");
            let fast = average_precision(&pos, &neg).unwrap();
            let slow = ap_oracle(&pos, &neg);
            assert_eq!(fast, slow, "ap mismatch in case {case}");
        }
    }

    #[test]
    fn harmonic_values() {
        // the two per-graph baselines and their printed aggregate
        let h = harmonic_overall(&[0.769, 0.840]).unwrap();
        assert!((h - 0.803).abs() < 5e-4);
        assert_eq!(harmonic_overall(&[0.4, 0.4]).unwrap(), 0.4);
        let h = harmonic_overall(&[0.5, 1.0]).unwrap();
        assert!((h - 2.0 / 3.0).abs() < 1e-15);
        assert!(harmonic_overall(&[0.5, 0.0]).is_err());
    }

    #[test]
    fn harmonic_below_arithmetic_never_above_min_violation() {
        let mut rng = crate::rng::rng_for(5, crate::rng::Stream::Experiment, 1);
        for _ in 0..200 {
            let vals: Vec<f64> = (0..rng.gen_range(1..5))
                .map(|_| rng.gen_range(0.05..1.0))
                .collect();
            let h = harmonic_overall(&vals).unwrap();
            let amean = vals.iter().sum::<f64>() / vals.len() as f64;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(h <= amean + 1e-12);
            assert!(h >= min - 1e-12);
        }
    }
}
