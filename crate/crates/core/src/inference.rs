//! Recommendation probabilities and top-K ranking.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::features::FeatureRecord;
use crate::graph::UserId;
use crate::model::density::ClassLogs;
use crate::model::Theta;
use crate::numeric::sigmoid;

/// Ranked pairs with their scores, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub k: usize,
    pub items: Vec<((UserId, UserId), f64)>,
}

impl RecommendationList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn pairs(&self) -> Vec<(UserId, UserId)> {
        self.items.iter().map(|(p, _)| *p).collect()
    }
}

/// Indices of the `k` best entries ordered by score descending, then pair ascending.
///
/// NaN scores rank last.
pub fn top_k_indices(pairs: &[(UserId, UserId)], scores: &[f64], k: usize) -> Vec<usize> {
    assert_eq!(pairs.len(), scores.len(), "one score per pair");
    let key = |s: f64| if s.is_nan() { f64::NEG_INFINITY } else { s };
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    let cmp = |&a: &usize, &b: &usize| -> Ordering {
        key(scores[b])
            .total_cmp(&key(scores[a]))
            .then_with(|| pairs[a].cmp(&pairs[b]))
    };
    let k = k.min(idx.len());
    if k < idx.len() && k > 0 {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    } else {
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    idx
}

/// Top-`k` list from precomputed scores.
pub fn rank_scores(pairs: &[(UserId, UserId)], scores: &[f64], k: usize) -> RecommendationList {
    let items = top_k_indices(pairs, scores, k)
        .into_iter()
        .map(|i| (pairs[i], scores[i]))
        .collect();
    RecommendationList { k, items }
}

/// Log-odds `ln INT(1) - ln INT(0)` of a record.
fn log_odds(logs: &[ClassLogs; 2], rec: &FeatureRecord, index: usize) -> Result<f64> {
    let l1 = logs[1].ln_int(rec.v, rec.c, rec.s, rec.n);
    let l0 = logs[0].ln_int(rec.v, rec.c, rec.s, rec.n);
    if (l1 == f64::NEG_INFINITY && l0 == f64::NEG_INFINITY) || l1.is_nan() || l0.is_nan() {
        return Err(Error::Numeric {
            record: index,
            message: "both class integrals underflow".into(),
        });
    }
    Ok(l1 - l0)
}

/// `P(R = 1 | V, C, S, N, θ)`.
pub fn rec_probability(record: &FeatureRecord, theta: &Theta) -> Result<f64> {
    theta.validate()?;
    record.validate(0)?;
    let logs = [ClassLogs::new(theta, 0), ClassLogs::new(theta, 1)];
    Ok(sigmoid(log_odds(&logs, record, 0)?))
}

/// Recommendation probability of every record, in input order.
pub fn rec_probabilities(records: &[FeatureRecord], theta: &Theta) -> Result<Vec<f64>> {
    theta.validate()?;
    let logs = [ClassLogs::new(theta, 0), ClassLogs::new(theta, 1)];
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.validate(i)?;
            Ok(sigmoid(log_odds(&logs, r, i)?))
        })
        .collect()
}

pub fn recommend_topk(
    candidates: &[FeatureRecord],
    theta: &Theta,
    k: usize,
) -> Result<RecommendationList> {
    if k < 1 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let probs = rec_probabilities(candidates, theta)?;
    let pairs: Vec<_> = candidates.iter().map(|r| r.pair).collect();
    Ok(rank_scores(&pairs, &probs, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassParams;

    #[test]
    fn ties_break_on_pair_order() {
        let pairs = vec![(3, 4), (1, 2), (1, 3), (2, 9)];
        let scores = vec![0.5, 0.5, 0.9, 0.1];
        assert_eq!(top_k_indices(&pairs, &scores, 2), vec![2, 1]);
        assert_eq!(top_k_indices(&pairs, &scores, 10), vec![2, 1, 0, 3]);
        assert!(top_k_indices(&pairs, &scores, 0).is_empty());
    }

    #[test]
    fn symmetric_theta_gives_one_half() {
        let cp = ClassParams {
            lam_v: 1.0,
            lam_c: 2.0,
            lam_s: 0.7,
            lam_sp: 1.3,
            lam_n: 0.4,
            lam_np: 0.9,
            lam_l: 0.8,
            lam_lp: 0.5,
        };
        let theta = Theta {
            p: [0.5, 0.5],
            class: [cp, cp],
        };
        for (s, n) in [(1.0, 2.0), (3.0, 0.5), (1.0, 1.0)] {
            let r = FeatureRecord::floored((1, 2), 0.3, 0.7, s, n);
            assert_eq!(rec_probability(&r, &theta).unwrap(), 0.5);
        }
    }

    #[test]
    fn topk_examples() {
        let cands: Vec<_> = [(1, 2), (1, 3), (2, 3)]
            .iter()
            .map(|&p| FeatureRecord::floored(p, 1.0, 1.0, 1.0, 1.0))
            .collect();
        let list = rank_scores(
            &cands.iter().map(|r| r.pair).collect::<Vec<_>>(),
            &[0.9, 0.5, 0.1],
            2,
        );
        assert_eq!(list.pairs(), vec![(1, 2), (1, 3)]);
        assert!(rank_scores(&[], &[], 3).is_empty());
    }
}
