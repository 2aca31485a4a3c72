//! Comparison methods: proximity rankers and an exponential naive Bayes model.

use crate::error::{Error, Result};
use crate::features::{CandidateFeatures, FeatureRecord};
use crate::graph::{GraphSnapshot, UserId};
use crate::inference::{rank_scores, RecommendationList};
use crate::numeric::sigmoid;
use crate::proximity::{self, KatzConfig, ProfileStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProximityScorer {
    CommonNeighbors,
    AdamicAdar,
    Katz,
    Jaccard,
}

impl ProximityScorer {
    /// Score column of precomputed candidate features.
    pub fn scores(&self, feats: &CandidateFeatures) -> Vec<f64> {
        match self {
            Self::CommonNeighbors => feats.common_neighbors.iter().map(|&c| c as f64).collect(),
            Self::AdamicAdar => feats.adamic_adar.clone(),
            Self::Katz => feats.katz.clone(),
            Self::Jaccard => feats.jaccard.clone(),
        }
    }
}

/// Ranks candidate pairs by a proximity score computed on `view`.
pub fn rank_by_proximity(
    view: &GraphSnapshot<'_>,
    profiles: &ProfileStore,
    candidates: &[(UserId, UserId)],
    scorer: ProximityScorer,
    katz_cfg: &KatzConfig,
    k: usize,
) -> Result<RecommendationList> {
    let scores = candidates
        .iter()
        .map(|&(j, h)| match scorer {
            ProximityScorer::CommonNeighbors => {
                proximity::common_neighbors(view, j, h).map(|c| c as f64)
            }
            ProximityScorer::AdamicAdar => proximity::adamic_adar(view, j, h),
            ProximityScorer::Katz => proximity::katz(view, j, h, katz_cfg),
            ProximityScorer::Jaccard => proximity::jaccard(profiles, j, h),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rank_scores(candidates, &scores, k))
}

/// Class priors and per-class exponential rates of `V, C, S, N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBayesModel {
    pub p: [f64; 2],
    /// `rates[r] = [λ_V, λ_C, λ_S, λ_N]` of class `r`.
    pub rates: [[f64; 4]; 2],
}

fn features(r: &FeatureRecord) -> [f64; 4] {
    [r.v, r.c, r.s, r.n]
}

pub fn nb_fit(records: &[FeatureRecord]) -> Result<NaiveBayesModel> {
    let mut count = [0.0f64; 2];
    let mut sums = [[0.0f64; 4]; 2];
    for (i, r) in records.iter().enumerate() {
        r.validate(i)?;
        let k = r.label_bit(i)?;
        count[k] += 1.0;
        for (acc, x) in sums[k].iter_mut().zip(features(r)) {
            *acc += x;
        }
    }
    for (k, &c) in count.iter().enumerate() {
        if c == 0.0 {
            return Err(Error::DegenerateClass {
                class: k as u8,
                message: "naive Bayes needs records of both classes".into(),
            });
        }
    }
    let m = count[0] + count[1];
    let rate = |k: usize| sums[k].map(|s| count[k] / s);
    Ok(NaiveBayesModel {
        p: [count[0] / m, count[1] / m],
        rates: [rate(0), rate(1)],
    })
}

impl NaiveBayesModel {
    fn ln_joint(&self, r: usize, x: &[f64; 4]) -> f64 {
        self.p[r].ln()
            + self.rates[r]
                .iter()
                .zip(x)
                .map(|(l, v)| l.ln() - l * v)
                .sum::<f64>()
    }
}

/// Posterior probability of class 1.
pub fn nb_probability(record: &FeatureRecord, model: &NaiveBayesModel) -> f64 {
    let x = features(record);
    sigmoid(model.ln_joint(1, &x) - model.ln_joint(0, &x))
}
