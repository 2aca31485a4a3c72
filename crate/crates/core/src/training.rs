//! Labeled training records from two consecutive snapshots.
//!
//! Features come from month `t-1`; establishment is observed at month `t`.
//! A record is labeled positive when its realized utility ranks in the top
//! `K` of all candidates.

use crate::error::{Error, Result};
use crate::features::{
    candidate_features, utility, CostConfig, EdgeValueTable, FeatureRecord, ValueConfig,
};
use crate::graph::TemporalGraph;
use crate::inference::top_k_indices;
use crate::proximity::{KatzConfig, ProfileStore};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelingConfig {
    pub k_fraction: f64,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        Self { k_fraction: 0.005 }
    }
}

impl LabelingConfig {
    pub fn new(k_fraction: f64) -> Result<Self> {
        if !(k_fraction > 0.0 && k_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "k fraction must lie in (0,1], got {k_fraction}"
            )));
        }
        Ok(Self { k_fraction })
    }

    /// `ceil(k_fraction · n)`, at least one when `n > 0`.
    pub fn k_for(&self, n: usize) -> usize {
        top_k_count(self.k_fraction, n)
    }
}

/// `ceil(fraction · n)` clamped to `[1, n]`; zero only when `n` is zero.
///
/// A tiny tolerance keeps products such as `0.005 · 2000` from rounding up to 11.
pub fn top_k_count(fraction: f64, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let k = (fraction * n as f64 - 1e-9).ceil();
    (k.max(1.0) as usize).min(n)
}

/// Assigns label 1 to the top `k` records by utility (descending, then pair ascending).
pub fn label_by_utility(records: &mut [FeatureRecord], utilities: &[f64], k: usize) {
    let pairs: Vec<_> = records.iter().map(|r| r.pair).collect();
    for r in records.iter_mut() {
        r.label = Some(false);
    }
    for i in top_k_indices(&pairs, utilities, k) {
        records[i].label = Some(true);
    }
}

/// Whether the pair is linked in the snapshot at `month`.
pub(crate) fn established_by(graph: &TemporalGraph, pair: (i64, i64), month: u32) -> Result<bool> {
    let (a, b) = (graph.index_of(pair.0)?, graph.index_of(pair.1)?);
    Ok(graph.edge_month(a, b).is_some_and(|m| m <= month))
}

#[allow(clippy::too_many_arguments)]
pub fn build_training(
    graph: &TemporalGraph,
    profiles: &ProfileStore,
    t: u32,
    value_cfg: &ValueConfig,
    cost_cfg: &CostConfig,
    katz_cfg: &KatzConfig,
    label_cfg: &LabelingConfig,
) -> Result<Vec<FeatureRecord>> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!(
            "training month must be >= 2, got {t}"
        )));
    }
    let cost_cfg = CostConfig::new(cost_cfg.rho)?;
    let label_cfg = LabelingConfig::new(label_cfg.k_fraction)?;
    let table = EdgeValueTable::build(graph, value_cfg, t - 1, 1)?;
    let feats = candidate_features(graph, profiles, t - 1, value_cfg, katz_cfg, &table, 1)?;
    label_records(graph, feats.records(&cost_cfg), t, &label_cfg)
}

/// Labels candidate records observed before month `t` by their realized utility at `t`.
pub fn label_records(
    graph: &TemporalGraph,
    mut records: Vec<FeatureRecord>,
    t: u32,
    label_cfg: &LabelingConfig,
) -> Result<Vec<FeatureRecord>> {
    if records.is_empty() {
        return Err(Error::EmptySet(format!(
            "no two-hop candidates before month {t}"
        )));
    }
    let utilities = records
        .iter()
        .map(|r| Ok(utility(r.v, r.c, established_by(graph, r.pair, t)?)))
        .collect::<Result<Vec<f64>>>()?;
    let k = label_cfg.k_for(records.len());
    label_by_utility(&mut records, &utilities, k);
    Ok(records)
}
