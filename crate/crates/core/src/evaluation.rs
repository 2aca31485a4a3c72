//! Ground-truth utility ranking, top-K metrics and the month-by-month
//! experiment driver.
//!
//! For every current month `t`, models are trained on candidates of month
//! `t-1` labeled by what happened at `t`, then rank the candidates of month
//! `t` and are scored against what happened at `t+1`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::baselines::{nb_fit, nb_probability, ProximityScorer};
use crate::error::{Error, Result};
use crate::features::{
    candidate_features, utility, CandidateFeatures, CostConfig, EdgeValueTable, FeatureRecord,
    ValueConfig,
};
use crate::graph::{TemporalGraph, UserId};
use crate::inference::{rec_probabilities, top_k_indices};
use crate::model::{fit, EmConfig};
use crate::proximity::{KatzConfig, ProfileStore};
use crate::training::{established_by, label_records, top_k_count, LabelingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ours,
    NaiveBayes,
    CommonNeighbors,
    AdamicAdar,
    Katz,
    Jaccard,
    /// Ranks by realized utility; an upper bound used for checks.
    Oracle,
}

impl Method {
    /// The six comparison methods, in report order.
    pub const STANDARD: [Method; 6] = [
        Method::Ours,
        Method::NaiveBayes,
        Method::CommonNeighbors,
        Method::AdamicAdar,
        Method::Katz,
        Method::Jaccard,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ours => "ours",
            Method::NaiveBayes => "NB",
            Method::CommonNeighbors => "CN",
            Method::AdamicAdar => "AA",
            Method::Katz => "Katz",
            Method::Jaccard => "Jaccard",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = Method::STANDARD
            .iter()
            .chain(std::iter::once(&Method::Oracle));
        for m in all {
            if m.name().eq_ignore_ascii_case(s.trim()) {
                return Ok(*m);
            }
        }
        Err(Error::InvalidArgument(format!(
            "unknown method `{s}` (expected one of ours, NB, CN, AA, Katz, Jaccard, oracle)"
        )))
    }
}

/// Month column of a metrics row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonthLabel {
    Month(u32),
    Mean,
    Std,
}

impl fmt::Display for MonthLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonthLabel::Month(m) => write!(f, "{m}"),
            MonthLabel::Mean => f.write_str("mean"),
            MonthLabel::Std => f.write_str("std"),
        }
    }
}

impl FromStr for MonthLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(MonthLabel::Mean),
            "std" => Ok(MonthLabel::Std),
            _ => s
                .parse()
                .map(MonthLabel::Month)
                .map_err(|e| format!("bad month `{s}`: {e}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub month: MonthLabel,
    pub precision: f64,
    pub avg_utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub k_fraction: f64,
    pub rho: f64,
    /// First and last current month `t`.
    pub months: (u32, u32),
    pub value: ValueConfig,
    pub katz: KatzConfig,
    pub em: EmConfig,
    pub threads: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k_fraction: 0.005,
            rho: 1.0,
            months: (2, 2),
            value: ValueConfig::default(),
            katz: KatzConfig::default(),
            em: EmConfig::default(),
            threads: 1,
        }
    }
}

/// Top-`k` pairs by realized utility.
pub fn true_topk(
    candidates: &[FeatureRecord],
    established: &[bool],
    k: usize,
) -> Result<Vec<(UserId, UserId)>> {
    if candidates.len() != established.len() {
        return Err(Error::InvalidArgument(format!(
            "{} outcomes for {} candidates",
            established.len(),
            candidates.len()
        )));
    }
    let utilities: Vec<f64> = candidates
        .iter()
        .zip(established)
        .map(|(r, &e)| utility(r.v, r.c, e))
        .collect();
    let pairs: Vec<_> = candidates.iter().map(|r| r.pair).collect();
    Ok(top_k_indices(&pairs, &utilities, k)
        .into_iter()
        .map(|i| pairs[i])
        .collect())
}

/// `|recommended ∩ truth| / k`.
pub fn precision_at_k(
    recommended: &[(UserId, UserId)],
    truth: &[(UserId, UserId)],
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let truth: HashSet<_> = truth.iter().collect();
    let rec: HashSet<_> = recommended.iter().collect();
    let hits = rec.iter().filter(|p| truth.contains(*p)).count();
    Ok(hits as f64 / k as f64)
}

/// Mean realized utility of the recommended pairs.
pub fn average_utility(
    recommended: &[(UserId, UserId)],
    candidates: &[FeatureRecord],
    established: &[bool],
) -> Result<f64> {
    if recommended.is_empty() {
        return Err(Error::EmptySet(
            "average utility of an empty recommendation".into(),
        ));
    }
    let index: HashMap<_, _> = candidates
        .iter()
        .enumerate()
        .map(|(i, r)| (r.pair, i))
        .collect();
    let mut total = 0.0;
    for p in recommended {
        let &i = index
            .get(p)
            .ok_or_else(|| Error::NotFound(format!("recommended pair {p:?} is not a candidate")))?;
        total += utility(candidates[i].v, candidates[i].c, established[i]);
    }
    Ok(total / recommended.len() as f64)
}

/// Mean and population standard deviation rows for every method, appended after the monthly rows.
pub fn summary_rows(rows: &[MetricsRow]) -> Vec<MetricsRow> {
    let mut order = Vec::new();
    let mut by_method: HashMap<&str, Vec<&MetricsRow>> = HashMap::new();
    for r in rows
        .iter()
        .filter(|r| matches!(r.month, MonthLabel::Month(_)))
    {
        by_method
            .entry(r.method.as_str())
            .or_insert_with(|| {
                order.push(r.method.as_str());
                Vec::new()
            })
            .push(r);
    }
    let mut out = Vec::new();
    for name in order {
        let rs = &by_method[name];
        let n = rs.len() as f64;
        let mean = |f: fn(&MetricsRow) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
        let std = |f: fn(&MetricsRow) -> f64, mu: f64| {
            (rs.iter().map(|r| (f(r) - mu).powi(2)).sum::<f64>() / n).sqrt()
        };
        let mp = mean(|r| r.precision);
        let mu = mean(|r| r.avg_utility);
        out.push(MetricsRow {
            method: name.to_string(),
            month: MonthLabel::Mean,
            precision: mp,
            avg_utility: mu,
        });
        out.push(MetricsRow {
            method: name.to_string(),
            month: MonthLabel::Std,
            precision: std(|r| r.precision, mp),
            avg_utility: std(|r| r.avg_utility, mu),
        });
    }
    out
}

/// Candidate features of every month an experiment needs, shared across sweep cells.
#[derive(Debug, Clone)]
pub struct ExperimentData<'g> {
    graph: &'g TemporalGraph,
    months: (u32, u32),
    features: BTreeMap<u32, CandidateFeatures>,
}

impl<'g> ExperimentData<'g> {
    /// Extracts features for months `first-1 ..= last`.
    pub fn prepare(
        graph: &'g TemporalGraph,
        profiles: &ProfileStore,
        months: (u32, u32),
        value_cfg: &ValueConfig,
        katz_cfg: &KatzConfig,
        threads: usize,
    ) -> Result<Self> {
        let (first, last) = months;
        if first < 2 || last < first {
            return Err(Error::InvalidArgument(format!(
                "current months must satisfy 2 <= first <= last, got {first}..={last}"
            )));
        }
        if last + 1 > graph.last_month() {
            return Err(Error::InvalidArgument(format!(
                "month {} is needed to score month {last} but the data ends at month {}",
                last + 1,
                graph.last_month()
            )));
        }
        let table = EdgeValueTable::build(graph, value_cfg, last, threads)?;
        let mut features = BTreeMap::new();
        for t in first - 1..=last {
            let f = candidate_features(graph, profiles, t, value_cfg, katz_cfg, &table, threads)?;
            features.insert(t, f);
        }
        Ok(Self {
            graph,
            months,
            features,
        })
    }

    pub fn features(&self, month: u32) -> Option<&CandidateFeatures> {
        self.features.get(&month)
    }

    /// Monthly rows (method-major) followed by mean/std summary rows.
    pub fn evaluate(
        &self,
        methods: &[Method],
        rho: f64,
        k_fraction: f64,
        em: &EmConfig,
    ) -> Result<Vec<MetricsRow>> {
        let cost = CostConfig::new(rho)?;
        let label_cfg = LabelingConfig::new(k_fraction)?;
        if methods.is_empty() {
            return Err(Error::InvalidArgument("no methods requested".into()));
        }
        let mut per_method: Vec<Vec<MetricsRow>> = vec![Vec::new(); methods.len()];
        let (first, last) = self.months;
        for t in first..=last {
            let train_feats = &self.features[&(t - 1)];
            let train = label_records(self.graph, train_feats.records(&cost), t, &label_cfg)?;
            let feats = &self.features[&t];
            let cands = feats.records(&cost);
            if cands.is_empty() {
                return Err(Error::EmptySet(format!("no candidates at month {t}")));
            }
            let established = cands
                .iter()
                .map(|r| established_by(self.graph, r.pair, t + 1))
                .collect::<Result<Vec<bool>>>()?;
            let k = top_k_count(k_fraction, cands.len());
            let truth = true_topk(&cands, &established, k)?;
            let pairs: Vec<_> = cands.iter().map(|r| r.pair).collect();
            for (slot, method) in methods.iter().enumerate() {
                let scores = self.scores(*method, &train, feats, &cands, &established, em)?;
                let rec: Vec<_> = top_k_indices(&pairs, &scores, k)
                    .into_iter()
                    .map(|i| pairs[i])
                    .collect();
                per_method[slot].push(MetricsRow {
                    method: method.name().to_string(),
                    month: MonthLabel::Month(t),
                    precision: precision_at_k(&rec, &truth, k)?,
                    avg_utility: average_utility(&rec, &cands, &established)?,
                });
            }
        }
        let mut rows: Vec<MetricsRow> = per_method.into_iter().flatten().collect();
        let summary = summary_rows(&rows);
        rows.extend(summary);
        Ok(rows)
    }

    fn scores(
        &self,
        method: Method,
        train: &[FeatureRecord],
        feats: &CandidateFeatures,
        cands: &[FeatureRecord],
        established: &[bool],
        em: &EmConfig,
    ) -> Result<Vec<f64>> {
        Ok(match method {
            Method::Ours => {
                let fitted = fit(train, em)?;
                rec_probabilities(cands, &fitted.theta)?
            }
            Method::NaiveBayes => {
                let model = nb_fit(train)?;
                cands.iter().map(|r| nb_probability(r, &model)).collect()
            }
            Method::CommonNeighbors => ProximityScorer::CommonNeighbors.scores(feats),
            Method::AdamicAdar => ProximityScorer::AdamicAdar.scores(feats),
            Method::Katz => ProximityScorer::Katz.scores(feats),
            Method::Jaccard => ProximityScorer::Jaccard.scores(feats),
            Method::Oracle => cands
                .iter()
                .zip(established)
                .map(|(r, &e)| utility(r.v, r.c, e))
                .collect(),
        })
    }
}

/// Runs every method over the configured months.
pub fn run_experiment(
    graph: &TemporalGraph,
    profiles: &ProfileStore,
    methods: &[Method],
    cfg: &EvalConfig,
) -> Result<Vec<MetricsRow>> {
    let data = ExperimentData::prepare(
        graph,
        profiles,
        cfg.months,
        &cfg.value,
        &cfg.katz,
        cfg.threads,
    )?;
    data.evaluate(methods, cfg.rho, cfg.k_fraction, &cfg.em)
}

/// Metrics table of one `(ρ, K fraction)` cell.
pub type SweepCell = ((f64, f64), Vec<MetricsRow>);

/// One metrics table per `(ρ, K fraction)` cell, features extracted once.
pub fn run_sweep(
    graph: &TemporalGraph,
    profiles: &ProfileStore,
    methods: &[Method],
    rhos: &[f64],
    k_fractions: &[f64],
    cfg: &EvalConfig,
) -> Result<Vec<SweepCell>> {
    let data = ExperimentData::prepare(
        graph,
        profiles,
        cfg.months,
        &cfg.value,
        &cfg.katz,
        cfg.threads,
    )?;
    let mut out = Vec::new();
    for &rho in rhos {
        for &kf in k_fractions {
            out.push(((rho, kf), data.evaluate(methods, rho, kf, &cfg.em)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(i: i64, v: f64, c: f64) -> FeatureRecord {
        FeatureRecord::floored((i, i + 100), v, c, 1.0, 1.0)
    }

    #[test]
    fn truth_by_utility() {
        let c = vec![cand(1, 3.0, 1.0), cand(2, 2.0, 1.0), cand(3, 5.0, 1.0)];
        let t = true_topk(&c, &[true, true, false], 2).unwrap();
        assert_eq!(t, vec![(1, 101), (2, 102)]);
        let c = vec![cand(1, 1.0, 3.0), cand(2, 1.0, 1.0), cand(3, 1.0, 2.0)];
        let t = true_topk(&c, &[false; 3], 2).unwrap();
        assert_eq!(t, vec![(2, 102), (3, 103)]);
        assert_eq!(true_topk(&c, &[false; 3], 3).unwrap().len(), 3);
    }

    #[test]
    fn precision_examples() {
        let p = |x: &[i64]| x.iter().map(|&i| (i, i + 1)).collect::<Vec<_>>();
        assert!(
            (precision_at_k(&p(&[1, 2, 3]), &p(&[2, 3, 4]), 3).unwrap() - 2.0 / 3.0).abs() < 1e-15
        );
        assert_eq!(precision_at_k(&p(&[1, 2]), &p(&[1, 2]), 2).unwrap(), 1.0);
        assert_eq!(precision_at_k(&p(&[1, 2]), &p(&[5, 6]), 2).unwrap(), 0.0);
    }

    #[test]
    fn average_utility_examples() {
        let c = vec![cand(1, 2.0, 9.0), cand(2, 9.0, 1.0), cand(3, 3.0, 9.0)];
        let est = [true, false, true];
        let recs: Vec<_> = c.iter().map(|r| r.pair).collect();
        assert!((average_utility(&recs, &c, &est).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            average_utility(&[], &c, &est),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn summary_is_population_moments() {
        let rows: Vec<_> = [(2, 0.2, 1.0), (3, 0.4, 3.0)]
            .iter()
            .map(|&(m, p, u)| MetricsRow {
                method: "CN".into(),
                month: MonthLabel::Month(m),
                precision: p,
                avg_utility: u,
            })
            .collect();
        let s = summary_rows(&rows);
        assert_eq!(s.len(), 2);
        assert!((s[0].precision - 0.3).abs() < 1e-15);
        assert!((s[1].precision - 0.1).abs() < 1e-15);
        assert_eq!(s[1].avg_utility, 1.0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::STANDARD {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("svm".parse::<Method>().is_err());
    }
}
