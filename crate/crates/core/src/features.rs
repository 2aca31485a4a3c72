//! Link value, link cost and utility, plus batched feature extraction for
//! every two-hop candidate of a month.
//!
//! A user's network impact is `Σ_{x=1..X} α^x |N_x|`, where `N_x` is the set
//! of users at shortest distance exactly `x`. The value of a potential link is
//! the change in total value when the link is added. Only pairs `(u, v)` whose
//! shortest path can be routed through the new edge change their distance,
//! so the delta is accumulated over those pairs alone:
//!
//! * `u` lies on the `j` side: `d(u,j) ≤ X-1` and `d(u,h) ≥ d(u,j) + 2`,
//! * `v` lies on the `h` side symmetrically,
//! * the new distance is `d(u,j) + 1 + d(h,v)` when that is shorter.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{
    two_hop_pairs, Bfs, GraphSnapshot, HopMatrix, TemporalGraph, UserId, UNREACHED,
};
use crate::parallel;
use crate::proximity::{
    adamic_adar_idx, common_neighbors_idx, jaccard_sorted, KatzConfig, KatzWalker, ProfileStore,
};

/// Lower bound applied to every feature so the exponential densities see strictly positive support.
pub const FEATURE_FLOOR: f64 = 1e-9;

/// Largest dense index space for which all-pairs hop distances are materialized.
const DENSE_HOP_LIMIT: usize = 8192;

const MAX_LOCALITY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueConfig {
    pub alpha: f64,
    pub locality: usize,
    pub default_m: f64,
    pub m: HashMap<UserId, f64>,
    pub intrinsic: HashMap<UserId, f64>,
}

impl Default for ValueConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            locality: 4,
            default_m: 1.0,
            m: HashMap::new(),
            intrinsic: HashMap::new(),
        }
    }
}

impl ValueConfig {
    pub fn new(alpha: f64, locality: usize) -> Result<Self> {
        let cfg = Self {
            alpha,
            locality,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay factor alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.locality < 1 || self.locality > MAX_LOCALITY {
            return Err(Error::InvalidArgument(format!(
                "locality X must lie in [1,{MAX_LOCALITY}], got {}",
                self.locality
            )));
        }
        let bad_m = std::iter::once(&self.default_m)
            .chain(self.m.values())
            .any(|&m| !(m > 0.0 && m.is_finite()));
        if bad_m {
            return Err(Error::InvalidArgument(
                "per-unit impact m must be positive and finite".into(),
            ));
        }
        if self
            .intrinsic
            .values()
            .any(|&v| !(v >= 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidArgument(
                "intrinsic values must be non-negative and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn m_of(&self, user: UserId) -> f64 {
        self.m.get(&user).copied().unwrap_or(self.default_m)
    }

    pub fn intrinsic_of(&self, user: UserId) -> f64 {
        self.intrinsic.get(&user).copied().unwrap_or(0.0)
    }

    /// `m` for every dense index of `graph`.
    pub(crate) fn dense_m(&self, graph: &TemporalGraph) -> Vec<f64> {
        graph.user_ids().iter().map(|&id| self.m_of(id)).collect()
    }

    /// `α^d` for `d = 0..=X`.
    fn decay_table(&self) -> Vec<f64> {
        (0..=self.locality)
            .map(|d| self.alpha.powi(d as i32))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConfig {
    pub rho: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self { rho: 1.0 }
    }
}

impl CostConfig {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cost multiplier rho must be positive, got {rho}"
            )));
        }
        Ok(Self { rho })
    }
}

/// One candidate link's features and optional label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRecord {
    pub pair: (UserId, UserId),
    pub v: f64,
    pub c: f64,
    pub s: f64,
    pub n: f64,
    pub label: Option<bool>,
}

impl FeatureRecord {
    /// Builds a record with every feature floored at [`FEATURE_FLOOR`].
    pub fn floored(pair: (UserId, UserId), v: f64, c: f64, s: f64, n: f64) -> Self {
        Self {
            pair,
            v: v.max(FEATURE_FLOOR),
            c: c.max(FEATURE_FLOOR),
            s: s.max(FEATURE_FLOOR),
            n: n.max(FEATURE_FLOOR),
            label: None,
        }
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let ok = [self.v, self.c, self.s, self.n]
            .iter()
            .all(|x| *x > 0.0 && x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Numeric {
                record: index,
                message: format!(
                    "features must be positive and finite, got V={} C={} S={} N={}",
                    self.v, self.c, self.s, self.n
                ),
            })
        }
    }

    /// Label as 0/1, or an error naming the record when it is missing.
    pub fn label_bit(&self, index: usize) -> Result<usize> {
        self.label.map(usize::from).ok_or_else(|| {
            Error::InvalidArgument(format!("record {index} ({:?}) has no label", self.pair))
        })
    }
}

pub fn network_impact(view: &GraphSnapshot<'_>, user: UserId, cfg: &ValueConfig) -> Result<f64> {
    cfg.validate()?;
    let idx = view.locate(user)?;
    let mut bfs = Bfs::new(view.capacity());
    Ok(impact_from(view, &mut bfs, idx, &cfg.decay_table()))
}

fn impact_from(view: &GraphSnapshot<'_>, bfs: &mut Bfs, idx: usize, decay: &[f64]) -> f64 {
    let x = decay.len() - 1;
    let counts = crate::graph::counts_from(view, bfs, idx, x);
    (1..=x).map(|d| decay[d] * counts.at(d) as f64).sum()
}

pub fn user_value(view: &GraphSnapshot<'_>, user: UserId, cfg: &ValueConfig) -> Result<f64> {
    let impact = network_impact(view, user, cfg)?;
    Ok(cfg.intrinsic_of(user) + cfg.m_of(user) * impact)
}

/// Sum of user values over every user present in `view`, in ascending id order.
pub fn total_value(view: &GraphSnapshot<'_>, cfg: &ValueConfig) -> Result<f64> {
    cfg.validate()?;
    let decay = cfg.decay_table();
    let mut bfs = Bfs::new(view.capacity());
    let graph = view.graph();
    Ok(view
        .present_indices()
        .map(|i| {
            let id = graph.user_id(i);
            cfg.intrinsic_of(id) + cfg.m_of(id) * impact_from(view, &mut bfs, i, &decay)
        })
        .sum())
}

/// Increase in total value when the non-adjacent pair is linked.
pub fn link_value(
    view: &GraphSnapshot<'_>,
    pair: (UserId, UserId),
    cfg: &ValueConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (j, h) = pair;
    if j == h {
        return Err(Error::InvalidArgument(format!("self-link ({j},{h})")));
    }
    let (a, b) = (view.locate(j)?, view.locate(h)?);
    if view.is_adjacent(a, b) {
        return Err(Error::InvalidArgument(format!(
            "pair ({j},{h}) is already linked at month {}",
            view.month()
        )));
    }
    let m = cfg.dense_m(view.graph());
    let mut valuer = LinkValuer::new(view, cfg, &m, HopSource::Bfs(BfsRows::new(view.capacity())));
    Ok(valuer.value(a, b))
}

/// Distances from a user, truncated at the locality.
enum HopSource<'m> {
    Dense(&'m HopMatrix),
    Bfs(BfsRows),
}

struct BfsRows {
    bfs: Bfs,
    row: Vec<u8>,
    touched: Vec<usize>,
}

impl BfsRows {
    fn new(n: usize) -> Self {
        Self {
            bfs: Bfs::new(n),
            row: vec![UNREACHED; n],
            touched: Vec::new(),
        }
    }

    fn fill(&mut self, view: &GraphSnapshot<'_>, u: usize, cap: usize) -> &[u8] {
        for &t in &self.touched {
            self.row[t] = UNREACHED;
        }
        self.touched.clear();
        self.row[u] = 0;
        self.touched.push(u);
        let (row, touched) = (&mut self.row, &mut self.touched);
        self.bfs.run(view, u, cap as u32, |w, d| {
            row[w] = d as u8;
            touched.push(w);
        });
        &self.row
    }
}

/// Evaluates link values against one snapshot, reusing scratch buffers.
struct LinkValuer<'v, 'g, 'm> {
    view: &'v GraphSnapshot<'g>,
    decay: Vec<f64>,
    m: &'m [f64],
    hops: HopSource<'m>,
    j_side: Vec<(usize, usize)>,
    h_side: Vec<(usize, usize)>,
}

impl<'v, 'g, 'm> LinkValuer<'v, 'g, 'm> {
    fn new(
        view: &'v GraphSnapshot<'g>,
        cfg: &ValueConfig,
        m: &'m [f64],
        hops: HopSource<'m>,
    ) -> Self {
        Self {
            view,
            decay: cfg.decay_table(),
            m,
            hops,
            j_side: Vec::new(),
            h_side: Vec::new(),
        }
    }

    fn x(&self) -> usize {
        self.decay.len() - 1
    }

    /// Collects the users whose distances to `a` and `b` place them on `a`'s side.
    fn side(
        view: &GraphSnapshot<'_>,
        row_a: &[u8],
        row_b: &[u8],
        x: usize,
        out: &mut Vec<(usize, usize)>,
    ) {
        out.clear();
        for u in view.present_indices() {
            let da = row_a[u] as usize;
            if da < x && row_b[u] as usize >= da + 2 {
                out.push((u, da));
            }
        }
    }

    fn value(&mut self, a: usize, b: usize) -> f64 {
        let x = self.x();
        let view = self.view;
        let (mut js, mut hs) = (
            std::mem::take(&mut self.j_side),
            std::mem::take(&mut self.h_side),
        );
        match &mut self.hops {
            HopSource::Dense(mat) => {
                Self::side(view, mat.row(a), mat.row(b), x, &mut js);
                Self::side(view, mat.row(b), mat.row(a), x, &mut hs);
            }
            HopSource::Bfs(rows) => {
                let row_a = rows.fill(view, a, x).to_vec();
                let row_b = rows.fill(view, b, x);
                Self::side(view, &row_a, row_b, x, &mut js);
                Self::side(view, row_b, &row_a, x, &mut hs);
            }
        }
        hs.sort_by_key(|&(_, d)| d);

        let mut delta = 0.0;
        for &(u, da) in &js {
            let limit = x - 1 - da;
            let mu = self.m[u];
            let row = match &mut self.hops {
                HopSource::Dense(mat) => mat.row(u),
                HopSource::Bfs(rows) => rows.fill(view, u, x),
            };
            for &(v, db) in hs.iter().take_while(|&&(_, db)| db <= limit) {
                let new_d = da + 1 + db;
                let old_d = row[v] as usize;
                if old_d > new_d {
                    let old_f = if old_d <= x { self.decay[old_d] } else { 0.0 };
                    delta += (mu + self.m[v]) * (self.decay[new_d] - old_f);
                }
            }
        }
        self.j_side = js;
        self.h_side = hs;
        delta
    }
}

fn hop_source_for<'m>(view: &GraphSnapshot<'_>, dense: Option<&'m HopMatrix>) -> HopSource<'m> {
    match dense {
        Some(mat) => HopSource::Dense(mat),
        None => HopSource::Bfs(BfsRows::new(view.capacity())),
    }
}

fn maybe_dense(view: &GraphSnapshot<'_>, x: usize) -> Option<HopMatrix> {
    (view.capacity() <= DENSE_HOP_LIMIT).then(|| HopMatrix::build(view, x as u8))
}

/// Value of every established edge, measured on the network just before it formed:
/// users registered by the edge's month, edges established strictly earlier.
#[derive(Debug, Clone)]
pub struct EdgeValueTable {
    values: Vec<f64>,
    months: Vec<u32>,
    ends: Vec<(usize, usize)>,
}

impl EdgeValueTable {
    /// Values of all edges established in months `1..=up_to`.
    pub fn build(
        graph: &TemporalGraph,
        cfg: &ValueConfig,
        up_to: u32,
        threads: usize,
    ) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.dense_m(graph);
        let x = cfg.locality;
        let mut values = Vec::new();
        let mut months = Vec::new();
        let mut ends = Vec::new();
        let edges = graph.edges();
        let mut start = 0;
        while start < edges.len() && edges[start].month <= up_to {
            let t = edges[start].month;
            let end = start + edges[start..].iter().take_while(|e| e.month == t).count();
            let view = GraphSnapshot::build(graph, t, t, t - 1);
            let dense = maybe_dense(&view, x);
            let batch = &edges[start..end];
            let vals = parallel::map_chunks(batch, threads, |chunk| {
                let mut valuer =
                    LinkValuer::new(&view, cfg, &m, hop_source_for(&view, dense.as_ref()));
                chunk.iter().map(|e| valuer.value(e.a, e.b)).collect()
            });
            values.extend(vals);
            months.extend(batch.iter().map(|e| e.month));
            ends.extend(batch.iter().map(|e| (e.a, e.b)));
            start = end;
        }
        Ok(Self {
            values,
            months,
            ends,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Per-user sums and counts of incident edge values for edges established by `month`.
    fn cost_index(&self, n: usize, month: u32) -> Result<CostIndex> {
        let mut sum = vec![0.0; n];
        let mut count = vec![0usize; n];
        let mut total = 0.0;
        let mut total_n = 0usize;
        for ((&v, &t), &(a, b)) in self.values.iter().zip(&self.months).zip(&self.ends) {
            if t > month {
                break;
            }
            sum[a] += v;
            sum[b] += v;
            count[a] += 1;
            count[b] += 1;
            total += v;
            total_n += 1;
        }
        if total_n == 0 {
            return Err(Error::Config(format!(
                "no established links by month {month}; link cost is undefined"
            )));
        }
        Ok(CostIndex {
            sum,
            count,
            global: total / total_n as f64,
        })
    }
}

struct CostIndex {
    sum: Vec<f64>,
    count: Vec<usize>,
    global: f64,
}

impl CostIndex {
    /// Mean value of links incident to either endpoint, or the global mean when both have none.
    fn base_cost(&self, a: usize, b: usize) -> f64 {
        let n = self.count[a] + self.count[b];
        if n == 0 {
            self.global
        } else {
            (self.sum[a] + self.sum[b]) / n as f64
        }
    }
}

/// Estimated cost of recommending `pair` at `month`: `ρ` times the mean historic
/// value of the links already established by either endpoint.
pub fn link_cost(
    graph: &TemporalGraph,
    pair: (UserId, UserId),
    month: u32,
    cfg: &CostConfig,
    value_cfg: &ValueConfig,
) -> Result<f64> {
    let cfg = CostConfig::new(cfg.rho)?;
    let (a, b) = (graph.index_of(pair.0)?, graph.index_of(pair.1)?);
    if a == b {
        return Err(Error::InvalidArgument(format!("self-link {pair:?}")));
    }
    if graph.edge_month(a, b).is_some_and(|t| t <= month) {
        return Err(Error::InvalidArgument(format!(
            "pair {pair:?} is already linked at month {month}"
        )));
    }
    let table = EdgeValueTable::build(graph, value_cfg, month, 1)?;
    let index = table.cost_index(graph.num_users(), month)?;
    Ok(cfg.rho * index.base_cost(a, b))
}

/// Realized utility of a recommended link.
pub fn utility(v: f64, c: f64, established: bool) -> f64 {
    if established {
        v
    } else {
        -c
    }
}

/// Raw features of every two-hop candidate in one snapshot.
///
/// Cost is stored before the `ρ` multiplier so one extraction serves every `ρ`.
#[derive(Debug, Clone)]
pub struct CandidateFeatures {
    pub month: u32,
    pub pairs: Vec<(UserId, UserId)>,
    pub value: Vec<f64>,
    pub base_cost: Vec<f64>,
    pub katz: Vec<f64>,
    pub jaccard: Vec<f64>,
    pub common_neighbors: Vec<usize>,
    pub adamic_adar: Vec<f64>,
}

impl CandidateFeatures {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Unlabeled, floored records with cost scaled by `ρ`.
    pub fn records(&self, cost: &CostConfig) -> Vec<FeatureRecord> {
        (0..self.len())
            .map(|i| {
                FeatureRecord::floored(
                    self.pairs[i],
                    self.value[i],
                    cost.rho * self.base_cost[i],
                    self.katz[i],
                    self.jaccard[i],
                )
            })
            .collect()
    }
}

/// Extracts value, cost base, Katz, Jaccard, common-neighbor and Adamic/Adar
/// scores for every two-hop candidate of the snapshot at `month`.
pub fn candidate_features(
    graph: &TemporalGraph,
    profiles: &ProfileStore,
    month: u32,
    value_cfg: &ValueConfig,
    katz_cfg: &KatzConfig,
    edge_values: &EdgeValueTable,
    threads: usize,
) -> Result<CandidateFeatures> {
    value_cfg.validate()?;
    KatzConfig::new(katz_cfg.beta, katz_cfg.k_max)?;
    let view = crate::graph::snapshot(graph, month)?;
    let pairs = two_hop_pairs(&view);
    let ids = graph.user_ids();
    let mut out = CandidateFeatures {
        month,
        pairs: pairs.iter().map(|&(a, b)| (ids[a], ids[b])).collect(),
        value: Vec::with_capacity(pairs.len()),
        base_cost: Vec::with_capacity(pairs.len()),
        katz: Vec::with_capacity(pairs.len()),
        jaccard: Vec::with_capacity(pairs.len()),
        common_neighbors: Vec::with_capacity(pairs.len()),
        adamic_adar: Vec::with_capacity(pairs.len()),
    };
    if pairs.is_empty() {
        return Ok(out);
    }
    let cost_index = edge_values.cost_index(graph.num_users(), month)?;

    let mut term_sets: Vec<&[u32]> = vec![&[]; graph.num_users()];
    for i in view.present_indices() {
        term_sets[i] = profiles.get(ids[i])?;
    }

    let x = value_cfg.locality;
    let m = value_cfg.dense_m(graph);
    let dense = maybe_dense(&view, x);
    let rows = parallel::map_chunks(&pairs, threads, |chunk| {
        let mut valuer =
            LinkValuer::new(&view, value_cfg, &m, hop_source_for(&view, dense.as_ref()));
        let mut walker = KatzWalker::new(view.capacity());
        let mut source = usize::MAX;
        chunk
            .iter()
            .map(|&(a, b)| {
                if a != source {
                    walker.run(&view, a, katz_cfg);
                    source = a;
                }
                (
                    valuer.value(a, b),
                    cost_index.base_cost(a, b),
                    walker.score(b),
                    jaccard_sorted(term_sets[a], term_sets[b]),
                    common_neighbors_idx(&view, a, b),
                    adamic_adar_idx(&view, a, b),
                )
            })
            .collect()
    });

    for (v, c, s, n, cn, aa) in rows {
        out.value.push(v);
        out.base_cost.push(c);
        out.katz.push(s);
        out.jaccard.push(n);
        out.common_neighbors.push(cn);
        out.adamic_adar.push(aa);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::snapshot;

    fn path() -> TemporalGraph {
        TemporalGraph::new(vec![(1, 1), (2, 1), (3, 1)], vec![(1, 2, 1), (2, 3, 1)]).unwrap()
    }

    #[test]
    fn impacts_and_values_on_path() {
        let g = path();
        let s = snapshot(&g, 1).unwrap();
        let cfg = ValueConfig::new(0.5, 2).unwrap();
        assert_eq!(network_impact(&s, 2, &cfg).unwrap(), 1.0);
        assert_eq!(network_impact(&s, 1, &cfg).unwrap(), 0.75);
        assert_eq!(total_value(&s, &cfg).unwrap(), 2.5);
        assert_eq!(link_value(&s, (1, 3), &cfg).unwrap(), 0.5);
        assert_eq!(link_value(&s, (3, 1), &cfg).unwrap(), 0.5);
        assert!(matches!(
            link_value(&s, (1, 2), &cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn user_value_uses_overrides() {
        let g = TemporalGraph::new(
            vec![(1, 1), (2, 1), (3, 1), (4, 1)],
            vec![(1, 2, 1), (2, 3, 1)],
        )
        .unwrap();
        let s = snapshot(&g, 1).unwrap();
        let mut cfg = ValueConfig::new(0.5, 2).unwrap();
        cfg.intrinsic.insert(1, 2.0);
        cfg.m.insert(2, 0.5);
        cfg.intrinsic.insert(4, 3.0);
        assert_eq!(user_value(&s, 1, &cfg).unwrap(), 2.75);
        assert_eq!(user_value(&s, 2, &cfg).unwrap(), 0.5);
        assert_eq!(user_value(&s, 4, &cfg).unwrap(), 3.0);
        assert_eq!(network_impact(&s, 4, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn isolated_pair_value() {
        let g = TemporalGraph::new(vec![(1, 1), (2, 1)], vec![]).unwrap();
        let s = snapshot(&g, 1).unwrap();
        let cfg = ValueConfig::new(0.5, 4).unwrap();
        assert_eq!(link_value(&s, (1, 2), &cfg).unwrap(), 1.0);
        let empty = TemporalGraph::new(vec![], vec![]).unwrap();
        assert_eq!(
            total_value(&snapshot(&empty, 1).unwrap(), &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn utility_cases() {
        assert_eq!(utility(2.0, 1.0, true), 2.0);
        assert_eq!(utility(2.0, 1.0, false), -1.0);
        assert_eq!(utility(0.0, 0.0, true), 0.0);
        assert_eq!(utility(0.0, 0.0, false), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(ValueConfig::new(0.0, 2).is_err());
        assert!(ValueConfig::new(0.5, 0).is_err());
        assert!(CostConfig::new(0.0).is_err());
        assert!(CostConfig::new(0.5).is_ok());
    }

    #[test]
    fn cost_is_union_mean_times_rho() {
        // Edge values measured before establishment on this graph:
        // (1,2) month 1 on an empty graph: 1.0 ; (3,4) month 1: 1.0 ;
        // (2,3) month 2 joins two dimers.
        let g = TemporalGraph::new(
            vec![(1, 1), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1)],
            vec![(1, 2, 1), (3, 4, 1), (2, 3, 2)],
        )
        .unwrap();
        let cfg = ValueConfig::new(0.5, 4).unwrap();
        let view = GraphSnapshot::build(&g, 2, 2, 1);
        let v23 = link_value(&view, (2, 3), &cfg).unwrap();
        let base = link_cost(&g, (1, 3), 2, &CostConfig::new(1.0).unwrap(), &cfg).unwrap();
        // 1 has {(1,2)}, 3 has {(3,4),(2,3)}
        assert!((base - (1.0 + 1.0 + v23) / 3.0).abs() < 1e-12);
        let half = link_cost(&g, (1, 3), 2, &CostConfig::new(0.5).unwrap(), &cfg).unwrap();
        assert!((half - base / 2.0).abs() < 1e-12);
        let global = link_cost(&g, (5, 6), 2, &CostConfig::default(), &cfg).unwrap();
        assert!((global - (2.0 + v23) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cost_without_links_is_config_error() {
        let g = TemporalGraph::new(vec![(1, 1), (2, 1)], vec![]).unwrap();
        let r = link_cost(
            &g,
            (1, 2),
            1,
            &CostConfig::default(),
            &ValueConfig::default(),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn dense_and_bfs_rows_agree() {
        let g = TemporalGraph::new(
            (1..=7).map(|i| (i, 1)).collect(),
            vec![
                (1, 2, 1),
                (2, 3, 1),
                (3, 4, 1),
                (4, 5, 1),
                (2, 6, 1),
                (6, 7, 1),
            ],
        )
        .unwrap();
        let s = snapshot(&g, 1).unwrap();
        let cfg = ValueConfig::new(0.5, 3).unwrap();
        let m = cfg.dense_m(&g);
        let mat = HopMatrix::build(&s, 3);
        let mut dense = LinkValuer::new(&s, &cfg, &m, HopSource::Dense(&mat));
        let mut sparse = LinkValuer::new(&s, &cfg, &m, HopSource::Bfs(BfsRows::new(7)));
        for (a, b) in two_hop_pairs(&s) {
            assert_eq!(dense.value(a, b), sparse.value(a, b));
        }
    }
}
