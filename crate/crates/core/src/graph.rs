//! Temporal undirected graph, monthly snapshots, truncated BFS and two-hop
//! candidate enumeration.
//!
//! External user ids are arbitrary integers. Internally users get dense
//! indices assigned in ascending id order, so iterating indices is the same
//! as iterating ids and every downstream ordering is reproducible.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type UserId = i64;

/// An undirected edge between dense indices `a < b`, established in `month`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub month: u32,
}

#[derive(Debug, Clone)]
pub struct TemporalGraph {
    ids: Vec<UserId>,
    index: HashMap<UserId, usize>,
    reg_month: Vec<u32>,
    edges: Vec<Edge>,
    edge_month: HashMap<(usize, usize), u32>,
}

impl TemporalGraph {
    /// Builds and validates a graph from `(user, reg_month)` and `(u, v, est_month)` lists.
    pub fn new(users: Vec<(UserId, u32)>, edges: Vec<(UserId, UserId, u32)>) -> Result<Self> {
        let mut users = users;
        users.sort_unstable();
        let mut ids = Vec::with_capacity(users.len());
        let mut reg_month = Vec::with_capacity(users.len());
        let mut index = HashMap::with_capacity(users.len());
        for (id, month) in users {
            if month < 1 {
                return Err(Error::InvalidArgument(format!(
                    "user {id} has registration month {month} (must be >= 1)"
                )));
            }
            if index.insert(id, ids.len()).is_some() {
                return Err(Error::Integrity(format!("user {id} registered twice")));
            }
            ids.push(id);
            reg_month.push(month);
        }

        let mut out = Vec::with_capacity(edges.len());
        let mut edge_month = HashMap::with_capacity(edges.len());
        for (u, v, month) in edges {
            if u == v {
                return Err(Error::Integrity(format!("self-loop on user {u}")));
            }
            if month < 1 {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u},{v}) has month {month} (must be >= 1)"
                )));
            }
            let iu = *index.get(&u).ok_or_else(|| {
                Error::Integrity(format!("edge ({u},{v}) references unknown user {u}"))
            })?;
            let iv = *index.get(&v).ok_or_else(|| {
                Error::Integrity(format!("edge ({u},{v}) references unknown user {v}"))
            })?;
            if month < reg_month[iu] || month < reg_month[iv] {
                return Err(Error::Integrity(format!(
                    "edge ({u},{v}) established in month {month} before an endpoint registered"
                )));
            }
            let (a, b) = if iu < iv { (iu, iv) } else { (iv, iu) };
            if edge_month.insert((a, b), month).is_some() {
                return Err(Error::Integrity(format!("duplicate edge ({u},{v})")));
            }
            out.push(Edge { a, b, month });
        }
        out.sort_unstable_by_key(|e| (e.month, e.a, e.b));

        Ok(Self {
            ids,
            index,
            reg_month,
            edges: out,
            edge_month,
        })
    }

    pub fn num_users(&self) -> usize {
        self.ids.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn user_id(&self, idx: usize) -> UserId {
        self.ids[idx]
    }

    pub fn user_ids(&self) -> &[UserId] {
        &self.ids
    }

    pub fn reg_month(&self, idx: usize) -> u32 {
        self.reg_month[idx]
    }

    pub fn index_of(&self, id: UserId) -> Result<usize> {
        self.index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::NotFound(format!("user {id}")))
    }

    /// Month in which the edge between two dense indices was established, if ever.
    pub fn edge_month(&self, a: usize, b: usize) -> Option<u32> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_month.get(&key).copied()
    }

    /// Last month mentioned by any user or edge.
    pub fn last_month(&self) -> u32 {
        let users = self.reg_month.iter().copied().max().unwrap_or(0);
        let edges = self.edges.last().map_or(0, |e| e.month);
        users.max(edges)
    }

    /// Users as `(id, reg_month)` in ascending id order.
    pub fn users(&self) -> impl Iterator<Item = (UserId, u32)> + '_ {
        self.ids.iter().copied().zip(self.reg_month.iter().copied())
    }
}

/// Immutable view of the graph as of a month.
#[derive(Debug, Clone)]
pub struct GraphSnapshot<'g> {
    graph: &'g TemporalGraph,
    month: u32,
    present: Vec<bool>,
    adj: Vec<Vec<usize>>,
    num_edges: usize,
}

/// Snapshot with users registered by `month` and edges established by `month`.
pub fn snapshot(graph: &TemporalGraph, month: u32) -> Result<GraphSnapshot<'_>> {
    if month < 1 {
        return Err(Error::InvalidArgument(format!(
            "snapshot month must be >= 1, got {month}"
        )));
    }
    Ok(GraphSnapshot::build(graph, month, month, month))
}

impl<'g> GraphSnapshot<'g> {
    /// Users registered by `users_by`, edges established by `edges_by`.
    ///
    /// `edges_by <= users_by` always yields a consistent view because an edge is
    /// never older than its endpoints.
    pub(crate) fn build(
        graph: &'g TemporalGraph,
        month: u32,
        users_by: u32,
        edges_by: u32,
    ) -> Self {
        let n = graph.num_users();
        let present: Vec<bool> = graph.reg_month.iter().map(|&m| m <= users_by).collect();
        let mut adj = vec![Vec::new(); n];
        let mut num_edges = 0;
        for e in graph.edges.iter().take_while(|e| e.month <= edges_by) {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
            num_edges += 1;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Self {
            graph,
            month,
            present,
            adj,
            num_edges,
        }
    }

    pub fn graph(&self) -> &'g TemporalGraph {
        self.graph
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    /// Size of the dense index space (including users not yet registered).
    pub fn capacity(&self) -> usize {
        self.adj.len()
    }

    pub fn num_present(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn is_present(&self, idx: usize) -> bool {
        self.present[idx]
    }

    pub fn present_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i))
    }

    /// Dense index of a user present in this snapshot.
    pub fn locate(&self, id: UserId) -> Result<usize> {
        let idx = self.graph.index_of(id)?;
        if !self.present[idx] {
            return Err(Error::NotFound(format!(
                "user {id} not registered by month {}",
                self.month
            )));
        }
        Ok(idx)
    }

    pub fn neighbors(&self, idx: usize) -> &[usize] {
        &self.adj[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.adj[idx].len()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        let (small, other) = if self.adj[a].len() <= self.adj[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.adj[small].binary_search(&other).is_ok()
    }

    /// Edges as `(id, id, month)` with the smaller id first, sorted.
    pub fn edge_list(&self) -> Vec<(UserId, UserId, u32)> {
        self.graph
            .edges
            .iter()
            .take(self.num_edges)
            .map(|e| (self.graph.ids[e.a], self.graph.ids[e.b], e.month))
            .collect()
    }
}

/// Per-distance neighbor counts `|N_{j,x}|` for `x = 1..=X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodCounts {
    counts: Vec<usize>,
}

impl NeighborhoodCounts {
    /// Count at distance `x` (1-based). Zero beyond the truncation depth.
    pub fn at(&self, x: usize) -> usize {
        if x == 0 {
            return 0;
        }
        self.counts.get(x - 1).copied().unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Reusable scratch space for depth-limited BFS.
#[derive(Debug, Clone)]
pub struct Bfs {
    depth: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<usize>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Self {
            depth: vec![0; n],
            stamp: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    /// Runs BFS from `src` up to `max_depth` hops and calls `visit(node, depth)`
    /// for every node reached at depth `1..=max_depth` in BFS order.
    pub fn run(
        &mut self,
        view: &GraphSnapshot<'_>,
        src: usize,
        max_depth: u32,
        mut visit: impl FnMut(usize, u32),
    ) {
        if self.depth.len() < view.capacity() {
            *self = Bfs::new(view.capacity());
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.queue.clear();
        self.queue.push(src);
        self.stamp[src] = epoch;
        self.depth[src] = 0;
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            let d = self.depth[u];
            if d == max_depth {
                continue;
            }
            for &w in &view.adj[u] {
                if self.stamp[w] != epoch {
                    self.stamp[w] = epoch;
                    self.depth[w] = d + 1;
                    self.queue.push(w);
                    visit(w, d + 1);
                }
            }
        }
    }
}

/// Number of users at each exact shortest-path distance `1..=x` from `user`.
pub fn neighborhood_counts(
    view: &GraphSnapshot<'_>,
    user: UserId,
    x: usize,
) -> Result<NeighborhoodCounts> {
    if x < 1 {
        return Err(Error::InvalidArgument("locality X must be >= 1".into()));
    }
    let idx = view.locate(user)?;
    let mut bfs = Bfs::new(view.capacity());
    Ok(counts_from(view, &mut bfs, idx, x))
}

pub(crate) fn counts_from(
    view: &GraphSnapshot<'_>,
    bfs: &mut Bfs,
    idx: usize,
    x: usize,
) -> NeighborhoodCounts {
    let mut counts = vec![0usize; x];
    bfs.run(view, idx, x as u32, |_, d| counts[d as usize - 1] += 1);
    NeighborhoodCounts { counts }
}

/// Dense-index pairs `(j, h)`, `j < h`, at shortest distance exactly two,
/// sorted lexicographically.
pub(crate) fn two_hop_pairs(view: &GraphSnapshot<'_>) -> Vec<(usize, usize)> {
    let n = view.capacity();
    let mut mark = vec![usize::MAX; n];
    let mut found = Vec::new();
    let mut out = Vec::new();
    for j in view.present_indices() {
        mark[j] = j;
        for &z in view.neighbors(j) {
            mark[z] = j;
        }
        found.clear();
        for &z in view.neighbors(j) {
            for &w in view.neighbors(z) {
                if w > j && mark[w] != j {
                    mark[w] = j;
                    found.push(w);
                }
            }
        }
        found.sort_unstable();
        out.extend(found.iter().map(|&w| (j, w)));
    }
    out
}

/// All unordered user pairs at shortest distance exactly two, `j < h`, in
/// lexicographic order.
pub fn two_hop_candidates(view: &GraphSnapshot<'_>) -> Vec<(UserId, UserId)> {
    let ids = view.graph().user_ids();
    two_hop_pairs(view)
        .into_iter()
        .map(|(a, b)| (ids[a], ids[b]))
        .collect()
}

/// Marker for distances beyond the truncation depth.
pub const UNREACHED: u8 = u8::MAX;

/// Truncated hop distances between all pairs of present users, stored densely.
///
/// Entry `(u, v)` holds the shortest distance when it is at most `cap`, and
/// [`UNREACHED`] otherwise.
#[derive(Debug, Clone)]
pub struct HopMatrix {
    n: usize,
    cap: u8,
    data: Vec<u8>,
}

impl HopMatrix {
    pub fn build(view: &GraphSnapshot<'_>, cap: u8) -> Self {
        assert!(cap < UNREACHED, "distance cap must be below {UNREACHED}");
        let n = view.capacity();
        let mut data = vec![UNREACHED; n * n];
        let mut bfs = Bfs::new(n);
        for u in view.present_indices() {
            let row = &mut data[u * n..(u + 1) * n];
            row[u] = 0;
            bfs.run(view, u, cap as u32, |w, d| row[w] = d as u8);
        }
        Self { n, cap, data }
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn row(&self, u: usize) -> &[u8] {
        &self.data[u * self.n..(u + 1) * self.n]
    }
}
