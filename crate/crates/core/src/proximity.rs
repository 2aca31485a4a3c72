//! Structural and nodal proximity: Katz index, Jaccard coefficient, common
//! neighbors and Adamic/Adar.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{GraphSnapshot, UserId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatzConfig {
    pub beta: f64,
    pub k_max: usize,
}

impl KatzConfig {
    pub fn new(beta: f64, k_max: usize) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "katz beta must lie in (0,1), got {beta}"
            )));
        }
        if k_max < 2 {
            return Err(Error::InvalidArgument(format!(
                "katz k_max must be >= 2, got {k_max}"
            )));
        }
        Ok(Self { beta, k_max })
    }
}

impl Default for KatzConfig {
    fn default() -> Self {
        Self {
            beta: 0.05,
            k_max: 4,
        }
    }
}

/// Per-user sets of encoded profile terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProfileStore {
    terms: HashMap<UserId, Vec<u32>>,
}

impl ProfileStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores the term set of `user`, sorted and deduplicated. Replaces any previous set.
    pub fn insert(&mut self, user: UserId, terms: impl IntoIterator<Item = u32>) {
        let mut t: Vec<u32> = terms.into_iter().collect();
        t.sort_unstable();
        t.dedup();
        self.terms.insert(user, t);
    }

    pub fn get(&self, user: UserId) -> Result<&[u32]> {
        self.terms
            .get(&user)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::NotFound(format!("profile of user {user}")))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Users in ascending id order.
    pub fn users(&self) -> Vec<UserId> {
        let mut u: Vec<UserId> = self.terms.keys().copied().collect();
        u.sort_unstable();
        u
    }
}

/// Jaccard coefficient of two sorted, deduplicated slices; `0` when both are empty.
pub fn jaccard_sorted(a: &[u32], b: &[u32]) -> f64 {
    let inter = sorted_intersection_len(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn sorted_intersection_len<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut k, mut n) = (0, 0, 0);
    while i < a.len() && k < b.len() {
        match a[i].cmp(&b[k]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                k += 1;
            }
        }
    }
    n
}

pub fn jaccard(profiles: &ProfileStore, j: UserId, h: UserId) -> Result<f64> {
    Ok(jaccard_sorted(profiles.get(j)?, profiles.get(h)?))
}

fn locate_pair(view: &GraphSnapshot<'_>, j: UserId, h: UserId) -> Result<(usize, usize)> {
    if j == h {
        return Err(Error::InvalidArgument(format!(
            "proximity of user {j} with itself"
        )));
    }
    Ok((view.locate(j)?, view.locate(h)?))
}

pub fn common_neighbors(view: &GraphSnapshot<'_>, j: UserId, h: UserId) -> Result<usize> {
    let (a, b) = locate_pair(view, j, h)?;
    Ok(common_neighbors_idx(view, a, b))
}

pub(crate) fn common_neighbors_idx(view: &GraphSnapshot<'_>, a: usize, b: usize) -> usize {
    sorted_intersection_len(view.neighbors(a), view.neighbors(b))
}

pub fn adamic_adar(view: &GraphSnapshot<'_>, j: UserId, h: UserId) -> Result<f64> {
    let (a, b) = locate_pair(view, j, h)?;
    Ok(adamic_adar_idx(view, a, b))
}

/// Sum of `1 / ln(deg z)` over common neighbors `z`, taken in ascending index order.
pub(crate) fn adamic_adar_idx(view: &GraphSnapshot<'_>, a: usize, b: usize) -> f64 {
    let (na, nb) = (view.neighbors(a), view.neighbors(b));
    let (mut i, mut k, mut s) = (0, 0, 0.0);
    while i < na.len() && k < nb.len() {
        match na[i].cmp(&nb[k]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                s += 1.0 / (view.degree(na[i]) as f64).ln();
                i += 1;
                k += 1;
            }
        }
    }
    s
}

pub fn katz(view: &GraphSnapshot<'_>, j: UserId, h: UserId, cfg: &KatzConfig) -> Result<f64> {
    let (a, b) = locate_pair(view, j, h)?;
    let mut walker = KatzWalker::new(view.capacity());
    walker.run(view, a, cfg);
    Ok(walker.score(b))
}

/// Truncated Katz scores from one source to every reachable target, computed
/// by repeated sparse application of the adjacency to the source indicator.
#[derive(Debug, Clone)]
pub(crate) struct KatzWalker {
    cur: Vec<f64>,
    next: Vec<f64>,
    score: Vec<f64>,
    cur_nodes: Vec<usize>,
    next_nodes: Vec<usize>,
    scored: Vec<usize>,
}

impl KatzWalker {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            cur: vec![0.0; n],
            next: vec![0.0; n],
            score: vec![0.0; n],
            cur_nodes: Vec::new(),
            next_nodes: Vec::new(),
            scored: Vec::new(),
        }
    }

    pub(crate) fn run(&mut self, view: &GraphSnapshot<'_>, src: usize, cfg: &KatzConfig) {
        for &v in &self.scored {
            self.score[v] = 0.0;
        }
        self.scored.clear();
        for &v in &self.cur_nodes {
            self.cur[v] = 0.0;
        }
        self.cur_nodes.clear();

        self.cur[src] = 1.0;
        self.cur_nodes.push(src);
        for k in 1..=cfg.k_max {
            let weight = cfg.beta.powi(k as i32);
            for &u in &self.cur_nodes {
                let c = self.cur[u];
                for &w in view.neighbors(u) {
                    if self.next[w] == 0.0 {
                        self.next_nodes.push(w);
                    }
                    self.next[w] += c;
                }
            }
            for &u in &self.cur_nodes {
                self.cur[u] = 0.0;
            }
            for &w in &self.next_nodes {
                if self.score[w] == 0.0 {
                    self.scored.push(w);
                }
                self.score[w] += weight * self.next[w];
            }
            std::mem::swap(&mut self.cur, &mut self.next);
            std::mem::swap(&mut self.cur_nodes, &mut self.next_nodes);
            self.next_nodes.clear();
        }
    }

    pub(crate) fn score(&self, target: usize) -> f64 {
        self.score[target]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{snapshot, TemporalGraph};

    fn path() -> TemporalGraph {
        TemporalGraph::new(
            vec![(1, 1), (2, 1), (3, 1), (4, 1)],
            vec![(1, 2, 1), (2, 3, 1)],
        )
        .unwrap()
    }

    #[test]
    fn katz_on_path() {
        let g = path();
        let s = snapshot(&g, 1).unwrap();
        let cfg = KatzConfig::default();
        let k = katz(&s, 1, 3, &cfg).unwrap();
        assert!((k - 0.0025125).abs() < 1e-15);
        assert_eq!(katz(&s, 1, 4, &cfg).unwrap(), 0.0);
        assert_eq!(k, katz(&s, 3, 1, &cfg).unwrap());
    }

    #[test]
    fn katz_config_validation() {
        assert!(KatzConfig::new(0.0, 4).is_err());
        assert!(KatzConfig::new(1.0, 4).is_err());
        assert!(KatzConfig::new(0.5, 1).is_err());
        assert!(KatzConfig::new(0.5, 2).is_ok());
    }

    #[test]
    fn jaccard_cases() {
        let mut p = ProfileStore::new();
        p.insert(1, [1, 2]);
        p.insert(2, [2, 3]);
        p.insert(3, [2, 1]);
        p.insert(4, [7]);
        p.insert(5, []);
        p.insert(6, []);
        assert!((jaccard(&p, 1, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard(&p, 1, 3).unwrap(), 1.0);
        assert_eq!(jaccard(&p, 1, 4).unwrap(), 0.0);
        assert_eq!(jaccard(&p, 5, 6).unwrap(), 0.0);
        assert!(matches!(jaccard(&p, 1, 99), Err(Error::NotFound(_))));
    }

    #[test]
    fn common_neighbors_and_adamic_adar() {
        let g = path();
        let s = snapshot(&g, 1).unwrap();
        assert_eq!(common_neighbors(&s, 1, 3).unwrap(), 1);
        assert_eq!(common_neighbors(&s, 1, 4).unwrap(), 0);
        assert!((adamic_adar(&s, 1, 3).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert_eq!(adamic_adar(&s, 1, 4).unwrap(), 0.0);

        let k = TemporalGraph::new(
            vec![(1, 1), (2, 1), (10, 1), (11, 1), (12, 1)],
            vec![
                (1, 10, 1),
                (1, 11, 1),
                (1, 12, 1),
                (2, 10, 1),
                (2, 11, 1),
                (2, 12, 1),
            ],
        )
        .unwrap();
        assert_eq!(
            common_neighbors(&snapshot(&k, 1).unwrap(), 1, 2).unwrap(),
            3
        );
    }
}
