//! Synthetic temporal social networks with preferential attachment and homophily.
//!
//! Each user belongs to a hidden topic and draws most profile terms from that
//! topic's block of the vocabulary, so same-topic users share terms. Every
//! month new users arrive and attach to existing users with probability
//! proportional to `(deg + 1)^γ · (1 + h·J)`, where `J` is the Jaccard
//! coefficient of the two profiles. Existing users then close triangles: a
//! wedge `u - z - w` is proposed by drawing the center `z` with weight
//! `d(d-1)` and its two ends with weight `(deg + 1)^γ`, so pairs with more
//! common neighbors and higher degrees are proposed more often; `u, w` are
//! linked with probability `(1 + h·J) / (1 + h)`.
//!
//! Every profile also carries `shared_terms` background terms common to all
//! users, which keeps every Jaccard coefficient strictly positive.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{TemporalGraph, UserId};
use crate::proximity::{jaccard_sorted, ProfileStore};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// New users per month, starting at month 1.
    pub users_per_month: Vec<usize>,
    /// Exponent `γ` on `deg + 1` in the attachment weight.
    pub attachment_exponent: f64,
    /// Homophily weight `h ≥ 0`.
    pub homophily: f64,
    pub vocabulary: u32,
    pub topics: u32,
    pub terms_per_user: usize,
    /// Probability that a term is drawn from the user's own topic block.
    pub topic_affinity: f64,
    /// Background terms carried by every user, numbered after the vocabulary.
    pub shared_terms: u32,
    /// Links each arriving user makes to earlier users.
    pub links_per_arrival: usize,
    /// Triangle-closing links per month, as a fraction of the users present.
    pub closure_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            users_per_month: geometric_schedule(5000, 12, 1.1),
            attachment_exponent: 0.8,
            homophily: 4.0,
            vocabulary: 400,
            topics: 20,
            terms_per_user: 6,
            topic_affinity: 0.8,
            shared_terms: 1,
            links_per_arrival: 2,
            closure_rate: 0.15,
        }
    }
}

/// Monthly arrivals growing by `growth` per month and summing to `total`.
pub fn geometric_schedule(total: usize, months: usize, growth: f64) -> Vec<usize> {
    if months == 0 {
        return Vec::new();
    }
    let weights: Vec<f64> = (0..months).map(|i| growth.powi(i as i32)).collect();
    let sum: f64 = weights.iter().sum();
    let mut out: Vec<usize> = weights
        .iter()
        .map(|w| ((w / sum) * total as f64).floor() as usize)
        .collect();
    let short = total - out.iter().sum::<usize>();
    if let Some(last) = out.last_mut() {
        *last += short;
    }
    out
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("synthetic network: {m}")));
        if self.users_per_month.is_empty() {
            return bad("schedule has no months");
        }
        if self.users_per_month[0] < 2 {
            return bad("the first month needs at least two users");
        }
        if self.attachment_exponent.is_nan() || self.attachment_exponent <= 0.0 {
            return bad("attachment exponent must be positive");
        }
        if self.homophily.is_nan() || self.homophily < 0.0 {
            return bad("homophily weight must be non-negative");
        }
        if self.vocabulary == 0 || self.topics == 0 || self.topics > self.vocabulary {
            return bad("vocabulary and topics must be positive with topics <= vocabulary");
        }
        if self.terms_per_user == 0 || self.terms_per_user > self.vocabulary as usize {
            return bad("terms per user must lie in [1, vocabulary]");
        }
        if !(0.0..=1.0).contains(&self.topic_affinity) {
            return bad("topic affinity must lie in [0,1]");
        }
        if self.links_per_arrival == 0 {
            return bad("arriving users must make at least one link");
        }
        if self.closure_rate.is_nan() || self.closure_rate < 0.0 {
            return bad("closure rate must be non-negative");
        }
        Ok(())
    }
}

struct Builder {
    adj: Vec<Vec<usize>>,
    edge_set: HashSet<(usize, usize)>,
    edges: Vec<(UserId, UserId, u32)>,
    terms: Vec<Vec<u32>>,
}

impl Builder {
    fn link(&mut self, a: usize, b: usize, month: u32) -> bool {
        let key = (a.min(b), a.max(b));
        if a == b || !self.edge_set.insert(key) {
            return false;
        }
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.edges.push((key.0 as UserId, key.1 as UserId, month));
        true
    }

    fn similarity(&self, a: usize, b: usize) -> f64 {
        jaccard_sorted(&self.terms[a], &self.terms[b])
    }
}

fn draw_terms<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> Vec<u32> {
    let block = cfg.vocabulary / cfg.topics;
    let topic = rng.random_range(0..cfg.topics);
    let mut terms = Vec::with_capacity(cfg.terms_per_user);
    while terms.len() < cfg.terms_per_user {
        let t = if rng.random::<f64>() < cfg.topic_affinity && block > 0 {
            topic * block + rng.random_range(0..block)
        } else {
            rng.random_range(0..cfg.vocabulary)
        };
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    terms.extend(cfg.vocabulary..cfg.vocabulary + cfg.shared_terms);
    terms.sort_unstable();
    terms
}

/// Generates a network and profiles; user ids are `0..total` in arrival order.
pub fn gen_network<R: Rng + ?Sized>(
    cfg: &SynthConfig,
    rng: &mut R,
) -> Result<(TemporalGraph, ProfileStore)> {
    cfg.validate()?;
    let total: usize = cfg.users_per_month.iter().sum();
    let mut b = Builder {
        adj: vec![Vec::new(); total],
        edge_set: HashSet::new(),
        edges: Vec::new(),
        terms: Vec::with_capacity(total),
    };
    let mut users = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);

    for (mi, &arrivals) in cfg.users_per_month.iter().enumerate() {
        let month = mi as u32 + 1;
        let existing = users.len();

        for _ in 0..arrivals {
            let u = users.len();
            users.push((u as UserId, month));
            b.terms.push(draw_terms(cfg, rng));
            if u == 0 {
                continue;
            }
            weights.clear();
            weights.extend((0..u).map(|w| {
                ((b.adj[w].len() + 1) as f64).powf(cfg.attachment_exponent)
                    * (1.0 + cfg.homophily * b.similarity(u, w))
            }));
            let wanted = cfg.links_per_arrival.min(u);
            let mut dist =
                WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let mut made = 0;
            while made < wanted {
                let w = dist.sample(rng);
                if b.link(u, w, month) {
                    made += 1;
                    if made < wanted {
                        dist.update_weights(&[(w, &0.0)])
                            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                    }
                }
            }
        }

        if existing < 3 {
            continue;
        }
        let wedge = |d: usize| (d * d.saturating_sub(1)) as f64;
        let centers: Vec<f64> = (0..existing).map(|z| wedge(b.adj[z].len())).collect();
        let Ok(mut dist) = WeightedIndex::new(&centers) else {
            continue;
        };
        let target = (cfg.closure_rate * existing as f64).round() as usize;
        let mut made = 0;
        let mut attempts = 0;
        while made < target && attempts < 50 * target.max(1) {
            attempts += 1;
            let z = dist.sample(rng);
            let ends: Vec<f64> = b.adj[z]
                .iter()
                .map(|&x| ((b.adj[x].len() + 1) as f64).powf(cfg.attachment_exponent))
                .collect();
            let Ok(mut pick) = WeightedIndex::new(&ends) else {
                continue;
            };
            let i = pick.sample(rng);
            pick.update_weights(&[(i, &0.0)])
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let k = pick.sample(rng);
            let (u, w) = (b.adj[z][i], b.adj[z][k]);
            if u >= existing || w >= existing || b.edge_set.contains(&(u.min(w), u.max(w))) {
                continue;
            }
            let accept = (1.0 + cfg.homophily * b.similarity(u, w)) / (1.0 + cfg.homophily);
            if rng.random::<f64>() < accept && b.link(u, w, month) {
                made += 1;
                let mut touched = [u, w];
                touched.sort_unstable();
                let new_weights = touched.map(|x| wedge(b.adj[x].len()));
                dist.update_weights(&[
                    (touched[0], &new_weights[0]),
                    (touched[1], &new_weights[1]),
                ])
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            }
        }
    }

    let mut profiles = ProfileStore::new();
    for (u, t) in b.terms.into_iter().enumerate() {
        profiles.insert(u as UserId, t);
    }
    Ok((TemporalGraph::new(users, b.edges)?, profiles))
}
