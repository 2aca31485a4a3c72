//! Samplers for the Freund bivariate exponential and for labeled records
//! drawn from the learner's own joint density.
//!
//! Records are drawn by rejection. The target over `(S, N, L)` is
//! `g = P(S,L|R) P(N,L|R) / P(L|R)`, restricted to a box whose sides are 40
//! times the largest mean of each coordinate.
//!
//! `ln g` is linear on each of the six orderings of `S`, `N` and `L`. On an
//! ordering `0 < x1 < x2 < x3` the increments `x1, x2-x1, x3-x2` are then
//! independent exponentials whenever the tail sums of the coefficients are
//! negative, so the untruncated target can be drawn exactly and the box only
//! rejects the rare draw outside it.
//!
//! When some ordering is not integrable the proposal falls back to a product
//! of truncated exponentials on the box. `ln g - ln q` is linear inside each
//! region, so its maximum over the box is attained at a vertex whose
//! coordinates lie in `{0, cap_S, cap_N, cap_L}`.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::features::FeatureRecord;
use crate::model::density::PieceRates;
use crate::model::{ClassParams, Theta};

/// Proposals allowed per accepted record before giving up.
const MAX_TRIES: u64 = 2_000_000;
/// Box sides in units of the coordinate's largest mean.
const BOX_MEANS: f64 = 40.0;

fn exp_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    Exp::new(rate).expect("rate validated positive").sample(rng)
}

/// One draw `(x, y)` from a Freund bivariate exponential.
///
/// The first event happens at rate `lx + ly`; with probability `lx/(lx+ly)`
/// it is `x`, after which `y` continues at rate `lyp`, and symmetrically.
pub fn sample_freund<R: Rng + ?Sized>(
    lx: f64,
    ly: f64,
    lxp: f64,
    lyp: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    for (name, r) in [("lx", lx), ("ly", ly), ("lxp", lxp), ("lyp", lyp)] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Freund rate {name} must be positive, got {r}"
            )));
        }
    }
    let first = exp_draw(lx + ly, rng);
    if rng.random::<f64>() * (lx + ly) < lx {
        Ok((first, first + exp_draw(lyp, rng)))
    } else {
        Ok((first + exp_draw(lxp, rng), first))
    }
}

/// Linear form `k + cs·S + cn·N + cl·L` of `ln g` inside one region.
#[derive(Debug, Clone, Copy)]
struct Linear {
    k: f64,
    cs: f64,
    cn: f64,
    cl: f64,
}

impl Linear {
    fn at(&self, s: f64, n: f64, l: f64) -> f64 {
        self.k + self.cs * s + self.cn * n + self.cl * l
    }
}

/// Region of `(S, N, L)` by the position of `L`: above both, below both,
/// between `N` and `S`, between `S` and `N`.
fn region(s: f64, n: f64, l: f64) -> usize {
    if l >= s && l >= n {
        0
    } else if l <= s && l <= n {
        1
    } else if l < s {
        2
    } else {
        3
    }
}

fn in_region(r: usize, s: f64, n: f64, l: f64) -> bool {
    match r {
        0 => l >= s && l >= n,
        1 => l <= s && l <= n,
        2 => n <= l && l <= s,
        _ => s <= l && l <= n,
    }
}

fn log_forms(cp: &ClassParams) -> [Linear; 4] {
    let k = PieceRates::new(cp);
    let ln = f64::ln;
    [
        Linear {
            k: ln(cp.lam_s) + ln(cp.lam_n) + ln(cp.lam_lp),
            cs: -k.a,
            cn: -k.b,
            cl: -cp.lam_lp,
        },
        Linear {
            k: ln(cp.lam_l) + ln(cp.lam_sp) + ln(cp.lam_np),
            cs: -cp.lam_sp,
            cn: -cp.lam_np,
            cl: -k.c2,
        },
        Linear {
            k: ln(cp.lam_l) + ln(cp.lam_sp) + ln(cp.lam_n),
            cs: -cp.lam_sp,
            cn: -k.b,
            cl: -k.c3,
        },
        Linear {
            k: ln(cp.lam_l) + ln(cp.lam_np) + ln(cp.lam_s),
            cs: -k.a,
            cn: -cp.lam_np,
            cl: -k.c4,
        },
    ]
}

/// Truncated exponential on `[0, cap]` with the given rate (uniform at rate 0).
#[derive(Debug, Clone, Copy)]
struct TruncExp {
    rate: f64,
    cap: f64,
    /// `1 - e^{-rate·cap}`.
    mass: f64,
}

impl TruncExp {
    fn new(rate: f64, cap: f64) -> Self {
        Self {
            rate,
            cap,
            mass: -(-rate * cap).exp_m1(),
        }
    }

    fn ln_norm(&self) -> f64 {
        if self.rate == 0.0 {
            self.cap.ln()
        } else {
            self.mass.ln() - self.rate.ln()
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if self.rate == 0.0 {
            u * self.cap
        } else {
            (-(-u * self.mass).ln_1p() / self.rate).min(self.cap)
        }
    }
}

/// Box sides for `(S, N, L)`.
fn box_caps(cp: &ClassParams) -> [f64; 3] {
    [
        BOX_MEANS * (1.0 / cp.lam_s).max(1.0 / cp.lam_sp),
        BOX_MEANS * (1.0 / cp.lam_n).max(1.0 / cp.lam_np),
        BOX_MEANS * (1.0 / cp.lam_l).max(1.0 / cp.lam_lp),
    ]
}

/// One ordering of `(S, N, L)` (indices 0, 1, 2) with its increment rates.
#[derive(Debug, Clone, Copy)]
struct Chain {
    order: [usize; 3],
    rates: [f64; 3],
}

/// Exact sampler of the untruncated target as a mixture over orderings.
#[derive(Debug, Clone)]
struct ChainSampler {
    chains: Vec<Chain>,
    /// Cumulative ordering probabilities.
    cumulative: Vec<f64>,
    caps: [f64; 3],
}

impl ChainSampler {
    /// `None` when some ordering carries infinite mass.
    fn new(cp: &ClassParams) -> Option<Self> {
        let forms = log_forms(cp);
        let orders = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut chains = Vec::with_capacity(6);
        let mut ln_masses = Vec::with_capacity(6);
        for order in orders {
            let r = match order {
                [_, _, 2] => 0,
                [2, _, _] => 1,
                [1, 2, 0] => 2,
                _ => 3,
            };
            let f = forms[r];
            let c = order.map(|v| [f.cs, f.cn, f.cl][v]);
            let rates = [-(c[0] + c[1] + c[2]), -(c[1] + c[2]), -c[2]];
            if rates.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return None;
            }
            ln_masses.push(f.k - rates.iter().map(|x| x.ln()).sum::<f64>());
            chains.push(Chain { order, rates });
        }
        let top = ln_masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = ln_masses.iter().map(|m| (m - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Some(Self {
            chains,
            cumulative,
            caps: box_caps(cp),
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        for _ in 0..MAX_TRIES {
            let u: f64 = rng.random();
            let i = self
                .cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(self.chains.len() - 1);
            let chain = &self.chains[i];
            let mut x = [0.0; 3];
            let mut at = 0.0;
            for (&v, &rate) in chain.order.iter().zip(&chain.rates) {
                at += exp_draw(rate, rng);
                x[v] = at;
            }
            if x.iter()
                .zip(&self.caps)
                .all(|(v, cap)| *v > 0.0 && v <= cap)
            {
                return Ok((x[0], x[1]));
            }
        }
        Err(sampler_error())
    }
}

fn sampler_error() -> Error {
    Error::Sampler(format!(
        "no proposal accepted in {MAX_TRIES} tries; the envelope is too loose for these rates, widen it or rescale the parameters"
    ))
}

/// Rejection sampler for one class.
#[derive(Debug, Clone)]
enum ClassSampler {
    Exact(ChainSampler),
    Envelope(EnvelopeSampler),
}

impl ClassSampler {
    fn new(cp: &ClassParams) -> Self {
        match ChainSampler::new(cp) {
            Some(c) => Self::Exact(c),
            None => Self::Envelope(EnvelopeSampler::new(cp)),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        match self {
            Self::Exact(c) => c.draw(rng),
            Self::Envelope(e) => e.draw(rng),
        }
    }
}

/// Product-of-exponentials envelope on the box.
#[derive(Debug, Clone)]
struct EnvelopeSampler {
    forms: [Linear; 4],
    proposal: [TruncExp; 3],
    ln_m: f64,
}

impl EnvelopeSampler {
    fn new(cp: &ClassParams) -> Self {
        let caps = box_caps(cp);
        let forms = log_forms(cp);
        let mut values = [0.0, caps[0], caps[1], caps[2]].to_vec();
        values.sort_by(f64::total_cmp);
        values.dedup();

        // Feasible vertices of the box split by regions, with the region forms that apply.
        let mut vertices = Vec::new();
        for &s in values.iter().filter(|&&v| v <= caps[0]) {
            for &n in values.iter().filter(|&&v| v <= caps[1]) {
                for &l in values.iter().filter(|&&v| v <= caps[2]) {
                    for (r, f) in forms.iter().enumerate() {
                        if in_region(r, s, n, l) {
                            vertices.push(([s, n, l], f.at(s, n, l)));
                        }
                    }
                }
            }
        }

        // Per-coordinate decay rates: the slowest decay of g along that axis.
        let slowest = |c: [f64; 4]| c.iter().map(|x| -x).fold(f64::INFINITY, f64::min).max(0.0);
        let base = [
            slowest(forms.map(|f| f.cs)),
            slowest(forms.map(|f| f.cn)),
            slowest(forms.map(|f| f.cl)),
        ];
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
        let mut best: Option<(f64, [TruncExp; 3], f64)> = None;
        for &gs in &grid {
            for &gn in &grid {
                for &gl in &grid {
                    let rates = [gs * base[0], gn * base[1], gl * base[2]];
                    let prop = [0, 1, 2].map(|i| TruncExp::new(rates[i], caps[i]));
                    let ln_m = vertices
                        .iter()
                        .map(|(x, v)| v + rates[0] * x[0] + rates[1] * x[1] + rates[2] * x[2])
                        .fold(f64::NEG_INFINITY, f64::max);
                    let cost = ln_m + prop.iter().map(TruncExp::ln_norm).sum::<f64>();
                    if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
                        best = Some((cost, prop, ln_m));
                    }
                }
            }
        }
        let (_, proposal, ln_m) = best.expect("grid is non-empty");
        Self {
            forms,
            proposal,
            ln_m,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        for _ in 0..MAX_TRIES {
            let s = self.proposal[0].draw(rng);
            let n = self.proposal[1].draw(rng);
            let l = self.proposal[2].draw(rng);
            if s <= 0.0 || n <= 0.0 || l <= 0.0 {
                continue;
            }
            let ln_g = self.forms[region(s, n, l)].at(s, n, l);
            let ln_q = -(self.proposal[0].rate * s
                + self.proposal[1].rate * n
                + self.proposal[2].rate * l);
            let u: f64 = rng.random();
            if u.ln() < ln_g - ln_q - self.ln_m {
                return Ok((s, n));
            }
        }
        Err(sampler_error())
    }
}

/// Draws labeled records from a fixed parameter vector.
#[derive(Debug, Clone)]
pub struct RecordSampler {
    theta: Theta,
    classes: [ClassSampler; 2],
}

impl RecordSampler {
    pub fn new(theta: &Theta) -> Result<Self> {
        theta.validate()?;
        Ok(Self {
            theta: *theta,
            classes: [
                ClassSampler::new(&theta.class[0]),
                ClassSampler::new(&theta.class[1]),
            ],
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FeatureRecord> {
        let r = usize::from(rng.random::<f64>() < self.theta.p[1]);
        let cp = &self.theta.class[r];
        let v = exp_draw(cp.lam_v, rng);
        let c = exp_draw(cp.lam_c, rng);
        let (s, n) = self.classes[r].draw(rng)?;
        Ok(FeatureRecord {
            pair: (0, 0),
            v,
            c,
            s,
            n,
            label: Some(r == 1),
        })
    }

    /// `count` records with pairs numbered `(i, i)` for traceability.
    pub fn sample_many<R: Rng + ?Sized>(
        &self,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<FeatureRecord>> {
        (0..count)
            .map(|i| {
                let mut r = self.sample(rng)?;
                r.pair = (i as i64, i as i64);
                Ok(r)
            })
            .collect()
    }
}

/// One labeled record drawn from the joint density under `theta`.
pub fn sample_record<R: Rng + ?Sized>(theta: &Theta, rng: &mut R) -> Result<FeatureRecord> {
    RecordSampler::new(theta)?.sample(rng)
}
