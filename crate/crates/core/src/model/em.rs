//! Closed-form EM for the latent-factor network.
//!
//! The E-step weighs each record's four latent pieces by their posterior
//! probability and records the conditional mean of `L` inside each piece.
//! The M-step then maximizes the expected complete-data log-likelihood one
//! coordinate at a time; every coordinate has a closed-form maximizer because
//! the objective is a sum of `ln λ` and linear terms in each rate.
//!
//! `λ'_L` is special: its stationary point exists only while its weighted
//! denominator is positive. Otherwise the objective keeps increasing in
//! `λ'_L` and the previous value is retained, which still never decreases
//! the objective.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureRecord;
use crate::model::density::ClassLogs;
use crate::model::theta::{ClassParams, Theta};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub init_fraction: f64,
    pub seed: u64,
    pub init_retries: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iter: 500,
            restarts: 3,
            init_fraction: 1.0 / 3.0,
            seed: 0,
            init_retries: 100,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !(self.init_fraction > 0.0 && self.init_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "init sample fraction must lie in (0,1], got {}",
                self.init_fraction
            )));
        }
        Ok(())
    }
}

/// E-step quantities of one record under its own class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordGammas {
    /// `1` when `S > N`.
    pub i: u8,
    pub big_y: f64,
    pub small_y: f64,
    /// Conditional means of `L` per piece (`0` for absent pieces).
    pub gamma: [f64; 4],
    /// Posterior piece probabilities.
    pub weight: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EStepCache {
    /// Parameters the cache was computed under.
    pub theta: Theta,
    pub rows: Vec<RecordGammas>,
    /// Log-likelihood of the records under `theta`.
    pub loglik: f64,
}

fn labels(records: &[FeatureRecord]) -> Result<Vec<usize>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.validate(i)?;
            r.label_bit(i)
        })
        .collect()
}

/// Moment estimates on a random subsample that contains both classes.
pub fn init_theta<R: Rng + ?Sized>(
    records: &[FeatureRecord],
    cfg: &EmConfig,
    rng: &mut R,
) -> Result<Theta> {
    cfg.validate()?;
    let r = labels(records)?;
    if records.is_empty() {
        return Err(Error::Initialization("no training records".into()));
    }
    let m = ((cfg.init_fraction * records.len() as f64).round() as usize).clamp(1, records.len());
    for _ in 0..cfg.init_retries.max(1) {
        let idx = sample(rng, records.len(), m).into_vec();
        let mut idx = idx;
        idx.sort_unstable();
        if let Some(theta) = moment_estimates(records, &r, &idx) {
            return Ok(theta);
        }
    }
    Err(Error::Initialization(format!(
        "no sample of {m} records contained both classes after {} draws",
        cfg.init_retries.max(1)
    )))
}

/// Moment estimates on the records at `idx`; `None` when a class is missing.
pub(crate) fn moment_estimates(
    records: &[FeatureRecord],
    r: &[usize],
    idx: &[usize],
) -> Option<Theta> {
    let mut count = [0.0f64; 2];
    let mut sv = [0.0f64; 2];
    let mut sc = [0.0f64; 2];
    let mut ss = [0.0f64; 2];
    let mut sn = [0.0f64; 2];
    for &i in idx {
        let (k, rec) = (r[i], &records[i]);
        count[k] += 1.0;
        sv[k] += rec.v;
        sc[k] += rec.c;
        ss[k] += rec.s;
        sn[k] += rec.n;
    }
    if count[0] == 0.0 || count[1] == 0.0 {
        return None;
    }
    let class = |k: usize| {
        let lam_s = count[k] / ss[k];
        let lam_n = count[k] / sn[k];
        let lam_l = 2.0 * count[k] / (ss[k] + sn[k]);
        ClassParams {
            lam_v: count[k] / sv[k],
            lam_c: count[k] / sc[k],
            lam_s,
            lam_sp: lam_s,
            lam_n,
            lam_np: lam_n,
            lam_l,
            lam_lp: lam_l,
        }
    };
    let p1 = count[1] / (count[0] + count[1]);
    Some(Theta {
        p: [1.0 - p1, p1],
        class: [class(0), class(1)],
    })
}

fn numeric_at(record: usize, what: &str, value: f64) -> Error {
    Error::Numeric {
        record,
        message: format!("{what} is not finite ({value})"),
    }
}

/// Computes the per-record piece weights and conditional means under `theta`,
/// together with the log-likelihood.
pub fn estep(records: &[FeatureRecord], theta: &Theta) -> Result<EStepCache> {
    theta.validate()?;
    let r = labels(records)?;
    let logs = [ClassLogs::new(theta, 0), ClassLogs::new(theta, 1)];
    let mut rows = Vec::with_capacity(records.len());
    let mut total = 0.0;
    for (i, rec) in records.iter().enumerate() {
        let cl = &logs[r[i]];
        let terms = cl.terms(rec.s, rec.n);
        let ll = cl.ln_prior_vc - cl.cp.lam_v * rec.v - cl.cp.lam_c * rec.c + terms.ln_mass;
        if !ll.is_finite() {
            return Err(numeric_at(i, "record log-likelihood", ll));
        }
        if terms
            .gammas
            .iter()
            .chain(&terms.weights)
            .any(|x| !x.is_finite())
        {
            return Err(numeric_at(i, "E-step moment", f64::NAN));
        }
        total += ll;
        rows.push(RecordGammas {
            i: u8::from(rec.s > rec.n),
            big_y: rec.s.max(rec.n),
            small_y: rec.s.min(rec.n),
            gamma: terms.gammas,
            weight: terms.weights,
        });
    }
    Ok(EStepCache {
        theta: *theta,
        rows,
        loglik: total,
    })
}

/// Weighted sufficient statistics of one class.
#[derive(Debug, Default, Clone, Copy)]
struct ClassStats {
    count: f64,
    v: f64,
    c: f64,
    s_num: f64,
    s_den: f64,
    sp_num: f64,
    sp_den: f64,
    n_num: f64,
    n_den: f64,
    np_num: f64,
    np_den: f64,
    l_num: f64,
    l_den: f64,
    lp_num: f64,
    lp_den: f64,
}

impl ClassStats {
    fn add(&mut self, rec: &FeatureRecord, g: &RecordGammas) {
        let [w1, w2, w3, w4] = g.weight;
        let [g1, g2, g3, g4] = g.gamma;
        let (s, n) = (rec.s, rec.n);
        self.count += 1.0;
        self.v += rec.v;
        self.c += rec.c;
        self.s_num += w1 + w4;
        self.s_den += (w1 + w4) * s + w2 * g2 + w3 * g3;
        self.sp_num += w2 + w3;
        self.sp_den += (w2 + w3) * s - w2 * g2 - w3 * g3;
        self.n_num += w1 + w3;
        self.n_den += (w1 + w3) * n + w2 * g2 + w4 * g4;
        self.np_num += w2 + w4;
        self.np_den += (w2 + w4) * n - w2 * g2 - w4 * g4;
        self.l_num += w2 + w3 + w4;
        self.l_den += w1 * (s + n) + w2 * g2 + w3 * (g3 + n) + w4 * (g4 + s);
        self.lp_num += w1;
        self.lp_den += w1 * (g1 - s - n) - w3 * n - w4 * s;
    }
}

/// `num / den` when both are positive and the ratio is finite, else `prev`.
fn ratio_or(num: f64, den: f64, prev: f64) -> f64 {
    let q = num / den;
    if num > 0.0 && den > 0.0 && q.is_finite() && q > 0.0 {
        q
    } else {
        prev
    }
}

/// Maximizes the expected complete-data log-likelihood given the E-step cache.
pub fn mstep(records: &[FeatureRecord], cache: &EStepCache) -> Result<Theta> {
    if cache.rows.len() != records.len() {
        return Err(Error::InvalidArgument(format!(
            "E-step cache has {} rows for {} records",
            cache.rows.len(),
            records.len()
        )));
    }
    let r = labels(records)?;
    let mut stats = [ClassStats::default(); 2];
    for ((rec, g), &k) in records.iter().zip(&cache.rows).zip(&r) {
        stats[k].add(rec, g);
    }
    for (k, st) in stats.iter().enumerate() {
        if st.count == 0.0 {
            return Err(Error::DegenerateClass {
                class: k as u8,
                message: "no training records of this class".into(),
            });
        }
    }
    let m = records.len() as f64;
    let prev = &cache.theta;
    let class = |k: usize| -> Result<ClassParams> {
        let st = &stats[k];
        let old = &prev.class[k];
        let exact = |num: f64, den: f64, name: &str| -> Result<f64> {
            let q = num / den;
            if den > 0.0 && q.is_finite() && q > 0.0 {
                Ok(q)
            } else {
                Err(Error::DegenerateClass {
                    class: k as u8,
                    message: format!("{name} has a zero feature sum"),
                })
            }
        };
        Ok(ClassParams {
            lam_v: exact(st.count, st.v, "V")?,
            lam_c: exact(st.count, st.c, "C")?,
            lam_s: ratio_or(st.s_num, st.s_den, old.lam_s),
            lam_sp: ratio_or(st.sp_num, st.sp_den, old.lam_sp),
            lam_n: ratio_or(st.n_num, st.n_den, old.lam_n),
            lam_np: ratio_or(st.np_num, st.np_den, old.lam_np),
            lam_l: ratio_or(st.l_num, st.l_den, old.lam_l),
            lam_lp: ratio_or(st.lp_num, st.lp_den, old.lam_lp),
        })
    };
    let p1 = stats[1].count / m;
    let theta = Theta {
        p: [stats[0].count / m, p1],
        class: [class(0)?, class(1)?],
    };
    Ok(theta)
}

/// `Σ_i ln P(V_i, C_i, S_i, N_i, R_i | θ)` with `L` integrated out.
pub fn loglik(records: &[FeatureRecord], theta: &Theta) -> Result<f64> {
    theta.validate()?;
    let r = labels(records)?;
    let logs = [ClassLogs::new(theta, 0), ClassLogs::new(theta, 1)];
    let mut total = 0.0;
    for (i, rec) in records.iter().enumerate() {
        let ll = logs[r[i]].ln_int(rec.v, rec.c, rec.s, rec.n);
        if !ll.is_finite() {
            return Err(numeric_at(i, "record log-likelihood", ll));
        }
        total += ll;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: Theta,
    /// Log-likelihood after initialization and after every iteration of the selected run.
    pub trace: Vec<f64>,
    /// Traces of every restart that completed, by restart index.
    pub traces: Vec<Option<Vec<f64>>>,
    pub best_restart: usize,
    pub converged: bool,
}

/// Random stream of one restart, independent of the others.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

struct Run {
    theta: Theta,
    trace: Vec<f64>,
    converged: bool,
}

fn run_once(records: &[FeatureRecord], cfg: &EmConfig, restart: usize) -> Result<Run> {
    let mut rng = restart_rng(cfg.seed, restart);
    let mut theta = init_theta(records, cfg, &mut rng)?;
    let mut cache = estep(records, &theta)?;
    let mut trace = vec![cache.loglik];
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let next = mstep(records, &cache)?;
        let next_cache = estep(records, &next)?;
        let delta = next_cache.loglik - cache.loglik;
        trace.push(next_cache.loglik);
        theta = next;
        cache = next_cache;
        if delta.abs() <= cfg.epsilon {
            converged = true;
            break;
        }
    }
    Ok(Run {
        theta,
        trace,
        converged,
    })
}

/// Runs EM from `restarts` random initializations and keeps the run with the
/// largest final log-likelihood (earliest restart on ties).
pub fn fit(records: &[FeatureRecord], cfg: &EmConfig) -> Result<FitResult> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::Learning("no training records".into()));
    }
    let r = labels(records)?;
    for k in 0..2 {
        if !r.contains(&k) {
            return Err(Error::DegenerateClass {
                class: k as u8,
                message: "training data contains no records of this class".into(),
            });
        }
    }
    let mut best: Option<(usize, Run)> = None;
    let mut traces = Vec::with_capacity(cfg.restarts);
    let mut failures = Vec::new();
    for restart in 0..cfg.restarts {
        match run_once(records, cfg, restart) {
            Ok(run) => {
                traces.push(Some(run.trace.clone()));
                let last = *run.trace.last().expect("trace is never empty");
                let better = best
                    .as_ref()
                    .is_none_or(|(_, b)| last > *b.trace.last().expect("trace is never empty"));
                if better {
                    best = Some((restart, run));
                }
            }
            Err(e) => {
                traces.push(None);
                failures.push(format!("restart {restart}: {e}"));
            }
        }
    }
    match best {
        Some((best_restart, run)) => Ok(FitResult {
            theta: run.theta,
            trace: run.trace,
            traces,
            best_restart,
            converged: run.converged,
        }),
        None => Err(Error::Learning(format!(
            "all restarts failed: {}",
            failures.join("; ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(v: f64, c: f64, s: f64, n: f64, label: bool) -> FeatureRecord {
        FeatureRecord {
            pair: (0, 1),
            v,
            c,
            s,
            n,
            label: Some(label),
        }
    }

    fn toy() -> Vec<FeatureRecord> {
        let mut out = Vec::new();
        for i in 0..10 {
            let x = 1.0 + i as f64 * 0.37;
            let positive = i < 3;
            let v = if positive { [2.0, 4.0, 3.0][i] } else { x };
            out.push(rec(v, 0.5 + x / 3.0, x * 0.8, 2.0 / x, positive));
        }
        out
    }

    #[test]
    fn moments_on_full_sample() {
        let data = toy();
        let r = labels(&data).unwrap();
        let all: Vec<usize> = (0..data.len()).collect();
        let t = moment_estimates(&data, &r, &all).unwrap();
        assert!((t.p[1] - 0.3).abs() < 1e-15);
        assert!((t.class[1].lam_v - 3.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn latent_rate_averages_means() {
        let data = vec![
            rec(1.0, 1.0, 2.0, 4.0, true),
            rec(1.0, 1.0, 1.0, 1.0, false),
        ];
        let t = moment_estimates(&data, &[1, 0], &[0, 1]).unwrap();
        assert!((1.0 / t.class[1].lam_l - 3.0).abs() < 1e-15);
        assert_eq!(t.class[1].lam_l, t.class[1].lam_lp);
        assert_eq!(t.class[1].lam_s, t.class[1].lam_sp);
    }

    #[test]
    fn mstep_priors_and_rates() {
        let data = toy();
        let r = labels(&data).unwrap();
        let all: Vec<usize> = (0..data.len()).collect();
        let t0 = moment_estimates(&data, &r, &all).unwrap();
        let cache = estep(&data, &t0).unwrap();
        let t1 = mstep(&data, &cache).unwrap();
        assert!((t1.p[1] - 0.3).abs() < 1e-15);
        assert!((t1.class[1].lam_v - 1.0 / 3.0).abs() < 1e-15);
        t1.validate().unwrap();
    }

    #[test]
    fn duplicating_records_doubles_loglik() {
        let data = toy();
        let r = labels(&data).unwrap();
        let all: Vec<usize> = (0..data.len()).collect();
        let t = moment_estimates(&data, &r, &all).unwrap();
        let h = loglik(&data, &t).unwrap();
        let twice: Vec<_> = data.iter().chain(&data).copied().collect();
        assert!((loglik(&twice, &t).unwrap() - 2.0 * h).abs() < 1e-9 * h.abs());
    }

    #[test]
    fn fit_is_deterministic_and_ascends() {
        let data = toy();
        let cfg = EmConfig {
            max_iter: 50,
            ..EmConfig::default()
        };
        let a = fit(&data, &cfg).unwrap();
        let b = fit(&data, &cfg).unwrap();
        assert_eq!(a, b);
        for w in a.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn huge_epsilon_stops_after_one_iteration() {
        let cfg = EmConfig {
            epsilon: 1e300,
            ..EmConfig::default()
        };
        let res = fit(&toy(), &cfg).unwrap();
        assert_eq!(res.trace.len(), 2);
        assert!(res.converged);
    }

    #[test]
    fn single_class_is_rejected() {
        let data: Vec<_> = toy()
            .into_iter()
            .map(|mut r| {
                r.label = Some(true);
                r
            })
            .collect();
        assert!(matches!(
            fit(&data, &EmConfig::default()),
            Err(Error::DegenerateClass { class: 0, .. })
        ));
        let mut rng = restart_rng(1, 0);
        assert!(matches!(
            init_theta(&data, &EmConfig::default(), &mut rng),
            Err(Error::Initialization(_))
        ));
    }
}
