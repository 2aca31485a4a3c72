//! Quadrature cross-checks of the closed-form model quantities.
//!
//! Everything here integrates the raw pointwise joint density
//! `P(S,L) P(N,L) / P(L)` numerically and never touches the closed forms,
//! so agreement is meaningful evidence that the closed forms are right.

use rand::Rng;

use crate::error::{Error, Result};
use crate::features::FeatureRecord;
use crate::inference::rec_probability;
use crate::model::density::{ln_joint_sn_l, posterior_density, RecordTerms};
use crate::model::{ClassParams, Theta};

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]`.
///
/// Bisects the worst interval until the summed error estimate drops below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(
            "integration limits must be finite".into(),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..5000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if !total.is_finite() {
            return Err(Error::Numeric {
                record: 0,
                message: "quadrature produced a non-finite value".into(),
            });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .expect("at least one part");
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
    Ok(parts.iter().map(|p| p.2 .0).sum())
}

/// Interval of each latent piece; the first is truncated `40/λ'_L` past its start.
fn piece_bounds(s: f64, n: f64, cp: &ClassParams) -> [(f64, f64); 4] {
    let (big, small) = (s.max(n), s.min(n));
    [
        (big, big + 40.0 / cp.lam_lp),
        (0.0, small),
        if s > n { (n, s) } else { (n, n) },
        if n > s { (s, n) } else { (s, s) },
    ]
}

/// Per-piece integrals `∫ exp(ln joint - shift) dL` and `∫ L·exp(ln joint - shift) dL`.
fn piece_integrals(s: f64, n: f64, cp: &ClassParams, shift: f64) -> Result<[(f64, f64); 4]> {
    let f = |l: f64| (ln_joint_sn_l(s, n, l, cp) - shift).exp();
    let mut out = [(0.0, 0.0); 4];
    for (k, (a, b)) in piece_bounds(s, n, cp).into_iter().enumerate() {
        out[k] = (
            integrate(f, a, b, 0.0, 1e-13)?,
            integrate(|l| l * f(l), a, b, 0.0, 1e-13)?,
        );
    }
    Ok(out)
}

/// Agreement between closed forms and quadrature on one case.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CaseReport {
    /// `|∫ posterior - 1|`.
    pub normalization_error: f64,
    /// Largest relative error among the present `Γ` pieces.
    pub gamma_rel_error: f64,
    /// Largest relative error among the present `H` pieces.
    pub h_rel_error: f64,
    /// Absolute error of the recommendation probability.
    pub probability_error: f64,
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Compares closed forms against quadrature for one record under `theta`.
pub fn check_case(record: &FeatureRecord, theta: &Theta) -> Result<CaseReport> {
    let (s, n) = (record.s, record.n);
    let mut report = CaseReport::default();
    let mut ln_int = [0.0; 2];
    for (r, cp) in theta.class.iter().enumerate() {
        let terms = RecordTerms::new(s, n, theta, r);
        let shift = terms.ln_mass;
        let ints = piece_integrals(s, n, cp, shift)?;
        for (k, &(mass, first)) in ints.iter().enumerate() {
            if terms.ln_pieces[k] == f64::NEG_INFINITY {
                continue;
            }
            let h_closed = (terms.ln_pieces[k] - shift).exp();
            report.h_rel_error = report.h_rel_error.max(rel(h_closed, mass));
            report.gamma_rel_error = report
                .gamma_rel_error
                .max(rel(terms.gammas[k], first / mass));
        }
        let quad_mass: f64 = ints.iter().map(|p| p.0).sum();
        ln_int[r] = theta.p[r].ln() + cp.lam_v.ln() + cp.lam_c.ln()
            - cp.lam_v * record.v
            - cp.lam_c * record.c
            + shift
            + quad_mass.ln();

        let post = posterior_density(s, n, r == 1, theta, 0)?;
        let mut total = 0.0;
        for (a, b) in piece_bounds(s, n, cp) {
            total += integrate(|l| post.eval(l), a, b, 0.0, 1e-13)?;
        }
        report.normalization_error = report.normalization_error.max((total - 1.0).abs());
    }
    let quad_p = 1.0 / (1.0 + (ln_int[0] - ln_int[1]).exp());
    report.probability_error = (rec_probability(record, theta)? - quad_p).abs();
    Ok(report)
}

/// A random well-conditioned parameter vector: rates log-uniform in `[0.2, 5]`.
pub fn random_theta<R: Rng + ?Sized>(rng: &mut R) -> Theta {
    let mut rate = || (rng.random_range(0.2f64.ln()..5f64.ln())).exp();
    let mut class = || {
        let mut r = [0.0; 8];
        for x in &mut r {
            *x = rate();
        }
        ClassParams::from_rates(r)
    };
    let c0 = class();
    let c1 = class();
    let p1 = rng.random_range(0.05..0.95);
    Theta {
        p: [1.0 - p1, p1],
        class: [c0, c1],
    }
}

/// A random record with features log-uniform in `[0.05, 5]`; one in ten has `S = N`.
pub fn random_record<R: Rng + ?Sized>(rng: &mut R) -> FeatureRecord {
    let mut feat = || (rng.random_range(0.05f64.ln()..5f64.ln())).exp();
    let v = feat();
    let c = feat();
    let s = feat();
    let mut n = feat();
    if rng.random::<f64>() < 0.1 {
        n = s;
    }
    let label = rng.random::<bool>();
    let mut rec = FeatureRecord::floored((0, 1), v, c, s, n);
    rec.label = Some(label);
    rec
}

/// Worst-case errors over `cases` random `(record, θ)` pairs.
pub fn run_checks<R: Rng + ?Sized>(cases: usize, rng: &mut R) -> Result<CaseReport> {
    let mut worst = CaseReport::default();
    for _ in 0..cases {
        let theta = random_theta(rng);
        let rec = random_record(rng);
        let r = check_case(&rec, &theta)?;
        worst.normalization_error = worst.normalization_error.max(r.normalization_error);
        worst.gamma_rel_error = worst.gamma_rel_error.max(r.gamma_rel_error);
        worst.h_rel_error = worst.h_rel_error.max(r.h_rel_error);
        worst.probability_error = worst.probability_error.max(r.probability_error);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integrates_polynomials_and_exponentials() {
        let v = integrate(|x| x * x, 0.0, 3.0, 0.0, 1e-14).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let e = integrate(|x| (-x).exp(), 0.0, 40.0, 0.0, 1e-14).unwrap();
        assert!((e - (1.0 - (-40f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn random_cases_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = run_checks(20, &mut rng).unwrap();
        assert!(w.normalization_error < 1e-6, "{w:?}");
        assert!(w.gamma_rel_error < 1e-8, "{w:?}");
        assert!(w.h_rel_error < 1e-8, "{w:?}");
        assert!(w.probability_error < 1e-8, "{w:?}");
    }
}
