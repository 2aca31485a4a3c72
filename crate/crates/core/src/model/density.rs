//! Per-record quantities of the joint density
//! `P(S,L|R) · P(N,L|R) / P(L|R)`, integrated over the latent `L`.
//!
//! `(S,L)` and `(N,L)` are Freund bivariate exponentials. Unprimed rates apply
//! while both components of a pair survive; after the partner's event the
//! survivor switches to its primed rate. Integrating the product over `L`
//! splits into four pieces:
//!
//! | piece | interval of `L` | present when |
//! |-------|-----------------|--------------|
//! | 1     | `(Y, ∞)`        | always       |
//! | 2     | `(0, y)`        | always       |
//! | 3     | `(N, S)`        | `S > N`      |
//! | 4     | `(S, N)`        | `S < N`      |
//!
//! with `Y = max(S,N)` and `y = min(S,N)`. Every piece is a truncated
//! exponential in `L`, so its mass and conditional mean are closed forms. All
//! masses are kept as logarithms and combined with a max-shifted sum.

use crate::error::{Error, Result};
use crate::model::theta::{ClassParams, Theta};
use crate::numeric::{ln_unit_exp_mass, log_sum_exp, unit_exp_mean};

/// Combined exponents of `L` inside each piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieceRates {
    /// `λ_S + λ_L - λ'_L`: coefficient of `S` once `L` outlives `S`.
    pub a: f64,
    /// `λ_N + λ_L - λ'_L`.
    pub b: f64,
    /// `λ_S - λ'_S + λ_N - λ'_N + λ_L`: exponent of `L` below `y`.
    pub c2: f64,
    /// `λ_S + λ_L - λ'_S`: exponent of `L` on `(N, S)`.
    pub c3: f64,
    /// `λ_N + λ_L - λ'_N`: exponent of `L` on `(S, N)`.
    pub c4: f64,
}

impl PieceRates {
    pub fn new(cp: &ClassParams) -> Self {
        Self {
            a: cp.lam_s + cp.lam_l - cp.lam_lp,
            b: cp.lam_n + cp.lam_l - cp.lam_lp,
            c2: cp.lam_s - cp.lam_sp + cp.lam_n - cp.lam_np + cp.lam_l,
            c3: cp.lam_s + cp.lam_l - cp.lam_sp,
            c4: cp.lam_n + cp.lam_l - cp.lam_np,
        }
    }
}

/// Logarithms of a class's rates, computed once per parameter vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ClassLogs {
    pub cp: ClassParams,
    pub rates: PieceRates,
    pub ln_prior_vc: f64,
    ln_s: f64,
    ln_sp: f64,
    ln_n: f64,
    ln_np: f64,
    ln_l: f64,
}

impl ClassLogs {
    pub(crate) fn new(theta: &Theta, r: usize) -> Self {
        let cp = theta.class[r];
        Self {
            cp,
            rates: PieceRates::new(&cp),
            ln_prior_vc: theta.p[r].ln() + cp.lam_v.ln() + cp.lam_c.ln(),
            ln_s: cp.lam_s.ln(),
            ln_sp: cp.lam_sp.ln(),
            ln_n: cp.lam_n.ln(),
            ln_np: cp.lam_np.ln(),
            ln_l: cp.lam_l.ln(),
        }
    }

    /// Log masses of the four pieces; absent pieces are `-inf`.
    pub(crate) fn ln_pieces(&self, s: f64, n: f64) -> [f64; 4] {
        let cp = &self.cp;
        let k = &self.rates;
        let (big, small) = if s >= n { (s, n) } else { (n, s) };
        let t1 = self.ln_s + self.ln_n - k.a * s - k.b * n - cp.lam_lp * big;
        let t2 = self.ln_l + self.ln_sp + self.ln_np - cp.lam_sp * s - cp.lam_np * n
            + small.ln()
            + ln_unit_exp_mass(k.c2 * small);
        let mut t3 = f64::NEG_INFINITY;
        let mut t4 = f64::NEG_INFINITY;
        if s > n {
            let gap = s - n;
            t3 = self.ln_l + self.ln_sp + self.ln_n - cp.lam_sp * s - k.b * n - k.c3 * n
                + gap.ln()
                + ln_unit_exp_mass(k.c3 * gap);
        } else if n > s {
            let gap = n - s;
            t4 = self.ln_l + self.ln_np + self.ln_s - cp.lam_np * n - k.a * s - k.c4 * s
                + gap.ln()
                + ln_unit_exp_mass(k.c4 * gap);
        }
        [t1, t2, t3, t4]
    }

    /// Conditional means of `L` within each piece; zero for absent pieces.
    pub(crate) fn gammas(&self, s: f64, n: f64) -> [f64; 4] {
        let k = &self.rates;
        let (big, small) = if s >= n { (s, n) } else { (n, s) };
        let g1 = big + 1.0 / self.cp.lam_lp;
        let g2 = small * unit_exp_mean(k.c2 * small);
        let mut g3 = 0.0;
        let mut g4 = 0.0;
        if s > n {
            let gap = s - n;
            g3 = n + gap * unit_exp_mean(k.c3 * gap);
        } else if n > s {
            let gap = n - s;
            g4 = s + gap * unit_exp_mean(k.c4 * gap);
        }
        [g1, g2, g3, g4]
    }

    /// `ln INT(r)`: log of the joint of `(R=r, V, C, S, N)` with `L` integrated out.
    pub(crate) fn ln_int(&self, v: f64, c: f64, s: f64, n: f64) -> f64 {
        self.ln_prior_vc - self.cp.lam_v * v - self.cp.lam_c * c
            + log_sum_exp(&self.ln_pieces(s, n))
    }
}

/// All per-record quantities under one class's parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordTerms {
    /// Log masses of the four pieces (`-inf` when absent).
    pub ln_pieces: [f64; 4],
    /// `ln ∫ P(S,L)P(N,L)/P(L) dL`.
    pub ln_mass: f64,
    /// Posterior probability of each piece.
    pub weights: [f64; 4],
    /// Conditional mean of `L` within each piece.
    pub gammas: [f64; 4],
}

impl RecordTerms {
    pub fn new(s: f64, n: f64, theta: &Theta, r: usize) -> Self {
        ClassLogs::new(theta, r).terms(s, n)
    }
}

impl ClassLogs {
    pub(crate) fn terms(&self, s: f64, n: f64) -> RecordTerms {
        let ln_pieces = self.ln_pieces(s, n);
        let ln_mass = log_sum_exp(&ln_pieces);
        let weights = ln_pieces.map(|t| (t - ln_mass).exp());
        RecordTerms {
            ln_pieces,
            ln_mass,
            weights,
            gammas: self.gammas(s, n),
        }
    }
}

/// `ln P(x, L)` for a Freund pair with first-event rates `(lx, ll)` and
/// post-event rates `(lxp, llp)`.
pub fn freund_ln_pdf(x: f64, l: f64, lx: f64, ll: f64, lxp: f64, llp: f64) -> f64 {
    if x < l {
        lx.ln() + llp.ln() - llp * l - (lx + ll - llp) * x
    } else {
        ll.ln() + lxp.ln() - lxp * x - (lx + ll - lxp) * l
    }
}

/// `ln P(L | R)`: rate `λ_L` below `min(S,N)`, `λ'_L` above.
pub fn latent_ln_pdf(l: f64, s: f64, n: f64, cp: &ClassParams) -> f64 {
    if l < s.min(n) {
        cp.lam_l.ln() - cp.lam_l * l
    } else {
        cp.lam_lp.ln() - cp.lam_lp * l
    }
}

/// `ln [P(S,L) P(N,L) / P(L)]` evaluated pointwise from the raw densities.
pub fn ln_joint_sn_l(s: f64, n: f64, l: f64, cp: &ClassParams) -> f64 {
    freund_ln_pdf(s, l, cp.lam_s, cp.lam_l, cp.lam_sp, cp.lam_lp)
        + freund_ln_pdf(n, l, cp.lam_n, cp.lam_l, cp.lam_np, cp.lam_lp)
        - latent_ln_pdf(l, s, n, cp)
}

/// Posterior density of `L` given a labeled record.
#[derive(Debug, Clone, Copy)]
pub struct PosteriorDensity {
    pub s: f64,
    pub n: f64,
    pub class: ClassParams,
    pub terms: RecordTerms,
}

impl PosteriorDensity {
    pub fn eval(&self, l: f64) -> f64 {
        if l <= 0.0 {
            return 0.0;
        }
        (ln_joint_sn_l(self.s, self.n, l, &self.class) - self.terms.ln_mass).exp()
    }

    /// Interval of each piece; absent pieces have equal ends.
    pub fn intervals(&self) -> [(f64, f64); 4] {
        let (s, n) = (self.s, self.n);
        let (big, small) = (s.max(n), s.min(n));
        [
            (big, f64::INFINITY),
            (0.0, small),
            if s > n { (n, s) } else { (n, n) },
            if n > s { (s, n) } else { (s, s) },
        ]
    }
}

pub fn posterior_density(
    s: f64,
    n: f64,
    label: bool,
    theta: &Theta,
    record: usize,
) -> Result<PosteriorDensity> {
    let r = usize::from(label);
    let terms = RecordTerms::new(s, n, theta, r);
    if !terms.ln_mass.is_finite() || terms.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numeric {
            record,
            message: format!(
                "posterior normalizer is not finite (ln mass {})",
                terms.ln_mass
            ),
        });
    }
    Ok(PosteriorDensity {
        s,
        n,
        class: theta.class[r],
        terms,
    })
}
