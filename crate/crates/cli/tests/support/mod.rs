//! Independent reference implementations used by the acceptance suite.
//!
//! Nothing here calls into the library's own quadrature or density code.

#![allow(dead_code)]

use linkrec::model::{ClassParams, Theta};
use rand::Rng;

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral with tolerance relative to a coarse first estimate.
pub fn simpson_rel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let n = 64;
    let h = (b - a) / n as f64;
    let coarse: f64 = (0..n).map(|i| f(a + (i as f64 + 0.5) * h).abs() * h).sum();
    simpson(f, a, b, (rel * coarse).max(f64::MIN_POSITIVE))
}

/// `ln` of the Freund bivariate exponential density of `(x, l)`.
pub fn ln_freund(x: f64, l: f64, lx: f64, ll: f64, lxp: f64, llp: f64) -> f64 {
    if x < l {
        (lx * llp).ln() - llp * l - (lx + ll - llp) * x
    } else {
        (ll * lxp).ln() - lxp * x - (lx + ll - lxp) * l
    }
}

/// `ln P(S,L) + ln P(N,L) - ln P(L)` with the branch of every factor fixed by
/// the piece rather than by comparing `l` against the features, so the
/// function stays linear in `l` on the closed piece.
pub fn ln_joint_piece(piece: usize, s: f64, n: f64, l: f64, cp: &ClassParams) -> f64 {
    let below =
        |x: f64, lx: f64, lxp: f64| (cp.lam_l * lxp).ln() - lxp * x - (lx + cp.lam_l - lxp) * l;
    let above =
        |x: f64, lx: f64| (lx * cp.lam_lp).ln() - cp.lam_lp * l - (lx + cp.lam_l - cp.lam_lp) * x;
    let latent_low = cp.lam_l.ln() - cp.lam_l * l;
    let latent_high = cp.lam_lp.ln() - cp.lam_lp * l;
    match piece {
        0 => above(s, cp.lam_s) + above(n, cp.lam_n) - latent_high,
        1 => below(s, cp.lam_s, cp.lam_sp) + below(n, cp.lam_n, cp.lam_np) - latent_low,
        2 => below(s, cp.lam_s, cp.lam_sp) + above(n, cp.lam_n) - latent_high,
        3 => above(s, cp.lam_s) + below(n, cp.lam_n, cp.lam_np) - latent_high,
        _ => unreachable!("four pieces"),
    }
}

/// Interval of each piece; the tail is cut `40/λ'_L` past its start.
pub fn piece_interval(piece: usize, s: f64, n: f64, cp: &ClassParams) -> (f64, f64) {
    let (big, small) = (s.max(n), s.min(n));
    match piece {
        0 => (big, big + 40.0 / cp.lam_lp),
        1 => (0.0, small),
        2 => (n, s.max(n)),
        3 => (s, n.max(s)),
        _ => unreachable!("four pieces"),
    }
}

/// Per-piece mass and first moment of `exp(ln joint - shift)` by quadrature.
pub fn piece_moments(s: f64, n: f64, cp: &ClassParams, shift: f64, rel: f64) -> [(f64, f64); 4] {
    let mut out = [(0.0, 0.0); 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let (a, b) = piece_interval(k, s, n, cp);
        if a >= b {
            continue;
        }
        let f = |l: f64| (ln_joint_piece(k, s, n, l, cp) - shift).exp();
        let g = |l: f64| l * f(l);
        *slot = (simpson_rel(&f, a, b, rel), simpson_rel(&g, a, b, rel));
    }
    out
}

pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

pub fn random_class<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> ClassParams {
    let mut r = [0.0; 8];
    for x in &mut r {
        *x = log_uniform(rng, lo, hi);
    }
    ClassParams::from_rates(r)
}

pub fn random_theta<R: Rng + ?Sized>(rng: &mut R) -> Theta {
    let p1 = rng.random_range(0.1..0.9);
    Theta {
        p: [1.0 - p1, p1],
        class: [random_class(rng, 0.2, 5.0), random_class(rng, 0.2, 5.0)],
    }
}

/// Shortest-path hop counts by Floyd–Warshall; `usize::MAX` when unreachable.
pub fn all_pairs_hops(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let inf = usize::MAX;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != inf && d[k][j] != inf && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// `Σ_k β^k (A^k)_{jh}` by dense integer matrix powers.
pub fn katz_dense(adj: &[Vec<bool>], j: usize, h: usize, beta: f64, k_max: usize) -> f64 {
    let n = adj.len();
    let a: Vec<Vec<u64>> = adj
        .iter()
        .map(|r| r.iter().map(|&x| u64::from(x)).collect())
        .collect();
    let mut power = a.clone();
    let mut total = 0.0;
    for k in 1..=k_max {
        if k > 1 {
            let mut next = vec![vec![0u64; n]; n];
            for i in 0..n {
                for m in 0..n {
                    if power[i][m] == 0 {
                        continue;
                    }
                    for c in 0..n {
                        next[i][c] += power[i][m] * a[m][c];
                    }
                }
            }
            power = next;
        }
        total += beta.powi(k as i32) * power[j][h] as f64;
    }
    total
}

/// Total network value `Σ_u v_u^I + m_u Σ_{x≤X} α^x |N_{u,x}|` over `present` users.
pub fn total_value(
    adj: &[Vec<bool>],
    present: &[bool],
    alpha: f64,
    x: usize,
    m: &[f64],
    intrinsic: &[f64],
) -> f64 {
    let d = all_pairs_hops(adj);
    let mut tv = 0.0;
    for u in 0..adj.len() {
        if !present[u] {
            continue;
        }
        let mut impact = 0.0;
        for (v, &duv) in d[u].iter().enumerate() {
            if v != u && present[v] && duv >= 1 && duv <= x {
                impact += alpha.powi(duv as i32);
            }
        }
        tv += intrinsic[u] + m[u] * impact;
    }
    tv
}
