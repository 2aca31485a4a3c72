//! Scalar helpers for log-space evaluation of truncated exponential pieces.

/// `ln(Σ exp(x_i))`, shifted by the maximum. Empty or all `-inf` input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// `ln((1 - e^{-t}) / t)`: the log-mean of `e^{-t u}` over `u ∈ [0, 1]`.
///
/// Finite for every finite `t`, including negative rates where the integrand grows.
pub fn ln_unit_exp_mass(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        return -0.5 * t + t2 / 24.0 - t2 * t2 / 2880.0;
    }
    if t > 0.0 {
        (-(-t).exp_m1()).ln() - t.ln()
    } else {
        let u = -t;
        u + (-(-u).exp_m1()).ln() - u.ln()
    }
}

/// Mean of the density proportional to `e^{-t u}` on `u ∈ [0, 1]`.
///
/// Equals `1/t - 1/(e^t - 1)`; tends to `1/2` as `t → 0`.
pub fn unit_exp_mean(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        return 0.5 - t / 12.0 + t * t2 / 720.0 - t * t2 * t2 / 30240.0;
    }
    1.0 / t - 1.0 / t.exp_m1()
}

/// Logistic function evaluated without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
