//! The 18-parameter vector of the network.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Parameter names in persisted order.
pub const THETA_NAMES: [&str; 18] = [
    "p0", "p1", "lamV0", "lamV1", "lamC0", "lamC1", "lamS0", "lamS1", "lamSp0", "lamSp1", "lamN0",
    "lamN1", "lamNp0", "lamNp1", "lamL0", "lamL1", "lamLp0", "lamLp1",
];

/// Rates of one class. Primed rates apply to a component after its partner's event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassParams {
    pub lam_v: f64,
    pub lam_c: f64,
    pub lam_s: f64,
    pub lam_sp: f64,
    pub lam_n: f64,
    pub lam_np: f64,
    pub lam_l: f64,
    pub lam_lp: f64,
}

impl ClassParams {
    pub fn rates(&self) -> [f64; 8] {
        [
            self.lam_v,
            self.lam_c,
            self.lam_s,
            self.lam_sp,
            self.lam_n,
            self.lam_np,
            self.lam_l,
            self.lam_lp,
        ]
    }

    pub fn from_rates(r: [f64; 8]) -> Self {
        Self {
            lam_v: r[0],
            lam_c: r[1],
            lam_s: r[2],
            lam_sp: r[3],
            lam_n: r[4],
            lam_np: r[5],
            lam_l: r[6],
            lam_lp: r[7],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    /// Class priors `[p0, p1]`.
    pub p: [f64; 2],
    pub class: [ClassParams; 2],
}

impl Theta {
    pub fn validate(&self) -> Result<()> {
        let [p0, p1] = self.p;
        if !(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0) || (p0 + p1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "class priors must lie in (0,1) and sum to 1, got p0={p0}, p1={p1}"
            )));
        }
        for (r, cp) in self.class.iter().enumerate() {
            for (k, v) in cp.rates().iter().enumerate() {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "rate {} must be positive and finite, got {v}",
                        THETA_NAMES[2 + 2 * k + r]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Values in [`THETA_NAMES`] order.
    pub fn to_array(&self) -> [f64; 18] {
        let mut out = [0.0; 18];
        out[0] = self.p[0];
        out[1] = self.p[1];
        for r in 0..2 {
            for (k, v) in self.class[r].rates().iter().enumerate() {
                out[2 + 2 * k + r] = *v;
            }
        }
        out
    }

    pub fn from_array(a: [f64; 18]) -> Self {
        let rates = |r: usize| {
            let mut x = [0.0; 8];
            for (k, slot) in x.iter_mut().enumerate() {
                *slot = a[2 + 2 * k + r];
            }
            ClassParams::from_rates(x)
        };
        Self {
            p: [a[0], a[1]],
            class: [rates(0), rates(1)],
        }
    }

    /// Tab-separated `name value` lines with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, v) in THETA_NAMES.iter().zip(self.to_array()) {
            let _ = writeln!(s, "{name}\t{v:.16e}");
        }
        s
    }

    pub fn from_text(text: &str, file: &str) -> Result<Self> {
        let mut vals = [f64::NAN; 18];
        let mut seen = [false; 18];
        for (no, line) in text.lines().enumerate() {
            let line_no = no as u64 + 1;
            let parse_err = |message: String| Error::Parse {
                file: file.to_string(),
                line: line_no,
                message,
            };
            if line.trim().is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `name<TAB>value`".into()))?;
            let idx = THETA_NAMES
                .iter()
                .position(|n| *n == name.trim())
                .ok_or_else(|| parse_err(format!("unknown parameter `{name}`")))?;
            if seen[idx] {
                return Err(parse_err(format!("parameter `{name}` repeated")));
            }
            vals[idx] = value
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("bad value for `{name}`: {e}")))?;
            seen[idx] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Parse {
                file: file.to_string(),
                line: text.lines().count() as u64,
                message: format!("missing parameter `{}`", THETA_NAMES[k]),
            });
        }
        let theta = Self::from_array(vals);
        theta.validate()?;
        Ok(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Theta {
        let mut a = [0.0; 18];
        a[0] = 0.3;
        a[1] = 0.7;
        for (i, v) in a.iter_mut().enumerate().skip(2) {
            *v = 0.1 + i as f64 / 7.0;
        }
        Theta::from_array(a)
    }

    #[test]
    fn array_layout_matches_names() {
        let t = sample();
        let a = t.to_array();
        assert_eq!(
            a[THETA_NAMES.iter().position(|n| *n == "lamSp1").unwrap()],
            t.class[1].lam_sp
        );
        assert_eq!(
            a[THETA_NAMES.iter().position(|n| *n == "lamLp0").unwrap()],
            t.class[0].lam_lp
        );
        assert_eq!(Theta::from_array(a), t);
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let t = sample();
        let back = Theta::from_text(&t.to_text(), "theta").unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn text_errors() {
        let t = sample().to_text();
        let missing: String = t.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            Theta::from_text(&missing, "f"),
            Err(Error::Parse { .. })
        ));
        let bad = t.replacen("p0\t", "p0 ", 1);
        assert!(matches!(
            Theta::from_text(&bad, "f"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn validation() {
        let mut t = sample();
        assert!(t.validate().is_ok());
        t.class[0].lam_l = 0.0;
        assert!(t.validate().is_err());
        let mut t = sample();
        t.p = [0.5, 0.6];
        assert!(t.validate().is_err());
    }
}
