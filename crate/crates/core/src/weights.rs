//! The weight family ψ(t) = c · t · log t · log log t ⋯ log^{m−1} t · (log^m t)^α.
//!
//! Everything is evaluated from `s = ln t`, so arguments far beyond the
//! double range (t = e^{600} and up) are handled by the `*_ln` variants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, integrate_to_infinity, QuadOptions, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub m: u32,
    pub alpha: f64,
    pub t0: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(c: &f64) -> bool {
    *c == 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, Copy)]
pub struct Classification {
    pub growth: Growth,
    /// Quadrature of ∫_{t0}^{T} dt/ψ.
    pub integral: Quadrature,
    pub upper: f64,
}

impl WeightFunction {
    pub fn new(m: u32, alpha: f64, t0: f64) -> Result<Self> {
        Self::with_scale(m, alpha, t0, 1.0)
    }

    pub fn with_scale(m: u32, alpha: f64, t0: f64, c: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("depth m must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale c must be positive, got {c}")));
        }
        if !(t0 >= 1.0 && t0.is_finite()) {
            return Err(Error::Domain(format!("t0 must be at least 1, got {t0}")));
        }
        let psi = Self { m, alpha, t0, c };
        let s0 = t0.ln();
        psi.iterated_logs(s0).map_err(|_| {
            Error::Precondition(format!("iterated logs of t0 = {t0} are not all positive for m = {m}"))
        })?;
        // ψ(t0) ≥ t0 ⟺ ψ(t0)/t0 ≥ 1
        let q = psi.ln_ratio_ln(s0)?;
        if q < -1e-12 {
            return Err(Error::Precondition(format!(
                "psi(t0) < t0 (psi(t0)/t0 = {:.6})",
                q.exp()
            )));
        }
        Ok(psi)
    }

    /// Smallest `t0 = e^k`, `k ≥ 1` an integer, that gives a valid weight
    /// whose regularity ratio stays at most `l_required` on `[t0, ∞)`.
    pub fn default_t0(m: u32, alpha: f64, l_required: f64) -> Result<f64> {
        for k in 1..=2000 {
            let t0 = (k as f64).exp();
            if let Ok(psi) = Self::new(m, alpha, t0) {
                // The ratio decreases in t, so checking t0 suffices.
                if psi.regularity_ratio_ln(k as f64)? <= l_required + 1e-12 {
                    return Ok(t0);
                }
            }
        }
        Err(Error::Domain(format!(
            "no t0 = e^k with ratio at most {l_required} for m = {m}, alpha = {alpha}"
        )))
    }

    /// `[L1, …, Lm]` where `L1 = s` and `L(j+1) = ln Lj`.
    fn iterated_logs(&self, s: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.m as usize);
        let mut l = s;
        for j in 0..self.m {
            if j > 0 {
                l = l.ln();
            }
            if !(l > 0.0) {
                return Err(Error::Domain(format!(
                    "log^{} t = {l} is not positive (ln t = {s})",
                    j + 1
                )));
            }
            out.push(l);
        }
        Ok(out)
    }

    fn check_domain_ln(&self, s: f64) -> Result<()> {
        if s < self.t0.ln() - 1e-14 * self.t0.ln().abs().max(1.0) {
            return Err(Error::Domain(format!(
                "t = e^{s} is below t0 = {}",
                self.t0
            )));
        }
        Ok(())
    }

    /// `ln(ψ(t)/t)` for `s = ln t`; no domain check against `t0`.
    pub fn ln_ratio_ln(&self, s: f64) -> Result<f64> {
        let logs = self.iterated_logs(s)?;
        let (last, rest) = logs.split_last().expect("m >= 1");
        Ok(self.c.ln() + rest.iter().map(|l| l.ln()).sum::<f64>() + self.alpha * last.ln())
    }

    /// `ψ(t)/t` for `s = ln t`; no domain check against `t0`.
    pub fn ratio_ln(&self, s: f64) -> Result<f64> {
        let logs = self.iterated_logs(s)?;
        let (last, rest) = logs.split_last().expect("m >= 1");
        Ok(self.c * rest.iter().product::<f64>() * last.powf(self.alpha))
    }

    /// `ln ψ(t)` from `s = ln t`.
    pub fn ln_eval_ln(&self, s: f64) -> Result<f64> {
        self.check_domain_ln(s)?;
        Ok(s + self.ln_ratio_ln(s)?)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.t0) {
            return Err(Error::Domain(format!("t = {t} is below t0 = {}", self.t0)));
        }
        Ok(t * self.ratio_ln(t.ln())?)
    }

    /// `tψ′(t)/ψ(t) = 1 + Σ_{j<m} 1/(L1⋯Lj) + α/(L1⋯Lm)` from `s = ln t`.
    pub fn regularity_ratio_ln(&self, s: f64) -> Result<f64> {
        let logs = self.iterated_logs(s)?;
        let mut acc = 1.0;
        let mut prod = 1.0;
        let m = logs.len();
        for (j, l) in logs.iter().enumerate() {
            prod *= l;
            if j + 1 < m {
                acc += 1.0 / prod;
            } else {
                acc += self.alpha / prod;
            }
        }
        Ok(acc)
    }

    pub fn regularity_ratio(&self, t: f64) -> Result<f64> {
        if !(t >= self.t0) {
            return Err(Error::Domain(format!("t = {t} is below t0 = {}", self.t0)));
        }
        self.regularity_ratio_ln(t.ln())
    }

    pub fn eval_derivative(&self, t: f64) -> Result<f64> {
        let psi = self.eval(t)?;
        Ok(psi / t * self.regularity_ratio_ln(t.ln())?)
    }

    /// `ψ′(t)` from `s = ln t`, which is `(ψ(t)/t) · ratio`, so it never overflows
    /// as long as ψ(t)/t is representable.
    pub fn derivative_ln(&self, s: f64) -> Result<f64> {
        self.check_domain_ln(s)?;
        Ok(self.ratio_ln(s)? * self.regularity_ratio_ln(s)?)
    }

    pub fn growth(&self) -> Growth {
        if self.alpha > 1.0 {
            Growth::Convergent
        } else {
            Growth::Divergent
        }
    }

    /// `α`-rule classification plus a quadrature of ∫_{t0}^{T} dt/ψ (`T` may be ∞).
    pub fn classify(&self, t_upper: f64) -> Classification {
        let growth = self.growth();
        let integral = if t_upper.is_infinite() && growth == Growth::Divergent {
            Quadrature {
                value: f64::INFINITY,
                error: 0.0,
                intervals: 0,
                converged: false,
            }
        } else {
            self.integral_quadrature(self.t0.ln(), t_upper.ln())
        };
        Classification {
            growth,
            integral,
            upper: t_upper,
        }
    }

    /// ∫ dt/ψ between `e^{s_lo}` and `e^{s_hi}` by quadrature in `s = ln t`.
    pub fn integral_quadrature(&self, s_lo: f64, s_hi: f64) -> Quadrature {
        let opts = QuadOptions::default();
        let f = |s: f64| match self.ratio_ln(s) {
            Ok(q) => 1.0 / q,
            Err(_) => 0.0,
        };
        if s_hi.is_infinite() {
            integrate_to_infinity(f, s_lo, opts)
        } else {
            integrate(f, s_lo, s_hi, opts)
        }
    }

    /// A primitive of `1/ψ`, from `s = ln t`: `y^{1−α}/(c(1−α))` or `ln y / c`
    /// with `y = log^m t`.
    pub fn primitive_ln(&self, s: f64) -> Result<f64> {
        let logs = self.iterated_logs(s)?;
        let y = *logs.last().expect("m >= 1");
        if self.alpha == 1.0 {
            Ok(y.ln() / self.c)
        } else {
            Ok(y.powf(1.0 - self.alpha) / (self.c * (1.0 - self.alpha)))
        }
    }

    /// `V(t) = ∫_t^∞ du/ψ(u)` from `s = ln t`; defined only for α > 1.
    pub fn tail_integral_ln(&self, s: f64) -> Result<f64> {
        if self.growth() == Growth::Divergent {
            return Err(Error::Hypothesis(format!(
                "tail integral of 1/psi diverges for alpha = {}",
                self.alpha
            )));
        }
        let logs = self.iterated_logs(s)?;
        let y = *logs.last().expect("m >= 1");
        Ok(y.powf(1.0 - self.alpha) / (self.c * (self.alpha - 1.0)))
    }

    pub fn tail_integral(&self, t: f64) -> Result<f64> {
        self.tail_integral_ln(t.ln())
    }

    /// Infimum and supremum of `tψ′/ψ` over a geometric grid on `[t_lo, t_hi]`.
    pub fn regularity_bounds(&self, t_lo: f64, t_hi: f64, n_samples: usize) -> Result<(f64, f64)> {
        self.regularity_bounds_ln(t_lo.ln(), t_hi.ln(), n_samples)
    }

    pub fn regularity_bounds_ln(&self, s_lo: f64, s_hi: f64, n_samples: usize) -> Result<(f64, f64)> {
        if !(s_lo < s_hi) || n_samples < 2 {
            return Err(Error::Domain(format!(
                "need t_lo < t_hi and at least two samples (got ln range [{s_lo}, {s_hi}], n = {n_samples})"
            )));
        }
        self.check_domain_ln(s_lo)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n_samples {
            let s = if i + 1 == n_samples {
                s_hi
            } else {
                s_lo + (s_hi - s_lo) * i as f64 / (n_samples - 1) as f64
            };
            let q = self.regularity_ratio_ln(s)?;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        Ok((lo, hi))
    }
}

fn format_t0(t0: f64) -> String {
    let k = t0.ln().round();
    if k >= 1.0 && k.exp() == t0 {
        if k == 1.0 {
            "e".into()
        } else {
            format!("e^{k}")
        }
    } else {
        format!("{t0}")
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi{{m={},alpha={},t0={}", self.m, self.alpha, format_t0(self.t0))?;
        if self.c != 1.0 {
            write!(f, ",c={}", self.c)?;
        }
        write!(f, "}}")
    }
}

/// Parses `e`, `e5`, `e^5`, `exp(5)` or a plain number.
pub fn parse_t0(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::Parse(format!("cannot read t0 value '{text}'"));
    if t == "e" {
        return Ok(std::f64::consts::E);
    }
    let exponent = if let Some(rest) = t.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
        Some(rest)
    } else if let Some(rest) = t.strip_prefix("e^") {
        Some(rest)
    } else if let Some(rest) = t.strip_prefix('e') {
        Some(rest)
    } else {
        None
    };
    match exponent {
        Some(k) => k.trim().parse::<f64>().map(f64::exp).map_err(|_| bad()),
        None => t.parse::<f64>().map_err(|_| bad()),
    }
}

impl FromStr for WeightFunction {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut body = text.trim();
        if let Some(rest) = body.strip_prefix("psi") {
            body = rest
                .trim()
                .strip_prefix('{')
                .and_then(|b| b.strip_suffix('}'))
                .ok_or_else(|| Error::Parse(format!("expected psi{{…}}, got '{text}'")))?;
        }
        let (mut m, mut alpha, mut t0, mut c) = (None, None, None, 1.0);
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
            let value = value.trim();
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number '{value}' for {key}")))
            };
            match key.trim() {
                "m" => {
                    m = Some(
                        value
                            .parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad depth m = '{value}'")))?,
                    )
                }
                "alpha" => alpha = Some(num()?),
                "t0" => t0 = Some(parse_t0(value)?),
                "c" => c = num()?,
                other => return Err(Error::Parse(format!("unknown psi key '{other}'"))),
            }
        }
        let m = m.ok_or_else(|| Error::Parse("psi spec is missing m".into()))?;
        let alpha = alpha.ok_or_else(|| Error::Parse("psi spec is missing alpha".into()))?;
        let t0 = match t0 {
            Some(t) => t,
            None => Self::default_t0(m, alpha, f64::INFINITY)?,
        };
        Self::with_scale(m, alpha, t0, c)
    }
}
