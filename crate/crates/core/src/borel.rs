//! Exceptional sets of Borel type.
//!
//! For a nondecreasing `T` and weights `σ1, σ2` the scan marks every sample
//! `x` where `T(x ± 1/σ1(T(x)))` leaves the band `T(x) ± σ2(T(x))`, and compares
//! the measure of the marked set with the covering bound
//!
//! ```text
//! 1/σ1(t0) + (1/η) ∫ dv/(σ1σ2) + 1   (upper inequality)
//! 1/σ1(t0) + (1/δ) ∫ dv/(σ1σ2) + 1   (lower inequality)
//! ```
//!
//! with `G(t) = t/σ2(t)` and `η = δ G(t0) ln(1 + 1/G(t0))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, QuadOptions};
use crate::weights::{Growth, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Step,
    Linear,
}

/// Samples of a nondecreasing function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSample {
    xs: Vec<f64>,
    ts: Vec<f64>,
    mode: Mode,
}

impl MonotoneSample {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>, mode: Mode) -> Result<Self> {
        if xs.len() != ts.len() || xs.len() < 2 {
            return Err(Error::Precondition("need at least two samples with matching lengths".into()));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Precondition("abscissae must be strictly increasing".into()));
        }
        if let Some(i) = ts.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::Precondition(format!(
                "values must be nondecreasing (T({}) = {} > T({}) = {})",
                xs[i],
                ts[i],
                xs[i + 1],
                ts[i + 1]
            )));
        }
        Ok(Self { xs, ts, mode })
    }

    /// Samples `f` at `n` equally spaced points of `[a, b]`.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, mode: Mode) -> Result<Self> {
        let xs: Vec<f64> = (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect();
        let ts = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ts, mode)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Value at `x`, or `None` outside the sampled range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let n = self.xs.len();
        if !(x >= self.xs[0] && x <= self.xs[n - 1]) {
            return None;
        }
        let i = self.xs.partition_point(|&v| v <= x);
        let k = i.clamp(1, n) - 1;
        if k == n - 1 || self.mode == Mode::Step {
            return Some(self.ts[k]);
        }
        let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        Some(self.ts[k] + w * (self.ts[k + 1] - self.ts[k]))
    }
}

/// Weight functions built from a small closed-form algebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sigma {
    /// `c·t^p`
    Power { c: f64, p: f64 },
    /// `c·t^p·(ln t)^q`
    PowerLog { c: f64, p: f64, q: f64 },
    /// `c·√ψ(t)`
    ScaledSqrtPsi { psi: WeightFunction, c: f64 },
    /// `V(t)^{k/2}·√ψ(t)` with `V(t) = ∫_t^∞ du/ψ`
    VPsi { psi: WeightFunction, k: f64 },
}

impl Sigma {
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(match *self {
            Sigma::Power { c, p } => c * t.powf(p),
            Sigma::PowerLog { c, p, q } => {
                if !(t > 1.0) {
                    return Err(Error::Domain(format!("ln t must be positive, t = {t}")));
                }
                c * t.powf(p) * t.ln().powf(q)
            }
            Sigma::ScaledSqrtPsi { psi, c } => c * psi.eval(t)?.sqrt(),
            Sigma::VPsi { psi, k } => psi.tail_integral(t)?.powf(0.5 * k) * psi.eval(t)?.sqrt(),
        })
    }

    /// `tσ′(t)/σ(t)`.
    pub fn log_slope(&self, t: f64) -> Result<f64> {
        Ok(match *self {
            Sigma::Power { p, .. } => p,
            Sigma::PowerLog { p, q, .. } => p + q / t.ln(),
            Sigma::ScaledSqrtPsi { psi, .. } => 0.5 * psi.regularity_ratio(t)?,
            Sigma::VPsi { psi, k } => {
                let v = psi.tail_integral(t)?;
                -0.5 * k * t / (psi.eval(t)? * v) + 0.5 * psi.regularity_ratio(t)?
            }
        })
    }

    /// Smallest admissible argument.
    pub fn t_min(&self) -> f64 {
        match *self {
            Sigma::Power { .. } => 0.0,
            Sigma::PowerLog { .. } => 1.0,
            Sigma::ScaledSqrtPsi { psi, .. } | Sigma::VPsi { psi, .. } => psi.t0,
        }
    }
}

/// `V^{K/2}√ψ` twice, with `K` from the sampled regularity ratio clamped to
/// at most `1/2` unless given.
pub fn sigma_pair_from_psi(psi: &WeightFunction, k: Option<f64>) -> Result<(Sigma, Sigma, f64)> {
    if psi.growth() == Growth::Divergent {
        return Err(Error::Hypothesis(format!(
            "{psi} is divergent, so V(t) = ∫_t^∞ du/psi is undefined"
        )));
    }
    let k = match k {
        Some(k) if k > 0.0 && k < 1.0 => k,
        Some(k) => return Err(Error::Domain(format!("K must lie in (0, 1), got {k}"))),
        None => {
            let s0 = psi.t0.ln();
            let (k_est, _) = psi.regularity_bounds_ln(s0, s0 + 200.0, 2001)?;
            k_est.min(0.5)
        }
    };
    let s = Sigma::VPsi { psi: *psi, k };
    Ok((s, s, k))
}

/// Whether `G(t) = t/σ(t)` increases along a geometric grid on `[t_lo, t_hi]`.
pub fn g_increasing(sigma: &Sigma, t_lo: f64, t_hi: f64, n: usize) -> Result<bool> {
    let grid = crate::numeric::geometric_grid(t_lo, t_hi, n);
    let mut prev = f64::NEG_INFINITY;
    for t in grid {
        let g = t / sigma.eval(t)?;
        if !(g > prev) {
            return Ok(false);
        }
        prev = g;
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSetReport {
    pub intervals: Vec<[f64; 2]>,
    pub total_measure: f64,
    pub theoretical_bound: Option<f64>,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    /// Samples that could not be tested.
    #[serde(skip)]
    pub excluded: usize,
    /// The bound's tail integral was cut at the data range.
    #[serde(skip)]
    pub bound_truncated: bool,
    /// Width of the coarsest sample cell, the resolution of `total_measure`.
    #[serde(skip)]
    pub cell: f64,
}

impl ExceptionalSetReport {
    pub fn empty() -> Self {
        Self {
            intervals: Vec::new(),
            total_measure: 0.0,
            theoretical_bound: None,
            eta: None,
            delta: None,
            excluded: 0,
            bound_truncated: false,
            cell: 0.0,
        }
    }

    /// Builds from per-sample flags with the half-cell convention.
    pub fn from_cells(xs: &[f64], flags: &[bool], bound: Option<f64>) -> Self {
        let intervals = flagged_cells(xs, flags);
        let total_measure = intervals.iter().fold(0.0, |acc, iv| acc + (iv[1] - iv[0]));
        let cell = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Self {
            intervals,
            total_measure,
            theoretical_bound: bound,
            eta: None,
            delta: None,
            excluded: 0,
            bound_truncated: false,
            cell,
        }
    }

    /// Measured size against the bound, with one cell of slack.
    pub fn within_bound(&self) -> Option<bool> {
        self.theoretical_bound.map(|b| self.total_measure <= b + self.cell)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Each flagged sample owns the half-cells on either side; adjacent cells merge.
pub fn flagged_cells(xs: &[f64], flags: &[bool]) -> Vec<[f64; 2]> {
    let n = xs.len();
    let mut out: Vec<[f64; 2]> = Vec::new();
    for i in 0..n {
        if !flags[i] {
            continue;
        }
        let lo = if i == 0 { xs[0] } else { 0.5 * (xs[i - 1] + xs[i]) };
        let hi = if i + 1 == n { xs[n - 1] } else { 0.5 * (xs[i] + xs[i + 1]) };
        match out.last_mut() {
            Some(last) if last[1] >= lo => last[1] = hi,
            _ => out.push([lo, hi]),
        }
    }
    out.retain(|iv| iv[1] > iv[0]);
    out
}

/// `∫_{t_lo}^{t_hi} dv/(σ1σ2)` by quadrature in `ln v`.
fn reciprocal_integral(s1: &Sigma, s2: &Sigma, t_lo: f64, t_hi: f64) -> f64 {
    if !(t_hi > t_lo) {
        return 0.0;
    }
    let f = |u: f64| {
        let v = u.exp();
        match (s1.eval(v), s2.eval(v)) {
            (Ok(a), Ok(b)) => v / (a * b),
            _ => 0.0,
        }
    };
    integrate(f, t_lo.ln(), t_hi.ln(), QuadOptions::default()).value
}

/// `(η, bound)` of the covering argument for the given pair on `[t0, t_end]`.
pub fn lemma21_bound(s1: &Sigma, s2: &Sigma, delta: f64, t0: f64, t_end: f64) -> Result<(f64, f64)> {
    let g0 = t0 / s2.eval(t0)?;
    let eta = delta * g0 * (1.0 / g0).ln_1p();
    let integral = reciprocal_integral(s1, s2, t0, t_end);
    let inv = 1.0 / s1.eval(t0)?;
    let e1 = inv + integral / eta + 1.0;
    let e2 = inv + integral / delta + 1.0;
    Ok((eta, e1 + e2))
}

/// Marks samples where `T(x + 1/σ1(T(x))) < T(x) + σ2(T(x))` or
/// `T(x − 1/σ1(T(x))) > T(x) − σ2(T(x))` fails.
pub fn scan_lemma21(t: &MonotoneSample, s1: &Sigma, s2: &Sigma, delta: f64) -> Result<ExceptionalSetReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    if let Some(i) = t.ts.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::Precondition(format!("T decreases after x = {}", t.xs[i])));
    }
    let t0 = t.ts[0];
    let t_end = *t.ts.last().expect("non-empty sample");
    for s in [s1, s2] {
        if t0 < s.t_min() {
            return Err(Error::Domain(format!("T(x0) = {t0} is below the domain of sigma")));
        }
    }
    let mut excluded = 0usize;
    let mut flags = Vec::with_capacity(t.xs.len());
    for (&x, &tx) in t.xs.iter().zip(&t.ts) {
        let step = 1.0 / s1.eval(tx)?;
        let band = s2.eval(tx)?;
        match (t.eval(x + step), t.eval(x - step)) {
            (Some(up), Some(down)) => flags.push(!(up < tx + band) || !(down > tx - band)),
            _ => {
                excluded += 1;
                flags.push(false);
            }
        }
    }
    let (eta, bound) = lemma21_bound(s1, s2, delta, t0, t_end)?;
    let mut report = ExceptionalSetReport::from_cells(&t.xs, &flags, Some(bound));
    report.eta = Some(eta);
    report.delta = Some(delta);
    report.excluded = excluded;
    report.bound_truncated = true;
    Ok(report)
}

/// Marks samples where `Φ(x+h) − Φ(x) − Φ′(x)h > ε` for some
/// `|h| ≤ 1/√ψ(Φ′(x))`, with `Φ′` the right difference quotient.
///
/// The bound is the covering bound for `σ1 = σ2 = min(ε, 1)·√ψ`, `δ = 1 − L/2`.
pub fn scan_lemma22(phi: &MonotoneSample, psi: &WeightFunction, epsilon: f64) -> Result<ExceptionalSetReport> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let xs = &phi.xs;
    let n = xs.len();
    let slopes: Vec<f64> = (0..n - 1)
        .map(|i| (phi.ts[i + 1] - phi.ts[i]) / (xs[i + 1] - xs[i]))
        .collect();
    for (i, w) in slopes.windows(2).enumerate() {
        // Difference quotients carry roundoff of order eps·|Φ|/dx.
        let scale = phi.ts[i].abs().max(phi.ts[i + 2].abs());
        let dx = (xs[i + 1] - xs[i]).min(xs[i + 2] - xs[i + 1]);
        let slack = 1e-12 * w[0].abs().max(1.0) + 16.0 * f64::EPSILON * scale / dx;
        if w[1] < w[0] - slack {
            return Err(Error::Precondition(format!(
                "Phi is not convex near x = {} (slopes {} then {})",
                xs[i + 1],
                w[0],
                w[1]
            )));
        }
    }
    // Convex piecewise-linear interpolant of the samples.
    let lin = MonotoneSample {
        xs: xs.clone(),
        ts: phi.ts.clone(),
        mode: Mode::Linear,
    };
    let mut flags = vec![false; n];
    let mut excluded = 1usize; // last sample has no right quotient
    let mut tested_slopes = Vec::new();
    for i in 0..n - 1 {
        let d = slopes[i];
        let Ok(p) = psi.eval(d) else {
            excluded += 1;
            continue;
        };
        let hmax = 1.0 / p.sqrt();
        let x = xs[i];
        // A convex function minus a line peaks at an endpoint of the h-range.
        match (lin.eval(x + hmax), lin.eval(x - hmax)) {
            (Some(up), Some(down)) => {
                let dev_up = up - phi.ts[i] - d * hmax;
                let dev_down = down - phi.ts[i] + d * hmax;
                flags[i] = dev_up.max(dev_down) > epsilon;
                tested_slopes.push(d);
            }
            _ => excluded += 1,
        }
    }
    let mut report = ExceptionalSetReport::from_cells(xs, &flags, None);
    report.excluded = excluded;
    if tested_slopes.len() >= 2 && psi.growth() == Growth::Convergent {
        let t0 = tested_slopes[0];
        let t_end = *tested_slopes.last().expect("non-empty");
        if t_end > t0 {
            let (_, l) = psi.regularity_bounds(t0, t_end, 512)?;
            if l < 2.0 {
                let delta = 1.0 - 0.5 * l;
                let s = Sigma::ScaledSqrtPsi {
                    psi: *psi,
                    c: epsilon.min(1.0),
                };
                let (eta, bound) = lemma21_bound(&s, &s, delta, t0, t_end)?;
                report.theoretical_bound = Some(bound);
                report.eta = Some(eta);
                report.delta = Some(delta);
                report.bound_truncated = true;
            }
        }
    }
    Ok(report)
}
