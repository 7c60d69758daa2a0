//! An entire function with prescribed zero circles,
//! `f(z) = Π_k (1 + (z/h(k))^{m_k})` with `m_k = ⌊h(k)/h′(k)⌋ = ⌊√A2(h(k))⌋`.
//!
//! Only `ln|f|` is evaluated. Zeros are never listed: the factor `k` vanishes at
//! `h(k)·e^{iπ(2j+1)/m_k}` and nearest-zero queries work circle by circle.

use std::f64::consts::{LN_2, PI};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{golden_max, integrate, NeumaierSum, QuadOptions};
use crate::scales::{GrowthScales, Scale};
use crate::weights::Growth;

/// Tail error below which a radius counts as certified.
pub const TAIL_TOL: f64 = 1e-9;

/// Largest admissible `L` for the construction.
pub const L_LIMIT: f64 = 1.2;

/// Slack on [`L_LIMIT`]; `t log t` from `t0 = e⁵` sits exactly on the limit.
pub const L_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Circle {
    pub radius: f64,
    pub ln_radius: f64,
    /// Number of equally spaced zeros, at angles `π(2j+1)/m`.
    pub m: u64,
}

/// Zeros of `Π (1 + (z/R_k)^{m_k})`, one circle per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    circles: Vec<Circle>,
}

/// Nearest zero to a point, as a distance plus polar position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestZero {
    pub distance: f64,
    pub radius: f64,
    pub angle: f64,
    /// 1-based circle index.
    pub k: usize,
}

/// `|r e^{iθ} − R e^{iφ}|` without cancellation.
fn polar_distance(r: f64, theta: f64, radius: f64, phi: f64) -> f64 {
    let s = (0.5 * (theta - phi)).sin();
    ((r - radius).powi(2) + 4.0 * r * radius * s * s).sqrt()
}

impl ZeroSet {
    pub fn new(circles: Vec<(f64, u64)>) -> Result<Self> {
        let circles: Vec<Circle> = circles
            .into_iter()
            .map(|(radius, m)| Circle {
                radius,
                ln_radius: radius.ln(),
                m,
            })
            .collect();
        if circles.iter().any(|c| !(c.radius > 0.0) || c.m == 0) {
            return Err(Error::Precondition("radii must be positive and multiplicities ≥ 1".into()));
        }
        if !circles.windows(2).all(|w| w[0].radius < w[1].radius) {
            return Err(Error::Precondition("circle radii must be strictly increasing".into()));
        }
        Ok(Self { circles })
    }

    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    /// Zero of circle `c` closest in angle to `theta`.
    fn nearest_on(c: &Circle, theta: f64) -> f64 {
        let m = c.m as f64;
        let j = ((theta * m / PI - 1.0) / 2.0).round();
        PI * (2.0 * j + 1.0) / m
    }

    /// Nearest zero to `r e^{iθ}`, scanning outward from the circle closest in radius.
    pub fn nearest_zero(&self, r: f64, theta: f64) -> NearestZero {
        let n = self.circles.len();
        let start = self.circles.partition_point(|c| c.radius < r);
        let mut best = NearestZero {
            distance: f64::INFINITY,
            radius: f64::NAN,
            angle: f64::NAN,
            k: 0,
        };
        let try_circle = |i: usize, best: &mut NearestZero| {
            let c = &self.circles[i];
            let phi = Self::nearest_on(c, theta);
            let d = polar_distance(r, theta, c.radius, phi);
            if d < best.distance {
                *best = NearestZero {
                    distance: d,
                    radius: c.radius,
                    angle: phi.rem_euclid(2.0 * PI),
                    k: i + 1,
                };
            }
        };
        let (mut lo, mut hi) = (start, start);
        loop {
            let below = lo > 0 && r - self.circles[lo - 1].radius <= best.distance;
            let above = hi < n && self.circles[hi].radius - r <= best.distance;
            if !below && !above {
                break;
            }
            if above {
                try_circle(hi, &mut best);
                hi += 1;
            }
            if below {
                lo -= 1;
                try_circle(lo, &mut best);
            }
        }
        best
    }

    /// `d(r) = max_{|z|=r} δ(z)` from midpoint candidates of the bracketing
    /// circles, then local golden-section refinement of the best ones.
    pub fn d_max(&self, r: f64) -> (f64, f64) {
        let delta = |t: f64| self.nearest_zero(r, t).distance;
        let i = self.circles.partition_point(|c| c.radius <= r);
        let bracket: Vec<&Circle> = [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|j| self.circles.get(j))
            .collect();
        let mut candidates: Vec<(f64, f64)> = Vec::new();
        for c in &bracket {
            let m = c.m;
            for j in 0..m {
                let mid = 2.0 * PI * j as f64 / m as f64;
                candidates.push((delta(mid), mid));
                let zero = PI * (2 * j + 1) as f64 / m as f64;
                candidates.push((delta(zero), zero));
            }
        }
        if candidates.is_empty() {
            return (delta(0.0), 0.0);
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
        let m_max = bracket.iter().map(|c| c.m).max().unwrap_or(1) as f64;
        let half = PI / m_max;
        let mut best = candidates[0];
        for &(_, t) in candidates.iter().take(16) {
            let (arg, val) = golden_max(delta, t - half, t + half, 1e-13);
            if val > best.0 {
                best = (val, arg);
            }
        }
        (best.0, best.1.rem_euclid(2.0 * PI))
    }

    /// `ln|1 + (z/R_k)^{m_k}|` at `z = r e^{iθ}`; `None` within `1e-12·r` of a zero.
    fn log_factor(c: &Circle, ln_r: f64, theta: f64) -> Option<f64> {
        let m = c.m as f64;
        let u = m * (ln_r - c.ln_radius);
        let phi = (m * theta).rem_euclid(2.0 * PI);
        // |1 + w|² for w = ρ e^{iφ}, ρ ≤ 1: (1 − ρ)² + 4ρ cos²(φ/2).
        let small = |lw: f64| -> (f64, f64) {
            let rho = lw.exp();
            let one_minus = -lw.exp_m1();
            let cos_half = (0.5 * phi).cos();
            let q = one_minus * one_minus + 4.0 * rho * cos_half * cos_half;
            let val = if q > 0.5 {
                0.5 * (rho * rho + 2.0 * rho * phi.cos()).ln_1p()
            } else {
                0.5 * q.ln()
            };
            (val, q)
        };
        let (val, q) = if u <= 0.0 { small(u) } else { small(-u) };
        // Near a zero |1 + w| ≈ m·|z − z0|/r.
        if q < (1e-12 * m).powi(2) {
            return None;
        }
        Some(if u <= 0.0 { val } else { u + val })
    }

    /// `Σ_{k ∈ range} ln|1 + (z/R_k)^{m_k}|`; `None` at a zero.
    fn partial_log_abs(&self, range: std::ops::Range<usize>, r: f64, theta: f64) -> Option<f64> {
        let ln_r = r.ln();
        let mut sum = NeumaierSum::default();
        for c in &self.circles[range] {
            sum.add(Self::log_factor(c, ln_r, theta)?);
        }
        Some(sum.total())
    }

    /// Brute-force nearest zero over every zero of every circle.
    pub fn nearest_zero_brute(&self, r: f64, theta: f64) -> f64 {
        let mut best = f64::INFINITY;
        for c in &self.circles {
            for j in 0..c.m {
                let phi = PI * (2 * j + 1) as f64 / c.m as f64;
                best = best.min(polar_distance(r, theta, c.radius, phi));
            }
        }
        best
    }
}

/// Lower bound from the counting function, upper bound from `Σ ln(1 + |w_k|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    pub s1: f64,
    pub s2: f64,
    /// Summed to the certified cut, plus the tail bound.
    pub s3: f64,
    pub total: f64,
    /// `g(ρr)·ln 2`.
    pub s2_bound: f64,
    /// `2ρ/τ + ρ` with `τ = ln ρ`.
    pub s3_bound: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogAbs {
    /// `ln|f(z)|`, or `-inf` at a zero.
    pub value: f64,
    /// Certified bound on the truncated tail.
    pub tail_error: f64,
    /// Number of factors summed.
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumIntegral {
    pub sum: f64,
    pub integral: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `Σ_{k=1}^{⌊R⌋} F(k)` against `∫_{R−⌊R⌋}^R F` with the bound `R·sup|F′|`.
pub fn sum_vs_integral<F: Fn(f64) -> f64>(f: F, r: f64, sup_derivative: f64) -> SumIntegral {
    let n = r.floor() as u64;
    let sum: f64 = (1..=n).map(|k| f(k as f64)).collect::<NeumaierSum>().total();
    let lo = r - n as f64;
    let opts = QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        ..QuadOptions::default()
    };
    let mut integral = NeumaierSum::default();
    // Piecewise on unit cells keeps quadrature panels aligned with the sum.
    let mut a = lo;
    while a < r {
        let b = (a + 1.0).min(r);
        integral.add(integrate(&f, a, b, opts).value);
        a = b;
    }
    let integral = integral.total();
    let bound = r * sup_derivative;
    let slack = 1e-9 * sum.abs().max(integral.abs()).max(1.0);
    SumIntegral {
        sum,
        integral,
        bound,
        holds: (sum - integral).abs() <= bound + slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinModulus {
    pub n: usize,
    pub r_n: f64,
    /// `Σ_{k≤n} ln(b_k − 1) − Σ_{k>n} ln(1 + b_k)`.
    pub termwise_bound: f64,
    /// Same first sum, with `ln(1 − b_k)` in the tail and the tail error removed.
    pub certified_bound: f64,
    /// Minimum of `ln|f|` over the sampled angles.
    pub sampled_min: f64,
    pub samples: usize,
    /// `certified_bound > ln R` for the tract level `R`.
    pub one_tract: bool,
}

#[derive(Debug, Clone)]
pub struct ProductFunction {
    scales: GrowthScales,
    zeros: ZeroSet,
    pub k_max: usize,
    pub r_max_valid: f64,
    /// Regularity constant `L` and `c = ψ(t0)·t0^{−L}` used in the bounds.
    pub l: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructSummary {
    pub psi: String,
    pub r_max: f64,
    pub r_table: f64,
    pub k_max: usize,
    pub r_max_valid: f64,
    pub first_radius: f64,
    pub first_multiplicity: u64,
    pub last_radius: f64,
    pub last_multiplicity: u64,
    pub l_est: f64,
}

/// `⌊v⌋`, except that values within `1e-9` above an integer snap down.
fn guarded_floor(v: f64) -> u64 {
    ((v - 1e-9).ceil() - 1.0).max(1.0) as u64
}

/// `Σ_{k>K} b_k ≤ (2ρ_K/τ_K)·exp(−τ_K·√A2(R_K))` for `ρ_K = R_K/r > 1`,
/// returned as a bound on `Σ |ln|1 + w_k||`.
fn cut_bound(ln_r: f64, ln_radius: f64, sqrt_a2: f64) -> f64 {
    let tau = ln_radius - ln_r;
    if !(tau > 0.0) {
        return f64::INFINITY;
    }
    let rho = tau.exp();
    let b_star = rho * (-tau * sqrt_a2).exp();
    if !(b_star < 1.0) {
        return f64::INFINITY;
    }
    2.0 * rho / tau * (-tau * sqrt_a2).exp() / (1.0 - b_star)
}

impl ProductFunction {
    /// Generates the circles, extending the table until the tail at `r_max` is
    /// certified below [`TAIL_TOL`].
    pub fn construct(scales: GrowthScales, r_max: f64) -> Result<Self> {
        let psi = *scales.psi();
        if psi.growth() != Growth::Divergent {
            return Err(Error::Hypothesis(format!("{psi} is convergent; the construction needs a divergent weight")));
        }
        if !(r_max > 1.0) {
            return Err(Error::Domain(format!("r_max must exceed 1, got {r_max}")));
        }
        let mut scales = scales;
        let mut r_table = scales.r_max().max(1.05 * r_max);
        for _ in 0..60 {
            if r_table > scales.r_max() {
                scales = GrowthScales::build_with(psi, r_table, scales.pts_per_decade(), scales.control)?;
            }
            if scales.l_est > L_LIMIT + L_SLACK {
                return Err(Error::Hypothesis(format!(
                    "regularity constant L = {} on range is not below 6/5",
                    scales.l_est
                )));
            }
            let pf = Self::from_table(scales.clone())?;
            if pf.certified_at(r_max.min(scales.r_max())) && scales.r_max() >= r_max {
                let r_max_valid = pf.largest_certified(r_max);
                return Ok(Self { r_max_valid, ..pf });
            }
            r_table *= 1.02;
        }
        Err(Error::Build(format!("could not certify the product tail up to r = {r_max}")))
    }

    fn from_table(scales: GrowthScales) -> Result<Self> {
        let k_max = scales.g_max().floor() as usize;
        if k_max < 2 {
            return Err(Error::Build("table holds fewer than two circles".into()));
        }
        let mut circles = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let t = k as f64;
            let radius = scales.eval_h(t)?;
            circles.push((radius, guarded_floor(scales.h_over_h_prime(t)?)));
        }
        let zeros = ZeroSet::new(circles)?;
        let psi = scales.psi();
        let l = scales.l_est;
        let c = psi.eval(psi.t0)? * psi.t0.powf(-l);
        Ok(Self {
            scales,
            zeros,
            k_max,
            r_max_valid: f64::NAN,
            l,
            c,
        })
    }

    pub fn scales(&self) -> &GrowthScales {
        &self.scales
    }

    pub fn zeros(&self) -> &ZeroSet {
        &self.zeros
    }

    /// Radius of circle `k` (1-based).
    pub fn radius(&self, k: usize) -> f64 {
        self.zeros.circles[k - 1].radius
    }

    pub fn multiplicity(&self, k: usize) -> u64 {
        self.zeros.circles[k - 1].m
    }

    fn sqrt_a2_at_circle(&self, k: usize) -> f64 {
        let r = self.radius(k).min(self.scales.r_max());
        (0.5 * self.scales.ln_a2(r).expect("circle inside table")).exp()
    }

    /// Tail bound for cutting after circle `k` at radius `r`.
    fn tail_after(&self, k: usize, r: f64) -> f64 {
        cut_bound(r.ln(), self.zeros.circles[k - 1].ln_radius, self.sqrt_a2_at_circle(k))
    }

    fn certified_at(&self, r: f64) -> bool {
        let Ok(rho) = self.scales.rho(r) else {
            return false;
        };
        rho * r <= self.radius(self.k_max) && self.tail_after(self.k_max, r) < TAIL_TOL
    }

    fn largest_certified(&self, r_max: f64) -> f64 {
        if self.certified_at(r_max) {
            return r_max;
        }
        let (mut lo, mut hi) = (1.0, r_max);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.certified_at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn check_range(&self, r: f64) -> Result<()> {
        if !(r >= 0.0 && r <= self.r_max_valid) {
            return Err(Error::Range(format!(
                "r = {r} outside the certified range [0, {}]",
                self.r_max_valid
            )));
        }
        Ok(())
    }

    /// First circle index after which the tail at `r` is negligible.
    fn cut_index(&self, r: f64) -> (usize, f64) {
        let start = self.zeros.circles.partition_point(|c| c.radius <= r).max(1);
        let mut k = start;
        loop {
            let tail = self.tail_after(k, r);
            if tail < 1e-17 || k == self.k_max {
                return (k, tail);
            }
            k += 1;
        }
    }

    /// `ln|f(r e^{iθ})|` with a certified tail error.
    pub fn eval_log_abs(&self, r: f64, theta: f64) -> Result<LogAbs> {
        self.check_range(r)?;
        if r == 0.0 {
            return Ok(LogAbs {
                value: 0.0,
                tail_error: 0.0,
                terms: 0,
            });
        }
        let (k, tail) = self.cut_index(r);
        let value = self.zeros.partial_log_abs(0..k, r, theta).unwrap_or(f64::NEG_INFINITY);
        Ok(LogAbs {
            value,
            tail_error: tail,
            terms: k,
        })
    }

    /// `⌊g(r)⌋`, or 0 below the table.
    fn floor_g(&self, r: f64) -> Result<usize> {
        if r < 1.0 {
            return Ok(0);
        }
        Ok(self.scales.eval(Scale::G, r)?.floor() as usize)
    }

    /// `S1 + S2 + S3` with the split at `⌊g(r)⌋` and `⌊g(ρr)⌋`.
    pub fn log_m_upper(&self, r: f64) -> Result<UpperBound> {
        self.check_range(r)?;
        let rho = self.scales.rho(r.max(1.0))?;
        let n1 = self.floor_g(r)?.min(self.k_max);
        let n2 = self.floor_g(rho * r)?.min(self.k_max);
        let ln_r = r.ln();
        let a = |range: std::ops::Range<usize>| -> f64 {
            self.zeros.circles[range]
                .iter()
                .map(|c| {
                    let u = c.m as f64 * (ln_r - c.ln_radius);
                    u.max(0.0) + (-u.abs()).exp().ln_1p()
                })
                .collect::<NeumaierSum>()
                .total()
        };
        let (k, tail) = self.cut_index(r);
        let s1 = a(0..n1);
        let s2 = a(n1..n2);
        let s3 = a(n2..k.max(n2)) + tail;
        let tau = rho.ln();
        Ok(UpperBound {
            s1,
            s2,
            s3,
            total: s1 + s2 + s3,
            s2_bound: self.scales.eval(Scale::G, rho * r)? * LN_2,
            s3_bound: 2.0 * rho / tau + rho,
            rho,
        })
    }

    /// `N(r, 1/f) = Σ_{k≤⌊g(r)⌋} m_k ln(r/h(k))`.
    pub fn log_m_lower(&self, r: f64) -> Result<f64> {
        self.check_range(r)?;
        let n = self.floor_g(r)?.min(self.k_max);
        let ln_r = r.ln();
        Ok(self.zeros.circles[..n]
            .iter()
            .map(|c| c.m as f64 * (ln_r - c.ln_radius))
            .collect::<NeumaierSum>()
            .total())
    }

    /// `g(r)·((L c^{1/L}/2)·A2(r)^{1−1/L}·ln r + 1)`: the sum-versus-integral
    /// bound for `F(t) = (h/h′)(t)·ln(r/h(t))` on `[0, g(r)]`.
    pub fn sumf_bound(&self, r: f64) -> Result<f64> {
        let g = self.scales.eval(Scale::G, r)?;
        let a2 = self.scales.eval(Scale::A2, r)?;
        let l = self.l;
        Ok(g * (0.5 * l * self.c.powf(1.0 / l) * a2.powf(1.0 - 1.0 / l) * r.ln() + 1.0))
    }

    /// `A0(r) − t0·ln r − sumf_bound(r)`, which the counting function must exceed.
    pub fn log_m_lower_floor(&self, r: f64) -> Result<f64> {
        let a0 = self.scales.eval(Scale::A0, r)?;
        Ok(a0 - self.scales.psi().t0 * r.ln() - self.sumf_bound(r)?)
    }

    /// Direct check of the sum-versus-integral estimate behind [`Self::sumf_bound`].
    pub fn sum_vs_integral_at(&self, r: f64) -> Result<SumIntegral> {
        let g = self.scales.eval(Scale::G, r)?;
        let ln_r = r.ln();
        let f = |t: f64| {
            let x = self.scales.ln_h_of(t).expect("t ≤ g(r)");
            let sqrt_a2 = (0.5 * self.scales.ln_a2(x.exp().min(self.scales.r_max())).expect("inside table")).exp();
            sqrt_a2 * (ln_r - x)
        };
        let bound = self.sumf_bound(r)? / g;
        Ok(sum_vs_integral(f, g, bound))
    }

    /// Nearest zero to `r e^{iθ}`.
    pub fn nearest_zero(&self, r: f64, theta: f64) -> Result<NearestZero> {
        self.check_range(r)?;
        Ok(self.zeros.nearest_zero(r, theta))
    }

    /// `d(r)` and a maximizing angle.
    pub fn d_max(&self, r: f64) -> Result<(f64, f64)> {
        self.check_range(r)?;
        if !(r > self.radius(1)) {
            return Err(Error::Range(format!("d(r) needs r > h(1) = {}", self.radius(1))));
        }
        Ok(self.zeros.d_max(r))
    }

    /// `9r/√A2(r)`.
    pub fn distance_bound(&self, r: f64) -> Result<f64> {
        Ok(9.0 * r * (-0.5 * self.scales.ln_a2(r)?).exp())
    }

    /// `r_n = h(n + 1/2)`.
    pub fn r_n(&self, n: usize) -> Result<f64> {
        self.scales.eval_h(n as f64 + 0.5)
    }

    /// Lower bounds for `min_{|z|=r_n} ln|f|` against a sampled minimum.
    pub fn min_modulus_at_rn(&self, n: usize, samples: usize, tract_level: f64) -> Result<MinModulus> {
        if n < 1 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let r_n = self.r_n(n)?;
        self.check_range(r_n)?;
        let ln_r = r_n.ln();
        let mut head = NeumaierSum::default();
        for c in &self.zeros.circles[..n] {
            let ln_b = c.m as f64 * (ln_r - c.ln_radius);
            head.add(if ln_b > 0.0 {
                ln_b + (-(-ln_b).exp()).ln_1p()
            } else {
                f64::NEG_INFINITY
            });
        }
        let (k, tail) = self.cut_index(r_n);
        let mut termwise_tail = NeumaierSum::default();
        let mut certified_tail = NeumaierSum::default();
        for c in &self.zeros.circles[n..k.max(n)] {
            let b = (c.m as f64 * (ln_r - c.ln_radius)).exp();
            termwise_tail.add(b.ln_1p());
            certified_tail.add((-b).ln_1p());
        }
        let head = head.total();
        let termwise_bound = head - termwise_tail.total() - tail;
        let certified_bound = head + certified_tail.total() - tail;
        let mut sampled_min = f64::INFINITY;
        for j in 0..samples {
            let theta = 2.0 * PI * j as f64 / samples as f64;
            let v = self.zeros.partial_log_abs(0..k, r_n, theta).unwrap_or(f64::NEG_INFINITY);
            sampled_min = sampled_min.min(v - tail);
        }
        Ok(MinModulus {
            n,
            r_n,
            termwise_bound,
            certified_bound,
            sampled_min,
            samples,
            one_tract: certified_bound > tract_level.ln(),
        })
    }

    /// Largest `n` with `r_n ≤ r_max_valid`.
    pub fn last_feasible_n(&self) -> usize {
        let g = self.scales.eval(Scale::G, self.r_max_valid).unwrap_or(0.0);
        let mut n = (g - 0.5).floor().max(0.0) as usize;
        while n > 0 && self.r_n(n).map_or(true, |r| r > self.r_max_valid) {
            n -= 1;
        }
        n
    }

    pub fn summary(&self, r_max: f64) -> ConstructSummary {
        let first = self.zeros.circles[0];
        let last = self.zeros.circles[self.k_max - 1];
        ConstructSummary {
            psi: self.scales.psi().to_string(),
            r_max,
            r_table: self.scales.r_max(),
            k_max: self.k_max,
            r_max_valid: self.r_max_valid,
            first_radius: first.radius,
            first_multiplicity: first.m,
            last_radius: last.radius,
            last_multiplicity: last.m,
            l_est: self.l,
        }
    }

    /// Nearest-zero certificates on `|z| = r`: `theta,distance,bound_9r_over_sqrtA2,pass`.
    pub fn write_zeros_csv<W: Write>(&self, r: f64, n_angles: usize, mut out: W) -> Result<bool> {
        let bound = self.distance_bound(r)?;
        self.check_range(r)?;
        writeln!(out, "theta,distance,bound_9r_over_sqrtA2,pass").map_err(io_err)?;
        let mut all = true;
        for j in 0..n_angles {
            let theta = 2.0 * PI * j as f64 / n_angles as f64;
            let d = self.zeros.nearest_zero(r, theta).distance;
            let pass = d <= bound;
            all &= pass;
            writeln!(out, "{theta:.16e},{d:.16e},{bound:.16e},{pass}").map_err(io_err)?;
        }
        Ok(all)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Build(format!("write failed: {e}"))
}
