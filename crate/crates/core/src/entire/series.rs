//! Power series given by coefficient rules, with log-space scanning.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::logc::{wrap_phase, LogComplex};

/// Built-in coefficient rules.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// `1/n!`
    Exp,
    /// `1/n!` on even `n`
    Cosh,
    /// `(−1)^n/n!`
    Expm,
    /// `z^k`
    Monomial(u64),
    /// `1/(n/2)!` on even `n`, i.e. `e^{z²}`
    QuadExp,
    /// `1/n!` on `n ∈ {base^j : j ≥ 0}`
    Lacunary(u64),
    /// Finite real coefficient list.
    Polynomial(Vec<f64>),
    /// `1/n!` plus a finite real perturbation.
    ExpPlus(Vec<f64>),
}

/// Scan controls shared by every series routine.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Terms this many natural-log units below the running maximum are negligible.
    pub margin: f64,
    /// Relative tolerance under which two term magnitudes count as equal.
    pub tie_rel: f64,
    /// Largest index the scan may touch.
    pub hard_cap: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            margin: 50.0,
            tie_rel: 1e-12,
            hard_cap: 100_000_000,
        }
    }
}

/// Window of consecutive indices that must all be negligible before a scan stops.
pub fn window(nu: u64) -> u64 {
    (nu as f64).sqrt().ceil() as u64 + 16
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub name: String,
    pub kind: Kind,
    pub known_positive: bool,
}

impl PowerSeries {
    pub fn new(kind: Kind) -> Self {
        let known_positive = match &kind {
            Kind::Expm => false,
            Kind::Polynomial(c) => c.iter().all(|&a| a >= 0.0),
            Kind::ExpPlus(c) => c
                .iter()
                .enumerate()
                .all(|(n, &p)| (-ln_gamma(n as f64 + 1.0)).exp() + p >= 0.0),
            _ => true,
        };
        let name = name_of(&kind);
        Self {
            name,
            kind,
            known_positive,
        }
    }

    pub fn exp() -> Self {
        Self::new(Kind::Exp)
    }

    pub fn cosh() -> Self {
        Self::new(Kind::Cosh)
    }

    pub fn expm() -> Self {
        Self::new(Kind::Expm)
    }

    pub fn monomial(k: u64) -> Self {
        Self::new(Kind::Monomial(k))
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::new(Kind::Polynomial(coeffs))
    }

    fn finite_coeffs(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Polynomial(c) => Some(c),
            _ => None,
        }
    }

    /// `ln a_n` as a log-complex, or `None` when `a_n = 0`.
    pub fn log_coeff(&self, n: u64) -> Option<LogComplex> {
        let inv_fact = || -ln_gamma(n as f64 + 1.0);
        match &self.kind {
            Kind::Exp => Some(LogComplex::new(inv_fact(), 0.0)),
            Kind::Cosh => (n % 2 == 0).then(|| LogComplex::new(inv_fact(), 0.0)),
            Kind::Expm => Some(LogComplex::new(inv_fact(), if n % 2 == 1 { PI } else { 0.0 })),
            Kind::Monomial(k) => (n == *k).then_some(LogComplex::ONE),
            Kind::QuadExp => (n % 2 == 0).then(|| LogComplex::new(-ln_gamma((n / 2) as f64 + 1.0), 0.0)),
            Kind::Lacunary(base) => is_power_of(n, *base).then(|| LogComplex::new(inv_fact(), 0.0)),
            Kind::Polynomial(c) => c
                .get(n as usize)
                .copied()
                .filter(|&a| a != 0.0)
                .map(LogComplex::from_real),
            Kind::ExpPlus(c) => {
                let base = (-ln_gamma(n as f64 + 1.0)).exp();
                match c.get(n as usize) {
                    Some(&p) => {
                        let a = base + p;
                        (a != 0.0).then(|| LogComplex::from_real(a))
                    }
                    None => Some(LogComplex::new(inv_fact(), 0.0)),
                }
            }
        }
    }

    /// Smallest `m ≥ n` with `a_m ≠ 0`.
    pub fn support_next(&self, n: u64) -> Option<u64> {
        match &self.kind {
            Kind::Exp | Kind::Expm | Kind::ExpPlus(_) => {
                let mut m = n;
                while self.log_coeff(m).is_none() {
                    m = m.checked_add(1)?;
                }
                Some(m)
            }
            Kind::Cosh | Kind::QuadExp => n.checked_add(n % 2),
            Kind::Monomial(k) => (n <= *k).then_some(*k),
            Kind::Lacunary(base) => {
                let mut p = 1u64;
                while p < n {
                    p = p.checked_mul(*base)?;
                }
                Some(p)
            }
            Kind::Polynomial(c) => (n as usize..c.len()).find(|&i| c[i] != 0.0).map(|i| i as u64),
        }
    }

    /// Largest `m ≤ n` with `a_m ≠ 0`.
    pub fn support_prev(&self, n: u64) -> Option<u64> {
        match &self.kind {
            Kind::Exp | Kind::Expm | Kind::ExpPlus(_) => (0..=n).rev().find(|&m| self.log_coeff(m).is_some()),
            Kind::Cosh | Kind::QuadExp => Some(n - n % 2),
            Kind::Monomial(k) => (n >= *k).then_some(*k),
            Kind::Lacunary(base) => {
                if n == 0 {
                    return None;
                }
                let mut p = 1u64;
                while let Some(q) = p.checked_mul(*base) {
                    if q > n {
                        break;
                    }
                    p = q;
                }
                Some(p)
            }
            Kind::Polynomial(c) => {
                let top = (n as usize).min(c.len().saturating_sub(1));
                if c.is_empty() {
                    return None;
                }
                (0..=top).rev().find(|&i| c[i] != 0.0).map(|i| i as u64)
            }
        }
    }

    /// Maximum term `ln μ(r)` and central index `ν(r)` (largest maximizer).
    pub fn max_term(&self, r: f64, opts: &ScanOptions) -> Result<(f64, u64)> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        let ln_r = r.ln();
        let mut best = f64::NEG_INFINITY;
        let mut nu = 0u64;
        let mut below_since: Option<u64> = None;
        let mut next = self.support_next(0);
        while let Some(n) = next {
            if n > opts.hard_cap {
                return Err(Error::ScanCap(opts.hard_cap));
            }
            let a = self.log_coeff(n).expect("support index has a coefficient");
            let t = a.log_mag + n as f64 * ln_r;
            let tie = if best.is_finite() { opts.tie_rel * best.abs().max(1.0) } else { 0.0 };
            if t > best + tie {
                best = t;
                nu = n;
                below_since = None;
            } else if t >= best - tie {
                nu = n;
                below_since = None;
            } else if t < best - opts.margin {
                let start = *below_since.get_or_insert(n);
                if n - start >= window(nu) {
                    break;
                }
            } else {
                below_since = None;
            }
            next = n.checked_add(1).and_then(|m| self.support_next(m));
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::Domain(format!("series '{}' is identically zero", self.name)));
        }
        Ok((best, nu))
    }

    /// Evaluates `f(z)` and `z f′(z)` at `z = r e^{iθ}` in log space.
    pub fn eval(&self, r: f64, theta: f64, opts: &ScanOptions) -> Result<Evaluation> {
        if !(r > 0.0) {
            if r == 0.0 {
                let a0 = self.log_coeff(0).unwrap_or(LogComplex::ZERO);
                return Ok(Evaluation {
                    value: a0,
                    zdf_over_f: Complex64::new(0.0, 0.0),
                    log_mu: a0.log_mag,
                    nu: 0,
                    terms: 1,
                    tail_rel: 0.0,
                });
            }
            return Err(Error::Domain(format!("radius must be non-negative, got {r}")));
        }
        let ln_r = r.ln();
        // Single pass with a running scale: addends are stored relative to
        // the largest term seen so far and rescaled whenever it grows.
        let mut scale = f64::NEG_INFINITY;
        let mut nu = 0u64;
        let mut sum = ComplexSum::default();
        let mut dsum = ComplexSum::default();
        let mut terms = 0usize;
        let mut below_since: Option<u64> = None;
        let mut last_small = f64::NEG_INFINITY;
        let mut next = self.support_next(0);
        while let Some(n) = next {
            if n > opts.hard_cap {
                return Err(Error::ScanCap(opts.hard_cap));
            }
            let a = self.log_coeff(n).expect("support index has a coefficient");
            let t = a.log_mag + n as f64 * ln_r;
            let tie = if scale.is_finite() { opts.tie_rel * scale.abs().max(1.0) } else { 0.0 };
            if t > scale + tie {
                if scale > f64::NEG_INFINITY {
                    let f = (scale - t).exp();
                    sum.scale(f);
                    dsum.scale(f);
                }
                scale = t;
                nu = n;
                below_since = None;
            } else if t >= scale - tie {
                nu = n;
                below_since = None;
            }
            let phase = a.phase + angle_times(n, theta);
            let w = Complex64::from_polar((t - scale).exp(), phase);
            sum.add(w);
            dsum.add(w * n as f64);
            terms += 1;
            // Weighted by n so the derivative sum is also converged.
            let weighted = t + ((n + 1) as f64).ln();
            if weighted < scale + ((nu + 1) as f64).ln() - opts.margin {
                let start = *below_since.get_or_insert(n);
                last_small = t - scale;
                if n - start >= window(nu) {
                    break;
                }
            } else if t < scale - tie {
                below_since = None;
            }
            next = n.checked_add(1).and_then(|m| self.support_next(m));
        }
        if scale == f64::NEG_INFINITY {
            return Ok(Evaluation {
                value: LogComplex::ZERO,
                zdf_over_f: Complex64::new(0.0, 0.0),
                log_mu: f64::NEG_INFINITY,
                nu: 0,
                terms,
                tail_rel: 0.0,
            });
        }
        let s = sum.total();
        let mag = s.norm();
        // Each addend carries a relative error of about eps·|t| from exp().
        let roundoff = f64::EPSILON * (4.0 + scale.abs()) * sum.abs_total();
        if !(mag >= PRECISION_FLOOR.max(1e3 * roundoff)) {
            return Err(Error::PrecisionLoss {
                rel: PRECISION_FLOOR,
                log_bound: scale + sum.abs_total().ln(),
            });
        }
        let d = dsum.total();
        Ok(Evaluation {
            value: LogComplex::new(scale + mag.ln(), s.arg()),
            zdf_over_f: d / s,
            log_mu: scale,
            nu,
            terms,
            tail_rel: last_small.exp() * (window(nu) + 1) as f64 / mag,
        })
    }
}

/// Sums whose magnitude falls below this fraction of the largest term, or
/// below a thousand times the estimated rounding error, are rejected.
pub const PRECISION_FLOOR: f64 = 1e-13;

/// Result of [`PowerSeries::eval`].
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: LogComplex,
    /// `z f′(z)/f(z)`.
    pub zdf_over_f: Complex64,
    pub log_mu: f64,
    pub nu: u64,
    pub terms: usize,
    /// Rough size of the neglected tail relative to `|f|`.
    pub tail_rel: f64,
}

/// `nθ` reduced modulo 2π without forming the large product first when possible.
fn angle_times(n: u64, theta: f64) -> f64 {
    if theta == 0.0 {
        0.0
    } else {
        wrap_phase((n as f64) * theta)
    }
}

fn is_power_of(n: u64, base: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    while m % base == 0 {
        m /= base;
    }
    m == 1
}

#[derive(Debug, Clone, Copy, Default)]
struct ComplexSum {
    re: crate::numeric::NeumaierSum,
    im: crate::numeric::NeumaierSum,
    abs: f64,
}

impl ComplexSum {
    fn add(&mut self, w: Complex64) {
        self.re.add(w.re);
        self.im.add(w.im);
        self.abs += w.norm();
    }

    fn scale(&mut self, f: f64) {
        let re = self.re.total() * f;
        let im = self.im.total() * f;
        self.re = Default::default();
        self.im = Default::default();
        self.re.add(re);
        self.im.add(im);
        self.abs *= f;
    }

    fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }

    fn abs_total(&self) -> f64 {
        self.abs
    }
}

fn name_of(kind: &Kind) -> String {
    let list = |c: &[f64]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    match kind {
        Kind::Exp => "exp".into(),
        Kind::Cosh => "cosh".into(),
        Kind::Expm => "expm".into(),
        Kind::Monomial(k) => format!("monomial{{{k}}}"),
        Kind::QuadExp => "quadexp".into(),
        Kind::Lacunary(b) => format!("lacunary{{{b}}}"),
        Kind::Polynomial(c) => format!("poly{{{}}}", list(c)),
        Kind::ExpPlus(c) => format!("expplus{{{}}}", list(c)),
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn braced<'a>(text: &'a str, head: &str) -> Option<&'a str> {
    text.strip_prefix(head)?.strip_prefix('{')?.strip_suffix('}')
}

fn parse_list(body: &str) -> Result<Vec<f64>> {
    body.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coefficient '{v}'")))
        })
        .collect()
}

impl FromStr for PowerSeries {
    type Err = Error;

    /// Registry names: `exp`, `cosh`, `expm`, `monomial{k}`, `quadexp`,
    /// `lacunary{base}`, `poly{a0,a1,…}`, `expplus{p0,p1,…}`.
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let int = |body: &str, what: &str| {
            let body = body.trim();
            let body = body.split_once('=').map(|(_, v)| v.trim()).unwrap_or(body);
            body.parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad {what} '{body}'")))
        };
        let kind = match t {
            "exp" => Kind::Exp,
            "cosh" => Kind::Cosh,
            "expm" => Kind::Expm,
            "quadexp" => Kind::QuadExp,
            _ => {
                if let Some(b) = braced(t, "monomial") {
                    Kind::Monomial(int(b, "monomial degree")?)
                } else if let Some(b) = braced(t, "lacunary") {
                    let base = int(b, "lacunary base")?;
                    if base < 2 {
                        return Err(Error::Parse("lacunary base must be at least 2".into()));
                    }
                    Kind::Lacunary(base)
                } else if let Some(b) = braced(t, "poly") {
                    let c = parse_list(b)?;
                    if c.iter().all(|&a| a == 0.0) {
                        return Err(Error::Parse("polynomial has no nonzero coefficient".into()));
                    }
                    Kind::Polynomial(c)
                } else if let Some(b) = braced(t, "expplus") {
                    Kind::ExpPlus(parse_list(b)?)
                } else {
                    return Err(Error::Parse(format!("unknown function '{t}'")));
                }
            }
        };
        Ok(Self::new(kind))
    }
}

impl PowerSeries {
    /// Whether the series has finitely many terms.
    pub fn is_polynomial(&self) -> bool {
        matches!(self.kind, Kind::Monomial(_)) || self.finite_coeffs().is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> ScanOptions {
        ScanOptions::default()
    }

    /// Brute-force maximum over the first `n_max` indices, largest maximizer.
    fn brute_max_term(f: &PowerSeries, r: f64, n_max: u64) -> (f64, u64) {
        let mut best = (f64::NEG_INFINITY, 0);
        for n in 0..=n_max {
            if let Some(a) = f.log_coeff(n) {
                let t = a.log_mag + n as f64 * r.ln();
                if t >= best.0 - 1e-12 * best.0.abs().max(1.0) {
                    best = (t.max(best.0), n);
                }
            }
        }
        best
    }

    #[test]
    fn exp_tie_resolves_to_larger_index() {
        let (lm, nu) = PowerSeries::exp().max_term(10.0, &opts()).unwrap();
        assert_eq!(nu, 10);
        let exact = 10.0 * 10f64.ln() - 3628800f64.ln();
        assert!((lm - exact).abs() < 1e-12);
        assert_eq!(brute_max_term(&PowerSeries::exp(), 10.0, 100).1, 10);
    }

    #[test]
    fn exp_central_index_is_floor() {
        let (_, nu) = PowerSeries::exp().max_term(10.5, &opts()).unwrap();
        assert_eq!(nu, 10);
    }

    #[test]
    fn linear_polynomial() {
        let f = PowerSeries::polynomial(vec![1.0, 1.0]);
        let (lm, nu) = f.max_term(2.0, &opts()).unwrap();
        assert_eq!(nu, 1);
        assert!((lm - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn eval_exp_real_and_imaginary() {
        let f = PowerSeries::exp();
        for r in [0.5, 3.0, 40.0, 700.0, 5000.0] {
            let e = f.eval(r, 0.0, &opts()).unwrap();
            assert!((e.value.log_mag - r).abs() <= 1e-10 * r, "r = {r}");
            assert_eq!(e.value.phase, 0.0);
            assert!((e.zdf_over_f.re - r).abs() < 1e-9 * r);
        }
        let e = f.eval(PI, PI / 2.0, &opts()).unwrap();
        assert!(e.value.log_mag.abs() < 1e-10);
        assert!((e.value.phase.abs() - PI).abs() < 1e-10);
    }

    #[test]
    fn eval_cosh() {
        let e = PowerSeries::cosh().eval(3.0, 0.0, &opts()).unwrap();
        let exact = ((3f64.exp() + (-3f64).exp()) / 2.0).ln();
        assert!((e.value.log_mag - exact).abs() < 1e-14);
    }

    #[test]
    fn cancellation_is_reported() {
        let err = PowerSeries::exp().eval(60.0, PI, &opts()).unwrap_err();
        match err {
            Error::PrecisionLoss { log_bound, .. } => assert!(log_bound >= -60.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lacunary_support_and_scan() {
        let f: PowerSeries = "lacunary{2}".parse().unwrap();
        assert_eq!(f.support_next(0), Some(1));
        assert_eq!(f.support_next(5), Some(8));
        assert_eq!(f.support_prev(7), Some(4));
        assert!(f.log_coeff(0).is_none());
        for r in [1.5, 5.0, 20.0, 300.0] {
            let (lm, nu) = f.max_term(r, &opts()).unwrap();
            let (blm, bnu) = brute_max_term(&f, r, 4096);
            assert_eq!(nu, bnu);
            assert!((lm - blm).abs() < 1e-12 * blm.abs().max(1.0));
        }
    }

    #[test]
    fn quadexp_matches_closed_form() {
        let f = PowerSeries::new(Kind::QuadExp);
        let e = f.eval(4.0, 0.0, &opts()).unwrap();
        assert!((e.value.log_mag - 16.0).abs() < 1e-12);
        let e = f.eval(2.0, PI / 2.0, &opts()).unwrap();
        // e^{(2i)²} = e^{−4}
        assert!((e.value.log_mag + 4.0).abs() < 1e-10);
    }

    #[test]
    fn scan_cap_fires() {
        let o = ScanOptions { hard_cap: 50, ..opts() };
        assert_eq!(PowerSeries::exp().max_term(100.0, &o), Err(Error::ScanCap(50)));
    }

    #[test]
    fn registry_names() {
        for name in ["exp", "cosh", "expm", "monomial{5}", "quadexp", "lacunary{3}", "poly{1,0,2}", "expplus{0,1}"] {
            let f: PowerSeries = name.parse().unwrap();
            assert_eq!(f.to_string(), name);
        }
        assert_eq!("monomial{k=7}".parse::<PowerSeries>().unwrap().kind, Kind::Monomial(7));
        assert!("sinh".parse::<PowerSeries>().is_err());
        assert!(!PowerSeries::expm().known_positive);
        assert!(PowerSeries::cosh().known_positive);
    }

    #[test]
    fn mean_over_circle_recovers_constant_term() {
        let fs: Vec<PowerSeries> = ["exp", "cosh", "expm", "quadexp", "lacunary{2}", "poly{3,1,2}", "expplus{2,0,-1}"]
            .iter()
            .map(|n| n.parse().unwrap())
            .collect();
        for f in fs {
            let r = 0.5;
            let n = 64;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let e = f.eval(r, 2.0 * PI * j as f64 / n as f64, &opts()).unwrap();
                acc += e.value.to_complex();
            }
            acc /= n as f64;
            let a0 = f.log_coeff(0).map(|a| a.to_complex()).unwrap_or_default();
            assert!((acc - a0).norm() < 1e-8, "{f}: {acc} vs {a0}");
        }
    }

    proptest! {
        #[test]
        fn exp_nu_is_floor(r in 1.0f64..100.0) {
            prop_assume!((r - r.round()).abs() > 1e-9);
            let (_, nu) = PowerSeries::exp().max_term(r, &ScanOptions::default()).unwrap();
            prop_assert_eq!(nu, r.floor() as u64);
        }

        #[test]
        fn nu_nondecreasing(r in 0.5f64..200.0, dr in 0.0f64..5.0, which in 0usize..4) {
            let f: PowerSeries = ["exp", "cosh", "quadexp", "lacunary{2}"][which].parse().unwrap();
            let o = ScanOptions::default();
            let (_, a) = f.max_term(r, &o).unwrap();
            let (_, b) = f.max_term(r + dr, &o).unwrap();
            prop_assert!(a <= b);
        }

        #[test]
        fn max_term_at_most_modulus(r in 0.5f64..300.0, which in 0usize..4) {
            let f: PowerSeries = ["exp", "cosh", "quadexp", "lacunary{2}"][which].parse().unwrap();
            let o = ScanOptions::default();
            let (lm, _) = f.max_term(r, &o).unwrap();
            let e = f.eval(r, 0.0, &o).unwrap();
            prop_assert!(lm <= e.value.log_mag + 1e-12 * lm.abs().max(1.0));
        }
    }
}
