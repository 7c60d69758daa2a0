//! Entire functions from power-series coefficients: maximum term, central
//! index, maximum modulus and the logarithmic derivative `a(r)`.

mod series;

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

pub use series::{window, Evaluation, Kind, PowerSeries, ScanOptions, PRECISION_FLOOR};

use crate::borel::ExceptionalSetReport;
use crate::error::{Error, Result};
use crate::numeric::golden_max;
use crate::weights::{Growth, WeightFunction};

/// Angular tolerance for the maximum-modulus refinement.
pub const ANGLE_TOL: f64 = 1e-10;

pub const MIN_BUDGET: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct MaxModulus {
    pub log_m: f64,
    /// Maximizing angle in `[0, 2π)`.
    pub theta: f64,
    pub eval: Evaluation,
}

impl PowerSeries {
    /// `ln M(r)` and a maximizing angle.
    pub fn max_modulus(&self, r: f64, angular_budget: usize, opts: &ScanOptions) -> Result<MaxModulus> {
        if angular_budget < MIN_BUDGET {
            return Err(Error::Budget(angular_budget));
        }
        if self.known_positive {
            let e = self.eval(r, 0.0, opts)?;
            return Ok(MaxModulus {
                log_m: e.value.log_mag,
                theta: 0.0,
                eval: e,
            });
        }
        let value = |theta: f64| match self.eval(r, theta, opts) {
            Ok(e) => e.value.log_mag,
            Err(_) => f64::NEG_INFINITY,
        };
        let step = 2.0 * PI / angular_budget as f64;
        let mut best = (0usize, f64::NEG_INFINITY);
        for j in 0..angular_budget {
            let v = value(j as f64 * step);
            if best.1 == f64::NEG_INFINITY || v > best.1 + 1e-12 * best.1.abs().max(1.0) {
                best = (j, v);
            }
        }
        if best.1 == f64::NEG_INFINITY {
            return Err(Error::PrecisionLoss {
                rel: PRECISION_FLOOR,
                log_bound: f64::INFINITY,
            });
        }
        let centre = best.0 as f64 * step;
        let (theta, v) = golden_max(value, centre - step, centre + step, ANGLE_TOL);
        let theta = if v >= best.1 { theta } else { centre };
        let theta = self.polish_angle(r, theta, step, opts);
        let theta = theta.rem_euclid(2.0 * PI);
        let theta = if theta >= 2.0 * PI - 0.5 * ANGLE_TOL { 0.0 } else { theta };
        let e = self.eval(r, theta, opts)?;
        Ok(MaxModulus {
            log_m: e.value.log_mag,
            theta,
            eval: e,
        })
    }
}

impl PowerSeries {
    /// Secant steps on `∂θ ln|f| = −Im(z f′/f)`, which locates the maximizer
    /// far more sharply than comparing values of the flat maximum.
    fn polish_angle(&self, r: f64, theta: f64, step: f64, opts: &ScanOptions) -> f64 {
        let slope = |t: f64| self.eval(r, t, opts).map(|e| (e.value.log_mag, -e.zdf_over_f.im));
        let Ok((v0, mut g0)) = slope(theta) else {
            return theta;
        };
        let mut t0 = theta;
        let mut t1 = theta + 1e-7;
        let Ok((_, mut g1)) = slope(t1) else {
            return theta;
        };
        for _ in 0..8 {
            if g1 == g0 {
                break;
            }
            let t2 = t1 - g1 * (t1 - t0) / (g1 - g0);
            if !t2.is_finite() || (t2 - theta).abs() > step {
                return theta;
            }
            let Ok((_, g2)) = slope(t2) else {
                return theta;
            };
            (t0, g0, t1, g1) = (t1, g1, t2, g2);
            if (t1 - t0).abs() < 1e-15 {
                break;
            }
        }
        match slope(t1) {
            Ok((v, _)) if v >= v0 - 1e-13 * v0.abs().max(1.0) => t1,
            _ => theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    FiniteDiff,
    Logd,
}

/// How the finite-difference step in `ln r` is chosen.
#[derive(Debug, Clone, Copy)]
pub enum FdStep {
    /// `η = max(1e-6, 1/√ψ(max(ν, t0)))`.
    Psi(WeightFunction),
    /// `η = max(1e-6, 1/√(ν + 1))`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct LogDerivative {
    pub value: f64,
    /// Error estimate (finite differences) or 0 (logd).
    pub error: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthOptions {
    pub scan: ScanOptions,
    pub angular_budget: usize,
    pub step: FdStep,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self {
            scan: ScanOptions::default(),
            angular_budget: 64,
            step: FdStep::Auto,
        }
    }
}

impl PowerSeries {
    pub fn fd_step(&self, r: f64, step: FdStep, opts: &ScanOptions) -> Result<f64> {
        let nu = self.max_term(r, opts)?.1 as f64;
        Ok(match step {
            FdStep::Fixed(eta) => eta,
            FdStep::Auto => (1.0 / (nu + 1.0).sqrt()).max(1e-6),
            FdStep::Psi(psi) => (1.0 / psi.eval(nu.max(psi.t0))?.sqrt()).max(1e-6),
        })
    }

    /// `a(r)`: either the Richardson-extrapolated central difference of
    /// `ln M` in `ln r`, or `Re(z_r f′(z_r)/f(z_r))`.
    pub fn log_derivative(&self, r: f64, method: Method, go: &GrowthOptions) -> Result<LogDerivative> {
        match method {
            Method::Logd => {
                let mm = self.max_modulus(r, go.angular_budget, &go.scan)?;
                Ok(LogDerivative {
                    value: mm.eval.zdf_over_f.re,
                    error: 0.0,
                    theta: mm.theta,
                })
            }
            Method::FiniteDiff => {
                let eta = self.fd_step(r, go.step, &go.scan)?;
                let ln_r = r.ln();
                let log_m = |x: f64| -> Result<f64> {
                    Ok(self.max_modulus(x.exp(), go.angular_budget, &go.scan)?.log_m)
                };
                let centre = self.max_modulus(r, go.angular_budget, &go.scan)?;
                let mut d = [0.0; 3];
                for (i, di) in d.iter_mut().enumerate() {
                    let h = eta / (1u32 << i) as f64;
                    *di = (log_m(ln_r + h)? - log_m(ln_r - h)?) / (2.0 * h);
                }
                let r1 = (4.0 * d[1] - d[0]) / 3.0;
                let r2 = (4.0 * d[2] - d[1]) / 3.0;
                let value = (16.0 * r2 - r1) / 15.0;
                let roundoff = 16.0 * f64::EPSILON * centre.log_m.abs().max(1.0) / (eta / 4.0);
                Ok(LogDerivative {
                    value,
                    error: (value - r2).abs() + roundoff,
                    theta: centre.theta,
                })
            }
        }
    }

    /// Both routes to `a(r)`, with an error when they disagree by more than
    /// `max(1e-3·a, fd error)`.
    pub fn log_derivative_checked(&self, r: f64, go: &GrowthOptions) -> Result<(LogDerivative, LogDerivative)> {
        let fd = self.log_derivative(r, Method::FiniteDiff, go)?;
        let ld = self.log_derivative(r, Method::Logd, go)?;
        let tol = (1e-3 * ld.value.abs()).max(fd.error);
        if (fd.value - ld.value).abs() > tol {
            return Err(Error::Disagreement {
                r,
                fd: fd.value,
                logd: ld.value,
                tol,
            });
        }
        Ok((fd, ld))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub log_mu: f64,
    pub nu: u64,
    pub log_m: f64,
    pub theta_star: f64,
    pub a_fd: f64,
    pub a_fd_error: f64,
    pub a_logd: f64,
    pub disk_radius: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GrowthProfile {
    pub function: String,
    pub rows: Vec<ProfileRow>,
}

fn nan_row(r: f64, flag: String) -> ProfileRow {
    ProfileRow {
        r,
        log_mu: f64::NAN,
        nu: 0,
        log_m: f64::NAN,
        theta_star: f64::NAN,
        a_fd: f64::NAN,
        a_fd_error: f64::NAN,
        a_logd: f64::NAN,
        disk_radius: None,
        flag: Some(flag),
    }
}

impl PowerSeries {
    fn profile_row(&self, r: f64, psi: &WeightFunction, go: &GrowthOptions) -> Result<ProfileRow> {
        let (log_mu, nu) = self.max_term(r, &go.scan)?;
        let mm = self.max_modulus(r, go.angular_budget, &go.scan)?;
        let a_logd = mm.eval.zdf_over_f.re;
        let fd = self.log_derivative(r, Method::FiniteDiff, go)?;
        let disk_radius = if a_logd >= psi.t0 {
            Some(r / psi.eval(a_logd)?.sqrt())
        } else {
            None
        };
        let tol = (1e-3 * a_logd.abs()).max(fd.error);
        let flag = ((fd.value - a_logd).abs() > tol).then(|| {
            Error::Disagreement {
                r,
                fd: fd.value,
                logd: a_logd,
                tol,
            }
            .to_string()
        });
        Ok(ProfileRow {
            r,
            log_mu,
            nu,
            log_m: mm.log_m,
            theta_star: mm.theta,
            a_fd: fd.value,
            a_fd_error: fd.error,
            a_logd,
            disk_radius,
            flag,
        })
    }

    /// One row per radius; failures become row flags.
    pub fn profile(&self, radii: &[f64], psi: &WeightFunction, go: &GrowthOptions) -> GrowthProfile {
        let go = GrowthOptions {
            step: match go.step {
                FdStep::Auto => FdStep::Psi(*psi),
                s => s,
            },
            ..*go
        };
        let rows = radii
            .iter()
            .map(|&r| self.profile_row(r, psi, &go).unwrap_or_else(|e| nan_row(r, e.to_string())))
            .collect();
        GrowthProfile {
            function: self.name.clone(),
            rows,
        }
    }
}

fn fmt_f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl GrowthProfile {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,log_mu,nu,log_M,theta_star,a_fd,a_logd,disk_radius")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_f(row.r),
                fmt_f(row.log_mu),
                row.nu,
                fmt_f(row.log_m),
                fmt_f(row.theta_star),
                fmt_f(row.a_fd),
                fmt_f(row.a_logd),
                row.disk_radius.map(fmt_f).unwrap_or_default()
            )?;
        }
        Ok(())
    }

    /// Rows carrying a hard error (not just a disagreement flag).
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.log_m.is_nan()).count()
    }

    /// Violations of: ν nondecreasing, `ln M` convex in `ln r`, `a_fd` nondecreasing.
    pub fn shape_violations(&self, rel_tol: f64) -> Vec<String> {
        let rows: Vec<&ProfileRow> = self.rows.iter().filter(|r| r.log_m.is_finite()).collect();
        let mut out = Vec::new();
        for w in rows.windows(2) {
            if w[1].nu < w[0].nu {
                out.push(format!("nu decreases between r = {} and {}", w[0].r, w[1].r));
            }
            if w[1].a_fd < w[0].a_fd - rel_tol * w[0].a_fd.abs().max(1.0) - w[0].a_fd_error - w[1].a_fd_error {
                out.push(format!("a_fd decreases between r = {} and {}", w[0].r, w[1].r));
            }
        }
        for w in rows.windows(3) {
            let (x0, x1, x2) = (w[0].r.ln(), w[1].r.ln(), w[2].r.ln());
            let s01 = (w[1].log_m - w[0].log_m) / (x1 - x0);
            let s12 = (w[2].log_m - w[1].log_m) / (x2 - x1);
            if s12 < s01 - rel_tol * s01.abs().max(1.0) {
                out.push(format!("log M not convex around r = {}", w[1].r));
            }
        }
        out
    }

    /// Flags rows with `a(r) > ψ(ln M(r))` and measures the flagged set in `ln r`.
    pub fn alog_m_scan(&self, psi: &WeightFunction) -> ExceptionalSetReport {
        let rows: Vec<&ProfileRow> = self
            .rows
            .iter()
            .filter(|r| r.log_m.is_finite() && r.a_logd.is_finite())
            .collect();
        if rows.is_empty() {
            return ExceptionalSetReport::empty();
        }
        let xs: Vec<f64> = rows.iter().map(|r| r.r.ln()).collect();
        let mut excluded = 0;
        let flags: Vec<bool> = rows
            .iter()
            .map(|row| {
                let a = row.a_fd.max(row.a_logd);
                match psi.eval(row.log_m) {
                    Ok(bound) => a > bound,
                    Err(_) => {
                        excluded += 1;
                        false
                    }
                }
            })
            .collect();
        let s0 = rows
            .iter()
            .map(|r| r.log_m)
            .fold(f64::INFINITY, f64::min)
            .max(psi.t0);
        let bound = match psi.growth() {
            Growth::Convergent => psi.tail_integral(s0).ok(),
            Growth::Divergent => None,
        };
        let mut report = ExceptionalSetReport::from_cells(&xs, &flags, bound);
        report.excluded = excluded;
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn go() -> GrowthOptions {
        GrowthOptions::default()
    }

    #[test]
    fn exp_modulus_and_derivative() {
        let f = PowerSeries::exp();
        let mm = f.max_modulus(7.0, 64, &ScanOptions::default()).unwrap();
        assert!((mm.log_m - 7.0).abs() < 1e-12);
        assert_eq!(mm.theta, 0.0);
        for method in [Method::FiniteDiff, Method::Logd] {
            let a = f.log_derivative(25.0, method, &go()).unwrap();
            assert!((a.value - 25.0).abs() < 25e-8, "{method:?}: {}", a.value);
        }
    }

    #[test]
    fn expm_maximum_on_negative_axis() {
        let f = PowerSeries::expm();
        let mm = f.max_modulus(6.0, 64, &ScanOptions::default()).unwrap();
        assert!((mm.log_m - 6.0).abs() < 1e-10);
        assert!((mm.theta - PI).abs() < 1e-8);
        let a = f.log_derivative(6.0, Method::Logd, &go()).unwrap();
        assert!((a.value - 6.0).abs() < 1e-8);
    }

    #[test]
    fn cosh_derivative_closed_form() {
        let f = PowerSeries::cosh();
        let mm = f.max_modulus(5.0, 64, &ScanOptions::default()).unwrap();
        assert!((mm.log_m - 5f64.cosh().ln()).abs() < 1e-13);
        let (fd, ld) = f.log_derivative_checked(5.0, &go()).unwrap();
        let exact = 5.0 * 5f64.tanh();
        assert!((ld.value - exact).abs() < 1e-10);
        assert!((fd.value - exact).abs() <= fd.error, "{} vs {exact}, est {}", fd.value, fd.error);
        let fine = GrowthOptions {
            step: FdStep::Fixed(0.05),
            ..go()
        };
        let fd = f.log_derivative(5.0, Method::FiniteDiff, &fine).unwrap();
        assert!((fd.value - exact).abs() < 1e-8, "{} vs {exact}", fd.value);
        assert!((exact - 4.99955).abs() < 1e-5);
    }

    #[test]
    fn cosh_scan_path_accepts_either_maximizer() {
        // Force the angular scan by clearing the positivity flag.
        let mut f = PowerSeries::cosh();
        f.known_positive = false;
        let mm = f.max_modulus(5.0, 16, &ScanOptions::default()).unwrap();
        assert!((mm.log_m - 5f64.cosh().ln()).abs() < 1e-12);
        assert!(mm.theta.abs() < 1e-8 || (mm.theta - PI).abs() < 1e-8);
    }

    #[test]
    fn monomial_derivative_is_degree() {
        for k in [1, 5, 50] {
            let f = PowerSeries::monomial(k);
            for r in [0.5, 2.0, 30.0] {
                let a = f.log_derivative(r, Method::Logd, &go()).unwrap();
                assert!((a.value - k as f64).abs() < 1e-12);
                let a = f.log_derivative(r, Method::FiniteDiff, &go()).unwrap();
                assert!((a.value - k as f64).abs() < 1e-7 * k as f64);
            }
        }
    }

    #[test]
    fn budget_checked() {
        assert_eq!(
            PowerSeries::expm().max_modulus(1.0, 7, &ScanOptions::default()).unwrap_err(),
            Error::Budget(7)
        );
    }

    #[test]
    fn exp_profile_disk_radius() {
        let psi = WeightFunction::new(1, 2.0, std::f64::consts::E).unwrap();
        let p = PowerSeries::exp().profile(&[10.0, 100.0], &psi, &go());
        let d = p.rows[1].disk_radius.unwrap();
        assert!((d - 10.0 / 100f64.ln()).abs() < 1e-9);
        assert!((d - 2.1715).abs() < 1e-4);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,log_mu,nu,log_M,theta_star,a_fd,a_logd,disk_radius\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn alog_m_empty_for_exp_and_cosh() {
        let psi = WeightFunction::new(1, 2.0, std::f64::consts::E).unwrap();
        let grid = crate::numeric::geometric_grid(2f64.exp(), 10f64.exp(), 40);
        for f in [PowerSeries::exp(), PowerSeries::cosh()] {
            let p = f.profile(&grid, &psi, &go());
            let rep = p.alog_m_scan(&psi);
            assert!(rep.intervals.is_empty());
            assert_eq!(rep.total_measure, 0.0);
            assert!(rep.theoretical_bound.unwrap() > 0.0);
        }
        let empty = GrowthProfile::default().alog_m_scan(&psi);
        assert!(empty.intervals.is_empty());
    }

    #[test]
    fn profile_shape_on_test_functions() {
        let psi = WeightFunction::new(1, 2.0, std::f64::consts::E).unwrap();
        let grid = crate::numeric::geometric_grid(3.0, 300.0, 30);
        for name in ["exp", "cosh", "quadexp", "expplus{5,-1,0.5}"] {
            let f: PowerSeries = name.parse().unwrap();
            let p = f.profile(&grid, &psi, &go());
            assert_eq!(p.failed_rows(), 0, "{name}");
            assert!(p.shape_violations(1e-9).is_empty(), "{name}: {:?}", p.shape_violations(1e-9));
            let agree = p.rows.iter().filter(|r| r.flag.is_none()).count();
            assert!(agree as f64 >= 0.95 * p.rows.len() as f64, "{name}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn mu_below_modulus(r in 0.5f64..150.0, which in 0usize..5) {
            let f: PowerSeries = ["exp", "cosh", "expm", "quadexp", "poly{1,-2,3}"][which].parse().unwrap();
            let o = ScanOptions::default();
            let (lm, _) = f.max_term(r, &o).unwrap();
            let mm = f.max_modulus(r, 64, &o).unwrap();
            prop_assert!(lm <= mm.log_m + 1e-10 * lm.abs().max(1.0));
        }
    }
}
