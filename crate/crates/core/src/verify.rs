//! Flat-disk checks: on the disk `|z − z_r| ≤ r/√ψ(a)` the quotient
//! `f(z)·(z_r/z)^a / f(z_r)` should stay close to 1.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::borel::flagged_cells;
use crate::counterexample::ProductFunction;
use crate::entire::{GrowthOptions, PowerSeries};
use crate::error::{Error, Result};
use crate::numeric::geometric_grid;
use crate::scales::Scale;
use crate::weights::WeightFunction;

/// Fraction of excluded samples beyond which a disk fails outright.
pub const MAX_EXCLUDED: f64 = 0.1;

pub const DEFAULT_TOL: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct DiskReport {
    pub r: f64,
    /// Argument of the maximizer `z_r`.
    pub theta_star: f64,
    pub a_used: f64,
    pub radius_tested: f64,
    pub n_samples: usize,
    pub max_deviation: f64,
    pub pass: bool,
    pub excluded: usize,
    pub exceptional_flag: bool,
}

/// One sample of the comparison quotient.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiskSample {
    pub z: [f64; 2],
    pub deviation: f64,
}

/// `|e^{x+iy} − 1|` without cancellation for small `x, y`.
fn exp_minus_one_abs(x: f64, y: f64) -> f64 {
    let s = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * s * s;
    let im = x.exp() * y.sin();
    re.hypot(im)
}

/// Sampling options shared by [`verify_disk`] and [`sweep`].
#[derive(Debug, Clone, Copy)]
pub struct DiskOptions {
    /// Boundary angles; the half-radius ring uses the same count.
    pub n_angles: usize,
    pub tol: f64,
    pub growth: GrowthOptions,
    /// Rotation of the sample angles, in units of one angular step.
    pub phase_offset: f64,
}

impl Default for DiskOptions {
    fn default() -> Self {
        Self {
            n_angles: 64,
            tol: DEFAULT_TOL,
            growth: GrowthOptions::default(),
            phase_offset: 0.0,
        }
    }
}

/// Quotient deviations on the boundary and half-radius rings of the disk at `r`.
pub fn disk_samples(
    f: &PowerSeries,
    r: f64,
    psi: &WeightFunction,
    opts: &DiskOptions,
) -> Result<(DiskReport, Vec<Option<DiskSample>>)> {
    if opts.n_angles == 0 {
        return Err(Error::Domain("need at least one sample angle".into()));
    }
    let go = &opts.growth;
    let mm = f.max_modulus(r, go.angular_budget, &go.scan)?;
    let a = mm.eval.zdf_over_f.re;
    let radius = r / psi.eval(a.max(psi.t0))?.sqrt();
    let z_r = Complex64::from_polar(r, mm.theta);
    let log_fr = mm.eval.value;
    let mut samples = Vec::with_capacity(2 * opts.n_angles);
    for ring in [1.0, 0.5] {
        for j in 0..opts.n_angles {
            let phi = 2.0 * PI * (j as f64 + opts.phase_offset) / opts.n_angles as f64;
            let z = z_r + Complex64::from_polar(ring * radius, phi);
            let sample = f.eval(z.norm(), z.arg(), &go.scan).ok().map(|e| {
                let w = z / z_r;
                let x = e.value.log_mag - log_fr.log_mag - a * w.norm().ln();
                let y = e.value.phase - log_fr.phase - a * w.arg();
                DiskSample {
                    z: [z.re, z.im],
                    deviation: exp_minus_one_abs(x, y),
                }
            });
            samples.push(sample);
        }
    }
    let excluded = samples.iter().filter(|s| s.is_none()).count();
    let max_deviation = samples
        .iter()
        .flatten()
        .map(|s| s.deviation)
        .fold(0.0, f64::max);
    let too_many = excluded as f64 > MAX_EXCLUDED * samples.len() as f64;
    let pass = !too_many && max_deviation <= opts.tol;
    let report = DiskReport {
        r,
        theta_star: mm.theta,
        a_used: a,
        radius_tested: radius,
        n_samples: samples.len(),
        max_deviation,
        pass,
        excluded,
        exceptional_flag: !pass,
    };
    Ok((report, samples))
}

pub fn verify_disk(f: &PowerSeries, r: f64, psi: &WeightFunction, opts: &DiskOptions) -> Result<DiskReport> {
    disk_samples(f, r, psi, opts).map(|(rep, _)| rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub function: String,
    pub psi: String,
    pub tol: f64,
    pub rows: Vec<DiskReport>,
    /// `Σ Δ ln r` over failing cells (half-cell convention).
    pub exceptional_log_measure: f64,
    pub failing: usize,
    /// Whether `max_deviation` decreases along the grid.
    pub decreasing: bool,
}

/// Runs [`verify_disk`] on a geometric grid. A seed rotates each row's sample
/// angles by a random fraction of one step.
pub fn sweep(
    f: &PowerSeries,
    psi: &WeightFunction,
    r_lo: f64,
    r_hi: f64,
    pts: usize,
    opts: &DiskOptions,
    seed: Option<u64>,
) -> Result<SweepReport> {
    if !(r_lo > 0.0 && r_hi >= r_lo) {
        return Err(Error::Domain(format!("need 0 < r_lo ≤ r_hi, got [{r_lo}, {r_hi}]")));
    }
    let radii = if pts == 0 { Vec::new() } else { geometric_grid(r_lo, r_hi, pts) };
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut rows = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut o = *opts;
        if let Some(rng) = rng.as_mut() {
            o.phase_offset = rng.gen::<f64>();
        }
        let row = match verify_disk(f, r, psi, &o) {
            Ok(row) => row,
            Err(_) => DiskReport {
                r,
                theta_star: f64::NAN,
                a_used: f64::NAN,
                radius_tested: f64::NAN,
                n_samples: 2 * o.n_angles,
                max_deviation: f64::NAN,
                pass: false,
                excluded: 2 * o.n_angles,
                exceptional_flag: true,
            },
        };
        rows.push(row);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let flags: Vec<bool> = rows.iter().map(|row| !row.pass).collect();
    let exceptional_log_measure = flagged_cells(&xs, &flags).iter().fold(0.0, |acc, iv| acc + (iv[1] - iv[0]));
    let decreasing = rows.windows(2).all(|w| w[1].max_deviation < w[0].max_deviation);
    Ok(SweepReport {
        function: f.name.clone(),
        psi: psi.to_string(),
        tol: opts.tol,
        failing: flags.iter().filter(|&&b| b).count(),
        rows,
        exceptional_log_measure,
        decreasing,
    })
}

impl SweepReport {
    /// `r,a,radius,max_deviation,verdict,excluded_samples`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,a,radius,max_deviation,verdict,excluded_samples")?;
        for row in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                row.r,
                row.a_used,
                row.radius_tested,
                row.max_deviation,
                if row.pass { "pass" } else { "fail" },
                row.excluded
            )?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        let v = serde_json::json!({
            "function": self.function,
            "psi": self.psi,
            "tol": self.tol,
            "rows": self.rows.len(),
            "failing": self.failing,
            "exceptional_log_measure": self.exceptional_log_measure,
            "max_deviation": self.rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max),
            "deviation_decreasing": self.decreasing,
        });
        serde_json::to_string_pretty(&v).expect("summary serializes")
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticsRow {
    pub r: f64,
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    pub a_ratio: f64,
    /// `a_num` from the central difference of the midpoint bound.
    pub a_num: f64,
    /// `A0 − t0·ln r − sumF bound`, divided by `A0`.
    pub lower_floor_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsTable {
    pub rows: Vec<AsymptoticsRow>,
    /// `|1 − ratio|` at the first and last rows of the final decade (or the whole range).
    pub lower_drift: [f64; 2],
    pub upper_drift: [f64; 2],
    pub a_drift: [f64; 2],
}

/// Step in `ln r` for the numerical `a(r)` of the product.
pub const ASYMPTOTICS_STEP: f64 = 1e-3;

fn midpoint_log_m(pf: &ProductFunction, r: f64) -> Result<f64> {
    Ok(0.5 * (pf.log_m_lower(r)? + pf.log_m_upper(r)?.total))
}

/// `a(r)` of the product from the midpoint of its `log M` bounds.
pub fn product_log_derivative(pf: &ProductFunction, r: f64) -> Result<f64> {
    let eta = ASYMPTOTICS_STEP;
    let hi = (r * eta.exp()).min(pf.r_max_valid);
    let lo = r * (-eta).exp();
    Ok((midpoint_log_m(pf, hi)? - midpoint_log_m(pf, lo)?) / (hi.ln() - lo.ln()))
}

/// Ratios to `A0` and `A1` on a geometric grid from `h(2)` to `r_max_valid`.
pub fn check_asymptotics(pf: &ProductFunction, pts: usize) -> Result<AsymptoticsTable> {
    let scales = pf.scales();
    let r_lo = pf.radius(2);
    let radii = geometric_grid(r_lo, pf.r_max_valid, pts.max(2));
    let mut rows = Vec::with_capacity(radii.len());
    for r in radii {
        let a0 = scales.eval(Scale::A0, r)?;
        let a1 = scales.eval(Scale::A1, r)?;
        let a_num = product_log_derivative(pf, r)?;
        rows.push(AsymptoticsRow {
            r,
            lower_ratio: pf.log_m_lower(r)? / a0,
            upper_ratio: pf.log_m_upper(r)?.total / a0,
            a_ratio: a_num / a1,
            a_num,
            lower_floor_ratio: pf.log_m_lower_floor(r)? / a0,
        });
    }
    let last = rows.last().expect("at least two rows").r;
    let first = rows.iter().position(|row| row.r >= last / 10.0).unwrap_or(0);
    let drift = |get: fn(&AsymptoticsRow) -> f64| {
        [(1.0 - get(&rows[first])).abs(), (1.0 - get(rows.last().expect("non-empty"))).abs()]
    };
    Ok(AsymptoticsTable {
        lower_drift: drift(|row| row.lower_ratio),
        upper_drift: drift(|row| row.upper_ratio),
        a_drift: drift(|row| row.a_ratio),
        rows,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZeroDistanceCheck {
    pub r: f64,
    pub d_max: f64,
    pub a_num: f64,
    /// `9r/√ψ(a/2)`, absent while `a/2 < t0`.
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

/// Every point of `|z| = r` lies within `9r/√ψ(a(r)/2)` of a zero.
pub fn zero_distance_check(pf: &ProductFunction, r: f64) -> Result<ZeroDistanceCheck> {
    let (d_max, _) = pf.d_max(r)?;
    let a_num = product_log_derivative(pf, r)?;
    let psi = pf.scales().psi();
    let bound = if 0.5 * a_num >= psi.t0 {
        Some(9.0 * r / psi.eval(0.5 * a_num)?.sqrt())
    } else {
        None
    };
    Ok(ZeroDistanceCheck {
        r,
        d_max,
        a_num,
        bound,
        pass: bound.map(|b| d_max <= b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entire::PowerSeries;
    use crate::scales::GrowthScales;
    use std::f64::consts::E;

    fn psi2() -> WeightFunction {
        WeightFunction::new(1, 2.0, E).unwrap()
    }

    /// Deviation of the exp quotient `e^{z−r}(r/z)^r − 1` maximized over the
    /// boundary circle by dense sampling.
    fn exp_oracle(r: f64, delta: f64) -> f64 {
        (0..20000)
            .map(|j| {
                let z = Complex64::new(r, 0.0) + Complex64::from_polar(delta, 2.0 * PI * j as f64 / 20000.0);
                let l = (z - r) - r * (z / r).ln();
                (l.exp() - 1.0).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn exp_matches_oracle_at_100() {
        let rep = verify_disk(&PowerSeries::exp(), 100.0, &psi2(), &DiskOptions::default()).unwrap();
        let delta = 10.0 / 100f64.ln();
        assert!((rep.radius_tested - delta).abs() < 1e-9);
        assert!((rep.a_used - 100.0).abs() < 1e-9);
        let real_axis = (delta - 100.0 * (1.0 + delta / 100.0).ln()).exp() - 1.0;
        assert!((real_axis - 0.0233).abs() < 1e-3);
        // The sampled boundary includes both real-axis points.
        let oracle = exp_oracle(100.0, delta);
        assert!((rep.max_deviation - oracle).abs() <= 1e-6 * oracle, "{} vs {oracle}", rep.max_deviation);
        assert!(rep.pass);
    }

    #[test]
    fn exp_deviation_decreases() {
        let devs: Vec<f64> = [25.0, 100.0, 400.0]
            .iter()
            .map(|&r| verify_disk(&PowerSeries::exp(), r, &psi2(), &DiskOptions::default()).unwrap().max_deviation)
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
    }

    #[test]
    fn monomials_are_exact() {
        for k in [1, 5, 50] {
            for r in [2.0, 10.0, 100.0] {
                let rep = verify_disk(&PowerSeries::monomial(k), r, &psi2(), &DiskOptions::default()).unwrap();
                assert!(rep.max_deviation <= 1e-12, "k={k} r={r}: {}", rep.max_deviation);
                assert_eq!(rep.a_used, k as f64);
            }
        }
    }

    #[test]
    fn cosh_deviation_is_symmetric() {
        let (_, samples) = disk_samples(&PowerSeries::cosh(), 20.0, &psi2(), &DiskOptions::default()).unwrap();
        let n = 64;
        for ring in 0..2 {
            for j in 1..n {
                let a = samples[ring * n + j].unwrap();
                let b = samples[ring * n + n - j].unwrap();
                assert!((a.z[1] + b.z[1]).abs() < 1e-12);
                assert!((a.deviation - b.deviation).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_and_passes_on_exp() {
        let f = PowerSeries::exp();
        let a = sweep(&f, &psi2(), 40.0, 400.0, 12, &DiskOptions::default(), None).unwrap();
        assert_eq!(a.failing, 0);
        assert_eq!(a.exceptional_log_measure, 0.0);
        assert!(a.decreasing);
        let b = sweep(&f, &psi2(), 40.0, 400.0, 12, &DiskOptions::default(), None).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        let empty = sweep(&f, &psi2(), 20.0, 400.0, 0, &DiskOptions::default(), None).unwrap();
        assert!(empty.rows.is_empty());
        let j1 = sweep(&f, &psi2(), 20.0, 40.0, 3, &DiskOptions::default(), Some(7)).unwrap();
        let j2 = sweep(&f, &psi2(), 20.0, 40.0, 3, &DiskOptions::default(), Some(7)).unwrap();
        assert_eq!(j1.summary_json(), j2.summary_json());
    }

    #[test]
    fn lacunary_sweep_reports_finite_measure() {
        let f: PowerSeries = "lacunary{2}".parse().unwrap();
        let opts = DiskOptions {
            tol: 0.1,
            ..DiskOptions::default()
        };
        let rep = sweep(&f, &psi2(), 8.0, 400.0, 24, &opts, None).unwrap();
        assert!(rep.exceptional_log_measure.is_finite());
        assert!(rep.exceptional_log_measure <= (400f64 / 8.0).ln());
    }

    #[test]
    fn product_asymptotics_small_instance() {
        let psi = WeightFunction::new(1, 1.0, 5f64.exp()).unwrap();
        let pf = ProductFunction::construct(GrowthScales::build(psi, 2.2, 256).unwrap(), 2.0).unwrap();
        let table = check_asymptotics(&pf, 16).unwrap();
        for row in &table.rows {
            assert!(row.lower_ratio <= row.upper_ratio);
            assert!(row.lower_ratio >= row.lower_floor_ratio);
        }
        let last = table.rows.last().unwrap();
        assert!(last.lower_ratio > 0.5 && last.upper_ratio < 1.5);
        let chk = zero_distance_check(&pf, 1.9).unwrap();
        assert!(chk.d_max > 0.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn monomials_exact_on_every_disk(k in 1u64..60, r in 2.0f64..100.0, phase in 0.0f64..1.0) {
            let opts = DiskOptions { phase_offset: phase, ..DiskOptions::default() };
            let rep = verify_disk(&PowerSeries::monomial(k), r, &psi2(), &opts).unwrap();
            proptest::prop_assert!(rep.max_deviation <= 1e-12, "{rep:?}");
        }
    }
}
