//! Flat-disk check for exp against its closed form, then a sweep over [e², e⁶].
use std::f64::consts::E;

use wvlab::entire::PowerSeries;
use wvlab::verify::{sweep, verify_disk, DiskOptions};
use wvlab::WeightFunction;

fn main() -> wvlab::Result<()> {
    let psi = WeightFunction::new(1, 2.0, E)?;
    let opts = DiskOptions::default();
    let rep = verify_disk(&PowerSeries::exp(), 100.0, &psi, &opts)?;
    let delta: f64 = 10.0 / 100f64.ln();
    let closed = (delta - 100.0 * (1.0 + delta / 100.0).ln()).exp() - 1.0;
    println!("r=100: radius {:.6}, max deviation {:.6}, real-axis value {closed:.6}", rep.radius_tested, rep.max_deviation);

    for k in [1, 5, 50] {
        let rep = verify_disk(&PowerSeries::monomial(k), 10.0, &psi, &opts)?;
        println!("z^{k}: deviation {:.1e}", rep.max_deviation);
    }

    let report = sweep(&PowerSeries::exp(), &psi, E.powi(2), E.powi(6), 16, &opts, None)?;
    report.write_csv(std::io::stdout().lock()).expect("stdout");
    println!("{}", report.summary_json());
    Ok(())
}
