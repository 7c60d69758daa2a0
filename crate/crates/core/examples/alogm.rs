//! Radii where a(r) exceeds ψ(ln M(r)), measured in ln r.
use std::f64::consts::E;

use wvlab::entire::{GrowthOptions, PowerSeries};
use wvlab::numeric::geometric_grid;
use wvlab::WeightFunction;

fn main() -> wvlab::Result<()> {
    let psi: WeightFunction = "m=1,alpha=2,t0=e".parse()?;
    let radii = geometric_grid(E.powi(2), E.powi(10), 200);
    for f in [PowerSeries::exp(), PowerSeries::cosh(), "lacunary{2}".parse()?] {
        let rep = f.profile(&radii, &psi, &GrowthOptions::default()).alog_m_scan(&psi);
        println!("{f}: {} intervals, measure {:.4}", rep.intervals.len(), rep.total_measure);
    }
    Ok(())
}
