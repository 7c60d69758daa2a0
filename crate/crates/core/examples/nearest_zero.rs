//! Nearest zeros of the product and the largest gap d(r) against 9r/√A2(r).
use wvlab::counterexample::{ProductFunction, ZeroSet};
use wvlab::{GrowthScales, WeightFunction};

fn main() -> wvlab::Result<()> {
    let toy = ZeroSet::new(vec![(1.0, 6), (2.0, 8), (3.0, 10)])?;
    println!("toy d(2) = {:?}, chord = {}", toy.d_max(2.0), 4.0 * (std::f64::consts::PI / 16.0).sin());

    let psi = WeightFunction::new(1, 1.0, 5f64.exp())?;
    let pf = ProductFunction::construct(GrowthScales::build(psi, 2.6, 256)?, 2.5)?;
    for r in [1.5, 2.0, 2.5] {
        let (d, theta) = pf.d_max(r)?;
        let z = pf.nearest_zero(r, theta)?;
        println!(
            "r={r}: d={d:.6e} at θ={theta:.6} (circle {}), 9r/√A2 = {:.6e}",
            z.k,
            pf.distance_bound(r)?
        );
    }
    Ok(())
}
