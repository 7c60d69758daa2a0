//! Builds the A0..A3, g, h tables for ψ = t log t from t0 = e⁵ and spot-checks them.
use wvlab::{GrowthScales, Scale, WeightFunction};

fn main() -> wvlab::Result<()> {
    let psi = WeightFunction::new(1, 1.0, 5f64.exp())?;
    let scales = GrowthScales::build(psi, 3.0, 256)?;
    scales.check_invariants()?;
    println!("L_est = {}", scales.l_est);
    println!("{:>6} {:>14} {:>14} {:>14} {:>10}", "r", "A0", "A1", "e^{5r}", "g");
    for r in [1.0, 1.5, 2.0, 2.5, 3.0] {
        println!(
            "{r:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.4}",
            scales.eval(Scale::A0, r)?,
            scales.eval(Scale::A1, r)?,
            (5.0 * r).exp(),
            scales.eval(Scale::G, r)?
        );
    }
    let t = scales.eval(Scale::G, 2.0)?;
    println!("h(g(2)) = {}", scales.eval_h(t)?);
    println!("rho(2.5) = {}, A2(rho r)/A2(r) = {}", scales.rho(2.5)?, scales.kappa1_ratio(2.5)?);
    Ok(())
}
