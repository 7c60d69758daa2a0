//! Classifies a few weight functions and prints their regularity constants.
use wvlab::WeightFunction;

fn main() -> wvlab::Result<()> {
    for spec in ["m=1,alpha=2,t0=e", "m=1,alpha=1,t0=e5", "m=2,alpha=1.5", "m=3,alpha=1"] {
        let psi: WeightFunction = spec.parse()?;
        let class = psi.classify(1e300);
        let (k, l) = psi.regularity_bounds(psi.t0, 1e300, 2000)?;
        println!("{psi}: {:?}, ∫dt/ψ up to 1e300 = {:.6}, K = {k:.4}, L = {l:.4}", class.growth, class.integral.value);
        if let Ok(v) = psi.tail_integral(psi.t0) {
            println!("    V(t0) = {v:.6}");
        }
    }
    Ok(())
}
