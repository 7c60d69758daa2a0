//! The zero-circle product for ψ = t log t: bounds for ln M and the minimum modulus.
use wvlab::counterexample::ProductFunction;
use wvlab::verify::check_asymptotics;
use wvlab::{GrowthScales, WeightFunction};

fn main() -> wvlab::Result<()> {
    let psi = WeightFunction::new(1, 1.0, 5f64.exp())?;
    let pf = ProductFunction::construct(GrowthScales::build(psi, 3.15, 256)?, 3.0)?;
    println!("{}", serde_json::to_string_pretty(&pf.summary(3.0)).expect("json"));

    let table = check_asymptotics(&pf, 12)?;
    println!("{:>8} {:>10} {:>10} {:>10}", "r", "N/A0", "S/A0", "a/A1");
    for row in &table.rows {
        println!("{:>8.4} {:>10.6} {:>10.6} {:>10.6}", row.r, row.lower_ratio, row.upper_ratio, row.a_ratio);
    }

    let n = pf.last_feasible_n();
    for n in [n / 4, n / 2, n] {
        let mm = pf.min_modulus_at_rn(n, 1024, 10.0)?;
        println!(
            "n={n}: r_n={:.6} termwise {:.4} certified {:.4} sampled {:.4}",
            mm.r_n, mm.termwise_bound, mm.certified_bound, mm.sampled_min
        );
    }
    Ok(())
}
