//! Maximum term and central index of a few series, including a lacunary one.
use wvlab::{PowerSeries, ScanOptions};

fn main() -> wvlab::Result<()> {
    let opts = ScanOptions::default();
    for name in ["exp", "cosh", "quadexp", "lacunary{2}", "poly{1,0,3}"] {
        let f: PowerSeries = name.parse()?;
        print!("{name:>12}:");
        for r in [2.5, 10.0, 100.0, 1e3] {
            let (log_mu, nu) = f.max_term(r, &opts)?;
            print!("  r={r:e} ln μ={log_mu:.4} ν={nu}");
        }
        println!();
    }
    // Equal terms at integer r resolve to the larger index.
    println!("exp at r=10: ν = {}", PowerSeries::exp().max_term(10.0, &opts)?.1);
    Ok(())
}
