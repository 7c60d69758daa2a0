//! a(r) from finite differences of ln M and from z f′/f, plus a short profile CSV.
use wvlab::entire::{GrowthOptions, PowerSeries};
use wvlab::numeric::geometric_grid;
use wvlab::WeightFunction;

fn main() -> wvlab::Result<()> {
    let go = GrowthOptions::default();
    for (f, r) in [(PowerSeries::exp(), 25.0), (PowerSeries::cosh(), 5.0), (PowerSeries::expm(), 8.0)] {
        let mm = f.max_modulus(r, go.angular_budget, &go.scan)?;
        let (fd, ld) = f.log_derivative_checked(r, &go)?;
        println!(
            "{f}: r={r} ln M={:.10} θ*={:.6} a_fd={:.10} (±{:.1e}) a_logd={:.10}",
            mm.log_m, mm.theta, fd.value, fd.error, ld.value
        );
    }
    let psi: WeightFunction = "m=1,alpha=2,t0=e".parse()?;
    let profile = PowerSeries::cosh().profile(&geometric_grid(1.0, 100.0, 8), &psi, &go);
    profile.write_csv(std::io::stdout().lock()).expect("stdout");
    Ok(())
}
