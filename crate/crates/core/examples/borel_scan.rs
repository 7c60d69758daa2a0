//! Exceptional-set scans: a monotone T against the covering bound, and convex Φ.
use std::f64::consts::E;

use wvlab::borel::{scan_lemma21, scan_lemma22, sigma_pair_from_psi, Mode, MonotoneSample, Sigma};
use wvlab::WeightFunction;

fn main() -> wvlab::Result<()> {
    let s1 = Sigma::Power { c: 1.0, p: 0.75 };
    let s2 = Sigma::Power { c: 1.0, p: 0.5 };
    let step = MonotoneSample::from_fn(|x| if x < 5.0 { 10.0 } else { 1000.0 }, 0.0, 10.0, 2001, Mode::Step)?;
    let rep = scan_lemma21(&step, &s1, &s2, 0.5)?;
    println!("step: {}", rep.to_json());

    let t = MonotoneSample::from_fn(f64::exp, 1.0, 30.0, 4001, Mode::Linear)?;
    let rep = scan_lemma21(&t, &Sigma::PowerLog { c: 1.0, p: 0.5, q: 2.0 }, &s2, 0.5)?;
    println!("exp: measure {} bound {:?}", rep.total_measure, rep.theoretical_bound);

    let psi = WeightFunction::new(1, 2.0, 3f64.exp())?;
    let (sigma, _, k) = sigma_pair_from_psi(&psi, None)?;
    println!("V^(K/2)√ψ with K = {k}: σ(e^4) = {}", sigma.eval(4f64.exp())?);
    for (name, f) in [("linear", (|x| 30.0 * x + 1.0) as fn(f64) -> f64), ("square", |x| x * x), ("exp", f64::exp)] {
        let phi = MonotoneSample::from_fn(f, E, 30.0, 8001, Mode::Linear)?;
        let rep = scan_lemma22(&phi, &psi, 0.5)?;
        println!("Φ = {name}: flagged {:.4} over {} intervals, bound {:?}", rep.total_measure, rep.intervals.len(), rep.theoretical_bound);
    }
    Ok(())
}
