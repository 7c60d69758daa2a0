use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use wvlab::borel::{scan_lemma21, scan_lemma22, Mode, MonotoneSample, Sigma};
use wvlab::counterexample::ProductFunction;
use wvlab::entire::{GrowthOptions, PowerSeries};
use wvlab::numeric::geometric_grid;
use wvlab::scales::{GrowthScales, DEFAULT_PTS_PER_DECADE};
use wvlab::verify::{sweep, DiskOptions, DEFAULT_TOL};
use wvlab::weights::parse_t0;
use wvlab::{Error, WeightFunction};

#[derive(Parser)]
#[command(name = "wvlab", version, about = "Maximum modulus, flat disks and exceptional sets")]
struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Growth profile CSV: maximum term, central index, log M and a(r).
    Profile(ProfileArgs),
    /// Flat-disk verification sweep.
    Verify(VerifyArgs),
    /// Build the zero-circle product and print its summary.
    Construct(ConstructArgs),
    /// Nearest-zero certificates on a circle.
    Zeros(ZerosArgs),
    /// Exceptional-set scan for a monotone or convex sample.
    Borel(BorelArgs),
    /// Growth-scale tables.
    Scales {
        #[command(subcommand)]
        action: ScalesAction,
    },
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long = "fn")]
    function: Option<String>,
    /// lo:hi:n
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "fn")]
    function: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Boundary angles per disk.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    ppd: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    ppd: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BorelArgs {
    /// Monotone function: exp, step or const.
    #[arg(long = "T")]
    t: Option<String>,
    /// Convex function for the second scan: linear, square or exp.
    #[arg(long)]
    phi: Option<String>,
    /// lo:hi[:n]
    #[arg(long)]
    range: Option<String>,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScalesAction {
    Export {
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        ppd: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Values read from `--config`; command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    #[serde(rename = "fn")]
    function: Option<String>,
    r: Option<toml::Value>,
    psi: Option<String>,
    tol: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    summary: Option<PathBuf>,
    rmax: Option<f64>,
    ppd: Option<usize>,
    angles: Option<usize>,
    #[serde(rename = "T")]
    t: Option<String>,
    phi: Option<String>,
    range: Option<String>,
    epsilon: Option<f64>,
    format: Option<String>,
}

/// Usage errors exit with 2, failed checks with 1.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn required<T>(v: Option<T>, name: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| usage(format!("missing --{name}")))
}

fn number(text: &str) -> std::result::Result<f64, Failure> {
    parse_t0(text.trim()).map_err(|_| usage(format!("bad number '{text}'")))
}

/// `lo:hi[:n]` with numbers in any form accepted for `t0` (`e2`, `exp(3)`, …).
fn parse_range(text: &str, default_n: usize) -> std::result::Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let (lo, hi, n) = match parts.as_slice() {
        [lo, hi] => (number(lo)?, number(hi)?, default_n),
        [lo, hi, n] => (
            number(lo)?,
            number(hi)?,
            n.trim().parse().map_err(|_| usage(format!("bad point count '{n}'")))?,
        ),
        _ => return Err(usage(format!("expected lo:hi[:n], got '{text}'"))),
    };
    if !(lo > 0.0 && hi >= lo) {
        return Err(usage(format!("range must satisfy 0 < lo ≤ hi, got '{text}'")));
    }
    Ok((lo, hi, n))
}

fn parse_psi(text: &str) -> std::result::Result<WeightFunction, Failure> {
    text.parse::<WeightFunction>()
        .map_err(|e| usage(format!("bad psi spec '{text}': {e}")))
}

fn parse_fn(text: &str) -> std::result::Result<PowerSeries, Failure> {
    text.parse::<PowerSeries>()
        .map_err(|e| usage(format!("unknown function '{text}': {e}")))
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn range_text(v: Option<toml::Value>) -> std::result::Result<Option<String>, Failure> {
    match v {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s)),
        Some(toml::Value::Float(x)) => Ok(Some(x.to_string())),
        Some(toml::Value::Integer(x)) => Ok(Some(x.to_string())),
        Some(other) => Err(usage(format!("bad value for r in config: {other}"))),
    }
}

fn cmd_profile(a: ProfileArgs, cfg: ExperimentConfig) -> Outcome {
    let f = parse_fn(&required(a.function.or(cfg.function), "fn")?)?;
    let (lo, hi, n) = parse_range(&required(a.r.or(range_text(cfg.r)?), "r")?, 64)?;
    let psi = parse_psi(&required(a.psi.or(cfg.psi), "psi")?)?;
    let radii = if n == 0 { Vec::new() } else { geometric_grid(lo, hi, n) };
    let profile = f.profile(&radii, &psi, &GrowthOptions::default());
    let mut out = open_out(a.out.or(cfg.out).as_deref())?;
    profile.write_csv(&mut out)?;
    out.flush()?;
    let failed = profile.failed_rows();
    if failed > 0 {
        eprintln!("{failed} row(s) could not be computed");
    }
    Ok(failed == 0)
}

fn cmd_verify(a: VerifyArgs, cfg: ExperimentConfig) -> Outcome {
    let f = parse_fn(&required(a.function.or(cfg.function), "fn")?)?;
    let (lo, hi, n) = parse_range(&required(a.r.or(range_text(cfg.r)?), "r")?, 64)?;
    let psi = parse_psi(&required(a.psi.or(cfg.psi), "psi")?)?;
    let opts = DiskOptions {
        tol: a.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL),
        n_angles: a.samples.or(cfg.samples).unwrap_or(64),
        ..DiskOptions::default()
    };
    let report = sweep(&f, &psi, lo, hi, n, &opts, a.seed.or(cfg.seed))?;
    let mut out = open_out(a.out.or(cfg.out).as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;
    let json = report.summary_json();
    match a.summary.or(cfg.summary) {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => eprintln!("{json}"),
    }
    Ok(report.failing == 0)
}

fn default_product_psi() -> WeightFunction {
    WeightFunction::new(1, 1.0, 5f64.exp()).expect("valid weight")
}

fn build_product(psi: Option<String>, rmax: f64, ppd: Option<usize>) -> std::result::Result<ProductFunction, Failure> {
    let psi = match psi {
        Some(p) => parse_psi(&p)?,
        None => default_product_psi(),
    };
    let scales = GrowthScales::build(psi, 1.05 * rmax, ppd.unwrap_or(DEFAULT_PTS_PER_DECADE))?;
    Ok(ProductFunction::construct(scales, rmax)?)
}

fn cmd_construct(a: ConstructArgs, cfg: ExperimentConfig) -> Outcome {
    let rmax = required(a.rmax.or(cfg.rmax), "rmax")?;
    let pf = build_product(a.psi.or(cfg.psi), rmax, a.ppd.or(cfg.ppd))?;
    let json = serde_json::to_string_pretty(&pf.summary(rmax)).expect("summary serializes");
    let mut out = open_out(a.out.or(cfg.out).as_deref())?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(true)
}

fn cmd_zeros(a: ZerosArgs, cfg: ExperimentConfig) -> Outcome {
    let r = match a.r {
        Some(r) => r,
        None => number(&required(range_text(cfg.r)?, "r")?)?,
    };
    let pf = build_product(a.psi.or(cfg.psi), r, a.ppd.or(cfg.ppd))?;
    let mut out = open_out(a.out.or(cfg.out).as_deref())?;
    let all = pf.write_zeros_csv(r, a.angles.or(cfg.angles).unwrap_or(256), &mut out)?;
    out.flush()?;
    Ok(all)
}

fn cmd_borel(a: BorelArgs, cfg: ExperimentConfig) -> Outcome {
    let (lo, hi, n) = parse_range(&required(a.range.or(cfg.range), "range")?, 4001)?;
    let t = a.t.or(cfg.t);
    let phi = a.phi.or(cfg.phi);
    let report = match (t, phi) {
        (Some(t), None) => {
            let mid = 0.5 * (lo + hi);
            let (sample, s1, s2) = match t.as_str() {
                "exp" => (
                    MonotoneSample::from_fn(f64::exp, lo, hi, n, Mode::Linear)?,
                    Sigma::PowerLog { c: 1.0, p: 0.5, q: 2.0 },
                    Sigma::Power { c: 1.0, p: 0.5 },
                ),
                "step" => (
                    MonotoneSample::from_fn(|x| if x < mid { 10.0 } else { 1000.0 }, lo, hi, n, Mode::Step)?,
                    Sigma::Power { c: 1.0, p: 0.75 },
                    Sigma::Power { c: 1.0, p: 0.5 },
                ),
                "const" => (
                    MonotoneSample::from_fn(|_| 50.0, lo, hi, n, Mode::Linear)?,
                    Sigma::Power { c: 1.0, p: 0.75 },
                    Sigma::Power { c: 1.0, p: 0.5 },
                ),
                other => return Err(usage(format!("unknown --T '{other}' (exp, step, const)"))),
            };
            scan_lemma21(&sample, &s1, &s2, 0.5)?
        }
        (None, Some(phi)) => {
            let f: fn(f64) -> f64 = match phi.as_str() {
                "linear" => |x| 30.0 * x + 1.0,
                "square" => |x| x * x,
                "exp" => f64::exp,
                other => return Err(usage(format!("unknown --phi '{other}' (linear, square, exp)"))),
            };
            let psi = match a.psi.or(cfg.psi) {
                Some(p) => parse_psi(&p)?,
                None => WeightFunction::new(1, 2.0, 3f64.exp())?,
            };
            let sample = MonotoneSample::from_fn(f, lo, hi, n, Mode::Linear)?;
            scan_lemma22(&sample, &psi, a.epsilon.or(cfg.epsilon).unwrap_or(0.5))?
        }
        _ => return Err(usage("give exactly one of --T and --phi")),
    };
    let mut out = open_out(a.out.or(cfg.out).as_deref())?;
    writeln!(out, "{}", report.to_json())?;
    out.flush()?;
    Ok(report.within_bound().unwrap_or(true))
}

fn cmd_scales(action: ScalesAction, cfg: ExperimentConfig) -> Outcome {
    let ScalesAction::Export {
        format,
        psi,
        rmax,
        ppd,
        out,
    } = action;
    let format = format.or(cfg.format).unwrap_or_else(|| "csv".into());
    if format != "csv" {
        return Err(usage(format!("unsupported format '{format}' (csv)")));
    }
    let psi = match psi.or(cfg.psi) {
        Some(p) => parse_psi(&p)?,
        None => default_product_psi(),
    };
    let rmax = required(rmax.or(cfg.rmax), "rmax")?;
    let scales = GrowthScales::build(psi, rmax, ppd.or(cfg.ppd).unwrap_or(DEFAULT_PTS_PER_DECADE))?;
    let ok = scales.check_invariants().map_err(|e| eprintln!("{e}")).is_ok();
    let mut w = open_out(out.or(cfg.out).as_deref())?;
    scales.write_csv(&mut w)?;
    w.flush()?;
    Ok(ok)
}

fn load_config(path: Option<&Path>) -> std::result::Result<ExperimentConfig, Failure> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

fn run(cli: Cli) -> Outcome {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Profile(a) => cmd_profile(a, cfg),
        Command::Verify(a) => cmd_verify(a, cfg),
        Command::Construct(a) => cmd_construct(a, cfg),
        Command::Zeros(a) => cmd_zeros(a, cfg),
        Command::Borel(a) => cmd_borel(a, cfg),
        Command::Scales { action } => cmd_scales(action, cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
