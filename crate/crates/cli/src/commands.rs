use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use isomeasure::polytope::{body_of, mc_volume, polar_of, volume, ConvexPolytope};
use isomeasure::{
    ball_barthe_check, chain_verify_thm1, chain_verify_thm2, cross_polytope_measure, random_isotropic_measure,
    regular_simplex_measure, verify_theorem1, verify_theorem2, DiscreteMeasure, Error,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_FAILED: u8 = 4;

/// Isotropic measures on the sphere: generate, lift, measure and verify.
#[derive(Debug, Parser)]
#[command(name = "isomeasure", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an isotropic centered measure.
    Gen(GenArgs),
    /// Compare body and polar volumes with their bounds.
    Verify(VerifyArgs),
    /// Sample the transport argument for one of the bounds.
    Chain(ChainArgs),
    /// Lift a measure to the sphere one dimension up and check it.
    Lift(LiftArgs),
    /// Exact and Monte Carlo volume of the body or its polar.
    Volume(VolumeArgs),
    /// Evaluate the Ball-Barthe determinant inequality.
    #[command(name = "ballbarthe")]
    BallBarthe(BallBartheArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Simplex,
    Cross,
    Random,
}

#[derive(Debug, Args)]
struct GenArgs {
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Number of atoms (random only).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; the measure goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Which {
    T1,
    T2,
    Both,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    measure: PathBuf,
    #[arg(long, value_enum, default_value_t = Which::Both)]
    which: Which,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Bound {
    T1,
    T2,
}

#[derive(Debug, Args)]
struct ChainArgs {
    measure: PathBuf,
    #[arg(long, value_enum)]
    theorem: Bound,
    #[arg(long, default_value_t = 100_000, value_parser = parse_samples)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_samples(s: &str) -> std::result::Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v < isomeasure::transport::chain::MIN_SAMPLES {
        return Err(format!("need at least {} samples", isomeasure::transport::chain::MIN_SAMPLES));
    }
    Ok(v)
}

#[derive(Debug, Args)]
struct LiftArgs {
    measure: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VolumeArgs {
    measure: PathBuf,
    /// Measure the polar body instead of the body.
    #[arg(long)]
    polar: bool,
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["values", "values_file", "constant"])))]
struct BallBartheArgs {
    measure: PathBuf,
    /// Comma-separated positive values, one per atom.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// JSON array of positive values.
    #[arg(long)]
    values_file: Option<PathBuf>,
    /// Use the same value on every atom.
    #[arg(long)]
    constant: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Maps library errors to the documented exit codes.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible { .. }) => EXIT_INFEASIBLE,
        Some(
            Error::NotIsotropic { .. }
            | Error::Precondition(_)
            | Error::Unbounded(_)
            | Error::Degenerate(_)
            | Error::DimensionTooLarge { .. }
            | Error::SupportTooLarge { .. },
        ) => EXIT_PRECONDITION,
        _ => EXIT_USAGE,
    }
}

fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(DiscreteMeasure::from_json(&text)?)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `value` to `out`, or prints it when no path is given.
fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = to_json(value)?;
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify(a),
        Command::Chain(a) => chain(a),
        Command::Lift(a) => lift(a),
        Command::Volume(a) => volume_cmd(a),
        Command::BallBarthe(a) => ballbarthe(a),
    }
}

fn gen(a: GenArgs) -> Result<u8> {
    let measure = match a.kind {
        Kind::Simplex => regular_simplex_measure(a.n)?,
        Kind::Cross => cross_polytope_measure(a.n, None)?,
        Kind::Random => {
            let Some(m) = a.m else { bail!(usage("random measures need --m")) };
            if m < a.n + 1 {
                bail!(usage(&format!("--m must be at least n+1 = {}", a.n + 1)));
            }
            random_isotropic_measure(a.n, m, a.seed)?
        }
    };
    let r = measure.moment_report();
    let summary = format!(
        "atoms {} mass {:.12} isotropy_residual {:.3e} first_moment_norm {:.3e}",
        measure.len(),
        r.total_mass,
        r.isotropy_residual,
        r.first_moment_norm()
    );
    match a.out {
        Some(p) => {
            fs::write(&p, measure.to_json() + "\n").with_context(|| format!("writing {}", p.display()))?;
            println!("{summary}");
        }
        None => {
            println!("{}", measure.to_json());
            eprintln!("{summary}");
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: &str) -> UsageError {
    UsageError(msg.to_string())
}

fn verify(a: VerifyArgs) -> Result<u8> {
    let measure = read_measure(&a.measure)?;
    let mut reports = Vec::new();
    if a.which != Which::T2 {
        reports.push(verify_theorem1(&measure)?);
    }
    if a.which != Which::T1 {
        reports.push(verify_theorem2(&measure)?);
    }
    for r in &reports {
        eprintln!(
            "{:?}: volume {:.10} bound {:.10} gap {:.3e} holds {} equality {}",
            r.theorem, r.volume, r.bound, r.gap, r.holds, r.equality
        );
    }
    emit(&reports, a.out.as_deref())?;
    Ok(if reports.iter().all(|r| r.holds) { EXIT_OK } else { EXIT_FAILED })
}

fn chain(a: ChainArgs) -> Result<u8> {
    let measure = read_measure(&a.measure)?;
    let report = match a.theorem {
        Bound::T1 => chain_verify_thm1(&measure, a.samples, a.seed)?,
        Bound::T2 => chain_verify_thm2(&measure, a.samples, a.seed)?,
    };
    eprintln!(
        "closed form {:.10}, estimate {:.6} ± {:.2e}, pointwise points {}, passed {}",
        report.closed_form, report.integral.estimate, report.integral.stderr, report.pointwise.points, report.passed
    );
    emit(&report, a.out.as_deref())?;
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct LiftOutput {
    lifted: isomeasure::measure::LiftedFile,
    isotropy_residual: f64,
    mass_error: f64,
    first_moment_error: f64,
    tolerance: f64,
    passed: bool,
}

fn lift(a: LiftArgs) -> Result<u8> {
    let measure = read_measure(&a.measure)?;
    let lifted = measure.lift()?;
    let v = lifted.verify();
    eprintln!(
        "lifted residual {:.3e} mass error {:.3e} first moment error {:.3e}",
        v.report.isotropy_residual, v.mass_error, v.first_moment_error
    );
    let out = LiftOutput {
        lifted: lifted.to_file(),
        isotropy_residual: v.report.isotropy_residual,
        mass_error: v.mass_error,
        first_moment_error: v.first_moment_error,
        tolerance: v.tolerance,
        passed: v.passes(),
    };
    emit(&out, a.out.as_deref())?;
    Ok(if out.passed { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct VolumeOutput {
    body: &'static str,
    n: usize,
    vertices: usize,
    facets: usize,
    exact: f64,
    mc_estimate: f64,
    mc_stderr: f64,
    mc_samples: usize,
    seed: u64,
}

fn volume_cmd(a: VolumeArgs) -> Result<u8> {
    let measure = read_measure(&a.measure)?;
    let (label, exact, mc, vertices, facets) = if a.polar {
        let p = polar_of(&measure)?;
        ("polar", volume(&p)?, mc_volume(&p, a.mc_samples, a.seed)?, p.vertices().len(), p.facets().len())
    } else {
        let b = body_of(&measure)?;
        ("body", volume(&b)?, mc_volume(&b, a.mc_samples, a.seed)?, b.vertices().len(), b.facets().len())
    };
    eprintln!("{label} volume {exact:.10} (exact), {:.6} ± {:.2e} (Monte Carlo)", mc.estimate, mc.stderr);
    emit(
        &VolumeOutput {
            body: label,
            n: measure.dim(),
            vertices,
            facets,
            exact,
            mc_estimate: mc.estimate,
            mc_stderr: mc.stderr,
            mc_samples: mc.samples,
            seed: a.seed,
        },
        a.out.as_deref(),
    )?;
    Ok(EXIT_OK)
}

fn ballbarthe(a: BallBartheArgs) -> Result<u8> {
    let measure = read_measure(&a.measure)?;
    let values = if let Some(v) = a.values {
        v
    } else if let Some(p) = &a.values_file {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        serde_json::from_str::<Vec<f64>>(&text).with_context(|| format!("parsing {}", p.display()))?
    } else {
        let c = a.constant.expect("clap enforces one value source");
        vec![c; measure.len()]
    };
    let out = ball_barthe_check(&measure, &values)?;
    eprintln!(
        "lhs {:.12e} rhs {:.12e} equality expected {} observed {}",
        out.lhs, out.rhs, out.equality_expected, out.equality_observed
    );
    emit(&out, a.out.as_deref())?;
    Ok(if out.holds { EXIT_OK } else { EXIT_FAILED })
}
