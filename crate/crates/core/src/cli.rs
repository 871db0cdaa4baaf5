//! Command-line front end. Every verb writes CSV (or PGM for `micro`) to
//! `--out`, or to standard output when it is omitted.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diagnostics::{knee_detect, KNEE_THRESHOLD};
use crate::error::Error;
use crate::greens::GreenVariant;
use crate::microstructure::{MicroKind, Microstructure};
use crate::ratemap::{best_scheme, rates};
use crate::schemes::{solve, Criterion, EmForm, SchemeKind, SolveOptions, SolveStatus, E1};
use crate::series::{analytic_obnosov, numerical_coefficients};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "neumann-fft", version, about = "FFT fixed-point schemes for periodic conductivity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scheme and write per-iteration indicators.
    Solve(SolveArgs),
    /// Extract series coefficients, optionally against the exact ones.
    Series(SeriesArgs),
    /// Tabulate convergence rates and the fastest scheme.
    Ratemap(RatemapArgs),
    /// Write a microstructure as binary PGM.
    Micro(MicroArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    B,
    Ms,
    Em,
    EmPol,
}

impl SchemeArg {
    fn kind(self) -> SchemeKind {
        match self {
            Self::B => SchemeKind::B,
            Self::Ms => SchemeKind::Ms,
            Self::Em | Self::EmPol => SchemeKind::Em,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GreenArg {
    Continuous,
    Mueller,
    Willot,
}

impl From<GreenArg> for GreenVariant {
    fn from(g: GreenArg) -> Self {
        match g {
            GreenArg::Continuous => Self::Continuous,
            GreenArg::Mueller => Self::Mueller,
            GreenArg::Willot => Self::Willot,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CriterionArg {
    Div,
    Diff,
    Coef,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Div => Self::Div,
            CriterionArg::Diff => Self::Diff,
            CriterionArg::Coef => Self::Coef,
        }
    }
}

#[derive(Debug, Args)]
struct MicroSource {
    /// obnosov, checkerboard, four-disks or file:PATH (binary PGM).
    #[arg(long)]
    micro: String,
    /// Pixels per side; ignored for file inputs.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: MicroSource,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "continuous")]
    green: GreenArg,
    #[arg(long, allow_negative_numbers = true)]
    z: f64,
    #[arg(long, value_enum, default_value = "div")]
    criterion: CriterionArg,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SeriesArgs {
    #[command(flatten)]
    source: MicroSource,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "continuous")]
    green: GreenArg,
    /// Highest order.
    #[arg(long)]
    k: usize,
    /// Add the exact coefficients of the square-inclusion cell.
    #[arg(long)]
    compare_analytic: bool,
    /// Finer resolution for the knee row.
    #[arg(long)]
    knee_against: Option<usize>,
    #[arg(long, default_value_t = KNEE_THRESHOLD)]
    knee_threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RatemapArgs {
    #[arg(long)]
    beta_min: f64,
    #[arg(long)]
    beta_max: f64,
    #[arg(long, allow_negative_numbers = true)]
    z_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    z_max: f64,
    /// Points per axis.
    #[arg(long)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MicroArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Failure of a verb, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Raster(_) => Self::Io(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

/// C `%.16e` style: 17 significant digits, signed two-digit exponent.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_micro(src: &MicroSource) -> Result<(Microstructure, Option<MicroKind>), Failure> {
    if let Some(path) = src.micro.strip_prefix("file:") {
        return Ok((Microstructure::load_pgm(path)?, None));
    }
    let kind: MicroKind = src.micro.parse()?;
    let n = src
        .n
        .ok_or_else(|| Failure::Usage(format!("--n is required for --micro {}", src.micro)))?;
    Ok((Microstructure::generate(kind, n)?, Some(kind)))
}

fn run_solve(a: &SolveArgs) -> Result<i32, Failure> {
    let (micro, _) = load_micro(&a.source)?;
    let opts = SolveOptions {
        variant: a.green.into(),
        criterion: a.criterion.into(),
        tol: a.tol,
        max_iter: a.max_iter,
        loading: E1,
        em_form: match a.scheme {
            SchemeArg::EmPol => EmForm::Polarization,
            _ => EmForm::Classic,
        },
    };
    let report = solve(a.scheme.kind(), &micro, a.z, &opts)?;
    let mut out = open_out(&a.out)?;
    writeln!(out, "k,delta1,delta2,coef_indicator,z_eff")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.k,
            format_float(r.delta1),
            format_float(r.delta2),
            format_float(r.coef),
            format_float(r.z_eff)
        )?;
    }
    out.flush()?;
    Ok(match report.status {
        SolveStatus::Diverged => EXIT_DIVERGED,
        _ => EXIT_OK,
    })
}

fn run_series(a: &SeriesArgs) -> Result<i32, Failure> {
    if matches!(a.scheme, SchemeArg::EmPol) {
        return Err(Failure::Usage("series takes --scheme b, ms or em".into()));
    }
    let kind = a.scheme.kind();
    let variant: GreenVariant = a.green.into();
    let (micro, micro_kind) = load_micro(&a.source)?;
    let num = numerical_coefficients(kind, &micro, variant, a.k)?;
    let exact = a
        .compare_analytic
        .then(|| analytic_obnosov(kind, a.k))
        .transpose()?;
    let knee = match a.knee_against {
        Some(fine_n) => {
            let mk = micro_kind
                .ok_or_else(|| Failure::Usage("--knee-against needs a generated microstructure".into()))?;
            if fine_n <= micro.grid().n1() {
                return Err(Failure::Usage(format!(
                    "--knee-against {fine_n} must exceed --n {}",
                    micro.grid().n1()
                )));
            }
            let fine = numerical_coefficients(kind, &Microstructure::generate(mk, fine_n)?, variant, a.k)?;
            Some(knee_detect(&num, &fine, a.knee_threshold)?)
        }
        None => None,
    };

    let mut out = open_out(&a.out)?;
    let header = if exact.is_some() {
        "k,b_num,d_num,b_exact,d_exact,rel_dev"
    } else {
        "k,b_num,d_num"
    };
    writeln!(out, "{header}")?;
    for k in 0..=a.k {
        write!(out, "{},{},{}", k, format_float(num.b[k]), format_float(num.d[k]))?;
        if let Some(ex) = &exact {
            let rel = (num.d[k] - ex.d[k]).abs() / ex.d[k].abs();
            write!(
                out,
                ",{},{},{}",
                format_float(ex.b[k]),
                format_float(ex.d[k]),
                format_float(rel)
            )?;
        }
        writeln!(out)?;
    }
    if let Some(r) = knee {
        writeln!(out, "knee,K,threshold,coarse,fine")?;
        writeln!(
            out,
            "knee,{},{},{},{}",
            r.k,
            format_float(r.threshold),
            r.coarse_n,
            r.fine_n
        )?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn axis(lo: f64, hi: f64, n: usize, name: &str) -> Result<Vec<f64>, Failure> {
    if !(lo.is_finite() && hi.is_finite()) || n == 0 || (n > 1 && !(hi > lo)) || (n == 1 && hi != lo) {
        return Err(Failure::Usage(format!(
            "{name} range must be finite and increasing, with --grid >= 1"
        )));
    }
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64
            }
        })
        .collect())
}

fn run_ratemap(a: &RatemapArgs) -> Result<i32, Failure> {
    let betas = axis(a.beta_min, a.beta_max, a.grid, "beta")?;
    let zs = axis(a.z_min, a.z_max, a.grid, "z")?;
    let mut out = open_out(&a.out)?;
    writeln!(out, "beta,z,r_b,r_ms,r_em,winner")?;
    for &beta in &betas {
        for &z in &zs {
            let r = rates(beta, z)?;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                format_float(beta),
                format_float(z),
                format_float(r.r_b),
                format_float(r.r_ms),
                format_float(r.r_em.unwrap_or(f64::NAN)),
                best_scheme(&r)
            )?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn run_micro(a: &MicroArgs) -> Result<i32, Failure> {
    let kind: MicroKind = a.kind.parse()?;
    Microstructure::generate(kind, a.n)?.save_pgm(&a.out)?;
    Ok(EXIT_OK)
}

/// Parses `argv` (program name first) and runs the verb. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Series(a) => run_series(a),
        Command::Ratemap(a) => run_ratemap(a),
        Command::Micro(a) => run_micro(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}
