//! `perbif`: command-line front end for locating and cross-checking A_μ
//! bifurcation points of p-periodic map families.

mod examples;
mod table;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perbif_core::bifurcation::{
    classify_singularity, solve, BifError, BifurcationPoint, SolveConfig, DEFAULT_MU_MAX,
};
use perbif_core::expr;
use perbif_core::invariance::{verify, VerifyConfig};
use perbif_core::numeric::{rational_from_f64, Determinant, Rational, Scalar};
use perbif_core::reference;
use perbif_core::strata::{cobweb_data, trace_strata, TraceOptions};
use perbif_core::system::PeriodicSystem;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "perbif",
    version,
    about = "Find, classify and cross-check A_mu bifurcation points of p-periodic map families"
)]
struct Cli {
    /// Scalar kind used for evaluation.
    #[arg(long, value_enum, default_value_t = Mode::Float, global = true)]
    mode: Mode,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Float,
    Rational,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Builtin {
    QuadraticCubic,
    QuarticTangent,
}

#[derive(Args)]
struct SystemArgs {
    /// System JSON: {"maps": [...], "mu": n, "fibers": [[lo, hi], ...]}.
    #[arg(short = 's', long = "system", required_unless_present = "builtin", conflicts_with = "builtin")]
    system: Option<PathBuf>,
    /// Use a built-in system instead of a file.
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
}

#[derive(Args)]
struct OutArgs {
    /// Write to this file instead of stdout.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CloudFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Newton-solve the A_mu equations; writes the point as JSON.
    Solve {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(short = 'j', long, default_value_t = 0)]
        rotation: usize,
        #[arg(short = 'k', long, default_value_t = 1)]
        power: usize,
        /// Defaults to the system's parameter count.
        #[arg(long)]
        mu: Option<usize>,
        /// Start vector x,l1,...,lmu (rationals like 27/35 accepted).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        init: Vec<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        damping: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check every rotation of a solved point and the Jacobian ratio law.
    Verify {
        #[command(flatten)]
        sys: SystemArgs,
        /// Point JSON as written by `solve` (x_star/lambda_star may be rational strings).
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        residual_tol: Option<f64>,
        #[arg(long)]
        ratio_tol: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classify the singularity of F_j^k at a point.
    Classify {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(short = 'j', long, default_value_t = 0)]
        rotation: usize,
        #[arg(short = 'k', long, default_value_t = 1)]
        power: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MU_MAX)]
        mu_max: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Trace fold and cusp strata around a solved point.
    Trace {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        point: PathBuf,
        /// Box lo:hi per parameter, comma separated. Defaults to lambda* +- radius.
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        radius: f64,
        #[arg(long, default_value_t = 12)]
        grid: usize,
        /// Half-width of the x window scanned for fold roots.
        #[arg(long)]
        x_window: Option<f64>,
        /// Parameter solved for (1-based); default is the most sensitive one.
        #[arg(long)]
        free_param: Option<usize>,
        #[arg(long, value_enum, default_value_t = CloudFormat::Csv)]
        format: CloudFormat,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Orbit segments and sampled graphs for a cobweb plot, as CSV.
    Cobweb {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Vec<String>,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long, default_value_t = 64)]
        graph_samples: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Full pipeline on the built-in quadratic/cubic alternating system.
    Example1 {
        /// Also write the full record as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Full pipeline on the built-in quartic/tangent alternating system.
    Example2 {
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Failure with its exit status: 1 for usage and input problems, 2 for
/// failed checks.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Scalars the CLI can read from JSON numbers and rational text.
pub trait Input: Determinant {
    fn zero_value() -> Self;
    fn from_json_number(v: f64) -> Option<Self>;
}

impl Input for f64 {
    fn zero_value() -> Self {
        0.0
    }

    fn from_json_number(v: f64) -> Option<Self> {
        Some(v)
    }
}

impl Input for Rational {
    fn zero_value() -> Self {
        Rational::from_integer(0.into())
    }

    fn from_json_number(v: f64) -> Option<Self> {
        rational_from_f64(v)
    }
}

/// Parses `27/35`, `-0.04`, `1e-3`, `(1/3)^2` and similar constant expressions.
pub fn parse_value<S: Input>(text: &str) -> Result<S, CliError> {
    let e = expr::parse(text.trim(), 0).map_err(|e| CliError::usage(format!("bad number {text:?}: {e}")))?;
    e.eval(&S::zero_value(), &[], perbif_core::numeric::DEFAULT_FLOOR)
        .map_err(|e| CliError::usage(format!("bad number {text:?}: {e}")))
}

fn parse_list<S: Input>(items: &[String]) -> Result<Vec<S>, CliError> {
    items.iter().map(|s| parse_value(s)).collect()
}

fn json_value<S: Input>(v: &Value, what: &str) -> Result<S, CliError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .and_then(S::from_json_number)
            .ok_or_else(|| CliError::usage(format!("{what}: {n} is not a finite number"))),
        Value::String(s) => parse_value(s),
        _ => Err(CliError::usage(format!("{what}: expected a number or a string"))),
    }
}

fn load_system(args: &SystemArgs, mode: Mode) -> Result<PeriodicSystem, CliError> {
    let sys = match (&args.system, args.builtin) {
        (_, Some(Builtin::QuadraticCubic)) => reference::quadratic_cubic(),
        (_, Some(Builtin::QuarticTangent)) => reference::quartic_tangent(),
        (Some(path), None) => {
            let text = read(path)?;
            PeriodicSystem::from_json(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(CliError::usage("a system is required: --system FILE or --builtin NAME")),
    };
    if mode == Mode::Rational && sys.has_transcendental() {
        return Err(CliError::usage(
            "rational mode needs polynomial/rational maps; this system calls tan/sin/cos/exp (use --mode float)",
        ));
    }
    Ok(sys)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &OutArgs, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON serialization of plain data");
    s.push('\n');
    s
}

/// Fields of a point file needed to re-evaluate it.
struct PointSpec {
    rotation: usize,
    power: usize,
    mu: usize,
    x: Value,
    lambda: Vec<Value>,
}

fn load_point(path: &Path) -> Result<PointSpec, CliError> {
    let text = read(path)?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let uint = |key: &str, default: Option<usize>| -> Result<usize, CliError> {
        match v.get(key) {
            Some(n) => n
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| CliError::usage(format!("{}: {key} must be a non-negative integer", path.display()))),
            None => default.ok_or_else(|| CliError::usage(format!("{}: missing {key}", path.display()))),
        }
    };
    let lambda = v
        .get("lambda_star")
        .and_then(Value::as_array)
        .cloned()
        .ok_or_else(|| CliError::usage(format!("{}: missing lambda_star array", path.display())))?;
    Ok(PointSpec {
        rotation: uint("rotation", Some(0))?,
        power: uint("power", Some(1))?,
        mu: uint("mu", Some(lambda.len()))?,
        x: v
            .get("x_star")
            .cloned()
            .ok_or_else(|| CliError::usage(format!("{}: missing x_star", path.display())))?,
        lambda,
    })
}

fn bif_error(e: BifError) -> CliError {
    match e {
        BifError::System(_) | BifError::InvalidConfig(_) | BifError::MuOutOfRange { .. } | BifError::DimensionMismatch { .. } => {
            CliError::usage(e.to_string())
        }
        other => CliError::check(other.to_string()),
    }
}

fn run_solve(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    init: &[f64],
    cfg: &SolveConfig,
    out: &OutArgs,
) -> Result<(), CliError> {
    match solve(sys, j, k, mu, init, cfg) {
        Ok(p) => emit(out, &pretty(&p)),
        Err(BifError::NoConvergence { best }) => {
            emit(out, &pretty(&*best))?;
            Err(CliError::check(format!(
                "Newton did not converge in {} iterations (residual norm {:e}); best iterate written",
                best.iterations, best.residual_norm
            )))
        }
        Err(e) => Err(bif_error(e)),
    }
}

fn run_verify<S: Input>(sys: &PeriodicSystem, pt: &PointSpec, cfg: &VerifyConfig, out: &OutArgs) -> Result<(), CliError> {
    let x: S = json_value(&pt.x, "x_star")?;
    let lambda = pt
        .lambda
        .iter()
        .map(|v| json_value::<S>(v, "lambda_star"))
        .collect::<Result<Vec<_>, _>>()?;
    let report = verify(sys, pt.rotation, pt.power, pt.mu, &x, &lambda, cfg).map_err(|e| CliError::check(e.to_string()))?;
    emit(out, &pretty(&report.to_json()))?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::check("verification failed at one or more rotations"))
    }
}

fn run_classify<S: Input>(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    x: &str,
    lambda: &[String],
    mu_max: usize,
    out: &OutArgs,
) -> Result<(), CliError> {
    let xv: S = parse_value(x)?;
    let lv: Vec<S> = parse_list(lambda)?;
    let c = classify_singularity(sys, j, k, &xv, &lv, mu_max).map_err(bif_error)?;
    let v = json!({
        "rotation": j,
        "power": k,
        "x": xv.render(),
        "lambda": lv.iter().map(Scalar::render).collect::<Vec<_>>(),
        "class": c.label(),
        "class_mu": c.class_mu,
        "sign": c.sign,
        "ladder": c.ladder,
    });
    emit(out, &pretty(&v))
}

fn run_cobweb<S: Input>(
    sys: &PeriodicSystem,
    x0: &str,
    lambda: &[String],
    steps: usize,
    samples: usize,
    out: &OutArgs,
) -> Result<(), CliError> {
    let xv: S = parse_value(x0)?;
    let lv: Vec<S> = parse_list(lambda)?;
    let web = cobweb_data(sys, &xv, &lv, steps, samples).map_err(|e| CliError::check(e.to_string()))?;
    emit(out, &web.to_csv())
}

fn parse_region(text: &str, mu: usize) -> Result<Vec<[f64; 2]>, CliError> {
    let boxes = text
        .split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("region entry {part:?} is not lo:hi")))?;
            Ok([parse_value::<f64>(lo)?, parse_value::<f64>(hi)?])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if boxes.len() != mu {
        return Err(CliError::usage(format!("region has {} ranges, system has mu = {mu}", boxes.len())));
    }
    Ok(boxes)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mode = cli.mode;
    match cli.command {
        Command::Solve {
            sys,
            rotation,
            power,
            mu,
            init,
            tol,
            max_iter,
            damping,
            out,
        } => {
            if mode == Mode::Rational {
                return Err(CliError::usage(
                    "solve runs Newton in float mode; check the result exactly with `verify --mode rational`",
                ));
            }
            let system = load_system(&sys, mode)?;
            let mu = mu.unwrap_or(system.mu());
            let init: Vec<f64> = parse_list(&init)?;
            if init.len() != mu + 1 {
                return Err(CliError::usage(format!("--init needs {} values (x, l1..l{mu}), got {}", mu + 1, init.len())));
            }
            let mut cfg = SolveConfig::default();
            if let Some(t) = tol {
                cfg.residual_tol = t;
            }
            if let Some(m) = max_iter {
                cfg.max_iter = m;
            }
            if let Some(d) = damping {
                cfg.damping = d;
            }
            run_solve(&system, rotation, power, mu, &init, &cfg, &out)
        }
        Command::Verify {
            sys,
            point,
            residual_tol,
            ratio_tol,
            out,
        } => {
            let system = load_system(&sys, mode)?;
            let pt = load_point(&point)?;
            let mut cfg = VerifyConfig::default();
            if let Some(t) = residual_tol {
                cfg.residual_tol = t;
            }
            if let Some(t) = ratio_tol {
                cfg.ratio_tol = t;
            }
            match mode {
                Mode::Float => run_verify::<f64>(&system, &pt, &cfg, &out),
                Mode::Rational => run_verify::<Rational>(&system, &pt, &cfg, &out),
            }
        }
        Command::Classify {
            sys,
            rotation,
            power,
            x,
            lambda,
            mu_max,
            out,
        } => {
            let system = load_system(&sys, mode)?;
            match mode {
                Mode::Float => run_classify::<f64>(&system, rotation, power, &x, &lambda, mu_max, &out),
                Mode::Rational => run_classify::<Rational>(&system, rotation, power, &x, &lambda, mu_max, &out),
            }
        }
        Command::Trace {
            sys,
            point,
            region,
            radius,
            grid,
            x_window,
            free_param,
            format,
            out,
        } => {
            if mode == Mode::Rational {
                return Err(CliError::usage("trace runs in float mode only"));
            }
            let system = load_system(&sys, mode)?;
            let text = read(&point)?;
            let p: BifurcationPoint = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("{}: not a solve result: {e}", point.display())))?;
            let region = match region {
                Some(r) => parse_region(&r, p.mu)?,
                None => p.lambda_star.iter().map(|l| [l - radius, l + radius]).collect(),
            };
            let mut opts = TraceOptions::default();
            if let Some(w) = x_window {
                opts.x_window = w;
            }
            if let Some(i) = free_param {
                if i == 0 || i > p.mu {
                    return Err(CliError::usage(format!("--free-param must be in 1..={}", p.mu)));
                }
                opts.free_param = Some(i - 1);
            }
            let cloud = trace_strata(&system, &p, &region, grid, &opts).map_err(|e| CliError::usage(e.to_string()))?;
            match format {
                CloudFormat::Csv => emit(&out, &cloud.to_csv()),
                CloudFormat::Json => emit(&out, &pretty(&cloud)),
            }
        }
        Command::Cobweb {
            sys,
            x0,
            lambda,
            steps,
            graph_samples,
            out,
        } => {
            let system = load_system(&sys, mode)?;
            match mode {
                Mode::Float => run_cobweb::<f64>(&system, &x0, &lambda, steps, graph_samples, &out),
                Mode::Rational => run_cobweb::<Rational>(&system, &x0, &lambda, steps, graph_samples, &out),
            }
        }
        Command::Example1 { json } => examples::example1(mode, json.as_deref()),
        Command::Example2 { json } => {
            if mode == Mode::Rational {
                return Err(CliError::usage("example2 uses tan and runs in float mode only"));
            }
            examples::example2(json.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("perbif: {e}");
            ExitCode::from(e.code)
        }
    }
}
