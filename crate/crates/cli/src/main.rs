//! `drbd`: reliability curves, simplification and simulation of DRBD models.

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drbd_core::casestudy::CaseStudy;
use drbd_core::dsl::{parse_expr, parse_input, parse_override, Input, Overrides};
use drbd_core::montecarlo::{CiLevel, McConfig};
use drbd_core::report::{compare_csv, compare_curve, grid, rel_csv, simulate_csv};
use drbd_core::rewrite::{builtin_rules, check_equiv, simplify, Equivalence, Mode, DEFAULT_MAX_STEPS};
use drbd_core::{DrbdModel, Error, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "drbd", version, about = "Dynamic reliability block diagram toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reliability curve of a read-once model, as `t,rel` CSV.
    Rel {
        model: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Normal form of a model's structure function (or of a bare expression).
    Simplify {
        /// Model file, or `-` for standard input.
        input: Option<PathBuf>,
        /// Expression given inline instead of a file.
        #[arg(short, long, conflicts_with = "input")]
        expr: Option<String>,
        /// Also apply the distributive laws.
        #[arg(long)]
        expand: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Checks two expressions for equality on samples drawn from a model.
    Equiv {
        model: PathBuf,
        lhs: String,
        rhs: String,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Monte Carlo estimate of the reliability curve.
    Simulate {
        model: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Computed curve next to the Monte Carlo estimate; exit code 4 on a
    /// discrepancy.
    Compare {
        model: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Allowed distance in standard errors.
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
    },
    /// Built-in case studies.
    Casestudy {
        #[arg(value_enum)]
        name: CaseName,
        #[command(flatten)]
        grid: OptGridArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Print the model (default parameters) instead of the curve.
        #[arg(long)]
        show: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseName {
    Dbw,
    Sen,
    SenNospare,
}

impl From<CaseName> for CaseStudy {
    fn from(c: CaseName) -> Self {
        match c {
            CaseName::Dbw => CaseStudy::Dbw,
            CaseName::Sen => CaseStudy::Sen,
            CaseName::SenNospare => CaseStudy::SenNoSpare,
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long, default_value_t = 1.0)]
    t1: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
}

#[derive(Args)]
struct OptGridArgs {
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct ParamArgs {
    /// Exponential rate override `<id>=<λ>`; `*` for all blocks.
    #[arg(long = "rate", value_name = "ID=RATE")]
    rates: Vec<String>,
    /// Dormancy factor override `<id>=<α>`; `*` for all spares.
    #[arg(long = "dormancy", value_name = "ID=ALPHA")]
    dormancy: Vec<String>,
}

impl ParamArgs {
    fn overrides(&self) -> Result<Overrides, Error> {
        Ok(Overrides {
            rates: self.rates.iter().map(|s| parse_override(s)).collect::<Result<_, _>>()?,
            dormancy: self.dormancy.iter().map(|s| parse_override(s)).collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Ci {
    #[value(name = "95")]
    P95,
    #[value(name = "99")]
    P99,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, env = "DRBD_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "99")]
    ci: Ci,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

impl McArgs {
    fn config(&self) -> McConfig {
        let workers = self
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let ci = match self.ci {
            Ci::P95 => CiLevel::P95,
            Ci::P99 => CiLevel::P99,
        };
        McConfig::new(self.samples, self.seed).with_ci(ci).with_workers(workers)
    }
}

/// Failure of a command: an error, or a completed check that found a
/// discrepancy.
enum Failure {
    Error { source: Option<PathBuf>, error: Error },
    Io(String),
    Discrepancy(String),
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure::Error { source: None, error }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 2,
            Failure::Discrepancy(_) => 4,
            Failure::Error { error, .. } => match error {
                Error::Numeric { .. } | Error::Sampling { .. } | Error::NonConvergence { .. } => 3,
                _ => 2,
            },
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Io(format!("standard input: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }
}

fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |error| Failure::Error { source: Some(path.to_path_buf()), error }
}

fn load_model(path: &Path, params: &ParamArgs) -> Result<DrbdModel, Failure> {
    let text = read_text(path)?;
    let doc = drbd_core::dsl::parse(&text).map_err(in_file(path))?;
    let name = path.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
    doc.to_model(&name, &params.overrides()?).map_err(in_file(path))
}

fn times(g: &GridArgs) -> Result<Vec<f64>, Failure> {
    Ok(grid(g.t0, g.t1, g.steps)?)
}

fn run(cli: Cli, out: &mut String) -> Result<(), Failure> {
    match cli.command {
        Command::Rel { model, grid, params, tol } => {
            let m = load_model(&model, &params)?;
            out.push_str(&rel_csv(&m, &times(&grid)?, tol)?);
        }
        Command::Simplify { input, expr, expand, max_steps } => {
            let parsed = match (&expr, &input) {
                (Some(text), _) => Input::Expr(parse_expr(text)?),
                (None, path) => {
                    let path = path.clone().unwrap_or_else(|| PathBuf::from("-"));
                    parse_input(&read_text(&path)?).map_err(in_file(&path))?
                }
            };
            let rules = builtin_rules().with_mode(if expand { Mode::Expand } else { Mode::Reduce });
            let normal = simplify(parsed.system(), &rules, max_steps)?;
            out.push_str(&format!("{normal}\n"));
        }
        Command::Equiv { model, lhs, rhs, mc } => {
            let m = load_model(&model, &ParamArgs { rates: vec![], dormancy: vec![] })?;
            let (l, r) = (parse_expr(&lhs)?, parse_expr(&rhs)?);
            match check_equiv(&l, &r, &m, mc.samples, mc.seed)? {
                Equivalence::Equivalent { samples } => out.push_str(&format!("equivalent on {samples} samples\n")),
                Equivalence::Counterexample { index, sample, left, right } => {
                    let values: Vec<String> = sample.iter().map(|(id, v)| format!("{id}={v:?}")).collect();
                    return Err(Failure::Discrepancy(format!(
                        "counterexample at sample {index}: left {left}, right {right}; {}",
                        values.join(", ")
                    )));
                }
            }
        }
        Command::Simulate { model, grid, params, mc } => {
            let m = load_model(&model, &params)?;
            out.push_str(&simulate_csv(&m, &times(&grid)?, &mc.config())?);
        }
        Command::Compare { model, grid, params, mc, tol, sigmas } => {
            let m = load_model(&model, &params)?;
            let rows = compare_curve(&m, &times(&grid)?, tol, sigmas, &mc.config())?;
            out.push_str(&compare_csv(&rows));
            let bad = rows.iter().filter(|(_, v)| !v.is_consistent()).count();
            if bad > 0 {
                return Err(Failure::Discrepancy(format!(
                    "{bad} of {} grid points outside {sigmas} standard errors",
                    rows.len()
                )));
            }
        }
        Command::Casestudy { name, grid: g, params, tol, show } => {
            let case = CaseStudy::from(name);
            let m = case.model(&params.overrides()?)?;
            if show {
                out.push_str(&case.document().to_string());
                return Ok(());
            }
            let (t0, t1, steps) = case.default_grid();
            let ts = grid(g.t0.unwrap_or(t0), g.t1.unwrap_or(t1), g.steps.unwrap_or(steps))?;
            out.push_str(&rel_csv(&m, &ts, tol)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli, &mut out);
    // partial output (e.g. the compare table) is still useful on failure
    let _ = io::stdout().write_all(out.as_bytes());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Error { source: Some(path), error: error @ (Error::Syntax { .. } | Error::Semantic { .. }) } => {
                    eprintln!("error: {}:{error}", path.display())
                }
                Failure::Error { source: Some(path), error } => eprintln!("error: {}: {error}", path.display()),
                Failure::Error { source: None, error } => eprintln!("error: {error}"),
                Failure::Io(msg) => eprintln!("error: {msg}"),
                Failure::Discrepancy(msg) => eprintln!("discrepancy: {msg}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
