//! The `frechet` command-line front end.
//!
//! Every subcommand writes one JSON document (to `--output` or stdout) and
//! exits with 0 on success, 1 when the checked property fails and 2 on
//! usage, schema or parameter errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acceptance::{run_all, AcceptanceConfig};
use crate::algebra::{parse_rational, rational_to_f64, Group, GroupValue, Point, Semigroup};
use crate::calculus::{decompose, FunctionHandle, MonomialSum, Table};
use crate::equations::{
    check_schema, recover, solve, triviality_check, verify, Candidate, Descriptor, Equation, EquationId, Extended,
    Grid, Mode, VerifyOptions, DEFAULT_TOL, SCHEMA,
};
use crate::error::Error;
use crate::harness::{default_grid, fuzz, sample_grid, semigroup_grid, Family, FuzzConfig, GridSpec};

pub const SEED_ENV: &str = "FRECHET_SEED";

const EXIT_OK: i32 = 0;
const EXIT_FAILS: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "frechet", version, about = "Fréchet polynomial equations: solve, verify, decompose, fuzz")]
pub struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical solution for given coefficients.
    Solve(SolveArgs),
    /// Check a candidate against an equation on a grid.
    Verify(VerifyArgs),
    /// Split a polynomial function into monomials.
    Decompose(DecomposeArgs),
    /// Recover coefficients from a table of a solution.
    Recover(RecoverArgs),
    /// Evaluate an arcsine equation at multiples of π.
    Trivial(TrivialArgs),
    /// Random solutions and perturbed non-solutions.
    Fuzz(FuzzArgs),
    /// Run the bundled acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct EquationArgs {
    /// eq1, eq2, eq3 or eq4.
    #[arg(long)]
    pub equation: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// Radical equations only.
    #[arg(long)]
    pub m: Option<String>,
    /// JSON descriptor instead of the three flags above.
    #[arg(long, conflicts_with_all = ["equation", "n", "m"])]
    pub descriptor: Option<PathBuf>,
    /// exact or float.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub eq: EquationArgs,
    /// `{"components": [...]}` or an array of power coefficients c_0..c_n.
    #[arg(long)]
    pub coeffs: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub eq: EquationArgs,
    #[arg(long)]
    pub candidate: PathBuf,
    /// `default`, or a file holding explicit pairs or a grid spec.
    #[arg(long, default_value = "default")]
    pub grid: String,
    #[arg(long)]
    pub seed: Option<String>,
    /// Pairs in the default grid.
    #[arg(long, default_value = "50")]
    pub pairs: String,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// `{"domain", "codomain", "closed" | "table"}`.
    #[arg(long)]
    pub function: PathBuf,
    #[arg(long)]
    pub n: String,
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long, default_value = "50")]
    pub pairs: String,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub eq: EquationArgs,
    /// A raw candidate, or a bare `[[u, f(u)], ...]` table.
    #[arg(long)]
    pub table: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrivialArgs {
    #[command(flatten)]
    pub eq: EquationArgs,
    /// `{"candidate", "pi_multiples": [[k, f(kπ)], ...]}`.
    #[arg(long)]
    pub candidate: PathBuf,
    /// Array of sample points; drawn from the seed when absent.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long, default_value = "20")]
    pub count: String,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// radical, arcsine, or a single equation eq1..eq4.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub cases: String,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub n_min: Option<String>,
    #[arg(long)]
    pub n_max: Option<String>,
    #[arg(long)]
    pub m_min: Option<String>,
    #[arg(long)]
    pub m_max: Option<String>,
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Tolerance for the arcsine criteria.
    #[arg(long)]
    pub arcsine_tol: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

/// What a subcommand produced: a document and whether its property held.
struct Outcome {
    doc: Value,
    ok: bool,
}

impl Outcome {
    fn of<T: Serialize>(doc: &T, ok: bool) -> Result<Self, Failure> {
        Ok(Outcome {
            doc: serde_json::to_value(doc).map_err(Error::from)?,
            ok,
        })
    }
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::DecompositionInconsistent(_) => (EXIT_FAILS, "decomposition-inconsistent"),
            Error::InstanceMismatch { .. } => (EXIT_USAGE, "instance-mismatch"),
            Error::UnsupportedDivision { .. } => (EXIT_USAGE, "unsupported-division"),
            Error::InvalidInstance(_) => (EXIT_USAGE, "invalid-instance"),
            Error::MissingSample { .. } => (EXIT_USAGE, "missing-sample"),
            Error::Domain { .. } => (EXIT_USAGE, "domain"),
            Error::InvalidSpec(_) => (EXIT_USAGE, "invalid-spec"),
            Error::InvalidParameter(_) => (EXIT_USAGE, "invalid-parameter"),
            Error::InvalidInput(_) => (EXIT_USAGE, "invalid-input"),
            Error::NotApplicable(_) => (EXIT_USAGE, "not-applicable"),
            Error::Json(_) => (EXIT_USAGE, "schema"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// Parses arguments, runs the subcommand, writes the result and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let output = cli.output.clone();
    let (doc, code) = match dispatch(cli.command) {
        Ok(out) => (out.doc, if out.ok { EXIT_OK } else { EXIT_FAILS }),
        Err(f) => {
            eprintln!("frechet: {}", f.message);
            let doc = json!({"schema": SCHEMA, "error": f.kind, "message": f.message});
            (doc, f.code)
        }
    };
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n";
    match output {
        Some(path) => {
            if let Err(e) = fs::write(&path, text) {
                eprintln!("frechet: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{text}"),
    }
    code
}

fn dispatch(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Trivial(a) => cmd_trivial(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Selftest(a) => cmd_selftest(a),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| json_failure(path, &e))
}

fn from_value<T: DeserializeOwned>(path: &Path, value: Value) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| Failure {
        code: EXIT_USAGE,
        kind: "schema",
        message: format!("{}: {e}", path.display()),
    })
}

/// `path:line:col: message`, without serde's own position suffix.
fn json_failure(path: &Path, e: &serde_json::Error) -> Failure {
    let text = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let message = text.strip_suffix(&suffix).unwrap_or(&text);
    Failure {
        code: EXIT_USAGE,
        kind: "schema",
        message: format!("{}:{}:{}: {message}", path.display(), e.line(), e.column()),
    }
}

fn parse_uint<T: TryFrom<u64>>(flag: &str, text: &str) -> Result<T, Failure> {
    text.trim()
        .parse::<u64>()
        .ok()
        .and_then(|v| T::try_from(v).ok())
        .ok_or_else(|| Failure::usage(format!("--{flag}: expected a nonnegative integer, got {text:?}")))
}

/// A tolerance: an exact rational such as `1/1000000000`, or a decimal.
fn parse_tol(text: &str) -> Result<f64, Failure> {
    let value = match parse_rational(text) {
        Ok(q) => rational_to_f64(&q),
        Err(_) => text
            .trim()
            .parse::<f64>()
            .map_err(|_| Failure::usage(format!("--tol: cannot parse {text:?}")))?,
    };
    if !(value.is_finite() && value >= 0.0) {
        return Err(Failure::usage(format!("--tol must be a nonnegative number, got {text:?}")));
    }
    Ok(value)
}

/// `FRECHET_SEED` wins over `--seed`.
fn resolve_seed(flag: Option<&str>, default: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(text) => parse_uint(SEED_ENV, &text),
        Err(_) => flag.map_or(Ok(default), |s| parse_uint("seed", s)),
    }
}

fn equation_and_options(a: &EquationArgs) -> Result<(Equation, VerifyOptions), Failure> {
    let mut descriptor = match &a.descriptor {
        Some(path) => read_json::<Descriptor>(path)?,
        None => {
            let id = a
                .equation
                .as_deref()
                .ok_or_else(|| Failure::usage("--equation is required (or --descriptor)"))?
                .parse::<EquationId>()?;
            let n = a.n.as_deref().ok_or_else(|| Failure::usage("--n is required (or --descriptor)"))?;
            Descriptor {
                schema: None,
                equation: id,
                n: parse_uint("n", n)?,
                m: a.m.as_deref().map(|m| parse_uint("m", m)).transpose()?,
                mode: None,
                tol: None,
            }
        }
    };
    if let Some(mode) = &a.mode {
        descriptor.mode = Some(mode.parse::<Mode>()?);
    }
    if let Some(tol) = &a.tol {
        descriptor.tol = Some(parse_tol(tol)?);
    }
    Ok((descriptor.equation()?, descriptor.options()?))
}

fn read_coeffs(path: &Path) -> Result<MonomialSum, Failure> {
    let value: Value = read_json(path)?;
    match value {
        Value::Array(items) => {
            let coeffs = items
                .into_iter()
                .map(|v| from_value::<GroupValue>(path, v))
                .collect::<Result<Vec<_>, _>>()?;
            let sum = MonomialSum::from_power_coefficients(coeffs);
            let kept = sum
                .components()
                .iter()
                .filter(|c| !matches!(c.coefficient(), Some(GroupValue::Rational(q)) if q.is_zero()))
                .cloned()
                .collect();
            Ok(MonomialSum::new(kept)?)
        }
        other => from_value(path, other),
    }
}

fn cmd_solve(a: SolveArgs) -> Result<Outcome, Failure> {
    let (eq, _) = equation_and_options(&a.eq)?;
    let coeffs = read_coeffs(&a.coeffs)?;
    Outcome::of(&solve(&eq, &coeffs)?, true)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum Space {
    U,
    Characteristic,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitGrid {
    #[serde(default)]
    schema: Option<String>,
    space: Space,
    pairs: Vec<(Point, Point)>,
}

fn read_grid(spec: &str, eq: &Equation, seed: Option<&str>, pairs: &str) -> Result<Grid, Failure> {
    if spec == "default" {
        let seed = resolve_seed(seed, 0)?;
        return Ok(default_grid(eq, parse_uint("pairs", pairs)?, seed)?);
    }
    let path = Path::new(spec);
    let value: Value = read_json(path)?;
    if value.get("pairs").is_some() {
        let g: ExplicitGrid = from_value(path, value)?;
        check_schema(g.schema.as_deref())?;
        return Ok(match g.space {
            Space::U => Grid::U(g.pairs),
            Space::Characteristic => Grid::Characteristic(g.pairs),
        });
    }
    let spec = reseed(from_value::<GridSpec>(path, value)?)?;
    let pairs = sample_grid(&spec)?;
    Ok(match spec {
        GridSpec::CharacteristicBox { .. } => Grid::Characteristic(pairs),
        _ => Grid::U(pairs),
    })
}

/// Applies `FRECHET_SEED` to a grid spec read from a file.
fn reseed(mut spec: GridSpec) -> Result<GridSpec, Failure> {
    if std::env::var_os(SEED_ENV).is_some() {
        let s = resolve_seed(None, 0)?;
        match &mut spec {
            GridSpec::RationalBox { seed, .. }
            | GridSpec::FloatBoxAvoidingKpi { seed, .. }
            | GridSpec::CharacteristicBox { seed, .. } => *seed = s,
        }
    }
    Ok(spec)
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome, Failure> {
    let (eq, opts) = equation_and_options(&a.eq)?;
    let candidate: Candidate = read_json(&a.candidate)?;
    let grid = read_grid(&a.grid, &eq, a.seed.as_deref(), &a.pairs)?;
    let report = verify(&eq, &candidate, &grid, &opts)?;
    Outcome::of(&report, report.holds())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionFile {
    #[serde(default)]
    schema: Option<String>,
    domain: Semigroup,
    codomain: Group,
    #[serde(default)]
    closed: Option<MonomialSum>,
    #[serde(default)]
    table: Option<Table>,
}

fn cmd_decompose(a: DecomposeArgs) -> Result<Outcome, Failure> {
    let file: FunctionFile = read_json(&a.function)?;
    check_schema(file.schema.as_deref())?;
    let n: u32 = parse_uint("n", &a.n)?;
    let rho = match (file.closed, file.table) {
        (Some(sum), None) => FunctionHandle::closed(file.domain, file.codomain, sum)?,
        (None, Some(table)) => FunctionHandle::from_table(file.domain, file.codomain, table)?,
        _ => return Err(Failure::usage("function needs exactly one of \"closed\" and \"table\"")),
    };
    let pairs = match (&a.grid, rho.as_table()) {
        (Some(path), _) => {
            let value: Value = read_json(path)?;
            if value.get("pairs").is_some() {
                let g: ExplicitGrid = from_value(path, value)?;
                check_schema(g.schema.as_deref())?;
                g.pairs
            } else {
                sample_grid(&reseed(from_value(path, value)?)?)?
            }
        }
        // Every pair of tabulated points; pairs needing absent samples are skipped.
        (None, Some(table)) => {
            let points: Vec<&Point> = table.entries().iter().map(|(p, _)| p).collect();
            points
                .iter()
                .flat_map(|x| points.iter().map(move |y| ((*x).clone(), (*y).clone())))
                .collect()
        }
        (None, None) => semigroup_grid(
            rho.semigroup()?,
            parse_uint("pairs", &a.pairs)?,
            resolve_seed(a.seed.as_deref(), 0)?,
        )?,
    };
    let sum = decompose(&rho, n, &pairs)?;
    Outcome::of(&json!({"schema": SCHEMA, "n": n, "components": sum.components()}), true)
}

fn cmd_recover(a: RecoverArgs) -> Result<Outcome, Failure> {
    let (eq, opts) = equation_and_options(&a.eq)?;
    let value: Value = read_json(&a.table)?;
    let table: Table = match value {
        Value::Array(_) => from_value(&a.table, value)?,
        other => match from_value::<Candidate>(&a.table, other)? {
            Candidate::Raw { table } => table,
            Candidate::Canonical { .. } => return Err(Failure::usage("recover expects a raw table")),
        },
    };
    let coeffs = recover(&eq, &table, &opts)?;
    let solution = solve(&eq, &coeffs)?;
    Outcome::of(
        &json!({"schema": SCHEMA, "equation": eq.to_string(), "coeffs": coeffs, "solution": solution}),
        true,
    )
}

fn cmd_trivial(a: TrivialArgs) -> Result<Outcome, Failure> {
    let (eq, opts) = equation_and_options(&a.eq)?;
    let ext: Extended = read_json(&a.candidate)?;
    let samples: Vec<Point> = match &a.samples {
        Some(path) => read_json(path)?,
        None => {
            let count: usize = parse_uint("count", &a.count)?;
            let spec = GridSpec::FloatBoxAvoidingKpi {
                max_abs: 20.0,
                min_gap: 1e-3,
                count: count.div_ceil(2),
                seed: resolve_seed(a.seed.as_deref(), 0)?,
            };
            sample_grid(&spec)?
                .into_iter()
                .flat_map(|(u, v)| [u, v])
                .take(count)
                .collect()
        }
    };
    let tol = if opts.mode == Mode::Float { opts.tol } else { DEFAULT_TOL };
    let report = triviality_check(&eq, &ext, &samples, tol)?;
    Outcome::of(&report, report.holds())
}

fn cmd_fuzz(a: FuzzArgs) -> Result<Outcome, Failure> {
    let cases: usize = parse_uint("cases", &a.cases)?;
    let seed = resolve_seed(a.seed.as_deref(), 0)?;
    let mut cfg = match a.family.parse::<Family>() {
        Ok(family) => FuzzConfig::new(family, cases, seed),
        Err(_) => match a.family.parse::<EquationId>() {
            Ok(id) => FuzzConfig::for_equation(id, cases, seed),
            Err(_) => {
                return Err(Failure::usage(format!(
                    "--family: expected radical, arcsine or eq1..eq4, got {:?}",
                    a.family
                )))
            }
        },
    };
    let set = |slot: &mut u32, flag: &str, text: &Option<String>| -> Result<(), Failure> {
        if let Some(t) = text {
            *slot = parse_uint(flag, t)?;
        }
        Ok(())
    };
    set(&mut cfg.n_min, "n-min", &a.n_min)?;
    set(&mut cfg.n_max, "n-max", &a.n_max)?;
    set(&mut cfg.m_min, "m-min", &a.m_min)?;
    set(&mut cfg.m_max, "m-max", &a.m_max)?;
    if let Some(p) = &a.pairs {
        cfg.pairs = parse_uint("pairs", p)?;
    }
    if let Some(t) = &a.tol {
        cfg.tol = parse_tol(t)?;
    }
    let report = fuzz(&cfg)?;
    Outcome::of(&report, report.clean())
}

fn cmd_selftest(a: SelftestArgs) -> Result<Outcome, Failure> {
    let mut cfg = AcceptanceConfig::default();
    cfg.seed = resolve_seed(a.seed.as_deref(), cfg.seed)?;
    if let Some(t) = &a.arcsine_tol {
        cfg.arcsine_tol = parse_tol(t)?;
    }
    let report = run_all(&cfg);
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    Outcome::of(&report, report.passed)
}
