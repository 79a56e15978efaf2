//! `qpool` command line: argument parsing, JSON file formats and dispatch.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation
//! error, 3 incompatible states.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::error::Error;
use crate::harness::{
    random_density, random_povm, stream, verify_commuting_reduction, verify_three_observer,
    verify_two_observer, VerificationReport,
};
use crate::linalg::{c64, square_dim, validate_density, BlochVector, ComplexMatrix, DensityMatrix};
use crate::measurement::{validate_povm, Povm};
use crate::pooling::{
    compatibility, pool_ordered, pool_ordered_multi, pool_symmetric, pool_symmetric_multi,
    NormMode, PoolReport,
};
use crate::qubit::pool_bloch;

/// Tolerance for hand-written input files; inputs are re-projected on load.
pub const FILE_TOL: f64 = 1e-8;

const MAX_DIM: usize = 64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCOMPATIBLE: i32 = 3;

/// `{"dim": n, "matrix": [[[re, im], ...], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// `{"dim": n, "elements": [<matrix>, ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmFile {
    pub dim: usize,
    pub elements: Vec<Vec<Vec<[f64; 2]>>>,
}

fn rows_of(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn matrix_from_rows(dim: usize, rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix, String> {
    if dim == 0 {
        return Err("dim must be at least 1".into());
    }
    if rows.len() != dim {
        return Err(format!("expected {dim} rows, found {}", rows.len()));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(format!("row {i} has {} entries, expected {dim}", row.len()));
    }
    let m = ComplexMatrix::from_fn(dim, dim, |i, j| c64(rows[i][j][0], rows[i][j][1]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err("entries must be finite".into());
    }
    Ok(m)
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixFile {
            dim: m.nrows(),
            matrix: rows_of(m),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, String> {
        matrix_from_rows(self.dim, &self.matrix)
    }
}

impl PovmFile {
    pub fn from_povm(p: &Povm) -> Self {
        PovmFile {
            dim: p.dim(),
            elements: p.elements().iter().map(|e| rows_of(e.op())).collect(),
        }
    }

    pub fn to_matrices(&self) -> Result<Vec<ComplexMatrix>, String> {
        self.elements
            .iter()
            .enumerate()
            .map(|(k, rows)| matrix_from_rows(self.dim, rows).map_err(|e| format!("element {k}: {e}")))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: invalid JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {reason}", path.display())]
    Shape { path: PathBuf, reason: String },
    #[error("{context}: {source}")]
    Invalid { context: String, source: Error },
    #[error("{0}")]
    Incompatible(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Incompatible(_) => EXIT_INCOMPATIBLE,
            _ => EXIT_USAGE,
        }
    }
}

fn core_error(context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
    let context = context.into();
    move |source| match source {
        Error::Incompatible { .. } => CliError::Incompatible(source),
        source => CliError::Invalid { context, source },
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string(value).expect("file payloads serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a density-matrix file, validating at [`FILE_TOL`] and re-projecting.
pub fn read_density(path: &Path) -> Result<DensityMatrix, CliError> {
    let file: MatrixFile = read_json(path)?;
    let m = file.to_matrix().map_err(|reason| CliError::Shape {
        path: path.to_owned(),
        reason,
    })?;
    validate_density(&m, FILE_TOL).map_err(core_error(path.display().to_string()))
}

pub fn read_povm(path: &Path) -> Result<Povm, CliError> {
    let file: PovmFile = read_json(path)?;
    let ms = file.to_matrices().map_err(|reason| CliError::Shape {
        path: path.to_owned(),
        reason,
    })?;
    validate_povm(&ms, FILE_TOL).map_err(core_error(path.display().to_string()))
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<(), CliError> {
    square_dim(m).map_err(core_error(path.display().to_string()))?;
    write_json(path, &MatrixFile::from_matrix(m))
}

#[derive(Debug, Parser)]
#[command(name = "qpool", version, about = "Pool observers' quantum states of knowledge")]
pub struct Cli {
    /// Indent JSON written to standard output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pool two or more density-matrix files.
    Pool(PoolArgs),
    /// Print Tr[ρA ρB] for two density-matrix files.
    Compat(CompatArgs),
    /// Closed-form qubit pooling of two Bloch vectors.
    Bloch(BlochArgs),
    /// Run the oracle verification suites.
    Verify(VerifyArgs),
    /// Write a random state or POVM.
    Random(RandomArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolMode {
    /// Inputs listed in measurement order, last measured outermost.
    Ordered,
    /// Averaged over all measurement orders.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Trace,
    Paper,
}

impl From<NormArg> for NormMode {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Trace => NormMode::Trace,
            NormArg::Paper => NormMode::Paper,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct PoolArgs {
    #[arg(long, value_enum)]
    pub mode: PoolMode,
    #[arg(long = "in", num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// Normalizer for three or more symmetric inputs.
    #[arg(long, value_enum, default_value = "trace")]
    pub norm: NormArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct CompatArgs {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct BlochArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec3)]
    pub a: [f64; 3],
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec3)]
    pub b: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Two,
    Commuting,
    Three,
    All,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Trials per dimension.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Inclusive dimension range `LO..HI`.
    #[arg(long, default_value = "2..5", value_parser = parse_dims)]
    pub dims: (usize, usize),
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    State,
    Povm,
}

#[derive(Debug, clap::Args)]
pub struct RandomArgs {
    #[arg(value_enum)]
    pub kind: RandomKind,
    #[arg(long)]
    pub dim: usize,
    /// State rank (defaults to full rank).
    #[arg(long, conflicts_with = "outcomes")]
    pub rank: Option<usize>,
    /// Number of POVM outcomes (default 2).
    #[arg(long)]
    pub outcomes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected X,Y,Z, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("not a number: {p:?}"))?;
    }
    Ok(v)
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad lower bound in {s:?}"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad upper bound in {s:?}"))?;
    if lo == 0 || lo > hi || hi > MAX_DIM {
        return Err(format!("dimension range must satisfy 1 <= LO <= HI <= {MAX_DIM}"));
    }
    Ok((lo, hi))
}

fn emit(out: &mut dyn Write, value: &Value, pretty: bool) -> std::io::Result<()> {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("JSON values serialize");
    writeln!(out, "{text}")
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let io = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match &cli.command {
        Command::Pool(args) => {
            let v = cmd_pool(args)?;
            emit(out, &v, cli.pretty).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Compat(args) => {
            let c = cmd_compat(args)?;
            writeln!(out, "{c:.15}").map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Bloch(args) => {
            let v = cmd_bloch(args)?;
            emit(out, &v, cli.pretty).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let (v, passed) = cmd_verify(args)?;
            emit(out, &v, cli.pretty).map_err(io)?;
            Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Random(args) => {
            cmd_random(args)?;
            Ok(EXIT_OK)
        }
    }
}

fn pool_summary(report: &PoolReport, observers: usize) -> Value {
    let mut v = json!({ "compatibility": report.compatibility });
    if observers >= 3 {
        v["norm_mode"] = json!(report.norm_mode);
        v["norm_discrepancy"] = json!(report.norm_discrepancy);
        v["paper_norm"] = json!(report.paper_norm);
        v["paper_norm_imag"] = json!(report.paper_norm_imag);
        v["trace_norm"] = json!(report.trace_norm);
    }
    v
}

/// Pools the input files and writes the result; returns the stdout payload.
pub fn cmd_pool(args: &PoolArgs) -> Result<Value, CliError> {
    if args.inputs.len() < 2 {
        return Err(CliError::Usage("pool needs at least two --in files".into()));
    }
    let states = args
        .inputs
        .iter()
        .map(|p| read_density(p))
        .collect::<Result<Vec<_>, _>>()?;
    let pooled = match (args.mode, states.len()) {
        (PoolMode::Ordered, 2) => pool_ordered(&states[0], &states[1]),
        (PoolMode::Ordered, _) => pool_ordered_multi(&states),
        (PoolMode::Symmetric, 2) => pool_symmetric(&states[0], &states[1]),
        (PoolMode::Symmetric, _) => pool_symmetric_multi(&states, args.norm.into()),
    }
    .map_err(core_error("pool"))?;
    write_matrix(&args.out, &pooled.output())?;
    Ok(pool_summary(&pooled, states.len()))
}

pub fn cmd_compat(args: &CompatArgs) -> Result<f64, CliError> {
    let a = read_density(&args.a)?;
    let b = read_density(&args.b)?;
    compatibility(&a, &b).map_err(core_error("compat"))
}

pub fn cmd_bloch(args: &BlochArgs) -> Result<Value, CliError> {
    let a = BlochVector::try_from(args.a).map_err(core_error("--a"))?;
    let b = BlochVector::try_from(args.b).map_err(core_error("--b"))?;
    let p = pool_bloch(&a, &b).map_err(core_error("bloch"))?;
    Ok(json!({
        "pooled": p.pooled,
        "alpha": p.weights.alpha,
        "beta": p.weights.beta,
        "compatibility": p.compatibility,
        "weight_sum": p.weight_sum,
    }))
}

/// Runs the selected suites; returns the report payload and whether every
/// asserting check passed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<(Value, bool), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Usage("--tol must be positive and finite".into()));
    }
    let (lo, hi) = args.dims;
    let per_dim = |f: &dyn Fn(usize) -> VerificationReport| {
        VerificationReport::merge((lo..=hi).map(f).collect()).expect("non-empty dimension range")
    };
    let two = || verify_two_observer(args.trials, lo..=hi, args.tol, args.seed);
    let commuting =
        || per_dim(&|d| verify_commuting_reduction(args.trials, d, args.tol, args.seed));
    let three = || per_dim(&|d| verify_three_observer(args.trials, d, args.seed));
    let reports: Vec<VerificationReport> = match args.suite {
        Suite::Two => vec![two()],
        Suite::Commuting => vec![commuting()],
        Suite::Three => vec![three()],
        Suite::All => vec![two(), commuting(), three()],
    };
    let passed = reports.iter().all(VerificationReport::passed);
    let value = if args.suite == Suite::All {
        let mut map = serde_json::Map::new();
        for r in &reports {
            map.insert(r.suite.clone(), json!(r));
        }
        Value::Object(map)
    } else {
        json!(reports[0])
    };
    Ok((value, passed))
}

pub fn cmd_random(args: &RandomArgs) -> Result<(), CliError> {
    if args.dim == 0 || args.dim > MAX_DIM {
        return Err(CliError::Usage(format!("--dim must be in 1..={MAX_DIM}")));
    }
    let mut rng = stream(args.seed);
    match args.kind {
        RandomKind::State => {
            if args.outcomes.is_some() {
                return Err(CliError::Usage("--outcomes only applies to povm".into()));
            }
            let rank = args.rank.unwrap_or(args.dim);
            let rho = random_density(args.dim, rank, &mut rng).map_err(core_error("random state"))?;
            write_matrix(&args.out, rho.as_matrix())
        }
        RandomKind::Povm => {
            if args.rank.is_some() {
                return Err(CliError::Usage("--rank only applies to state".into()));
            }
            let outcomes = args.outcomes.unwrap_or(2);
            let povm = random_povm(args.dim, outcomes, &mut rng).map_err(core_error("random povm"))?;
            write_json(&args.out, &PovmFile::from_povm(&povm))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parser() {
        assert_eq!(parse_dims("2..5"), Ok((2, 5)));
        assert_eq!(parse_dims("2..=5"), Ok((2, 5)));
        assert_eq!(parse_dims("3"), Ok((3, 3)));
        assert!(parse_dims("5..2").is_err());
        assert!(parse_dims("0..2").is_err());
        assert!(parse_dims("a..b").is_err());
    }

    #[test]
    fn vec3_parser() {
        assert_eq!(parse_vec3("0,0,-1"), Ok([0.0, 0.0, -1.0]));
        assert_eq!(parse_vec3(" 0.5, 0 ,1e-3"), Ok([0.5, 0.0, 1e-3]));
        assert!(parse_vec3("1,2").is_err());
        assert!(parse_vec3("1,x,2").is_err());
    }

    #[test]
    fn matrix_file_shape_errors() {
        let f = MatrixFile {
            dim: 2,
            matrix: vec![vec![[1.0, 0.0], [0.0, 0.0]]],
        };
        assert!(f.to_matrix().unwrap_err().contains("expected 2 rows"));
        let f = MatrixFile {
            dim: 2,
            matrix: vec![vec![[1.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]],
        };
        assert!(f.to_matrix().unwrap_err().contains("row 0"));
        let f = MatrixFile {
            dim: 0,
            matrix: vec![],
        };
        assert!(f.to_matrix().is_err());
    }
}
