//! `dqs`: batch front end for validating quantum semigroups, solving for
//! invariant means, stabilizing near-additive elements and running the law
//! sweeps. Every invocation prints one JSON report with sorted keys.
//!
//! Exit codes: 0 on success, 1 on a validation or contract failure, 2 on
//! usage or file errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use dqs::coalgebra::{QuantumSemigroup, Side};
use dqs::io::{
    to_json_string, write_json, ElementFile, GroupDualFile, QuantumSemigroupFile, StateFile,
    TableFile,
};
use dqs::mean::{solve_mean, SolveOutcome, SolverOptions};
use dqs::stabilize::{hyers_ulam_correct, perturbation_experiment};
use dqs::{laws, Error, DEFAULT_TOL};

/// Environment variable naming the directory searched for input files that
/// do not exist relative to the working directory.
const FIXTURES_ENV: &str = "DQS_FIXTURES";

#[derive(Parser, Debug)]
#[command(
    name = "dqs",
    version,
    about = "Finite discrete quantum semigroup toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the homomorphism blocks and axioms (i) and (ii).
    Validate {
        #[arg(long)]
        qs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Solve for a left or right invariant mean.
    Mean {
        #[arg(long)]
        qs: PathBuf,
        #[arg(long)]
        side: Side,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = SolverOptions::default().max_iter)]
        max_iter: usize,
        /// Write the mean as a state file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correct an element onto an exact additive element.
    Stabilize {
        #[arg(long)]
        qs: PathBuf,
        #[arg(long)]
        mean: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = Side::Right)]
        side: Side,
        /// Write the correction as an element file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized sweep of the extension laws.
    Laws {
        #[arg(long)]
        qs: PathBuf,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Stabilize random Hermitian perturbations and report aggregate ratios.
    Experiment {
        #[arg(long)]
        qs: PathBuf,
        #[arg(long)]
        mean: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        amplitude: f64,
        #[arg(long, default_value_t = Side::Right)]
        side: Side,
    },
    /// Build a validated quantum semigroup file from a table or irreps.
    Build {
        #[command(flatten)]
        source: BuildSource,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct BuildSource {
    /// `{"labels": [...], "table": {"x,y": "z"}}`
    #[arg(long)]
    classical: Option<PathBuf>,
    /// `{"group": {...}, "irreps": {label: [matrix per element]}}`
    #[arg(long)]
    group_dual: Option<PathBuf>,
}

/// A failed run: exit code and the JSON body to print.
struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            body: json!({ "error": "usage", "message": message.into() }),
        }
    }

    fn contract(report: Value) -> Self {
        Self {
            code: 1,
            body: report,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Io(_) => (2, "io"),
            Error::Json(_)
            | Error::Format(_)
            | Error::MissingBlock(_)
            | Error::MalformedBlock { .. }
            | Error::UnknownLabel(_)
            | Error::InvalidIndexSystem(_)
            | Error::IndexMismatch { .. }
            | Error::OutOfRange { .. }
            | Error::InvalidState(_) => (2, "input"),
            _ => (1, "contract"),
        };
        Self {
            code,
            body: json!({ "error": kind, "message": e.to_string() }),
        }
    }
}

type Run = Result<Value, Failure>;

fn fixtures_dir() -> PathBuf {
    std::env::var_os(FIXTURES_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
            dir.canonicalize().unwrap_or(dir)
        })
}

/// The path itself if it exists, else the same relative path under the
/// fixtures directory.
fn resolve(path: &Path) -> Result<PathBuf, Failure> {
    if path.exists() {
        return Ok(path.to_path_buf());
    }
    if path.is_relative() {
        let candidate = fixtures_dir().join(path);
        if candidate.exists() {
            return Ok(candidate);
        }
    }
    Err(Failure {
        code: 2,
        body: json!({ "error": "io", "message": format!("no such file: {}", path.display()) }),
    })
}

fn check_out(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure {
            code: 2,
            body: json!({ "error": "io", "message": format!("no such directory: {}", dir.display()) }),
        }),
        _ => Ok(()),
    }
}

/// File contents and their SHA-256.
fn load(path: &Path) -> Result<(Vec<u8>, String), Failure> {
    let bytes = std::fs::read(path).map_err(Error::from)?;
    let hash = hex::encode(Sha256::digest(&bytes));
    Ok((bytes, hash))
}

fn parse<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, Failure> {
    Ok(serde_json::from_slice(bytes).map_err(Error::from)?)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

/// Reads and validates a quantum semigroup file. A file that fails
/// validation is a contract failure carrying the report.
fn load_qs(path: &Path, tol: f64) -> Result<(QuantumSemigroup, String), Failure> {
    let (bytes, hash) = load(path)?;
    let qs = parse::<QuantumSemigroupFile>(&bytes)?.to_qs()?;
    let report = qs.validate(tol)?;
    if !report.passed {
        return Err(Failure::contract(json!({
            "error": "validation",
            "message": format!("{} does not validate", path.display()),
            "failures": report.failures(),
            "report": to_value(&report),
        })));
    }
    Ok((qs.into_validated(tol)?, hash))
}

fn validate(qs: &Path, tol: f64) -> Run {
    let qs = resolve(qs)?;
    let (bytes, hash) = load(&qs)?;
    let parsed = parse::<QuantumSemigroupFile>(&bytes)?.to_qs()?;
    let report = parsed.validate(tol)?;
    let body = json!({
        "command": "validate",
        "qs": qs.display().to_string(),
        "qs_sha256": hash,
        "provenance": parsed.provenance().as_str(),
        "failures": report.failures(),
        "passed": report.passed,
        "report": to_value(&report),
        "tol": tol,
    });
    if report.passed {
        Ok(body)
    } else {
        Err(Failure::contract(body))
    }
}

fn mean(qs: &Path, side: Side, tol: f64, max_iter: usize, out: Option<&Path>) -> Run {
    let qs_path = resolve(qs)?;
    if let Some(out) = out {
        check_out(out)?;
    }
    let (qs, hash) = load_qs(&qs_path, DEFAULT_TOL)?;
    let outcome = solve_mean(&qs, side, SolverOptions { tol, max_iter })?;
    let mut body = json!({
        "command": "mean",
        "qs": qs_path.display().to_string(),
        "qs_sha256": hash,
        "side": side,
        "tol": tol,
        "max_iter": max_iter,
        "status": outcome.report().status,
        "report": to_value(outcome.report()),
    });
    match outcome {
        SolveOutcome::Found(state, _) => {
            let file = StateFile::from_state(&state);
            if let Some(out) = out {
                write_json(out, &file)?;
                body["out"] = json!(out.display().to_string());
            }
            body["mean"] = to_value(&file);
            Ok(body)
        }
        SolveOutcome::Infeasible(_) => Err(Failure::contract(body)),
    }
}

fn stabilize(qs: &Path, mean: &Path, f: &Path, side: Side, out: Option<&Path>) -> Run {
    let (qs_path, mean_path, f_path) = (resolve(qs)?, resolve(mean)?, resolve(f)?);
    if let Some(out) = out {
        check_out(out)?;
    }
    let (qs, qs_hash) = load_qs(&qs_path, DEFAULT_TOL)?;
    let (bytes, mean_hash) = load(&mean_path)?;
    let m = parse::<StateFile>(&bytes)?.to_state()?;
    let (bytes, f_hash) = load(&f_path)?;
    let f = parse::<ElementFile>(&bytes)?.to_element()?;
    let report = hyers_ulam_correct(&qs, &m, &f, side)?;
    let correction = ElementFile::from_element(&report.correction);
    if let Some(out) = out {
        write_json(out, &correction)?;
    }
    let body = json!({
        "command": "stabilize",
        "side": side,
        "defect_norm": report.defect_norm,
        "distance": report.distance,
        "additivity_residual": report.additivity_residual,
        "bound_satisfied": report.bound_satisfied,
        "unital_delta": report.unital_delta,
        "correction": to_value(&correction),
        "additivity_tol": dqs::stabilize::ADDITIVITY_TOL,
        "invariance_tol": dqs::mean::INVARIANCE_TOL,
        "inputs": {
            "qs": { "path": qs_path.display().to_string(), "sha256": qs_hash },
            "mean": { "path": mean_path.display().to_string(), "sha256": mean_hash },
            "f": { "path": f_path.display().to_string(), "sha256": f_hash },
        },
    });
    if report.bound_satisfied {
        Ok(body)
    } else {
        Err(Failure::contract(body))
    }
}

fn run_laws(qs: &Path, draws: usize, seed: u64, tol: f64) -> Run {
    let qs_path = resolve(qs)?;
    let (qs, hash) = load_qs(&qs_path, DEFAULT_TOL)?;
    let report = laws::sweep(&qs, draws, seed, tol)?;
    let mut body = to_value(&report);
    body["command"] = json!("laws");
    body["qs"] = json!(qs_path.display().to_string());
    body["qs_sha256"] = json!(hash);
    if report.passed {
        Ok(body)
    } else {
        Err(Failure::contract(body))
    }
}

fn experiment(qs: &Path, mean: &Path, seed: u64, trials: usize, amplitude: f64, side: Side) -> Run {
    let (qs_path, mean_path) = (resolve(qs)?, resolve(mean)?);
    let (qs, _) = load_qs(&qs_path, DEFAULT_TOL)?;
    let (bytes, _) = load(&mean_path)?;
    let m = parse::<StateFile>(&bytes)?.to_state()?;
    let stats = perturbation_experiment(&qs, &m, side, seed, trials, amplitude)?;
    Ok(to_value(&stats))
}

fn build(source: &BuildSource, out: &Path, tol: f64) -> Run {
    check_out(out)?;
    let (input, qs) = match (&source.classical, &source.group_dual) {
        (Some(path), None) => {
            let path = resolve(path)?;
            let (bytes, _) = load(&path)?;
            let table = parse::<TableFile>(&bytes)?.to_table()?;
            (path, QuantumSemigroup::from_classical(&table)?)
        }
        (None, Some(path)) => {
            let path = resolve(path)?;
            let (bytes, _) = load(&path)?;
            let (group, irreps) = parse::<GroupDualFile>(&bytes)?.parts()?;
            (
                path,
                QuantumSemigroup::from_group_dual(&group, &irreps, tol)?,
            )
        }
        _ => {
            return Err(Failure::usage(
                "exactly one of --classical and --group-dual is required",
            ))
        }
    };
    let report = qs.validate(tol)?;
    let mut body = json!({
        "command": "build",
        "input": input.display().to_string(),
        "provenance": qs.provenance().as_str(),
        "failures": report.failures(),
        "passed": report.passed,
        "report": to_value(&report),
        "tol": tol,
    });
    if !report.passed {
        return Err(Failure::contract(body));
    }
    write_json(out, &QuantumSemigroupFile::from_qs(&qs))?;
    body["out"] = json!(out.display().to_string());
    Ok(body)
}

fn dispatch(cli: Cli) -> Run {
    match cli.command {
        Command::Validate { qs, tol } => validate(&qs, tol),
        Command::Mean {
            qs,
            side,
            tol,
            max_iter,
            out,
        } => mean(&qs, side, tol, max_iter, out.as_deref()),
        Command::Stabilize {
            qs,
            mean,
            f,
            side,
            out,
        } => stabilize(&qs, &mean, &f, side, out.as_deref()),
        Command::Laws {
            qs,
            draws,
            seed,
            tol,
        } => run_laws(&qs, draws, seed, tol),
        Command::Experiment {
            qs,
            mean,
            seed,
            trials,
            amplitude,
            side,
        } => experiment(&qs, &mean, seed, trials, amplitude, side),
        Command::Build { source, out, tol } => build(&source, &out, tol),
    }
}

fn emit(body: &Value) {
    print!("{}", to_json_string(body).expect("values serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let failure = Failure::usage(e.render().to_string().trim_end());
            emit(&failure.body);
            return ExitCode::from(failure.code);
        }
    };
    match dispatch(cli) {
        Ok(body) => {
            emit(&body);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            emit(&failure.body);
            ExitCode::from(failure.code)
        }
    }
}
