//! Command-line front end. `run` returns the process exit code: 0 on success, 2 when a
//! registered check fails, 1 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::hypotheses::audit_hypotheses;
use crate::matrix::SystemMatrix;
use crate::measure::DEFAULT_SEED;
use crate::registry::{run_example, ExampleId};
use crate::scenario::{uniform_grid, Scenario, Window};
use crate::signal::Signal;
use crate::solver::{largest_delay_window, solve_representation_trajectory, solve_stepping, window_norm, Trajectory};
use crate::stability::{
    certify_exponential, certify_exponential_lp, continuous_dependence_sweep, CertificateKind, SweepMode,
};
use crate::transport::{CharacteristicMaps, TransportField, TransportSolution};

pub const SEED_VAR: &str = "DELAYDIFF_SEED";

#[derive(Parser, Debug)]
#[command(name = "delaydiff", version, about = "Linear difference equations with time-dependent delay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolveMethod {
    Representation,
    Stepping,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a scenario on its grid.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, value_enum, default_value = "representation")]
        method: SolveMethod,
    },
    /// Hypothesis audit and decay certificates as JSON on stdout.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Exponent for the product condition and the Lp certificate.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Evaluate a transport problem at the given times.
    Transport {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a registered example and compare against its expected values.
    Reproduce {
        example_id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Continuous-dependence table as CSV (or JSON) on stdout.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Checks,
}

impl<E: std::fmt::Display> From<E> for Failure
where
    E: Into<crate::error::Error>,
{
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Checks) => 2,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// Seed from `DELAYDIFF_SEED` (decimal or `0x` hex), else the library default.
pub fn seed_from_env() -> std::result::Result<u64, String> {
    match std::env::var(SEED_VAR) {
        Err(_) => Ok(DEFAULT_SEED),
        Ok(s) => {
            let s = s.trim();
            let parsed = match s.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => s.parse(),
            };
            parsed.map_err(|_| format!("{SEED_VAR} must be an unsigned integer, got {s:?}"))
        }
    }
}

/// Deserializes a JSON config; errors carry a JSON pointer to the offending field.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> std::result::Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut pointer: String = e
            .path()
            .iter()
            .filter_map(|seg| match seg {
                serde_path_to_error::Segment::Seq { index } => Some(format!("/{index}")),
                serde_path_to_error::Segment::Map { key } => Some(format!("/{key}")),
                serde_path_to_error::Segment::Enum { .. } | serde_path_to_error::Segment::Unknown => None,
            })
            .collect();
        let msg = e.inner().to_string();
        if let Some(field) = missing_field(&msg) {
            pointer.push('/');
            pointer.push_str(field);
        }
        if pointer.is_empty() {
            pointer.push('/');
        }
        format!("config error at {pointer}: {msg}")
    })
}

fn missing_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("missing field `")?;
    rest.split('`').next()
}

fn read_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(Failure::Usage)
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable report") + "\n"
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Simulate { config, out, format, method } => simulate(&config, &out, format, method),
        Command::Analyze { config, p } => analyze(&config, p),
        Command::Transport { config, times, out } => transport(&config, &times, out.as_deref()),
        Command::Reproduce { example_id, out } => reproduce(&example_id, &out),
        Command::Sweep { config, format } => sweep(&config, format),
    }
}

fn simulate(config: &Path, out: &Path, format: Format, method: SolveMethod) -> CliResult<()> {
    let scn: Scenario = read_config(config)?;
    scn.validate()?;
    let traj: Trajectory = match method {
        SolveMethod::Representation => solve_representation_trajectory(&scn)?,
        SolveMethod::Stepping => solve_stepping(&scn)?,
    };
    let mut norms = Vec::new();
    for req in &scn.norms {
        for t in scn.grid.iter().filter(|t| **t > 0.0) {
            let w = match req.window {
                Window::LargestDelay => largest_delay_window(&scn, *t)?,
                Window::Fixed(w) => w,
            };
            if t - w < scn.initial.left() {
                continue;
            }
            norms.push(json!({ "t": t, "p": req.p, "window": w, "norm": window_norm(&traj, *t, req.p.0, w)? }));
        }
    }
    match format {
        Format::Csv => {
            write(out, "trajectory.csv", &traj.to_csv())?;
            if !norms.is_empty() {
                let mut csv = String::from("t,p,window,norm\n");
                for n in &norms {
                    csv.push_str(&format!("{},{},{},{}\n", n["t"], n["p"], n["window"], n["norm"]));
                }
                write(out, "norms.csv", &csv)?;
            }
        }
        Format::Json => write(out, "trajectory.json", &to_json(&json!({ "trajectory": traj, "norms": norms })))?,
    }
    println!("{}", to_json(&json!({ "samples": traj.samples.len(), "residual": traj.residual_report })).trim_end());
    Ok(())
}

fn analyze(config: &Path, p: Option<f64>) -> CliResult<()> {
    let scn: Scenario = read_config(config)?;
    scn.validate()?;
    if p.is_some_and(|p| !(p >= 1.0)) {
        return Err(usage("--p must be at least 1"));
    }
    let report = audit_hypotheses(&scn.delay, &scn.matrix, scn.horizon, p);
    let outcome = |r: crate::error::Result<crate::stability::DecayCertificate>| match r {
        Ok(c) => json!(c),
        Err(e) => json!({ "refused": e.to_string() }),
    };
    let mut certs = serde_json::Map::new();
    certs.insert("pointwise".into(), outcome(certify_exponential(&scn, 0.1, CertificateKind::PointwiseExp)));
    certs.insert("sup-window".into(), outcome(certify_exponential(&scn, 0.1, CertificateKind::SupWindowExp)));
    if let Some(p) = p.filter(|p| p.is_finite()) {
        certs.insert("lp".into(), outcome(certify_exponential_lp(&scn, p, 0.1)));
    }
    println!("{}", to_json(&json!({ "hypotheses": report, "certificates": certs })).trim_end());
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    pub field: TransportField,
    pub matrix: SystemMatrix,
    /// Initial profile on `[0, 1]`.
    pub u0: Signal,
    #[serde(default)]
    pub ode_step: Option<f64>,
    #[serde(default)]
    pub root_tol: Option<f64>,
    /// Number of spatial cells in the output profile.
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn default_cells() -> usize {
    50
}

fn transport(config: &Path, times: &[f64], out: Option<&Path>) -> CliResult<()> {
    let cfg: TransportConfig = read_config(config)?;
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(usage("--times must be nonnegative and finite"));
    }
    if cfg.cells == 0 {
        return Err(usage("cells must be positive"));
    }
    let maps = CharacteristicMaps::with_options(cfg.field, cfg.ode_step, cfg.root_tol)?;
    let sol = TransportSolution::new(&maps, &cfg.matrix, &cfg.u0)?;
    let xs = uniform_grid(0.0, 1.0, cfg.cells);
    let d = cfg.matrix.dim();
    let mut csv = String::from("t,x");
    for i in 1..=d {
        csv.push_str(&format!(",u_{i}"));
    }
    csv.push('\n');
    let mut delays = Vec::new();
    for t in times {
        for x in &xs {
            csv.push_str(&format!("{t},{x}"));
            for v in sol.u(*t, *x)?.iter() {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
        delays.push(json!({ "t": t, "tau": maps.induced_delay(*t)? }));
    }
    let summary = json!({
        "t0": maps.t0,
        "compatibility_defect": sol.compatibility_defect()?,
        "induced_delay": delays,
    });
    match out {
        Some(dir) => {
            write(dir, "profile.csv", &csv)?;
            write(dir, "summary.json", &to_json(&summary))?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn reproduce(id: &str, out: &Path) -> CliResult<()> {
    let id: ExampleId = id.parse()?;
    let seed = seed_from_env().map_err(Failure::Usage)?;
    let report = run_example(id, seed)?;
    write(out, "report.json", &to_json(&report))?;
    for t in &report.tables {
        write(out, &t.name, &t.csv)?;
    }
    for c in &report.checks {
        println!("{} {}: expected {} actual {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.expected, c.actual);
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepSequence {
    /// Listed `(A_k, x₀ₖ)` pairs, `k = 1, 2, …`.
    Explicit { members: Vec<SweepMember> },
    /// Scalar `A_k = a + 1/k` with constant history `a + 1/k`.
    ScalarOffset { a: f64, k_max: usize },
}

#[derive(Debug, Deserialize)]
pub struct SweepMember {
    pub matrix: SystemMatrix,
    pub initial: Signal,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Scenario,
    pub sequence: SweepSequence,
    pub mode: SweepMode,
    pub window: (f64, f64),
}

fn sweep(config: &Path, format: Format) -> CliResult<()> {
    let cfg: SweepConfig = read_config(config)?;
    cfg.base.validate()?;
    let left = cfg.base.initial.left();
    let table = match &cfg.sequence {
        SweepSequence::Explicit { members } => {
            if members.is_empty() {
                return Err(usage("sequence has no members"));
            }
            continuous_dependence_sweep(
                &|k| members[k - 1].matrix.clone(),
                &|k| members[k - 1].initial.clone(),
                &cfg.base,
                members.len(),
                cfg.mode,
                cfg.window,
            )?
        }
        SweepSequence::ScalarOffset { a, k_max } => {
            if cfg.base.dim() != 1 || *k_max == 0 {
                return Err(usage("scalar-offset needs a scalar base scenario and k_max >= 1"));
            }
            let ak = |k: usize| a + 1.0 / k as f64;
            continuous_dependence_sweep(
                &|k| SystemMatrix::scalar(ak(k)),
                &|k| Signal::constant(vec![ak(k)], left),
                &cfg.base,
                *k_max,
                cfg.mode,
                cfg.window,
            )?
        }
    };
    match format {
        Format::Csv => print!("{}", table.to_csv()),
        Format::Json => print!("{}", to_json(&table)),
    }
    Ok(())
}
