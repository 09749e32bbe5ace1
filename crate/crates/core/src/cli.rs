//! Command-line driver: series iteration, residual verification,
//! boundedness tables and figure data.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boundedness::{self, BoundsConfig, BoundsReport, Case, Subcase, Theorem};
use crate::closed_form::{ClosedForm, OdeOperator};
use crate::conformable::{xi_of, Precheck, Wave, WaveGridSpec};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::rcam::{self, MAX_ORDER};
use crate::sample::{format_value, CurveSample};
use crate::table::{self, TableRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rcam-kdv", version, about = "Multi-hump solitons of the conformable coupled KdV system")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Parameters as a JSON object, a JSON array of objects, or a CSV table.
    #[arg(long, global = true, conflicts_with = "table")]
    pub params_file: Option<PathBuf>,
    /// Use a bundled parameter table.
    #[arg(long, global = true, value_enum)]
    pub table: Option<BundledTable>,
    /// Restrict to one 1-based row of the table.
    #[arg(long, global = true)]
    pub row: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized probe points.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Which boundedness theorem the sign conditions come from.
    #[arg(long, global = true, value_enum, default_value_t = TheoremArg::Two)]
    pub theorem: TheoremArg,
    /// Normalized ODE residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub ode_tol: f64,
    /// Normalized PDE residual tolerance for fractional orders.
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub pde_tol: f64,
    /// Normalized PDE residual tolerance when alpha = beta = 1.
    #[arg(long, global = true, default_value_t = 1e-5)]
    pub classical_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BundledTable {
    Table1,
    Table2,
}

impl BundledTable {
    fn name(self) -> &'static str {
        match self {
            BundledTable::Table1 => "table1",
            BundledTable::Table2 => "table2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    One,
    Two,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::One => Theorem::One,
            TheoremArg::Two => Theorem::Two,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iteration and tabulate the error of each partial sum.
    Iterate(IterateArgs),
    /// Check ODE and PDE residuals of the exact solution.
    Verify(VerifyArgs),
    /// Check boundedness verdicts against each row's declared sub-case.
    Bounds(BoundsArgs),
    /// Emit profile and surface samples.
    Figures(FiguresArgs),
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    /// Number of correction steps.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    /// Refuse orders above this.
    #[arg(long, default_value_t = MAX_ORDER)]
    pub max_order: usize,
    /// Probe points for the error table; defaults to where the convergence
    /// indicator equals 1e-2, 1e-4 and 1e-6.
    #[arg(long = "probe", allow_negative_numbers = true)]
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Ode,
    Pde,
    Both,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = VerifyMode::Both)]
    pub mode: VerifyMode,
    /// ξ samples per row for the ODE check.
    #[arg(long, default_value_t = 100)]
    pub ode_samples: usize,
    /// Random (x, t) samples per row for the PDE check.
    #[arg(long, default_value_t = 50)]
    pub pde_samples: usize,
    /// Evaluate the solution with λ2 scaled by (1 + FRACTION) while keeping
    /// the equations unchanged. A deliberate fault for testing the check.
    #[arg(long, allow_negative_numbers = true)]
    pub perturb_lambda2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = boundedness::DEFAULT_SCAN_POINTS)]
    pub scan_points: usize,
    #[arg(long, default_value_t = boundedness::DEFAULT_PROMINENCE)]
    pub prominence: f64,
    #[arg(long, default_value_t = boundedness::DEFAULT_TAIL_LENGTH)]
    pub tail_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    Auto,
    Profile,
    Surface,
    Both,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Profiles for table1, surfaces for table2, both otherwise.
    #[arg(long, value_enum, default_value_t = FigureKind::Auto)]
    pub kind: FigureKind,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    #[arg(long, default_value_t = 0.5)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 61)]
    pub nx: usize,
    #[arg(long, default_value_t = 61)]
    pub nt: usize,
    /// Sample surfaces even when the parameters fail the sign conditions.
    #[arg(long)]
    pub allow_unbounded: bool,
}

/// A parameter set with its provenance.
#[derive(Debug, Clone)]
struct Job {
    label: String,
    params: Params,
    expected: Option<(Case, Subcase)>,
}

/// Where the jobs came from; picks the default figure kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Table1,
    Table2,
    File,
}

/// A finished command: the exit status plus an optional error for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: Value,
    pub error: Option<(String, String)>,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Outcome {
            code: EXIT_OK,
            summary,
            error: None,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_INPUT
    }
}

pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

/// Parse arguments, run, report; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return EXIT_INPUT;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome.summary).unwrap_or_default()
            );
            if let Some((kind, message)) = &outcome.error {
                eprintln!("{}", error_json(kind, message));
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    for (name, tol) in [
        ("ode-tol", g.ode_tol),
        ("pde-tol", g.pde_tol),
        ("classical-tol", g.classical_tol),
    ] {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Input(format!("--{name} must be positive, got {tol}")));
        }
    }
    let (source, jobs) = load_jobs(g)?;
    fs::create_dir_all(&g.out).map_err(|e| Error::Io(format!("{}: {e}", g.out.display())))?;
    match &cli.command {
        Command::Iterate(a) => cmd_iterate(g, a, &jobs),
        Command::Verify(a) => cmd_verify(g, a, &jobs),
        Command::Bounds(a) => cmd_bounds(g, a, &jobs),
        Command::Figures(a) => cmd_figures(g, a, source, &jobs),
    }
}

fn load_jobs(g: &GlobalArgs) -> Result<(Source, Vec<Job>)> {
    let from_rows = |prefix: &str, rows: Vec<TableRow>| -> Vec<Job> {
        rows.into_iter()
            .map(|r| Job {
                label: format!("{prefix}_{}", r.label()),
                params: r.params,
                expected: Some((r.case, r.expected_subcase)),
            })
            .collect()
    };
    let (source, jobs) = match (&g.params_file, g.table) {
        (Some(path), _) => (Source::File, jobs_from_file(path, from_rows)?),
        (None, Some(t)) => {
            let source = match t {
                BundledTable::Table1 => Source::Table1,
                BundledTable::Table2 => Source::Table2,
            };
            (source, from_rows(t.name(), table::bundled(t.name())?))
        }
        (None, None) => {
            return Err(Error::Input(
                "no parameters given; pass --params-file or --table".into(),
            ))
        }
    };
    let jobs = match g.row {
        None => jobs,
        Some(row) => {
            if row == 0 || row > jobs.len() {
                return Err(Error::Index {
                    index: row,
                    available: jobs.len(),
                });
            }
            vec![jobs[row - 1].clone()]
        }
    };
    Ok((source, jobs))
}

fn jobs_from_file(
    path: &Path,
    from_rows: impl Fn(&str, Vec<TableRow>) -> Vec<Job>,
) -> Result<Vec<Job>> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("params")
        .to_owned();
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        return Ok(from_rows(&stem, table::read_table(path)?));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let list = match value {
        Value::Array(items) => items,
        single => vec![single],
    };
    list.into_iter()
        .enumerate()
        .map(|(i, v)| {
            let params: Params = serde_json::from_value(v)
                .map_err(|e| Error::Input(format!("{} entry {}: {e}", path.display(), i + 1)))?;
            Ok(Job {
                label: format!("{stem}{:02}", i + 1),
                params,
                expected: None,
            })
        })
        .collect()
}

/// Write through a temporary file in the same directory, then rename.
fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", target.display()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, &target).map_err(io)?;
    Ok(target)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(format!("serializing {name}: {e}")))?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(format!("{name}: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(format!("{name}: {e}")))?;
    write_atomic(dir, name, &bytes)
}

fn error_value(e: &Error) -> Value {
    json!({ "kind": e.kind(), "message": e.to_string() })
}

/// Exit status of a batch: the first row error decides, else verification.
fn batch_outcome(summary: Value, errors: &[&Error], failures: usize, what: &str) -> Outcome {
    if let Some(e) = errors.first() {
        return Outcome {
            code: exit_code(e),
            summary,
            error: Some((e.kind().to_owned(), format!("{} row(s) failed: {e}", errors.len()))),
        };
    }
    if failures > 0 {
        return Outcome {
            code: EXIT_VERIFY,
            summary,
            error: Some((
                "verification-failed".to_owned(),
                format!("{failures} row(s) failed {what}"),
            )),
        };
    }
    Outcome::ok(summary)
}

// ---------------------------------------------------------------- iterate

#[derive(Debug, Serialize)]
struct ConvergenceTable {
    label: String,
    order: usize,
    probes: Vec<f64>,
    convergence_ratio: Vec<f64>,
    /// `errors[n][j]`: relative error of the order-`n` partial sum at probe `j`.
    errors: Vec<Vec<f64>>,
}

fn default_probes(params: &Params) -> Vec<f64> {
    [1e-2, 1e-4, 1e-6]
        .iter()
        .filter_map(|&target| rcam::convergence_edge(params, target))
        .collect()
}

fn cmd_iterate(g: &GlobalArgs, a: &IterateArgs, jobs: &[Job]) -> Result<Outcome> {
    if a.order > a.max_order {
        return Err(Error::Input(format!(
            "order {} exceeds --max-order {}",
            a.order, a.max_order
        )));
    }
    let mut rows = Vec::new();
    for job in jobs {
        let state = rcam::iterate(&job.params, a.order)?;
        let cf = ClosedForm::new(&job.params)?;
        let probes = if a.probes.is_empty() {
            default_probes(&job.params)
        } else {
            a.probes.clone()
        };
        let exact = probes
            .iter()
            .map(|&xi| cf.eval_u(xi))
            .collect::<Result<Vec<_>>>()?;
        let mut errors = Vec::new();
        for n in 0..=a.order {
            let sums = state.partial_sums(n, &probes)?;
            errors.push(
                sums.iter()
                    .zip(&exact)
                    .map(|((u, _), e)| relative_error(*u, *e))
                    .collect(),
            );
        }
        let table = ConvergenceTable {
            label: job.label.clone(),
            order: a.order,
            convergence_ratio: probes
                .iter()
                .map(|&xi| rcam::convergence_ratio(&job.params, xi))
                .collect(),
            probes,
            errors,
        };
        write_json(&g.out, &format!("series_{}.json", job.label), &state)?;
        let conv = match g.format {
            Format::Json => write_json(&g.out, &format!("convergence_{}.json", job.label), &table)?,
            Format::Csv => {
                let mut header = vec!["n".to_owned()];
                header.extend(table.probes.iter().map(|p| format!("err_at_{}", format_value(*p))));
                let body: Vec<Vec<String>> = table
                    .errors
                    .iter()
                    .enumerate()
                    .map(|(n, row)| {
                        std::iter::once(n.to_string())
                            .chain(row.iter().map(|e| format_value(*e)))
                            .collect()
                    })
                    .collect();
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                write_csv(&g.out, &format!("convergence_{}.csv", job.label), &header, &body)?
            }
        };
        rows.push(json!({
            "label": job.label,
            "series": format!("series_{}.json", job.label),
            "convergence": conv.file_name().and_then(|s| s.to_str()),
            "final_errors": table.errors.last(),
        }));
    }
    Ok(Outcome::ok(json!({
        "command": "iterate",
        "config": { "order": a.order, "max_order": a.max_order, "probes": a.probes },
        "rows": rows,
    })))
}

/// `|approx - exact| / |exact|`, or the absolute error when `exact = 0`.
fn relative_error(approx: f64, exact: f64) -> f64 {
    let diff = (approx - exact).abs();
    if exact == 0.0 {
        diff
    } else {
        diff / exact.abs()
    }
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, Serialize)]
struct WorstPoint {
    x: Option<f64>,
    t: Option<f64>,
    xi: f64,
    residual_u: f64,
    residual_v: f64,
}

impl WorstPoint {
    fn worst(&self) -> f64 {
        self.residual_u.max(self.residual_v)
    }
}

#[derive(Debug, Serialize)]
struct ResidualRow {
    label: String,
    mode: &'static str,
    tolerance: f64,
    samples: usize,
    max_residual: f64,
    pass: bool,
    worst_points: Vec<WorstPoint>,
}

const WORST_LISTED: usize = 5;

fn summarize(label: &str, mode: &'static str, tolerance: f64, mut points: Vec<WorstPoint>) -> ResidualRow {
    points.sort_by(|a, b| b.worst().total_cmp(&a.worst()));
    let max_residual = points.first().map_or(0.0, WorstPoint::worst);
    let samples = points.len();
    points.truncate(WORST_LISTED);
    ResidualRow {
        label: label.to_owned(),
        mode,
        tolerance,
        samples,
        max_residual,
        pass: max_residual < tolerance,
        worst_points: points,
    }
}

/// The solution actually evaluated: the true one, or one whose λ2 is
/// scaled while λ1, k and b stay put.
fn solution_params(params: &Params, perturb: Option<f64>) -> Params {
    match perturb {
        None => *params,
        Some(f) => {
            let (l1, l2) = (params.lambda1(), params.lambda2() * (1.0 + f));
            Params {
                a: (l2 / l1).powi(2),
                c: -l2 * l2 * params.k.powi(3),
                ..*params
            }
        }
    }
}

fn ode_check(job: &Job, samples: usize, tol: f64, perturb: Option<f64>) -> Result<ResidualRow> {
    if samples < 2 {
        return Err(Error::Input("--ode-samples must be at least 2".into()));
    }
    let (lo, hi) = boundedness::default_window(&job.params)?;
    let op = OdeOperator::new(&job.params);
    let cf = ClosedForm::new(&solution_params(&job.params, perturb))?;
    let points = (0..samples)
        .into_par_iter()
        .map(|i| {
            let xi = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let (r1, r2) = op.residual(|s| cf.eval_u(s), |s| cf.eval_v(s), xi)?;
            Ok(WorstPoint {
                x: None,
                t: None,
                xi,
                residual_u: r1,
                residual_v: r2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&job.label, "ode", tol, points))
}

/// Uniform points of `(0.5, 5]²` from a seeded stream.
pub fn pde_sample_points(seed: u64, n: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = 5.0 - 4.5 * rng.gen::<f64>();
            let t = 5.0 - 4.5 * rng.gen::<f64>();
            (x, t)
        })
        .collect()
}

fn is_classical(p: &Params) -> bool {
    p.alpha == 1.0 && p.beta == 1.0
}

fn pde_check(
    job: &Job,
    samples: usize,
    seed: u64,
    tol: f64,
    perturb: Option<f64>,
) -> Result<ResidualRow> {
    let wave = Wave::new(&solution_params(&job.params, perturb))?;
    let (a, b) = (job.params.a, job.params.b);
    let points = pde_sample_points(seed, samples)
        .into_par_iter()
        .map(|(x, t)| {
            let (r1, r2) = wave.pde_terms_against(a, b, x, t)?.normalized();
            Ok(WorstPoint {
                x: Some(x),
                t: Some(t),
                xi: xi_of(&job.params, x, t)?,
                residual_u: r1,
                residual_v: r2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&job.label, "pde", tol, points))
}

fn cmd_verify(g: &GlobalArgs, a: &VerifyArgs, jobs: &[Job]) -> Result<Outcome> {
    if let Some(f) = a.perturb_lambda2 {
        if !(f.is_finite() && f > -1.0) {
            return Err(Error::Input(format!("--perturb-lambda2 must exceed -1, got {f}")));
        }
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, job) in jobs.iter().enumerate() {
        if matches!(a.mode, VerifyMode::Ode | VerifyMode::Both) {
            match ode_check(job, a.ode_samples, g.ode_tol, a.perturb_lambda2) {
                Ok(r) => rows.push(r),
                Err(e) => errors.push((job.label.clone(), "ode", e)),
            }
        }
        if matches!(a.mode, VerifyMode::Pde | VerifyMode::Both) {
            let tol = if is_classical(&job.params) {
                g.classical_tol
            } else {
                g.pde_tol
            };
            let seed = g.seed.wrapping_add(i as u64);
            match pde_check(job, a.pde_samples, seed, tol, a.perturb_lambda2) {
                Ok(r) => rows.push(r),
                Err(e) => errors.push((job.label.clone(), "pde", e)),
            }
        }
    }
    let failures = rows.iter().filter(|r| !r.pass).count();
    let config = json!({
        "mode": a.mode,
        "ode_tol": g.ode_tol,
        "pde_tol": g.pde_tol,
        "classical_tol": g.classical_tol,
        "ode_samples": a.ode_samples,
        "pde_samples": a.pde_samples,
        "seed": g.seed,
        "perturb_lambda2": a.perturb_lambda2,
    });
    let error_list: Vec<Value> = errors
        .iter()
        .map(|(label, mode, e)| json!({ "label": label, "mode": mode, "error": error_value(e) }))
        .collect();
    let report = json!({
        "command": "verify",
        "config": config,
        "pass": failures == 0 && errors.is_empty(),
        "rows": rows,
        "errors": error_list,
    });
    match g.format {
        Format::Json => {
            write_json(&g.out, "verify.json", &report)?;
        }
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let w = r.worst_points.first();
                    vec![
                        r.label.clone(),
                        r.mode.to_owned(),
                        format_value(r.tolerance),
                        format_value(r.max_residual),
                        r.pass.to_string(),
                        w.map_or(String::new(), |p| format_value(p.xi)),
                        w.and_then(|p| p.x).map_or(String::new(), format_value),
                        w.and_then(|p| p.t).map_or(String::new(), format_value),
                    ]
                })
                .collect();
            write_csv(
                &g.out,
                "verify.csv",
                &["label", "mode", "tolerance", "max_residual", "pass", "worst_xi", "worst_x", "worst_t"],
                &body,
            )?;
        }
    }
    let errs: Vec<&Error> = errors.iter().map(|(_, _, e)| e).collect();
    Ok(batch_outcome(report, &errs, failures, "the residual check"))
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Serialize)]
struct BoundsRow {
    label: String,
    expected_case: Option<Case>,
    expected_subcase: Option<Subcase>,
    matches: bool,
    report: BoundsReport,
}

fn cmd_bounds(g: &GlobalArgs, a: &BoundsArgs, jobs: &[Job]) -> Result<Outcome> {
    if a.scan_points < 100 {
        return Err(Error::Input(format!("--scan-points must be at least 100, got {}", a.scan_points)));
    }
    if !(a.prominence > 0.0) || !(a.tail_length > 0.0) {
        return Err(Error::Input("--prominence and --tail-length must be positive".into()));
    }
    let config = BoundsConfig {
        theorem: g.theorem.into(),
        scan_points: a.scan_points,
        prominence: a.prominence,
        tail_length: a.tail_length,
        window: None,
    };
    let results: Vec<(String, Result<BoundsRow>)> = jobs
        .par_iter()
        .map(|job| {
            let row = boundedness::bounds_report(&job.params, &config).map(|report| {
                let matches = job.expected.is_none_or(|(case, sub)| {
                    report.case_label == case && report.subcase == Some(sub)
                });
                BoundsRow {
                    label: job.label.clone(),
                    expected_case: job.expected.map(|e| e.0),
                    expected_subcase: job.expected.map(|e| e.1),
                    matches,
                    report,
                }
            });
            (job.label.clone(), row)
        })
        .collect();

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (label, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => errors.push((label, e)),
        }
    }
    let mismatches = rows.iter().filter(|r| !r.matches).count();
    let mut notes = Vec::new();
    if jobs.is_empty() {
        notes.push("parameter table is empty; nothing to check".to_owned());
    }
    let error_list: Vec<Value> = errors
        .iter()
        .map(|(label, e)| json!({ "label": label, "error": error_value(e) }))
        .collect();
    let report = json!({
        "command": "bounds",
        "config": config,
        "pass": mismatches == 0 && errors.is_empty(),
        "rows": rows,
        "errors": error_list,
        "notes": notes,
    });
    match g.format {
        Format::Json => {
            write_json(&g.out, "bounds.json", &report)?;
        }
        Format::Csv => {
            let opt = |x: Option<String>| x.unwrap_or_else(|| "none".to_owned());
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let rep = &r.report;
                    vec![
                        r.label.clone(),
                        rep.case_label.to_string(),
                        opt(rep.subcase.map(|s| s.to_string())),
                        opt(r.expected_subcase.map(|s| s.to_string())),
                        r.matches.to_string(),
                        serde_json::to_value(rep.q_sign)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_owned))
                            .unwrap_or_default(),
                        format_value(rep.q_min_abs),
                        rep.humps_u.to_string(),
                        rep.humps_v.to_string(),
                        rep.tail_ok.0.to_string(),
                        rep.tail_ok.1.to_string(),
                    ]
                })
                .collect();
            write_csv(
                &g.out,
                "bounds.csv",
                &[
                    "label", "case", "subcase", "expected_subcase", "matches", "q_sign",
                    "q_min_abs", "humps_u", "humps_v", "tail_left", "tail_right",
                ],
                &body,
            )?;
        }
    }
    let errs: Vec<&Error> = errors.iter().map(|(_, e)| e).collect();
    Ok(batch_outcome(report, &errs, mismatches, "their declared sub-case"))
}

// ---------------------------------------------------------------- figures

fn write_sample(g: &GlobalArgs, stem: &str, sample: &CurveSample) -> Result<String> {
    let path = match g.format {
        Format::Csv => write_atomic(&g.out, &format!("{stem}.csv"), sample.to_csv_string()?.as_bytes())?,
        Format::Json => write_json(&g.out, &format!("{stem}.json"), sample)?,
    };
    Ok(path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_owned())
}

fn figure_row(g: &GlobalArgs, a: &FiguresArgs, kind: FigureKind, job: &Job) -> Result<Vec<String>> {
    let mut files = Vec::new();
    if matches!(kind, FigureKind::Profile | FigureKind::Both) {
        let window = boundedness::default_window(&job.params)?;
        let profile = boundedness::profile(&job.params, window, a.points)?;
        files.push(write_sample(g, &format!("profile_{}", job.label), &CurveSample::Profile(profile))?);
    }
    if matches!(kind, FigureKind::Surface | FigureKind::Both) {
        let grid = WaveGridSpec {
            x_min: a.x_min,
            x_max: a.x_max,
            t_min: a.t_min,
            t_max: a.t_max,
            nx: a.nx,
            nt: a.nt,
        };
        let precheck = if a.allow_unbounded {
            Precheck::Overridden
        } else {
            Precheck::Required
        };
        let surface = Wave::new(&job.params)?.surface(&grid, precheck)?;
        files.push(write_sample(g, &format!("surface_{}", job.label), &CurveSample::Surface(surface))?);
    }
    Ok(files)
}

fn cmd_figures(g: &GlobalArgs, a: &FiguresArgs, source: Source, jobs: &[Job]) -> Result<Outcome> {
    if a.points < 3 {
        return Err(Error::Input(format!("--points must be at least 3, got {}", a.points)));
    }
    let kind = match (a.kind, source) {
        (FigureKind::Auto, Source::Table1) => FigureKind::Profile,
        (FigureKind::Auto, Source::Table2) => FigureKind::Surface,
        (FigureKind::Auto, Source::File) => FigureKind::Both,
        (k, _) => k,
    };
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for job in jobs {
        match figure_row(g, a, kind, job) {
            Ok(files) => rows.push(json!({ "label": job.label, "files": files })),
            Err(e) => {
                rows.push(json!({ "label": job.label, "error": error_value(&e) }));
                errors.push(e);
            }
        }
    }
    let summary = json!({
        "command": "figures",
        "config": {
            "points": a.points,
            "grid": { "x": [a.x_min, a.x_max, a.nx], "t": [a.t_min, a.t_max, a.nt] },
            "allow_unbounded": a.allow_unbounded,
            "format": g.format,
        },
        "rows": rows,
    });
    write_json(&g.out, "figures.json", &summary)?;
    let errs: Vec<&Error> = errors.iter().collect();
    Ok(batch_outcome(summary, &errs, 0, "figure generation"))
}
