//! The `lcsm` command line: `fit`, `simulate` and `basis`.
//!
//! Errors are reported as one line, `error: <kind>: <message>`, with exit
//! code 2 for usage errors, 3 for data errors and 4 for numerical failures.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{normalize_basis, BasisSet, PenaltyMode, RemainderSize};
use crate::error::{LcsmError, Result};
use crate::path::{
    fit_path, lambda_max, make_grid, PathConfig, PathResult, PdCorrection, DEFAULT_DELTA, DEFAULT_NLAMBDA,
    DEFAULT_PD_EPSILON,
};
use crate::simulate::{format_summary, gen_adjacency, run_replications, write_csv, AdjacencyType, SimConfig};
use crate::solver::{build_stats, predict_parts, Coefficients, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::symcore::{frob_norm, SymMatrix};
use crate::theory::{self, TheoryInputs, TheoryReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Relative asymmetry tolerated in adjacency and matrix-observation input.
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "lcsm", version, about = "Linear covariance selection model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a penalized covariance regression along a lambda path.
    Fit(FitArgs),
    /// Run the Monte-Carlo comparison against unpenalized regression.
    Simulate(SimulateArgs),
    /// Build a basis and report its diagnostics.
    Basis(BasisArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Headerless CSV, one observation per row.
    #[arg(long)]
    pub data: PathBuf,
    /// Treat the data as n stacked d x d second-moment matrices.
    #[arg(long)]
    pub matrix_obs: bool,
    /// Headerless d x d adjacency CSV; without it only the identity is used.
    #[arg(long)]
    pub adjacency: Option<PathBuf>,
    /// Highest adjacency power in the basis.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Remainder size: `full` or a count.
    #[arg(long, default_value = "full")]
    pub remainder: RemainderSize,
    #[arg(long, default_value_t = DEFAULT_NLAMBDA)]
    pub nlambda: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// default | remainder-only | all
    #[arg(long, default_value = "default")]
    pub penalize: PenaltyMode,
    /// Scale every basis matrix to unit Frobenius norm.
    #[arg(long)]
    pub normalize: bool,
    /// Center columns before forming second moments.
    #[arg(long)]
    pub center: bool,
    #[arg(long, default_value_t = DEFAULT_PD_EPSILON)]
    pub pd_epsilon: f64,
    /// Fit a single penalty instead of a path.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// JSON report destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the selected covariance estimate as CSV.
    #[arg(long)]
    pub sigma_csv: Option<PathBuf>,
    #[command(flatten)]
    pub theory: TheoryArgs,
}

/// Inputs of the theoretical tuning report; it is produced only with `--nu`.
#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_w: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bernstein_b: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Network type: 1 hub, 2 two-component hub, 3 random.
    #[arg(long = "type")]
    pub adj_type: AdjacencyType,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Hub counts, comma separated (one for type 1, two for type 2).
    #[arg(long, value_delimiter = ',')]
    pub hubs: Option<Vec<usize>>,
    /// Use one adjacency for every replication.
    #[arg(long)]
    pub fixed_adjacency: bool,
    /// Record zero runtimes so the CSV is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, default_value_t = DEFAULT_NLAMBDA)]
    pub nlambda: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_PD_EPSILON)]
    pub pd_epsilon: f64,
    /// Per-replication CSV destination.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BasisArgs {
    #[arg(long, conflicts_with = "adj_type")]
    pub adjacency: Option<PathBuf>,
    /// Draw a random network of this type instead of reading one.
    #[arg(long = "type", requires = "d")]
    pub adj_type: Option<AdjacencyType>,
    /// Dimension; alone it gives an identity-only basis.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub hubs: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, default_value = "full")]
    pub remainder: RemainderSize,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(LcsmError),
}

impl From<LcsmError> for CliError {
    fn from(e: LcsmError) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(LcsmError::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Lib(_) => EXIT_DATA,
        }
    }

    /// `error: <kind>: <message>` on a single line.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Lib(e) => (e.kind(), e.to_string()),
        };
        format!("error: {kind}: {}", msg.replace('\n', " "))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
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
            let text = e.to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return EXIT_USAGE;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> std::result::Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => {
            let report = cmd_fit(&a)?;
            write_json(&report, a.out.as_deref())?;
            if let Some(p) = &a.sigma_csv {
                write_matrix_csv(&report.sigma_hat, p)?;
            }
            Ok(())
        }
        Command::Simulate(a) => {
            let text = cmd_simulate(&a)?;
            Ok(write_stdout(&text)?)
        }
        Command::Basis(a) => {
            let report = cmd_basis(&a)?;
            write_json(&report, a.out.as_deref())
        }
    }
}

/// Reads a headerless numeric CSV. Rows must all have the same width.
pub fn read_csv_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| LcsmError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(rec.len());
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| LcsmError::Parse {
                line,
                message: format!("column {}: '{field}' is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(LcsmError::Parse {
                    line,
                    message: format!("column {}: non-finite value", col + 1),
                });
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(LcsmError::Parse {
                    line,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(LcsmError::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path)
        .map_err(|e| LcsmError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read_csv_rows(file)
}

fn rows_to_dense(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

pub fn read_adjacency(path: &Path) -> Result<SymMatrix> {
    let rows = read_csv_file(path)?;
    SymMatrix::from_dense(&rows_to_dense(&rows), SYMMETRY_TOL)
}

/// Second-moment matrices `Z_i = y_i y_i^T` from observation rows.
pub fn second_moments(rows: &[Vec<f64>], center: bool) -> Vec<SymMatrix> {
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    if center {
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        let n = rows.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
    }
    rows.iter()
        .map(|r| {
            let y: Vec<f64> = r.iter().zip(&mean).map(|(v, m)| v - m).collect();
            SymMatrix::outer(&y)
        })
        .collect()
}

/// Splits `n d` rows of width `d` into `n` symmetric blocks.
pub fn stacked_matrices(rows: &[Vec<f64>]) -> Result<Vec<SymMatrix>> {
    let d = rows[0].len();
    if !rows.len().is_multiple_of(d) {
        return Err(LcsmError::Parse {
            line: rows.len() as u64,
            message: format!("{} rows do not split into {d} x {d} blocks", rows.len()),
        });
    }
    rows.chunks(d)
        .enumerate()
        .map(|(i, block)| {
            SymMatrix::from_dense(&rows_to_dense(block), SYMMETRY_TOL)
                .map_err(|e| LcsmError::invalid(format!("observation {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub d: usize,
    pub n: usize,
    pub s: usize,
    /// Number of basis matrices.
    pub p: usize,
    /// Number of remainder matrices.
    pub q: usize,
    pub penalize: PenaltyMode,
    pub normalize: bool,
    pub center: bool,
    pub matrix_obs: bool,
    pub tol: f64,
    pub delta: f64,
    pub pd_epsilon: f64,
    pub lambda_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub risk: f64,
    pub aic: f64,
    pub active: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub metadata: FitMetadata,
    pub lambdas: Vec<f64>,
    pub path: Vec<PathEntry>,
    pub selected_index: usize,
    pub selected_lambda: f64,
    /// Coefficients on the fitted (possibly normalized) basis.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Coefficients on the unnormalized basis; present with `--normalize`.
    pub original_scale: Option<Vec<f64>>,
    pub sigma_hat: Vec<Vec<f64>>,
    pub sigma_a: Vec<Vec<f64>>,
    pub sigma_r: Vec<Vec<f64>>,
    pub pd_correction: PdCorrection,
    pub theory: Option<TheoryReport>,
}

fn dense_rows(m: &SymMatrix) -> Vec<Vec<f64>> {
    (0..m.dim()).map(|k| (0..m.dim()).map(|l| m.get(k, l)).collect()).collect()
}

/// Loads observations and builds the basis exactly as `fit` does.
pub fn prepare_fit(a: &FitArgs) -> Result<(Vec<SymMatrix>, BasisSet)> {
    let rows = read_csv_file(&a.data)?;
    let data = if a.matrix_obs {
        stacked_matrices(&rows)?
    } else {
        second_moments(&rows, a.center)
    };
    let d = data[0].dim();
    let bs = match &a.adjacency {
        Some(path) => {
            let adj = read_adjacency(path)?;
            if adj.dim() != d {
                return Err(LcsmError::DimensionMismatch {
                    expected: d,
                    found: adj.dim(),
                });
            }
            BasisSet::from_adjacency(&adj, a.order, a.remainder)?
        }
        None => BasisSet::identity_only(d, a.remainder)?,
    };
    let bs = if a.normalize { normalize_basis(&bs)? } else { bs };
    Ok((data, bs))
}

pub fn cmd_fit(a: &FitArgs) -> std::result::Result<FitReport, CliError> {
    if a.nlambda == 0 {
        return Err(usage("--nlambda must be at least 1"));
    }
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(usage("--delta must lie in (0, 1)"));
    }
    if !(a.tol > 0.0) || !(a.pd_epsilon > 0.0) {
        return Err(usage("--tol and --pd-epsilon must be positive"));
    }
    if let Some(l) = a.lambda {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(usage("--lambda must be finite and non-negative"));
        }
    }
    let (data, bs) = prepare_fit(a)?;
    let stats = build_stats(&data, &bs)?;
    let mask = bs.penalty_mask(a.penalize);
    let (grid, lm) = match a.lambda {
        Some(l) => (vec![l], None),
        None => {
            let lm = lambda_max(&stats, &mask)?;
            (make_grid(lm, a.delta, a.nlambda)?, Some(lm))
        }
    };
    let cfg = PathConfig {
        tol: a.tol,
        max_iter: a.max_iter,
        penalized: mask,
        pd_epsilon: Some(a.pd_epsilon),
    };
    let path = fit_path(&stats, &bs, &grid, &cfg)?;
    let theory = match a.theory.nu {
        Some(nu) => Some(theory_block(a, nu, &bs, stats.n, path.selected_coefficients())?),
        None => None,
    };
    Ok(build_report(a, &bs, stats.n, lm, &path, theory))
}

fn theory_block(a: &FitArgs, nu: f64, bs: &BasisSet, n: usize, theta: &Coefficients) -> Result<TheoryReport> {
    let m1 = (0..bs.len()).map(|j| frob_norm(&bs.matrix(j))).fold(0.0, f64::max);
    theory::report(&TheoryInputs {
        n,
        d: bs.dim(),
        p: bs.len(),
        nu,
        u_p: bs.u_p(),
        m1,
        sigma_w: a.theory.sigma_w,
        sigma_eps: a.theory.sigma_eps,
        b: a.theory.bernstein_b,
        theta_l1: theta.l1_norm(),
    })
}

fn build_report(
    a: &FitArgs,
    bs: &BasisSet,
    n: usize,
    lm: Option<f64>,
    path: &PathResult,
    theory: Option<TheoryReport>,
) -> FitReport {
    let entries = (0..path.lambdas.len())
        .map(|i| {
            let c = &path.coefficients[i];
            PathEntry {
                lambda: path.lambdas[i],
                coefficients: c.values().to_vec(),
                risk: path.risks[i],
                aic: path.aics[i],
                active: (0..c.len()).filter(|&j| c.values()[j] != 0.0).collect(),
                iterations: path.iterations[i],
            }
        })
        .collect();
    let theta = path.selected_coefficients();
    let (sigma_a, sigma_r) = predict_parts(theta, bs);
    FitReport {
        metadata: FitMetadata {
            d: bs.dim(),
            n,
            s: if a.adjacency.is_some() { a.order } else { 0 },
            p: bs.len(),
            q: bs.n_remainder(),
            penalize: a.penalize,
            normalize: a.normalize,
            center: a.center,
            matrix_obs: a.matrix_obs,
            tol: a.tol,
            delta: a.delta,
            pd_epsilon: a.pd_epsilon,
            lambda_max: lm,
        },
        lambdas: path.lambdas.clone(),
        path: entries,
        selected_index: path.selected,
        selected_lambda: path.selected_lambda(),
        alpha: theta.alpha().to_vec(),
        beta: theta.beta().to_vec(),
        original_scale: a.normalize.then(|| theta.rescaled(bs.scales()).values().to_vec()),
        sigma_hat: dense_rows(&path.sigma_hat),
        sigma_a: dense_rows(&sigma_a),
        sigma_r: dense_rows(&sigma_r),
        pd_correction: path.pd,
        theory,
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> std::result::Result<String, CliError> {
    let mut cfg = SimConfig::new(a.adj_type, a.d, a.s, a.n);
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    if let Some(h) = &a.hubs {
        cfg.hubs = h.clone();
    }
    cfg.fixed_adjacency = a.fixed_adjacency;
    cfg.timing = !a.no_timing;
    cfg.nlambda = a.nlambda;
    cfg.delta = a.delta;
    cfg.tol = a.tol;
    cfg.pd_epsilon = Some(a.pd_epsilon);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let result = run_replications(&cfg, a.threads)?;
    if result.records.is_empty() {
        let reason = result.failures.first().map(|f| f.1.clone()).unwrap_or_default();
        return Err(LcsmError::DegenerateData(format!("every replication failed: {reason}")).into());
    }
    if let Some(p) = &a.csv {
        let mut w = BufWriter::new(File::create(p)?);
        write_csv(&result, &mut w)?;
        w.flush()?;
    }
    let mut text = format_summary(&result);
    for (rep, reason) in &result.failures {
        text.push_str(&format!("replication {rep} failed: {reason}\n"));
    }
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub d: usize,
    pub s: usize,
    pub p: usize,
    pub q: usize,
    pub u_p: f64,
    pub normalized: bool,
    pub orthonormality_residual: f64,
    pub cross_residual: f64,
    /// Independence of the given block.
    pub independent: bool,
    pub condition_ratio: f64,
}

pub fn cmd_basis(a: &BasisArgs) -> std::result::Result<BasisReport, CliError> {
    let (adjacency, d) = match (&a.adjacency, a.adj_type, a.d) {
        (Some(path), _, d) => {
            let adj = read_adjacency(path)?;
            if let Some(d) = d {
                if d != adj.dim() {
                    return Err(LcsmError::DimensionMismatch {
                        expected: d,
                        found: adj.dim(),
                    }
                    .into());
                }
            }
            let dim = adj.dim();
            (Some(adj), dim)
        }
        (None, Some(kind), Some(d)) => {
            let hubs = match &a.hubs {
                Some(h) => h.clone(),
                None => kind
                    .default_hubs(d)
                    .ok_or_else(|| usage(format!("no default hub counts for type {kind} at d = {d}; pass --hubs")))?,
            };
            let mut rng = crate::simulate::replication_rng(a.seed, 0);
            let adj = gen_adjacency(kind, d, &hubs, &mut rng).map_err(|e| usage(e.to_string()))?;
            (Some(adj), d)
        }
        (None, None, Some(d)) => (None, d),
        _ => return Err(usage("pass --adjacency, --type with --d, or --d alone")),
    };
    let bs = match &adjacency {
        Some(adj) => BasisSet::from_adjacency(adj, a.order, a.remainder)?,
        None => BasisSet::identity_only(d, a.remainder)?,
    };
    let bs = if a.normalize { normalize_basis(&bs)? } else { bs };
    // the remainder is orthonormal and orthogonal to the given block, so the
    // residuals cover it; only the given block needs the Gram test
    let ind = crate::basis::check_linear_independence(bs.given());
    let condition_ratio = match ind {
        crate::basis::Independence::Independent { condition_ratio }
        | crate::basis::Independence::Dependent { condition_ratio, .. } => condition_ratio,
    };
    let res = bs.residuals();
    Ok(BasisReport {
        d,
        s: if adjacency.is_some() { a.order } else { 0 },
        p: bs.len(),
        q: bs.n_remainder(),
        u_p: bs.u_p(),
        normalized: bs.is_normalized(),
        orthonormality_residual: res.orthonormality,
        cross_residual: res.cross,
        independent: ind.is_independent(),
        condition_ratio,
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> std::result::Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| LcsmError::invalid(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => write_stdout(&(text + "\n"))?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe on the reading side is not an error.
fn write_stdout(text: &str) -> io::Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn write_matrix_csv(rows: &[Vec<f64>], path: &Path) -> std::result::Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parse_reports_line_numbers() {
        let err = read_csv_rows("1,2\n3,x\n".as_bytes()).unwrap_err();
        match err {
            LcsmError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = read_csv_rows("1,2\n3,4\n5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, LcsmError::Parse { line: 3, .. }));
        assert!(read_csv_rows("".as_bytes()).is_err());
        let rows = read_csv_rows(" 1, 2\n\n3 ,4\n".as_bytes()).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn second_moments_center() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 6.0]];
        let z = second_moments(&rows, false);
        assert_eq!(z[1].get(1, 0), 18.0);
        let z = second_moments(&rows, true);
        assert_eq!(z[0].get(0, 0), 1.0);
        assert_eq!(z[0].get(1, 0), 2.0);
        assert_eq!(z[1].get(1, 1), 4.0);
    }

    #[test]
    fn stacked_blocks() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let z = stacked_matrices(&rows).unwrap();
        assert_eq!(z.len(), 2);
        assert_eq!(z[1].get(1, 0), 1.0);
        assert!(stacked_matrices(&rows[..3]).is_err());
        let asym = vec![vec![1.0, 2.0], vec![5.0, 3.0]];
        assert!(stacked_matrices(&asym).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(usage("x").exit_code(), EXIT_USAGE);
        let dep = CliError::Lib(LcsmError::Dependency {
            index: 1,
            detail: String::new(),
        });
        assert_eq!(dep.exit_code(), EXIT_NUMERIC);
        assert!(dep.line().starts_with("error: dependency: "));
        let parse = CliError::Lib(LcsmError::Parse {
            line: 3,
            message: "bad\nvalue".into(),
        });
        assert_eq!(parse.exit_code(), EXIT_DATA);
        assert!(!parse.line().contains('\n'));
    }

    #[test]
    fn invalid_type_is_a_usage_error() {
        let code = main_with_args(["lcsm", "simulate", "--type", "4", "--d", "20"]);
        assert_eq!(code, EXIT_USAGE);
    }
}
