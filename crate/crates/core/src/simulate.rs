//! Monte-Carlo harness: random networks, true covariances built on their
//! powers plus a sparse remainder, centered Wishart noise, and the LCSM vs
//! LCM comparison by scaled Frobenius error and coefficient MSE.
//!
//! Every replication draws from its own ChaCha stream (`seed`, stream =
//! replication index), so results do not depend on how replications are
//! scheduled across threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{adjacency_powers, BasisSet, PenaltyMode, RemainderSize};
use crate::error::{LcsmError, Result};
use crate::path::{fit_path, lambda_max, make_grid, PathConfig, DEFAULT_DELTA, DEFAULT_NLAMBDA, DEFAULT_PD_EPSILON};
use crate::solver::{build_stats, predict_parts, Coefficients, SufficientStats, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::symcore::{frob_norm, min_eigenvalue, SymMatrix};

pub const HUB_PROB: f64 = 0.7;
pub const NON_HUB_PROB: f64 = 0.02;
pub const RANDOM_GRAPH_PROB: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdjacencyType {
    /// Hub network.
    Hub = 1,
    /// Two hub networks of size `d/2` joined block-diagonally.
    TwoComponentHub = 2,
    /// Erdos-Renyi graph.
    Random = 3,
}

impl AdjacencyType {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Hub counts used for the tabulated dimensions.
    pub fn default_hubs(self, d: usize) -> Option<Vec<usize>> {
        match (self, d) {
            (AdjacencyType::Hub, 20) => Some(vec![2]),
            (AdjacencyType::Hub, 50) => Some(vec![3]),
            (AdjacencyType::Hub, 80) => Some(vec![4]),
            (AdjacencyType::TwoComponentHub, 20 | 50) => Some(vec![1, 1]),
            (AdjacencyType::TwoComponentHub, 80) => Some(vec![2, 2]),
            (AdjacencyType::Random, _) => Some(vec![]),
            _ => None,
        }
    }
}

impl TryFrom<u8> for AdjacencyType {
    type Error = LcsmError;

    fn try_from(code: u8) -> Result<Self> {
        match code {
            1 => Ok(AdjacencyType::Hub),
            2 => Ok(AdjacencyType::TwoComponentHub),
            3 => Ok(AdjacencyType::Random),
            other => Err(LcsmError::invalid(format!("adjacency type must be 1, 2 or 3, got {other}"))),
        }
    }
}

impl FromStr for AdjacencyType {
    type Err = LcsmError;

    fn from_str(s: &str) -> Result<Self> {
        let code: u8 = s
            .trim()
            .parse()
            .map_err(|_| LcsmError::invalid(format!("adjacency type must be 1, 2 or 3, got '{s}'")))?;
        AdjacencyType::try_from(code)
    }
}

impl fmt::Display for AdjacencyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// 0/1 symmetric matrix with zero diagonal: strict-lower entry `(k, l)` is an
/// edge with probability `col_prob(l)`.
pub fn bernoulli_lower<R: Rng + ?Sized>(d: usize, col_prob: impl Fn(usize) -> f64, rng: &mut R) -> SymMatrix {
    let mut a = SymMatrix::zeros(d);
    for l in 0..d {
        let p = col_prob(l);
        for k in (l + 1)..d {
            if rng.random_bool(p) {
                a.set(k, l, 1.0);
            }
        }
    }
    a
}

/// Hub network: the first `hubs` columns of the lower triangle connect with
/// [`HUB_PROB`], the rest with [`NON_HUB_PROB`].
pub fn hub_adjacency<R: Rng + ?Sized>(d: usize, hubs: usize, rng: &mut R) -> SymMatrix {
    bernoulli_lower(d, |l| if l < hubs { HUB_PROB } else { NON_HUB_PROB }, rng)
}

pub fn gen_adjacency<R: Rng + ?Sized>(kind: AdjacencyType, d: usize, hubs: &[usize], rng: &mut R) -> Result<SymMatrix> {
    if d < 2 {
        return Err(LcsmError::invalid("adjacency dimension must be at least 2"));
    }
    match kind {
        AdjacencyType::Hub => {
            let &[h] = hubs else {
                return Err(LcsmError::invalid("type 1 needs exactly one hub count"));
            };
            if h > d {
                return Err(LcsmError::invalid(format!("{h} hubs exceed dimension {d}")));
            }
            Ok(hub_adjacency(d, h, rng))
        }
        AdjacencyType::TwoComponentHub => {
            if !d.is_multiple_of(2) {
                return Err(LcsmError::invalid(format!("type 2 needs an even dimension, got {d}")));
            }
            let &[h1, h2] = hubs else {
                return Err(LcsmError::invalid("type 2 needs two hub counts"));
            };
            let half = d / 2;
            if h1 > half || h2 > half {
                return Err(LcsmError::invalid("hub count exceeds block dimension"));
            }
            let first = hub_adjacency(half, h1, rng);
            let second = hub_adjacency(half, h2, rng);
            Ok(SymMatrix::from_lower_fn(d, |k, l| match (k < half, l < half) {
                (true, true) => first.get(k, l),
                (false, false) => second.get(k - half, l - half),
                _ => 0.0,
            }))
        }
        AdjacencyType::Random => Ok(bernoulli_lower(d, |_| RANDOM_GRAPH_PROB, rng)),
    }
}

/// The ground truth of one simulated dataset.
#[derive(Debug, Clone)]
pub struct TrueCovariance {
    pub sigma_a: SymMatrix,
    pub sigma_r: SymMatrix,
    pub theta: Coefficients,
    pub basis: BasisSet,
    pub positive_definite: bool,
}

impl TrueCovariance {
    pub fn sigma(&self) -> SymMatrix {
        self.sigma_a.add(&self.sigma_r)
    }
}

/// `Sigma_A = alpha0 I + sum_j alpha_j A^j` and `Sigma_R = sum_k beta_k F_k`
/// with `beta = (beta_head, 0, ...)`, on the unnormalized basis.
pub fn gen_true_cov(
    adjacency: &SymMatrix,
    s: usize,
    alpha0: f64,
    alpha: &[f64],
    beta_head: &[f64],
    remainder: RemainderSize,
) -> Result<TrueCovariance> {
    if alpha.len() != s {
        return Err(LcsmError::DimensionMismatch {
            expected: s,
            found: alpha.len(),
        });
    }
    let basis = BasisSet::from_adjacency(adjacency, s, remainder)?;
    if beta_head.len() > basis.n_remainder() {
        return Err(LcsmError::invalid(format!(
            "{} remainder coefficients requested but only {} remainder matrices exist",
            beta_head.len(),
            basis.n_remainder()
        )));
    }
    let mut values = Vec::with_capacity(basis.len());
    values.push(alpha0);
    values.extend_from_slice(alpha);
    values.extend_from_slice(beta_head);
    values.resize(basis.len(), 0.0);
    let theta = Coefficients::for_basis(&basis, values)?;
    let (sigma_a, sigma_r) = predict_parts(&theta, &basis);
    let positive_definite = min_eigenvalue(&sigma_a.add(&sigma_r)) > 0.0;
    Ok(TrueCovariance {
        sigma_a,
        sigma_r,
        theta,
        basis,
        positive_definite,
    })
}

/// Centered Wishart noise: `X^T X / d - sigma_e2 I` with `X` a `d x d` matrix
/// of independent `N(0, sigma_e2)` entries.
pub fn gen_errors<R: Rng + ?Sized>(n: usize, d: usize, sigma_e2: f64, rng: &mut R) -> Result<Vec<SymMatrix>> {
    if !(sigma_e2 > 0.0) {
        return Err(LcsmError::invalid("noise variance must be positive"));
    }
    let normal = Normal::new(0.0, sigma_e2.sqrt()).map_err(|e| LcsmError::invalid(e.to_string()))?;
    let inv_d = 1.0 / d as f64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let x = DMatrix::from_fn(d, d, |_, _| normal.sample(rng));
        let w = x.transpose() * &x;
        let mut e = SymMatrix::from_lower_fn(d, |k, l| w[(k, l)] * inv_d);
        e.shift_diagonal(-sigma_e2);
        out.push(e);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub adj_type: AdjacencyType,
    pub d: usize,
    pub n: usize,
    pub s: usize,
    pub hubs: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub alpha0: f64,
    pub alpha: Vec<f64>,
    pub beta_head: Vec<f64>,
    pub sigma_e2: f64,
    pub delta: f64,
    pub nlambda: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub pd_epsilon: Option<f64>,
    /// Draw one adjacency for all replications instead of one per replication.
    pub fixed_adjacency: bool,
    /// Record wall-clock runtimes; disable for byte-reproducible output.
    pub timing: bool,
}

impl SimConfig {
    /// Tabulated defaults for the given scenario: `alpha0 = 300`,
    /// `alpha = 10 * 1_s`, `beta_head = 50 * (1, -1, -1, 1)`, unit noise.
    pub fn new(adj_type: AdjacencyType, d: usize, s: usize, n: usize) -> Self {
        SimConfig {
            adj_type,
            d,
            n,
            s,
            hubs: adj_type.default_hubs(d).unwrap_or_default(),
            reps: 100,
            seed: 1,
            alpha0: 300.0,
            alpha: vec![10.0; s],
            beta_head: vec![50.0, -50.0, -50.0, 50.0],
            sigma_e2: 1.0,
            delta: DEFAULT_DELTA,
            nlambda: DEFAULT_NLAMBDA,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            pd_epsilon: Some(DEFAULT_PD_EPSILON),
            fixed_adjacency: false,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(LcsmError::invalid("reps must be at least 1"));
        }
        if self.n < 1 {
            return Err(LcsmError::invalid("n must be at least 1"));
        }
        if self.s < 1 {
            return Err(LcsmError::invalid("adjacency order s must be at least 1"));
        }
        if self.alpha.len() != self.s {
            return Err(LcsmError::invalid(format!(
                "alpha has {} entries but s = {}",
                self.alpha.len(),
                self.s
            )));
        }
        let needed = match self.adj_type {
            AdjacencyType::Hub => 1,
            AdjacencyType::TwoComponentHub => 2,
            AdjacencyType::Random => 0,
        };
        if self.hubs.len() != needed {
            return Err(LcsmError::invalid(format!(
                "adjacency type {} needs {needed} hub count(s), got {} (no default for d = {})",
                self.adj_type,
                self.hubs.len(),
                self.d
            )));
        }
        if self.adj_type == AdjacencyType::TwoComponentHub && !self.d.is_multiple_of(2) {
            return Err(LcsmError::invalid("type 2 needs an even dimension"));
        }
        Ok(())
    }
}

/// The stream seed used for replication `rep`.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Stream reserved for the shared adjacency of fixed-adjacency runs.
const FIXED_ADJACENCY_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub adjacency: SymMatrix,
    pub data: Vec<SymMatrix>,
    pub truth: TrueCovariance,
}

/// `Z_i = Sigma_A + Sigma_R + eps_i` for one replication. When `adjacency` is
/// `None` it is drawn from `rng` first.
pub fn gen_dataset<R: Rng + ?Sized>(cfg: &SimConfig, adjacency: Option<&SymMatrix>, rng: &mut R) -> Result<Dataset> {
    let adjacency = match adjacency {
        Some(a) => a.clone(),
        None => gen_adjacency(cfg.adj_type, cfg.d, &cfg.hubs, rng)?,
    };
    let truth = gen_true_cov(&adjacency, cfg.s, cfg.alpha0, &cfg.alpha, &cfg.beta_head, RemainderSize::Full)?;
    let sigma = truth.sigma();
    let data = gen_errors(cfg.n, cfg.d, cfg.sigma_e2, rng)?
        .into_iter()
        .map(|e| sigma.add(&e))
        .collect();
    Ok(Dataset {
        adjacency,
        data,
        truth,
    })
}

/// Scaled Frobenius error `||Sigma_hat - Sigma_A - Sigma_R||_F / sqrt(d)`.
pub fn fe(sigma_hat: &SymMatrix, sigma_a: &SymMatrix, sigma_r: &SymMatrix) -> f64 {
    let d = sigma_hat.dim() as f64;
    frob_norm(&sigma_hat.sub(sigma_a).sub(sigma_r)) / d.sqrt()
}

/// Mean squared error over the support of the true coefficients.
pub fn mse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(LcsmError::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    let support: Vec<usize> = (0..truth.len()).filter(|&j| truth[j] != 0.0).collect();
    if support.is_empty() {
        return Err(LcsmError::invalid("true coefficient vector has no nonzero entry"));
    }
    let sum: f64 = support.iter().map(|&j| (truth[j] - estimate[j]).powi(2)).sum();
    Ok(sum / support.len() as f64)
}

/// Unpenalized least-squares fit on the given block only.
#[derive(Debug, Clone)]
pub struct LcmFit {
    /// `(alpha_0, ..., alpha_s)`
    pub alpha: Vec<f64>,
    pub sigma: SymMatrix,
}

/// Solves the normal equations `G alpha = c / n` on the given block of `stats`.
pub fn lcm_from_stats(stats: &SufficientStats, given: &[SymMatrix]) -> Result<LcmFit> {
    let s1 = stats.n_given();
    if given.len() != s1 {
        return Err(LcsmError::DimensionMismatch {
            expected: s1,
            found: given.len(),
        });
    }
    let n = stats.n as f64;
    let rhs = DVector::from_fn(s1, |j, _| stats.c[j] / n);
    let sol = stats
        .gram
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&rhs))
        .ok_or_else(|| LcsmError::Dependency {
            index: s1 - 1,
            detail: "singular Gram matrix in least-squares fit".into(),
        })?;
    let alpha: Vec<f64> = sol.iter().copied().collect();
    let mut sigma = SymMatrix::zeros(stats.dim);
    for (g, a) in given.iter().zip(&alpha) {
        sigma.axpy(*a, g);
    }
    Ok(LcmFit { alpha, sigma })
}

/// Least squares of the data on `{I, A, ..., A^s}`.
pub fn lcm_fit(data: &[SymMatrix], adjacency: &SymMatrix, s: usize) -> Result<LcmFit> {
    let mut given = vec![SymMatrix::identity(adjacency.dim())];
    given.extend(adjacency_powers(adjacency, s)?);
    let bs = BasisSet::with_remainder(given, &[])?;
    let stats = build_stats(data, &bs)?;
    lcm_from_stats(&stats, bs.given())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: usize,
    pub fe_lcsm: f64,
    pub fe_lcm: f64,
    pub mse_lcsm: f64,
    pub mse_lcm: f64,
    pub runtime_s: f64,
    pub pd_corrected: bool,
    pub truth_pd: bool,
    pub selected_lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(count)`.
    pub se: f64,
}

pub fn mean_se(values: &[f64]) -> MeanSe {
    let k = values.len() as f64;
    if values.is_empty() {
        return MeanSe { mean: f64::NAN, se: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return MeanSe { mean, se: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    MeanSe { mean, se: (var / k).sqrt() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub fe_lcsm: MeanSe,
    pub fe_lcm: MeanSe,
    pub mse_lcsm: MeanSe,
    pub mse_lcm: MeanSe,
    pub runtime_s: MeanSe,
    pub pd_corrections: usize,
    pub non_pd_truths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub records: Vec<RepRecord>,
    /// `(rep, reason)` for replications that failed and were skipped.
    pub failures: Vec<(usize, String)>,
    pub summary: SimSummary,
}

/// Runs one replication; `adjacency` overrides the per-replication draw.
pub fn run_replication(cfg: &SimConfig, rep: usize, adjacency: Option<&SymMatrix>) -> Result<RepRecord> {
    let mut rng = replication_rng(cfg.seed, rep);
    let ds = gen_dataset(cfg, adjacency, &mut rng)?;
    let bs = &ds.truth.basis;
    let truth = ds.truth.theta.values();

    let start = Instant::now();
    let stats = build_stats(&ds.data, bs)?;
    let mask = bs.penalty_mask(PenaltyMode::Default);
    let lm = lambda_max(&stats, &mask)?;
    let grid = make_grid(lm, cfg.delta, cfg.nlambda)?;
    let path_cfg = PathConfig {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        penalized: mask,
        pd_epsilon: cfg.pd_epsilon,
    };
    let path = fit_path(&stats, bs, &grid, &path_cfg)?;
    let runtime = start.elapsed().as_secs_f64();

    let lcm = lcm_from_stats(&stats_given_block(&stats), bs.given())?;
    let mut lcm_theta = lcm.alpha.clone();
    lcm_theta.resize(bs.len(), 0.0);

    Ok(RepRecord {
        rep,
        fe_lcsm: fe(&path.sigma_hat, &ds.truth.sigma_a, &ds.truth.sigma_r),
        fe_lcm: fe(&lcm.sigma, &ds.truth.sigma_a, &ds.truth.sigma_r),
        mse_lcsm: mse(path.selected_coefficients().values(), truth)?,
        mse_lcm: mse(&lcm_theta, truth)?,
        runtime_s: if cfg.timing { runtime } else { 0.0 },
        pd_corrected: path.pd.applied,
        truth_pd: ds.truth.positive_definite,
        selected_lambda: path.selected_lambda(),
    })
}

fn stats_given_block(stats: &SufficientStats) -> SufficientStats {
    let s1 = stats.n_given();
    SufficientStats {
        c: stats.c[..s1].to_vec(),
        diag: stats.diag[..s1].to_vec(),
        ..stats.clone()
    }
}

/// Runs every replication on a pool of `threads` workers (0 = rayon default).
pub fn run_replications(cfg: &SimConfig, threads: usize) -> Result<SimResult> {
    cfg.validate()?;
    let shared = if cfg.fixed_adjacency {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(FIXED_ADJACENCY_STREAM);
        Some(gen_adjacency(cfg.adj_type, cfg.d, &cfg.hubs, &mut rng)?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LcsmError::invalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<RepRecord>> = pool.install(|| {
        (0..cfg.reps)
            .into_par_iter()
            .map(|rep| run_replication(cfg, rep, shared.as_ref()))
            .collect()
    });
    let mut records = Vec::with_capacity(cfg.reps);
    let mut failures = Vec::new();
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push((rep, e.to_string())),
        }
    }
    let summary = summarize(&records);
    Ok(SimResult {
        config: cfg.clone(),
        records,
        failures,
        summary,
    })
}

pub fn summarize(records: &[RepRecord]) -> SimSummary {
    let col = |f: fn(&RepRecord) -> f64| mean_se(&records.iter().map(f).collect::<Vec<_>>());
    SimSummary {
        fe_lcsm: col(|r| r.fe_lcsm),
        fe_lcm: col(|r| r.fe_lcm),
        mse_lcsm: col(|r| r.mse_lcsm),
        mse_lcm: col(|r| r.mse_lcm),
        runtime_s: col(|r| r.runtime_s),
        pd_corrections: records.iter().filter(|r| r.pd_corrected).count(),
        non_pd_truths: records.iter().filter(|r| !r.truth_pd).count(),
    }
}

pub const CSV_HEADER: &str = "type,d,s,rep,fe_lcsm,fe_lcm,mse_lcsm,mse_lcm,runtime_s,pd_corrected";

/// Writes one CSV row per successful replication, in replication order.
pub fn write_csv<W: Write>(result: &SimResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let c = &result.config;
    for r in &result.records {
        writeln!(
            out,
            "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{}",
            c.adj_type, c.d, c.s, r.rep, r.fe_lcsm, r.fe_lcm, r.mse_lcsm, r.mse_lcm, r.runtime_s, r.pd_corrected
        )?;
    }
    Ok(())
}

/// A two-line table in the layout of the published FE / MSE tables.
pub fn format_summary(result: &SimResult) -> String {
    let c = &result.config;
    let s = &result.summary;
    let mut out = String::new();
    out.push_str("type   d    s   n     reps  metric  LCSM               LCM\n");
    for (name, a, b) in [("FE", s.fe_lcsm, s.fe_lcm), ("MSE", s.mse_lcsm, s.mse_lcm)] {
        out.push_str(&format!(
            "{:<6} {:<4} {:<3} {:<5} {:<5} {:<7} {:>9.3} ({:.3})  {:>9.3} ({:.3})\n",
            c.adj_type.code(),
            c.d,
            c.s,
            c.n,
            result.records.len(),
            name,
            a.mean,
            a.se,
            b.mean,
            b.se
        ));
    }
    if c.timing {
        out.push_str(&format!(
            "LCSM runtime: {:.4} s ({:.4}) per fit\n",
            s.runtime_s.mean, s.runtime_s.se
        ));
    }
    out.push_str(&format!(
        "pd corrections: {}  non-PD truths: {}  failed reps: {}\n",
        s.pd_corrections,
        s.non_pd_truths,
        result.failures.len()
    ));
    out
}
