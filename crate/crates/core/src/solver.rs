//! Penalized least squares over a [`BasisSet`]:
//!
//! ```text
//! minimize  sum_i ||Z_i - sum_j theta_j B_j||_F^2 + 2 lambda sum_{j in mask} |theta_j|
//! ```
//!
//! The objective only sees the data through [`SufficientStats`]. Because the
//! remainder block is orthonormal and orthogonal to the given block, the full
//! Gram matrix is block diagonal with an identity remainder block, and each
//! remainder coordinate has a one-shot closed-form update.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::error::{LcsmError, Result};
use crate::symcore::{dot, frob_inner_unchecked, frob_norm, sym_from_iso, vh_iso, SymMatrix};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Coefficient vector `theta = (alpha_0, alpha_1..alpha_s, beta_1..beta_q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    values: Vec<f64>,
    n_given: usize,
}

impl Coefficients {
    pub fn zeros(n_given: usize, n_remainder: usize) -> Self {
        Coefficients {
            values: vec![0.0; n_given + n_remainder],
            n_given,
        }
    }

    pub fn from_values(values: Vec<f64>, n_given: usize) -> Result<Self> {
        if n_given > values.len() {
            return Err(LcsmError::invalid("given block longer than coefficient vector"));
        }
        Ok(Coefficients { values, n_given })
    }

    pub fn for_basis(bs: &BasisSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != bs.len() {
            return Err(LcsmError::DimensionMismatch {
                expected: bs.len(),
                found: values.len(),
            });
        }
        Ok(Coefficients {
            values,
            n_given: bs.n_given(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_given(&self) -> usize {
        self.n_given
    }

    /// `(alpha_0, alpha_1, ..., alpha_s)`
    pub fn alpha(&self) -> &[f64] {
        &self.values[..self.n_given]
    }

    /// `(beta_1, ..., beta_q)`
    pub fn beta(&self) -> &[f64] {
        &self.values[self.n_given..]
    }

    /// Number of nonzero entries.
    pub fn active_size(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// Coefficients for the unnormalized basis, given the normalization scales.
    pub fn rescaled(&self, scales: &[f64]) -> Coefficients {
        Coefficients {
            values: self.values.iter().zip(scales).map(|(v, s)| v / s).collect(),
            n_given: self.n_given,
        }
    }
}

/// Everything the objective needs from the data.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    pub n: usize,
    pub dim: usize,
    /// `c_j = sum_i <B_j, Z_i>`
    pub c: Vec<f64>,
    /// `<B_j, B_k>` over the given block
    pub gram: DMatrix<f64>,
    /// `||B_j||_F^2` for every basis matrix
    pub diag: Vec<f64>,
    /// `sum_i ||Z_i||_F^2`
    pub rss0: f64,
}

impl SufficientStats {
    pub fn n_given(&self) -> usize {
        self.gram.nrows()
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Entry `(j, k)` of the full Gram matrix.
    pub fn gram_entry(&self, j: usize, k: usize) -> f64 {
        let s1 = self.n_given();
        match (j < s1, k < s1) {
            (true, true) => self.gram[(j, k)],
            (false, false) if j == k => self.diag[j],
            _ => 0.0,
        }
    }

    /// `(G theta)_j` with the block structure of the full Gram matrix.
    pub fn gram_times(&self, theta: &[f64], j: usize) -> f64 {
        let s1 = self.n_given();
        if j < s1 {
            (0..s1).map(|k| self.gram[(j, k)] * theta[k]).sum()
        } else {
            self.diag[j] * theta[j]
        }
    }

    /// Multiplies every data matrix by `factor`.
    pub fn scaled_data(&self, factor: f64) -> SufficientStats {
        SufficientStats {
            c: self.c.iter().map(|v| v * factor).collect(),
            rss0: self.rss0 * factor * factor,
            ..self.clone()
        }
    }
}

/// Accumulates the sufficient statistics of `data` for basis `bs`.
pub fn build_stats(data: &[SymMatrix], bs: &BasisSet) -> Result<SufficientStats> {
    if data.is_empty() {
        return Err(LcsmError::invalid("no observations"));
    }
    let d = bs.dim();
    let mut sum = SymMatrix::zeros(d);
    let mut rss0 = 0.0;
    for z in data {
        if z.dim() != d {
            return Err(LcsmError::DimensionMismatch {
                expected: d,
                found: z.dim(),
            });
        }
        sum.axpy(1.0, z);
        let norm = frob_norm(z);
        rss0 += norm * norm;
    }
    let s1 = bs.n_given();
    let given = bs.given();
    let sum_iso = vh_iso(&sum).into_values();
    let mut c = Vec::with_capacity(bs.len());
    let mut diag = Vec::with_capacity(bs.len());
    for g in given {
        c.push(frob_inner_unchecked(g, &sum));
        diag.push(frob_inner_unchecked(g, g));
    }
    for k in 0..bs.n_remainder() {
        let f = bs.remainder_iso(k);
        c.push(dot(f, &sum_iso));
        diag.push(dot(f, f));
    }
    let gram = DMatrix::from_fn(s1, s1, |a, b| frob_inner_unchecked(&given[a], &given[b]));
    Ok(SufficientStats {
        n: data.len(),
        dim: d,
        c,
        gram,
        diag,
        rss0,
    })
}

/// `l(theta) = sum_i ||Z_i - Gamma_theta||_F^2`, from the sufficient statistics.
pub fn empirical_risk(theta: &[f64], stats: &SufficientStats) -> f64 {
    let n = stats.n as f64;
    let mut quad = 0.0;
    let mut lin = 0.0;
    for j in 0..theta.len() {
        if theta[j] != 0.0 {
            quad += theta[j] * stats.gram_times(theta, j);
            lin += theta[j] * stats.c[j];
        }
    }
    stats.rss0 - 2.0 * lin + n * quad
}

/// `l(theta) + 2 lambda sum_{j in mask} |theta_j|`
pub fn objective(theta: &[f64], stats: &SufficientStats, lambda: f64, mask: &[bool]) -> f64 {
    empirical_risk(theta, stats) + 2.0 * lambda * penalty(theta, mask)
}

fn penalty(theta: &[f64], mask: &[bool]) -> f64 {
    theta
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(t, _)| t.abs())
        .sum()
}

/// Soft-thresholding: the minimizer of `z^2 - 2 a z + 2 t |z|`.
#[inline]
pub fn soft_threshold(a: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if a > t {
        a - t
    } else if a < -t {
        a + t
    } else {
        0.0
    }
}

/// Exact minimizer of the objective in coordinate `j`, the others held fixed.
pub fn coordinate_update(
    j: usize,
    theta: &[f64],
    stats: &SufficientStats,
    lambda: f64,
    mask: &[bool],
) -> f64 {
    let n = stats.n as f64;
    let s1 = stats.n_given();
    let curvature = n * stats.diag[j];
    let partial = if j < s1 {
        // c_j - n sum_{k != j} G_jk theta_k
        let cross: f64 = (0..s1)
            .filter(|&k| k != j)
            .map(|k| stats.gram[(j, k)] * theta[k])
            .sum();
        stats.c[j] - n * cross
    } else {
        // remainder coordinates decouple from everything else
        stats.c[j]
    };
    let lambda_eff = if mask[j] { lambda } else { 0.0 };
    soft_threshold(partial / curvature, lambda_eff / curvature)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub lambda: f64,
    pub tol: f64,
    /// Maximum number of full cycles.
    pub max_iter: usize,
    pub penalized: Vec<bool>,
}

impl FitConfig {
    pub fn new(lambda: f64, penalized: Vec<bool>) -> Self {
        FitConfig {
            lambda,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            penalized,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self, p: usize) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(LcsmError::invalid(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.tol > 0.0) {
            return Err(LcsmError::invalid("tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(LcsmError::invalid("max_iter must be positive"));
        }
        if self.penalized.len() != p {
            return Err(LcsmError::DimensionMismatch {
                expected: p,
                found: self.penalized.len(),
            });
        }
        Ok(())
    }
}

/// KKT tolerance used to certify a fit at penalty `lambda`.
pub fn kkt_tolerance(lambda: f64) -> f64 {
    1e-4 * (1.0 + lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub coefficients: Coefficients,
    /// Full cycles performed.
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
}

/// Cyclic coordinate descent with observable single-coordinate steps.
#[derive(Debug)]
pub struct CoordinateDescent<'a> {
    stats: &'a SufficientStats,
    cfg: &'a FitConfig,
    theta: Vec<f64>,
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(stats: &'a SufficientStats, cfg: &'a FitConfig, init: Option<&[f64]>) -> Result<Self> {
        cfg.validate(stats.len())?;
        let theta = match init {
            Some(t) if t.len() != stats.len() => {
                return Err(LcsmError::DimensionMismatch {
                    expected: stats.len(),
                    found: t.len(),
                })
            }
            Some(t) => t.to_vec(),
            None => vec![0.0; stats.len()],
        };
        Ok(CoordinateDescent { stats, cfg, theta })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Updates coordinate `j` in place and returns its new value.
    pub fn update(&mut self, j: usize) -> f64 {
        let v = coordinate_update(j, &self.theta, self.stats, self.cfg.lambda, &self.cfg.penalized);
        self.theta[j] = v;
        v
    }

    /// One pass over `j = 0..p`; returns the l2 distance moved.
    pub fn cycle(&mut self) -> f64 {
        let mut moved = 0.0;
        for j in 0..self.theta.len() {
            let old = self.theta[j];
            let new = self.update(j);
            moved += (new - old) * (new - old);
        }
        moved.sqrt()
    }

    pub fn objective(&self) -> f64 {
        objective(&self.theta, self.stats, self.cfg.lambda, &self.cfg.penalized)
    }

    /// Cycles until the step is below `tol` and the KKT conditions hold at
    /// [`kkt_tolerance`].
    pub fn run(mut self) -> Result<FitOutcome> {
        let s1 = self.stats.n_given();
        let kkt_tol = kkt_tolerance(self.cfg.lambda);
        for iter in 1..=self.cfg.max_iter {
            // the remainder block is solved exactly by its first pass, so
            // later passes only need the given block
            let moved = if iter == 1 { self.cycle() } else { self.cycle_given(s1) };
            if moved < self.cfg.tol
                && kkt_check(&self.theta, self.stats, self.cfg.lambda, &self.cfg.penalized, kkt_tol).passed
            {
                let objective = self.objective();
                return Ok(FitOutcome {
                    coefficients: Coefficients {
                        values: self.theta,
                        n_given: s1,
                    },
                    iterations: iter,
                    objective,
                    converged: true,
                });
            }
        }
        Err(LcsmError::NonConvergence {
            iterations: self.cfg.max_iter,
            lambda_index: None,
            last: self.theta,
        })
    }

    fn cycle_given(&mut self, s1: usize) -> f64 {
        let mut moved = 0.0;
        for j in 0..s1 {
            let old = self.theta[j];
            let new = self.update(j);
            moved += (new - old) * (new - old);
        }
        moved.sqrt()
    }
}

/// Fits at a single penalty, starting from `init` (zeros when `None`).
pub fn fit(stats: &SufficientStats, cfg: &FitConfig, init: Option<&Coefficients>) -> Result<FitOutcome> {
    CoordinateDescent::new(stats, cfg, init.map(Coefficients::values))?.run()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub passed: bool,
    pub worst_violation: f64,
    pub worst_index: Option<usize>,
}

/// Subgradient optimality check with the gradient halved to match the
/// penalty scale: `g_j = n (G theta)_j - c_j`, and optimality requires
/// `g_j + lambda sign(theta_j) = 0` on penalized coordinates.
pub fn kkt_check(theta: &[f64], stats: &SufficientStats, lambda: f64, mask: &[bool], tol: f64) -> KktReport {
    let n = stats.n as f64;
    let mut worst = 0.0;
    let mut worst_index = None;
    for j in 0..theta.len() {
        let g = n * stats.gram_times(theta, j) - stats.c[j];
        let violation = if !mask[j] {
            g.abs()
        } else if theta[j] != 0.0 {
            (g + lambda * theta[j].signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        if violation > worst {
            worst = violation;
            worst_index = Some(j);
        }
    }
    KktReport {
        passed: worst <= tol,
        worst_violation: worst,
        worst_index,
    }
}

/// `Gamma_theta = sum_j theta_j B_j`
pub fn predict_sigma(theta: &Coefficients, bs: &BasisSet) -> SymMatrix {
    let (sigma_a, sigma_r) = predict_parts(theta, bs);
    sigma_a.add(&sigma_r)
}

/// The given-block and remainder-block parts of `Gamma_theta`.
pub fn predict_parts(theta: &Coefficients, bs: &BasisSet) -> (SymMatrix, SymMatrix) {
    let d = bs.dim();
    let values = theta.values();
    let mut sigma_a = SymMatrix::zeros(d);
    for (g, &t) in bs.given().iter().zip(values) {
        if t != 0.0 {
            sigma_a.axpy(t, g);
        }
    }
    let mut iso = vec![0.0; crate::symcore::packed_len(d)];
    for k in 0..bs.n_remainder() {
        let t = values[bs.n_given() + k];
        if t != 0.0 {
            iso.iter_mut()
                .zip(bs.remainder_iso(k))
                .for_each(|(acc, f)| *acc += t * f);
        }
    }
    (sigma_a, sym_from_iso(d, &iso))
}
