//! Regularization path: `lambda_max`, the log-spaced grid, warm-started fits,
//! AIC selection and the positive-definiteness correction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::error::{LcsmError, Result};
use crate::solver::{
    empirical_risk, fit, kkt_check, kkt_tolerance, predict_sigma, Coefficients, FitConfig,
    SufficientStats, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::symcore::{min_eigenvalue, SymMatrix};

pub const DEFAULT_DELTA: f64 = 1e-4;
pub const DEFAULT_NLAMBDA: usize = 100;
pub const DEFAULT_PD_EPSILON: f64 = 1e-6;

/// Smallest penalty at which every penalized coefficient is zero.
///
/// Unpenalized coordinates are first fitted by least squares with the
/// penalized ones held at zero; `lambda_max` is then the largest absolute
/// partial gradient over the penalized coordinates. With everything
/// penalized this reduces to `max_j |sum_i <B_j, Z_i>|`.
pub fn lambda_max(stats: &SufficientStats, mask: &[bool]) -> Result<f64> {
    if mask.len() != stats.len() {
        return Err(LcsmError::DimensionMismatch {
            expected: stats.len(),
            found: mask.len(),
        });
    }
    let free: Vec<usize> = (0..mask.len()).filter(|&j| !mask[j]).collect();
    let mut theta = vec![0.0; stats.len()];
    if !free.is_empty() {
        let n = stats.n as f64;
        let k = free.len();
        let gram = DMatrix::from_fn(k, k, |a, b| stats.gram_entry(free[a], free[b]));
        let rhs = DVector::from_fn(k, |a, _| stats.c[free[a]] / n);
        let sol = gram.cholesky().map(|ch| ch.solve(&rhs)).ok_or_else(|| LcsmError::Dependency {
            index: free[k - 1],
            detail: "Gram matrix of the unpenalized coefficients is singular".into(),
        })?;
        for (a, &j) in free.iter().enumerate() {
            theta[j] = sol[a];
        }
    }
    let n = stats.n as f64;
    Ok((0..mask.len())
        .filter(|&j| mask[j])
        .map(|j| (stats.c[j] - n * stats.gram_times(&theta, j)).abs())
        .fold(0.0, f64::max))
}

/// `m` log-evenly spaced values from `delta * lambda_max` up to `lambda_max`.
pub fn make_grid(lambda_max: f64, delta: f64, m: usize) -> Result<Vec<f64>> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(LcsmError::DegenerateData(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LcsmError::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if m < 2 {
        return Err(LcsmError::invalid("a grid needs at least two points"));
    }
    let lo = (delta * lambda_max).ln();
    let hi = lambda_max.ln();
    let step = (hi - lo) / (m - 1) as f64;
    let mut grid: Vec<f64> = (0..m).map(|i| (lo + step * i as f64).exp()).collect();
    grid[0] = delta * lambda_max;
    grid[m - 1] = lambda_max;
    Ok(grid)
}

/// `l + 2 |S| / d`
pub fn aic(risk: f64, active_size: usize, d: usize) -> f64 {
    risk + 2.0 * active_size as f64 / d as f64
}

/// Index of the smallest AIC; ties go to the smallest lambda.
pub fn select_optimal(aics: &[f64]) -> usize {
    let mut best = 0;
    for (i, a) in aics.iter().enumerate() {
        if *a < aics[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdCorrection {
    pub applied: bool,
    pub omega: f64,
}

/// Adds `omega I` with `omega = |lambda_min| + epsilon` when the matrix is not
/// positive definite; otherwise returns it unchanged with `omega = 0`.
pub fn pd_correct(sigma: &SymMatrix, epsilon: f64) -> Result<(SymMatrix, PdCorrection)> {
    if !(epsilon > 0.0) {
        return Err(LcsmError::invalid("pd epsilon must be positive"));
    }
    let lmin = min_eigenvalue(sigma);
    if lmin > 0.0 {
        return Ok((
            sigma.clone(),
            PdCorrection {
                applied: false,
                omega: 0.0,
            },
        ));
    }
    let mut omega = lmin.abs() + epsilon;
    let mut out = sigma.clone();
    out.shift_diagonal(omega);
    // eigenvalue rounding can leave the shifted minimum a few ulps short of
    // epsilon; top it up so the guarantee holds for the computed spectrum
    for _ in 0..4 {
        let shifted = min_eigenvalue(&out);
        if shifted >= epsilon {
            break;
        }
        let bump = (epsilon - shifted) + 4.0 * f64::EPSILON * (lmin.abs() + omega);
        omega += bump;
        out = sigma.clone();
        out.shift_diagonal(omega);
    }
    Ok((out, PdCorrection { applied: true, omega }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub penalized: Vec<bool>,
    /// `None` skips the positive-definiteness correction.
    pub pd_epsilon: Option<f64>,
}

impl PathConfig {
    pub fn new(penalized: Vec<bool>) -> Self {
        PathConfig {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            penalized,
            pd_epsilon: Some(DEFAULT_PD_EPSILON),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathResult {
    /// Ascending.
    pub lambdas: Vec<f64>,
    pub coefficients: Vec<Coefficients>,
    pub risks: Vec<f64>,
    pub aics: Vec<f64>,
    pub active_sizes: Vec<usize>,
    pub iterations: Vec<usize>,
    pub selected: usize,
    /// Estimate at the selected penalty, after any correction.
    pub sigma_hat: SymMatrix,
    pub pd: PdCorrection,
}

impl PathResult {
    pub fn selected_lambda(&self) -> f64 {
        self.lambdas[self.selected]
    }

    pub fn selected_coefficients(&self) -> &Coefficients {
        &self.coefficients[self.selected]
    }
}

/// Fits every grid value from the largest down, each fit warm-started at the
/// previous solution, and selects by AIC.
pub fn fit_path(stats: &SufficientStats, bs: &BasisSet, grid: &[f64], cfg: &PathConfig) -> Result<PathResult> {
    if grid.is_empty() {
        return Err(LcsmError::invalid("empty lambda grid"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LcsmError::invalid("lambda grid must be strictly ascending"));
    }
    if stats.len() != bs.len() {
        return Err(LcsmError::DimensionMismatch {
            expected: bs.len(),
            found: stats.len(),
        });
    }
    let m = grid.len();
    let mut slots: Vec<Option<(Coefficients, usize)>> = vec![None; m];
    let mut warm: Option<Coefficients> = None;
    for idx in (0..m).rev() {
        let lambda = grid[idx];
        let fc = FitConfig {
            lambda,
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            penalized: cfg.penalized.clone(),
        };
        let out = fit(stats, &fc, warm.as_ref()).map_err(|e| match e {
            LcsmError::NonConvergence { iterations, last, .. } => LcsmError::NonConvergence {
                iterations,
                lambda_index: Some(idx),
                last,
            },
            other => other,
        })?;
        debug_assert!(
            kkt_check(out.coefficients.values(), stats, lambda, &cfg.penalized, kkt_tolerance(lambda)).passed
        );
        warm = Some(out.coefficients.clone());
        slots[idx] = Some((out.coefficients, out.iterations));
    }
    let (coefficients, iterations): (Vec<Coefficients>, Vec<usize>) =
        slots.into_iter().map(|s| s.expect("every slot fitted")).unzip();
    let risks: Vec<f64> = coefficients.iter().map(|c| empirical_risk(c.values(), stats)).collect();
    let active_sizes: Vec<usize> = coefficients.iter().map(Coefficients::active_size).collect();
    let aics: Vec<f64> = risks
        .iter()
        .zip(&active_sizes)
        .map(|(r, s)| aic(*r, *s, stats.dim))
        .collect();
    let selected = select_optimal(&aics);
    let raw = predict_sigma(&coefficients[selected], bs);
    let (sigma_hat, pd) = match cfg.pd_epsilon {
        Some(eps) => pd_correct(&raw, eps)?,
        None => (
            raw,
            PdCorrection {
                applied: false,
                omega: 0.0,
            },
        ),
    };
    Ok(PathResult {
        lambdas: grid.to_vec(),
        coefficients,
        risks,
        aics,
        active_sizes,
        iterations,
        selected,
        sigma_hat,
        pd,
    })
}
