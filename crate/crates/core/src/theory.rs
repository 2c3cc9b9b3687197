//! Closed-form tuning constants and risk bounds for the sub-Gaussian and
//! sub-exponential noise regimes. Reporting aids only; the fitting pipeline
//! chooses its penalty by AIC.

use serde::{Deserialize, Serialize};

use crate::error::{LcsmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    pub n: usize,
    pub d: usize,
    /// Number of basis matrices; only the sub-exponential bound uses it.
    pub p: usize,
    /// Confidence parameter in (0, 1).
    pub nu: f64,
    pub u_p: f64,
    /// Upper bound on the basis Frobenius norms (1 after normalization).
    pub m1: f64,
    pub sigma_w: f64,
    pub sigma_eps: f64,
    /// Bernstein moment parameter.
    pub b: f64,
    /// `|theta*|_1`
    pub theta_l1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SubGaussian,
    SubExponential,
}

/// Note attached to sub-exponential bounds: the leading term uses
/// `log(2pd/nu)` while the tuning constant uses `log(2d/nu)`.
pub const SUBEXP_LOG_NOTE: &str =
    "sub-exponential bound: leading term uses log(2pd/nu) while tau uses log(2d/nu)";

impl TheoryInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.p == 0 {
            return Err(LcsmError::invalid("n, d and p must be positive"));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(LcsmError::invalid(format!("nu must lie in (0, 1), got {}", self.nu)));
        }
        let nonneg = [self.u_p, self.m1, self.sigma_w, self.sigma_eps, self.b, self.theta_l1];
        if nonneg.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(LcsmError::invalid("scale parameters must be finite and non-negative"));
        }
        Ok(())
    }

    fn log_term(&self) -> f64 {
        (2.0 * self.d as f64 / self.nu).ln()
    }
}

/// `tau(nu) = sqrt(u_p^2 M1^2 log(2d/nu) / n)`
pub fn tau(x: &TheoryInputs) -> f64 {
    (x.u_p * x.u_p * x.m1 * x.m1 * x.log_term() / x.n as f64).sqrt()
}

/// `sqrt(2) sigma_W n tau`
pub fn lambda_subgaussian(x: &TheoryInputs) -> f64 {
    std::f64::consts::SQRT_2 * x.sigma_w * x.n as f64 * tau(x)
}

/// `n (sqrt(2) sigma_eps tau + 2 b tau^2)`
pub fn lambda_subexponential(x: &TheoryInputs) -> f64 {
    let t = tau(x);
    x.n as f64 * (std::f64::consts::SQRT_2 * x.sigma_eps * t + 2.0 * x.b * t * t)
}

/// Right-hand side of the Frobenius risk bound holding with probability at
/// least `1 - nu`.
pub fn risk_bound(x: &TheoryInputs, regime: Regime) -> f64 {
    let n = x.n as f64;
    let m1sq = x.m1 * x.m1;
    match regime {
        Regime::SubGaussian => {
            4.0 * std::f64::consts::SQRT_2 * x.sigma_w * x.u_p * x.theta_l1 * (m1sq * x.log_term() / n).sqrt()
        }
        Regime::SubExponential => {
            let log_pd = (2.0 * x.p as f64 * x.d as f64 / x.nu).ln();
            4.0 * std::f64::consts::SQRT_2 * x.sigma_eps * x.u_p * x.theta_l1 * (m1sq * log_pd / n).sqrt()
                + 8.0 * x.b * x.u_p * x.u_p * x.theta_l1 * m1sq * x.log_term() / n
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub inputs: TheoryInputs,
    pub tau: f64,
    pub lambda_subgaussian: f64,
    pub lambda_subexponential: f64,
    pub bound_subgaussian: f64,
    pub bound_subexponential: f64,
    pub notes: Vec<String>,
}

pub fn report(x: &TheoryInputs) -> Result<TheoryReport> {
    x.validate()?;
    Ok(TheoryReport {
        inputs: *x,
        tau: tau(x),
        lambda_subgaussian: lambda_subgaussian(x),
        lambda_subexponential: lambda_subexponential(x),
        bound_subgaussian: risk_bound(x, Regime::SubGaussian),
        bound_subexponential: risk_bound(x, Regime::SubExponential),
        notes: vec![SUBEXP_LOG_NOTE.to_string()],
    })
}
