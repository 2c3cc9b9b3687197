//! Covariance regression on known basis matrices with an l1-penalized
//! orthonormal remainder.
//!
//! A covariance is modelled as
//!
//! ```text
//! Sigma = alpha_0 I + sum_j alpha_j G_j + sum_k beta_k F_k
//! ```
//!
//! where the `G_j` are known symmetric matrices (typically powers of a network
//! adjacency matrix) and the `F_k` are an orthonormal basis for whatever the
//! `G_j` cannot express. Coefficients are fitted to second-moment matrices
//! `Z_i = Y_i Y_i^T` by penalized least squares along a regularization path,
//! and the penalty is chosen by AIC.
//!
//! Modules, bottom up:
//!
//! - [`symcore`]: packed symmetric matrices, half-vectorization, Frobenius geometry
//! - [`basis`]: adjacency powers, the remainder basis, independence checks
//! - [`solver`]: sufficient statistics and cyclic coordinate descent
//! - [`path`]: `lambda_max`, grids, warm-started paths, AIC, PD correction
//! - [`theory`]: tuning constants and risk-bound calculators
//! - [`simulate`]: the Monte-Carlo comparison against unpenalized regression
//! - [`cli`]: the `lcsm` command-line front end

pub mod basis;
pub mod cli;
pub mod error;
pub mod path;
pub mod simulate;
pub mod solver;
pub mod symcore;
pub mod theory;

pub use basis::{BasisSet, PenaltyMode, RemainderSize};
pub use error::{LcsmError, Result};
pub use path::{fit_path, PathConfig, PathResult};
pub use solver::{build_stats, fit, Coefficients, FitConfig, SufficientStats};
pub use symcore::SymMatrix;
