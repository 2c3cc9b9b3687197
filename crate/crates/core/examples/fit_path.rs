//! Draws data from a known covariance, fits the lambda path and reports the
//! AIC choice.

use lcsm::basis::{BasisSet, PenaltyMode, RemainderSize};
use lcsm::path::{fit_path, lambda_max, make_grid, PathConfig, DEFAULT_DELTA};
use lcsm::simulate::{gen_errors, gen_true_cov};
use lcsm::solver::build_stats;
use lcsm::SymMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lcsm::Result<()> {
    let d = 8;
    let adj = SymMatrix::from_lower_fn(d, |k, l| if k == l + 1 || (l == 0 && k > 1) { 1.0 } else { 0.0 });
    let truth = gen_true_cov(&adj, 1, 30.0, &[3.0], &[5.0, -5.0], RemainderSize::Full)?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sigma = truth.sigma();
    let data: Vec<SymMatrix> = gen_errors(200, d, 1.0, &mut rng)?
        .into_iter()
        .map(|e| sigma.add(&e))
        .collect();

    let bs = BasisSet::from_adjacency(&adj, 1, RemainderSize::Full)?;
    let stats = build_stats(&data, &bs)?;
    let mask = bs.penalty_mask(PenaltyMode::Default);
    let grid = make_grid(lambda_max(&stats, &mask)?, DEFAULT_DELTA, 40)?;
    let path = fit_path(&stats, &bs, &grid, &PathConfig::new(mask))?;

    println!("{:>12} {:>14} {:>8}", "lambda", "aic", "active");
    for i in (0..grid.len()).rev().step_by(5) {
        println!("{:>12.4} {:>14.4} {:>8}", path.lambdas[i], path.aics[i], path.active_sizes[i]);
    }
    let theta = path.selected_coefficients();
    println!("selected lambda {:.4}", path.selected_lambda());
    println!("alpha: {:?}", theta.alpha());
    let nonzero: Vec<(usize, f64)> = theta.beta().iter().copied().enumerate().filter(|(_, b)| *b != 0.0).collect();
    println!("nonzero beta: {nonzero:?}");
    println!("true alpha: {:?}", truth.theta.alpha());
    Ok(())
}
