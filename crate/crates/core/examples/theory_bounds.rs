//! Tuning constants and risk bounds as the sample size grows.

use lcsm::basis::{normalize_basis, BasisSet, RemainderSize};
use lcsm::theory::{report, TheoryInputs};

fn main() -> lcsm::Result<()> {
    let bs = normalize_basis(&BasisSet::identity_only(10, RemainderSize::Full)?)?;
    println!("p = {}, u_p = {:.4}", bs.len(), bs.u_p());
    println!("{:>8} {:>10} {:>12} {:>12} {:>12}", "n", "tau", "lambda_sg", "bound_sg", "bound_se");
    for n in [50, 200, 800, 3200] {
        let r = report(&TheoryInputs {
            n,
            d: bs.dim(),
            p: bs.len(),
            nu: 0.05,
            u_p: bs.u_p(),
            m1: 1.0,
            sigma_w: 1.0,
            sigma_eps: 1.0,
            b: 1.0,
            theta_l1: 10.0,
        })?;
        println!(
            "{:>8} {:>10.4} {:>12.3} {:>12.4} {:>12.4}",
            n, r.tau, r.lambda_subgaussian, r.bound_subgaussian, r.bound_subexponential
        );
    }
    Ok(())
}
