//! Builds the basis for a small path graph and prints its diagnostics.

use lcsm::basis::{check_linear_independence, normalize_basis, BasisSet, RemainderSize};
use lcsm::SymMatrix;

fn main() -> lcsm::Result<()> {
    // 0 - 1 - 2 - 3
    let adj = SymMatrix::from_lower_fn(4, |k, l| if k == l + 1 { 1.0 } else { 0.0 });
    let bs = BasisSet::from_adjacency(&adj, 2, RemainderSize::Full)?;
    println!("d = {}, given = {}, remainder = {}", bs.dim(), bs.n_given(), bs.n_remainder());
    println!("u_p = {:.4}", bs.u_p());

    let res = bs.residuals();
    println!("orthonormality residual {:.2e}, cross residual {:.2e}", res.orthonormality, res.cross);

    let all: Vec<SymMatrix> = (0..bs.len()).map(|j| bs.matrix(j)).collect();
    println!("independent: {}", check_linear_independence(&all).is_independent());

    let unit = normalize_basis(&bs)?;
    println!("scales of the given block: {:?}", &unit.scales()[..unit.n_given()]);

    // a perfect matching squares to the identity, so A^2 duplicates I
    let matching = SymMatrix::from_lower_fn(4, |k, l| if k == l + 1 && l % 2 == 0 { 1.0 } else { 0.0 });
    match BasisSet::from_adjacency(&matching, 2, RemainderSize::Full) {
        Ok(_) => println!("unexpected: matching basis accepted"),
        Err(e) => println!("matching: {e}"),
    }
    Ok(())
}
