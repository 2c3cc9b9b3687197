//! Repairs an indefinite estimate by shifting its spectrum.

use lcsm::path::pd_correct;
use lcsm::symcore::{eigenvalues, frob_norm};
use lcsm::SymMatrix;

fn main() -> lcsm::Result<()> {
    let sigma = SymMatrix::from_lower_fn(3, |k, l| if k == l { 1.0 } else { 1.5 });
    println!("eigenvalues before: {:?}", eigenvalues(&sigma));
    let (fixed, record) = pd_correct(&sigma, 1e-6)?;
    println!("applied: {}, omega = {:.6}", record.applied, record.omega);
    println!("eigenvalues after:  {:?}", eigenvalues(&fixed));
    println!("displacement {:.6} = omega * sqrt(d)", frob_norm(&fixed.sub(&sigma)));
    Ok(())
}
