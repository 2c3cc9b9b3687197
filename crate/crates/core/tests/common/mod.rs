#![allow(dead_code)]

use lcsm::basis::{BasisSet, PenaltyMode, RemainderSize};
use lcsm::solver::{build_stats, SufficientStats};
use lcsm::SymMatrix;
use rand::Rng;

/// A small random problem: basis, data and a penalty.
pub struct Instance {
    pub bs: BasisSet,
    pub data: Vec<SymMatrix>,
    pub stats: SufficientStats,
    pub lambda: f64,
    pub mask: Vec<bool>,
}

pub fn random_sym<R: Rng>(d: usize, scale: f64, rng: &mut R) -> SymMatrix {
    SymMatrix::from_lower_fn(d, |_, _| rng.random_range(-scale..scale))
}

/// Random adjacency whose first `s` powers are independent of the identity.
/// `q` is capped at the size of the complement.
pub fn random_basis<R: Rng>(d: usize, s: usize, q: usize, rng: &mut R) -> BasisSet {
    let q = q.min(d * (d + 1) / 2 - s - 1);
    loop {
        let adj = SymMatrix::from_lower_fn(d, |k, l| if k != l && rng.random_bool(0.5) { 1.0 } else { 0.0 });
        if let Ok(bs) = BasisSet::from_adjacency(&adj, s, RemainderSize::Count(q)) {
            return bs;
        }
    }
}

/// `d in {3,4,5}`, `s in {1,2}`, `q in 0..=4`, `n in {5,20}`; lambda is drawn
/// log-uniformly over three decades below `lambda_hint`.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let d = rng.random_range(3..=5);
    let s = rng.random_range(1..=2);
    let q = rng.random_range(0..=4);
    let n = if rng.random_bool(0.5) { 5 } else { 20 };
    let bs = random_basis(d, s, q, rng);
    let truth = random_sym(d, 2.0, rng).add(&SymMatrix::identity(d).scaled(3.0));
    let data: Vec<SymMatrix> = (0..n).map(|_| truth.add(&random_sym(d, 1.0, rng))).collect();
    let stats = build_stats(&data, &bs).unwrap();
    let mode = match rng.random_range(0..3) {
        0 => PenaltyMode::Default,
        1 => PenaltyMode::RemainderOnly,
        _ => PenaltyMode::All,
    };
    let mask = bs.penalty_mask(mode);
    let scale = stats.c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let lambda = scale * 10f64.powf(rng.random_range(-3.0..0.0));
    Instance {
        bs,
        data,
        stats,
        lambda,
        mask,
    }
}

/// Objective evaluated directly on the data matrices.
pub fn dense_objective(theta: &[f64], inst: &Instance, lambda: f64) -> f64 {
    let gamma = combination(theta, &inst.bs);
    let rss: f64 = inst
        .data
        .iter()
        .map(|z| {
            let r = z.sub(&gamma);
            lcsm::symcore::frob_inner(&r, &r).unwrap()
        })
        .sum();
    let pen: f64 = theta.iter().zip(&inst.mask).filter(|(_, m)| **m).map(|(t, _)| t.abs()).sum();
    rss + 2.0 * lambda * pen
}

pub fn combination(theta: &[f64], bs: &BasisSet) -> SymMatrix {
    let mut out = SymMatrix::zeros(bs.dim());
    for (j, t) in theta.iter().enumerate() {
        if *t != 0.0 {
            out.axpy(*t, &bs.matrix(j));
        }
    }
    out
}

/// Gram matrix and `c` vector computed from the basis matrices themselves.
pub fn dense_normal_equations(inst: &Instance) -> (nalgebra::DMatrix<f64>, nalgebra::DVector<f64>) {
    let p = inst.bs.len();
    let mats: Vec<SymMatrix> = (0..p).map(|j| inst.bs.matrix(j)).collect();
    let g = nalgebra::DMatrix::from_fn(p, p, |j, k| lcsm::symcore::frob_inner(&mats[j], &mats[k]).unwrap());
    let c = nalgebra::DVector::from_fn(p, |j, _| {
        inst.data.iter().map(|z| lcsm::symcore::frob_inner(&mats[j], z).unwrap()).sum()
    });
    (g, c)
}

/// Accelerated proximal gradient with adaptive restart, run until the
/// gradient-map norm is below `tol`.
pub fn proximal_gradient(inst: &Instance, lambda: f64, tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let (g, c) = dense_normal_equations(inst);
    let n = inst.data.len() as f64;
    let p = c.len();
    let hess = g.clone() * (2.0 * n);
    let lip = hess.clone().symmetric_eigenvalues().max();
    let step = 1.0 / lip;
    let grad = |x: &nalgebra::DVector<f64>| &hess * x - &c * 2.0;
    let prox = |v: &nalgebra::DVector<f64>| {
        nalgebra::DVector::from_fn(p, |j, _| {
            if inst.mask[j] {
                lcsm::solver::soft_threshold(v[j], 2.0 * lambda * step)
            } else {
                v[j]
            }
        })
    };
    let mut x = nalgebra::DVector::zeros(p);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut gm = f64::INFINITY;
    for _ in 0..max_iter {
        let gy = grad(&y);
        let x_next = prox(&(&y - &gy * step));
        // restart momentum when it points uphill
        let restart = (&y - &x_next).dot(&(&x_next - &x)) > 0.0;
        let t_next = if restart { 1.0 } else { (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0 };
        let beta = if restart { 0.0 } else { (t - 1.0) / t_next };
        let gx = grad(&x_next);
        let mapped = prox(&(&x_next - &gx * step));
        gm = ((&x_next - &mapped) * lip).norm();
        y = &x_next + (&x_next - &x) * beta;
        x = x_next;
        t = t_next;
        if gm < tol {
            break;
        }
    }
    (x.iter().copied().collect(), gm)
}
