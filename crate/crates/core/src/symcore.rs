//! Dense symmetric matrices and their half-vectorizations.
//!
//! A [`SymMatrix`] stores only its lower triangle, packed column by column:
//! `(M11, M21, ..., Md1, M22, ..., Md2, ..., Mdd)`. That packing is exactly the
//! plain half-vector, so [`vh`] is a copy.
//!
//! The isometric half-vector scales every off-diagonal slot by `sqrt(2)`, which
//! turns the Frobenius inner product on symmetric matrices into the ordinary
//! Euclidean dot product. Orthogonality in this crate is always measured in
//! isometric coordinates.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{LcsmError, Result};

/// Default relative cutoff for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Number of free entries of a `d x d` symmetric matrix.
pub fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Inverse of [`packed_len`]; `None` when `len` is not a triangular number.
pub fn dim_from_packed_len(len: usize) -> Option<usize> {
    // d = (sqrt(8 len + 1) - 1) / 2
    let d = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (packed_len(d) == len).then_some(d)
}

#[inline]
fn packed_index(d: usize, row: usize, col: usize) -> usize {
    let (k, l) = if row >= col { (row, col) } else { (col, row) };
    l * (2 * d - l + 1) / 2 + (k - l)
}

/// Dense real symmetric matrix backed by its packed lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    lower: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix dimension must be positive");
        SymMatrix {
            dim,
            lower: vec![0.0; packed_len(dim)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for k in 0..dim {
            m.set(k, k, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (k, &v) in diag.iter().enumerate() {
            m.set(k, k, v);
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` on the lower triangle only.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for l in 0..dim {
            for k in l..dim {
                m.set(k, l, f(k, l));
            }
        }
        m
    }

    /// Wraps packed lower-triangle storage (plain half-vector ordering).
    pub fn from_packed(dim: usize, lower: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(LcsmError::invalid("dimension must be at least 1"));
        }
        if lower.len() != packed_len(dim) {
            return Err(LcsmError::DimensionMismatch {
                expected: packed_len(dim),
                found: lower.len(),
            });
        }
        Ok(SymMatrix { dim, lower })
    }

    /// Converts a square dense matrix, rejecting asymmetry beyond `tol`
    /// (absolute, scaled by the largest entry). The lower triangle is kept.
    pub fn from_dense(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(LcsmError::invalid(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(LcsmError::invalid("empty matrix"));
        }
        let scale = m.amax().max(1.0);
        let d = m.nrows();
        for l in 0..d {
            for k in (l + 1)..d {
                if (m[(k, l)] - m[(l, k)]).abs() > tol * scale {
                    return Err(LcsmError::invalid(format!(
                        "matrix is not symmetric at ({k}, {l})"
                    )));
                }
            }
        }
        Ok(SymMatrix::from_lower_fn(d, |k, l| m[(k, l)]))
    }

    /// Symmetrizes `(m + m^T) / 2` without any check.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        SymMatrix::from_lower_fn(m.nrows(), |k, l| 0.5 * (m[(k, l)] + m[(l, k)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.lower[packed_index(self.dim, row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let i = packed_index(self.dim, row, col);
        self.lower[i] = value;
    }

    /// Packed lower triangle, column-stacked.
    pub fn packed(&self) -> &[f64] {
        &self.lower
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, l| self.get(k, l))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|k| self.get(k, k)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            lower: self.lower.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: f64, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in axpy");
        for (a, b) in self.lower.iter_mut().zip(&other.lower) {
            *a += factor * b;
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Adds `value` to every diagonal entry.
    pub fn shift_diagonal(&mut self, value: f64) {
        for k in 0..self.dim {
            let i = packed_index(self.dim, k, k);
            self.lower[i] += value;
        }
    }

    /// Outer product `y y^T`.
    pub fn outer(y: &[f64]) -> Self {
        SymMatrix::from_lower_fn(y.len(), |k, l| y[k] * y[l])
    }

    pub fn is_zero(&self) -> bool {
        self.lower.iter().all(|v| *v == 0.0)
    }
}

/// Weighting of off-diagonal slots in a [`HalfVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Off-diagonal slots hold the matrix entry.
    Plain,
    /// Off-diagonal slots hold `sqrt(2)` times the matrix entry.
    Isometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfVector {
    dim: usize,
    values: Vec<f64>,
    weighting: Weighting,
}

impl HalfVector {
    pub fn new(values: Vec<f64>, weighting: Weighting) -> Result<Self> {
        let dim = dim_from_packed_len(values.len()).ok_or_else(|| {
            LcsmError::invalid(format!(
                "half-vector length {} is not a triangular number",
                values.len()
            ))
        })?;
        if dim == 0 {
            return Err(LcsmError::invalid("empty half-vector"));
        }
        Ok(HalfVector {
            dim,
            values,
            weighting,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn dot(&self, other: &HalfVector) -> f64 {
        dot(&self.values, &other.values)
    }
}

/// Plain half-vectorization in column-stacked lower-triangle order.
pub fn vh(m: &SymMatrix) -> HalfVector {
    HalfVector {
        dim: m.dim,
        values: m.lower.clone(),
        weighting: Weighting::Plain,
    }
}

/// Inverse of [`vh`].
pub fn vh_inv(v: &HalfVector) -> Result<SymMatrix> {
    if v.weighting != Weighting::Plain {
        return Err(LcsmError::invalid(
            "vh_inv expects a plain half-vector; use vh_iso_inv for isometric weighting",
        ));
    }
    SymMatrix::from_packed(v.dim, v.values.clone())
}

/// Isometric half-vectorization: `dot(vh_iso(A), vh_iso(B)) == <A, B>_F`.
pub fn vh_iso(m: &SymMatrix) -> HalfVector {
    HalfVector {
        dim: m.dim,
        values: iso_from_packed(m.dim, &m.lower),
        weighting: Weighting::Isometric,
    }
}

/// Inverse of [`vh_iso`].
pub fn vh_iso_inv(v: &HalfVector) -> Result<SymMatrix> {
    if v.weighting != Weighting::Isometric {
        return Err(LcsmError::invalid(
            "vh_iso_inv expects an isometric half-vector",
        ));
    }
    Ok(sym_from_iso(v.dim, &v.values))
}

pub(crate) fn iso_from_packed(d: usize, packed: &[f64]) -> Vec<f64> {
    let mut out = packed.to_vec();
    let mut i = 0;
    for l in 0..d {
        for k in l..d {
            if k != l {
                out[i] *= std::f64::consts::SQRT_2;
            }
            i += 1;
        }
    }
    out
}

pub(crate) fn sym_from_iso(d: usize, iso: &[f64]) -> SymMatrix {
    debug_assert_eq!(iso.len(), packed_len(d));
    let mut lower = iso.to_vec();
    let mut i = 0;
    for l in 0..d {
        for k in l..d {
            if k != l {
                lower[i] /= std::f64::consts::SQRT_2;
            }
            i += 1;
        }
    }
    SymMatrix { dim: d, lower }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Frobenius inner product `sum_{k,l} A_kl B_kl`.
pub fn frob_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(LcsmError::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(frob_inner_unchecked(a, b))
}

pub(crate) fn frob_inner_unchecked(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let d = a.dim;
    let mut diag = 0.0;
    let mut off = 0.0;
    let mut i = 0;
    for l in 0..d {
        diag += a.lower[i] * b.lower[i];
        i += 1;
        for _ in (l + 1)..d {
            off += a.lower[i] * b.lower[i];
            i += 1;
        }
    }
    diag + 2.0 * off
}

pub fn frob_norm(a: &SymMatrix) -> f64 {
    frob_inner_unchecked(a, a).sqrt()
}

/// Eigenvalues in ascending order.
pub fn eigenvalues(a: &SymMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.to_dense()).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eigenvalue(a: &SymMatrix) -> f64 {
    eigenvalues(a)[0]
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(a: &SymMatrix, tol: f64) -> usize {
    assert!(tol > 0.0, "rank tolerance must be positive");
    // singular values of a symmetric matrix are |eigenvalues|
    let sv: Vec<f64> = eigenvalues(a).into_iter().map(f64::abs).collect();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * largest).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym2(a: f64, b: f64, c: f64) -> SymMatrix {
        SymMatrix::from_lower_fn(2, |k, l| match (k, l) {
            (0, 0) => a,
            (1, 0) => b,
            _ => c,
        })
    }

    fn naive_frob(a: &SymMatrix, b: &SymMatrix) -> f64 {
        let (ad, bd) = (a.to_dense(), b.to_dense());
        (ad.transpose() * bd).trace()
    }

    #[test]
    fn packed_index_is_column_stacked() {
        let d = 4;
        let mut expected = 0;
        for l in 0..d {
            for k in l..d {
                assert_eq!(packed_index(d, k, l), expected);
                assert_eq!(packed_index(d, l, k), expected);
                expected += 1;
            }
        }
    }

    #[test]
    fn vh_examples() {
        assert_eq!(vh(&sym2(1.0, 2.0, 3.0)).values(), &[1.0, 2.0, 3.0]);
        assert_eq!(
            vh(&SymMatrix::identity(3)).values(),
            &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn vh_inv_examples() {
        let v = HalfVector::new(vec![1.0, 0.0, 1.0], Weighting::Plain).unwrap();
        assert_eq!(vh_inv(&v).unwrap(), SymMatrix::identity(2));
        let v = HalfVector::new(vec![0.0, 1.0, 0.0], Weighting::Plain).unwrap();
        assert_eq!(vh_inv(&v).unwrap(), sym2(0.0, 1.0, 0.0));
        let v = HalfVector::new(vec![4.0, -1.5, 2.0], Weighting::Plain).unwrap();
        assert_eq!(vh_inv(&v).unwrap(), sym2(4.0, -1.5, 2.0));
    }

    #[test]
    fn vh_inv_rejects_non_triangular_length() {
        assert!(matches!(
            HalfVector::new(vec![1.0, 2.0], Weighting::Plain),
            Err(LcsmError::InvalidInput(_))
        ));
        let iso = vh_iso(&SymMatrix::identity(2));
        assert!(vh_inv(&iso).is_err());
    }

    #[test]
    fn vh_iso_examples() {
        let v = vh_iso(&sym2(0.0, 1.0, 0.0));
        assert_eq!(v.values(), &[0.0, std::f64::consts::SQRT_2, 0.0]);
        assert_eq!(vh_iso(&SymMatrix::identity(2)).values(), &[1.0, 0.0, 1.0]);
        let m = sym2(1.0, -2.0, 0.5);
        assert_eq!(vh_iso_inv(&vh_iso(&m)).unwrap(), m);
    }

    #[test]
    fn frob_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(frob_inner(&i2, &i2).unwrap(), 2.0);
        let m = sym2(3.0, 7.0, -1.0);
        assert_eq!(frob_inner(&i2, &m).unwrap(), m.trace());
        assert_eq!(frob_norm(&SymMatrix::identity(5)), 5f64.sqrt());
        assert_eq!(frob_norm(&SymMatrix::zeros(3)), 0.0);
        assert_eq!(frob_norm(&sym2(3.0, 4.0, 3.0)), 50f64.sqrt());
        assert!(matches!(
            frob_inner(&i2, &SymMatrix::identity(3)),
            Err(LcsmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigen_examples() {
        assert!((min_eigenvalue(&SymMatrix::identity(4)) - 1.0).abs() < 1e-12);
        assert!((min_eigenvalue(&SymMatrix::from_diagonal(&[2.0, -3.0])) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&SymMatrix::identity(6), DEFAULT_RANK_TOL), 6);
        let u = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(numerical_rank(&SymMatrix::outer(&u), DEFAULT_RANK_TOL), 1);
        assert_eq!(numerical_rank(&SymMatrix::zeros(3), DEFAULT_RANK_TOL), 0);
    }

    fn det(m: &DMatrix<f64>) -> f64 {
        m.clone().lu().determinant()
    }

    /// Rank as the size of the largest non-vanishing minor, by enumeration.
    fn rank_by_minors(m: &DMatrix<f64>) -> usize {
        let d = m.nrows();
        for r in (1..=d).rev() {
            let subsets: Vec<Vec<usize>> = (0u32..(1 << d))
                .filter(|mask| mask.count_ones() as usize == r)
                .map(|mask| (0..d).filter(|i| mask & (1 << i) != 0).collect())
                .collect();
            for rows in &subsets {
                for cols in &subsets {
                    let sub = DMatrix::from_fn(r, r, |a, b| m[(rows[a], cols[b])]);
                    if det(&sub).abs() > 1e-9 {
                        return r;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn rank_matches_minor_enumeration_on_small_adjacencies() {
        // star on 4 nodes with node 3 duplicating node 2's neighbourhood,
        // plus an isolated node: zero row/column and a duplicated row
        let edges: &[&[(usize, usize)]] = &[
            &[(1, 0), (2, 0)],
            &[(1, 0), (2, 0), (3, 1)],
            &[(1, 0), (2, 1), (3, 0), (3, 1)],
            &[(2, 0), (3, 0)],
        ];
        for es in edges {
            let a = SymMatrix::from_lower_fn(4, |k, l| {
                if es.contains(&(k, l)) { 1.0 } else { 0.0 }
            });
            assert_eq!(
                numerical_rank(&a, DEFAULT_RANK_TOL),
                rank_by_minors(&a.to_dense()),
                "edges {es:?}"
            );
        }
    }

    #[test]
    fn min_eigenvalue_matches_quadratic_formula() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (a, b, c): (f64, f64, f64) = (
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            // A + A^T for a random 2x2 A gives diagonal 2a, 2c and off-diagonal b
            let m = sym2(2.0 * a, b, 2.0 * c);
            let tr = 2.0 * (a + c);
            let det = 4.0 * a * c - b * b;
            let oracle = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
            assert!((min_eigenvalue(&m) - oracle).abs() < 1e-8);
        }
    }

    fn arb_sym(d: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-10.0f64..10.0, packed_len(d))
            .prop_map(move |v| SymMatrix::from_packed(d, v).unwrap())
    }

    fn arb_pair() -> impl Strategy<Value = (SymMatrix, SymMatrix)> {
        (1usize..7).prop_flat_map(|d| (arb_sym(d), arb_sym(d)))
    }

    proptest! {
        #[test]
        fn vh_round_trips((a, _) in arb_pair()) {
            prop_assert_eq!(vh_inv(&vh(&a)).unwrap(), a.clone());
            let v = vh(&a);
            prop_assert_eq!(vh(&vh_inv(&v).unwrap()), v);
        }

        #[test]
        fn isometry_and_matrix_product_oracle((a, b) in arb_pair()) {
            let f = frob_inner(&a, &b).unwrap();
            let iso = vh_iso(&a).dot(&vh_iso(&b));
            prop_assert!((f - iso).abs() <= 1e-12 * (1.0 + f.abs()));
            let oracle = naive_frob(&a, &b);
            prop_assert!((f - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        }

        #[test]
        fn frob_is_bilinear_symmetric_and_triangle((a, b) in arb_pair(), s in -3.0f64..3.0) {
            let ab = frob_inner(&a, &b).unwrap();
            prop_assert!((ab - frob_inner(&b, &a).unwrap()).abs() < 1e-12 * (1.0 + ab.abs()));
            let lhs = frob_inner(&a.scaled(s).add(&b), &b).unwrap();
            let rhs = s * ab + frob_inner(&b, &b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
            let c = a.sub(&b);
            prop_assert!(frob_norm(&a.add(&c)) <= frob_norm(&a) + frob_norm(&c) + 1e-12);
        }
    }
}
