//! Basis matrices: the identity, the given network matrices, and an
//! orthonormal remainder basis spanning everything the given matrices miss.
//!
//! Layout of a [`BasisSet`] with `s` network matrices and `q` remainder
//! matrices (`p = 1 + s + q`):
//!
//! ```text
//! index   0        1 ..= s          s+1 ..= s+q
//!         I        G_1 .. G_s       F_1 .. F_q
//! ```
//!
//! Index 0 is the intercept. The remainder matrices are orthonormal in the
//! Frobenius inner product and orthogonal to every given matrix; the solver
//! relies on that structure.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{LcsmError, Result};
use crate::symcore::{
    dot, frob_norm, iso_from_packed, numerical_rank, packed_len, sym_from_iso, vh_iso, SymMatrix,
    DEFAULT_RANK_TOL,
};

/// Relative eigenvalue cutoff below which a Gram matrix is declared singular.
pub const DEPENDENCY_TOL: f64 = 1e-10;

/// Residual bound for the orthonormality invariants of a [`BasisSet`].
pub const ORTHO_TOL: f64 = 1e-10;

/// How many remainder matrices to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RemainderSize {
    /// The whole orthogonal complement: `d(d+1)/2 - (number of given matrices)`.
    Full,
    /// The first `q` matrices of the deterministic complement sequence.
    Count(usize),
}

impl FromStr for RemainderSize {
    type Err = LcsmError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(RemainderSize::Full);
        }
        s.parse::<usize>()
            .map(RemainderSize::Count)
            .map_err(|_| LcsmError::invalid(format!("remainder size must be 'full' or an integer, got '{s}'")))
    }
}

impl fmt::Display for RemainderSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RemainderSize::Full => f.write_str("full"),
            RemainderSize::Count(q) => write!(f, "{q}"),
        }
    }
}

/// Which coefficients carry the l1 penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyMode {
    /// Everything except the intercept.
    #[default]
    Default,
    /// Only the remainder coefficients.
    RemainderOnly,
    /// Every coefficient, intercept included.
    All,
}

impl PenaltyMode {
    pub fn mask(self, n_given: usize, n_remainder: usize) -> Vec<bool> {
        let p = n_given + n_remainder;
        (0..p)
            .map(|j| match self {
                PenaltyMode::Default => j != 0,
                PenaltyMode::RemainderOnly => j >= n_given,
                PenaltyMode::All => true,
            })
            .collect()
    }
}

impl FromStr for PenaltyMode {
    type Err = LcsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(PenaltyMode::Default),
            "remainder-only" => Ok(PenaltyMode::RemainderOnly),
            "all" => Ok(PenaltyMode::All),
            other => Err(LcsmError::invalid(format!(
                "penalty mode must be one of default|remainder-only|all, got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyMode::Default => "default",
            PenaltyMode::RemainderOnly => "remainder-only",
            PenaltyMode::All => "all",
        })
    }
}

/// `[A, A^2, ..., A^s]` by repeated multiplication.
pub fn adjacency_powers(a: &SymMatrix, s: usize) -> Result<Vec<SymMatrix>> {
    if s < 1 {
        return Err(LcsmError::invalid("adjacency order s must be at least 1"));
    }
    let dense = a.to_dense();
    let mut out = Vec::with_capacity(s);
    let mut power = dense.clone();
    out.push(a.clone());
    for _ in 1..s {
        power = &power * &dense;
        // powers of a symmetric matrix are symmetric; averaging removes rounding skew
        out.push(SymMatrix::symmetrize(&power));
    }
    Ok(out)
}

/// Outcome of [`check_linear_independence`].
#[derive(Debug, Clone, PartialEq)]
pub enum Independence {
    Independent {
        /// Smallest over largest eigenvalue of the normalized Gram matrix.
        condition_ratio: f64,
    },
    Dependent {
        /// First index whose matrix lies in the span of its predecessors.
        index: usize,
        condition_ratio: f64,
    },
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent { .. })
    }

    pub(crate) fn into_result(self) -> Result<()> {
        match self {
            Independence::Independent { .. } => Ok(()),
            Independence::Dependent {
                index,
                condition_ratio,
            } => Err(LcsmError::Dependency {
                index,
                detail: format!("Gram eigenvalue ratio {condition_ratio:.3e}"),
            }),
        }
    }
}

fn gram_ratio(unit: &[Vec<f64>]) -> f64 {
    let k = unit.len();
    let gram = DMatrix::from_fn(k, k, |a, b| dot(&unit[a], &unit[b]));
    let ev = SymmetricEigen::new(gram).eigenvalues;
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Tests linear independence through the Gram matrix of the isometric
/// half-vectors, each scaled to unit length so that the verdict does not
/// depend on the matrices' magnitudes.
pub fn check_linear_independence(mats: &[SymMatrix]) -> Independence {
    let mut unit: Vec<Vec<f64>> = Vec::with_capacity(mats.len());
    for (i, m) in mats.iter().enumerate() {
        let norm = frob_norm(m);
        if norm == 0.0 {
            return Independence::Dependent {
                index: i,
                condition_ratio: 0.0,
            };
        }
        unit.push(vh_iso(m).values().iter().map(|v| v / norm).collect());
    }
    if unit.is_empty() {
        return Independence::Independent {
            condition_ratio: 1.0,
        };
    }
    let ratio = gram_ratio(&unit);
    if ratio > DEPENDENCY_TOL {
        return Independence::Independent {
            condition_ratio: ratio,
        };
    }
    for k in 2..=unit.len() {
        let r = gram_ratio(&unit[..k]);
        if r <= DEPENDENCY_TOL {
            return Independence::Dependent {
                index: k - 1,
                condition_ratio: r,
            };
        }
    }
    unreachable!("full Gram singular but every prefix regular")
}

/// Orthonormal basis (isometric coordinates) of the orthogonal complement of
/// `span{vh_iso(given)}`.
///
/// The given vectors are orthonormalized first, then reduced by Householder
/// reflections; the complement is read off the trailing columns of the
/// accumulated orthogonal factor, one coordinate axis at a time. Nothing
/// depends on anything but the inputs, so the output is deterministic.
fn complement_iso(dim: usize, given: &[SymMatrix], size: RemainderSize) -> Result<Vec<Vec<f64>>> {
    check_linear_independence(given).into_result()?;
    let n = packed_len(dim);
    let available = n - given.len();
    let q = match size {
        RemainderSize::Full => available,
        RemainderSize::Count(q) if q <= available => q,
        RemainderSize::Count(q) => {
            return Err(LcsmError::invalid(format!(
                "requested {q} remainder matrices but the complement has dimension {available}"
            )))
        }
    };

    let mut span: Vec<Vec<f64>> = Vec::with_capacity(given.len());
    for g in given {
        let mut v = vh_iso(g).into_values();
        orthogonalize(&mut v, &span);
        orthogonalize(&mut v, &span);
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        span.push(v);
    }

    // Householder reflectors H_0..H_{r-1} with H_0 ... H_{r-1} e_k spanning
    // `span` for k < r; the remaining columns of that product are an
    // orthonormal basis of the complement, in axis order.
    let r = span.len();
    let mut cols = span;
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(r);
    for k in 0..r {
        let x = &cols[k][k..];
        let norm = dot(x, x).sqrt();
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        if vnorm > 0.0 {
            v.iter_mut().for_each(|t| *t /= vnorm);
        }
        for col in cols.iter_mut().skip(k) {
            reflect(&mut col[k..], &v);
        }
        reflectors.push(v);
    }

    let mut out = Vec::with_capacity(q);
    for axis in r..r + q {
        let mut e = vec![0.0; n];
        e[axis] = 1.0;
        for (k, v) in reflectors.iter().enumerate().rev() {
            reflect(&mut e[k..], v);
        }
        out.push(e);
    }
    Ok(out)
}

/// `x <- (I - 2 v v^T) x` for unit `v` (or `v = 0`).
fn reflect(x: &mut [f64], v: &[f64]) {
    let c = 2.0 * dot(x, v);
    if c != 0.0 {
        x.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
    }
}

fn orthogonalize(v: &mut [f64], span: &[Vec<f64>]) {
    for u in span {
        let c = dot(v, u);
        if c != 0.0 {
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Frobenius-orthonormal matrices orthogonal to every matrix in `given`.
pub fn remainder_basis(given: &[SymMatrix], size: RemainderSize) -> Result<Vec<SymMatrix>> {
    let dim = given
        .first()
        .map(SymMatrix::dim)
        .ok_or_else(|| LcsmError::invalid("remainder_basis needs at least one given matrix"))?;
    check_dims(dim, given)?;
    Ok(complement_iso(dim, given, size)?
        .iter()
        .map(|v| sym_from_iso(dim, v))
        .collect())
}

fn check_dims(dim: usize, mats: &[SymMatrix]) -> Result<()> {
    for m in mats {
        if m.dim() != dim {
            return Err(LcsmError::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
    }
    Ok(())
}

/// Worst deviations from the orthonormality invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityResiduals {
    /// `max |<F_k, F_l> - delta_kl|`
    pub orthonormality: f64,
    /// `max |<F_k, B_j>| / ||B_j||` over given `B_j`
    pub cross: f64,
}

/// The full ordered basis `{I, G_1..G_s, F_1..F_q}`.
#[derive(Debug, Clone)]
pub struct BasisSet {
    dim: usize,
    given: Vec<SymMatrix>,
    /// remainder matrices as isometric half-vectors
    remainder: Vec<Vec<f64>>,
    /// original Frobenius norms when normalized, otherwise all ones
    scales: Vec<f64>,
    normalized: bool,
    u_p: OnceLock<f64>,
}

impl BasisSet {
    /// Builds `{given..., F_1..F_q}`. `given[0]` plays the intercept role.
    pub fn new(given: Vec<SymMatrix>, size: RemainderSize) -> Result<Self> {
        let dim = given
            .first()
            .map(SymMatrix::dim)
            .ok_or_else(|| LcsmError::invalid("basis needs at least one given matrix"))?;
        check_dims(dim, &given)?;
        let remainder = complement_iso(dim, &given, size)?;
        let p = given.len() + remainder.len();
        Ok(BasisSet {
            dim,
            given,
            remainder,
            scales: vec![1.0; p],
            normalized: false,
            u_p: OnceLock::new(),
        })
    }

    /// `{I, A, A^2, ..., A^s}` plus the remainder. `s = 0` gives the
    /// identity alone as the given block.
    pub fn from_adjacency(adjacency: &SymMatrix, s: usize, size: RemainderSize) -> Result<Self> {
        let mut given = vec![SymMatrix::identity(adjacency.dim())];
        if s > 0 {
            given.extend(adjacency_powers(adjacency, s)?);
        }
        BasisSet::new(given, size)
    }

    pub fn identity_only(dim: usize, size: RemainderSize) -> Result<Self> {
        if dim == 0 {
            return Err(LcsmError::invalid("dimension must be at least 1"));
        }
        BasisSet::new(vec![SymMatrix::identity(dim)], size)
    }

    /// Uses caller-supplied remainder matrices, which must satisfy the
    /// orthonormality invariants to [`ORTHO_TOL`].
    pub fn with_remainder(given: Vec<SymMatrix>, remainder: &[SymMatrix]) -> Result<Self> {
        let dim = given
            .first()
            .map(SymMatrix::dim)
            .ok_or_else(|| LcsmError::invalid("basis needs at least one given matrix"))?;
        check_dims(dim, &given)?;
        check_dims(dim, remainder)?;
        check_linear_independence(&given).into_result()?;
        if given.len() + remainder.len() > packed_len(dim) {
            return Err(LcsmError::invalid("more basis matrices than free entries"));
        }
        let p = given.len() + remainder.len();
        let bs = BasisSet {
            dim,
            given,
            remainder: remainder.iter().map(|f| vh_iso(f).into_values()).collect(),
            scales: vec![1.0; p],
            normalized: false,
            u_p: OnceLock::new(),
        };
        let res = bs.residuals();
        if res.orthonormality > ORTHO_TOL || res.cross > ORTHO_TOL {
            return Err(LcsmError::invalid(format!(
                "remainder matrices violate orthonormality (residuals {:.3e}, {:.3e})",
                res.orthonormality, res.cross
            )));
        }
        Ok(bs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of given matrices, intercept included (`s + 1`).
    pub fn n_given(&self) -> usize {
        self.given.len()
    }

    /// Number of remainder matrices `q`.
    pub fn n_remainder(&self) -> usize {
        self.remainder.len()
    }

    /// Total number of basis matrices `p`.
    pub fn len(&self) -> usize {
        self.given.len() + self.remainder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn given(&self) -> &[SymMatrix] {
        &self.given
    }

    pub fn remainder_iso(&self, k: usize) -> &[f64] {
        &self.remainder[k]
    }

    pub fn remainder_matrix(&self, k: usize) -> SymMatrix {
        sym_from_iso(self.dim, &self.remainder[k])
    }

    pub fn remainder_matrices(&self) -> Vec<SymMatrix> {
        (0..self.n_remainder()).map(|k| self.remainder_matrix(k)).collect()
    }

    /// Basis matrix `j` in the global ordering.
    pub fn matrix(&self, j: usize) -> SymMatrix {
        if j < self.given.len() {
            self.given[j].clone()
        } else {
            self.remainder_matrix(j - self.given.len())
        }
    }

    /// Isometric half-vector of basis matrix `j`.
    pub fn iso(&self, j: usize) -> Vec<f64> {
        if j < self.given.len() {
            vh_iso(&self.given[j]).into_values()
        } else {
            self.remainder[j - self.given.len()].clone()
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Per-matrix factors dividing each basis matrix at normalization time.
    /// Coefficient `j` on the original scale is `theta_j / scales[j]`.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn penalty_mask(&self, mode: PenaltyMode) -> Vec<bool> {
        mode.mask(self.n_given(), self.n_remainder())
    }

    /// `max_j sqrt(rank(B_j))`, computed on first use.
    pub fn u_p(&self) -> f64 {
        *self.u_p.get_or_init(|| compute_u_p(self))
    }

    pub fn residuals(&self) -> OrthogonalityResiduals {
        let n = packed_len(self.dim);
        let q = self.remainder.len();
        let f = DMatrix::from_fn(n, q, |i, k| self.remainder[k][i]);
        let gram = f.transpose() * &f;
        let orthonormality = (0..q)
            .flat_map(|k| (0..q).map(move |l| (k, l)))
            .map(|(k, l)| (gram[(k, l)] - if k == l { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let mut cross: f64 = 0.0;
        for g in &self.given {
            let gv = iso_from_packed(self.dim, g.packed());
            let norm = dot(&gv, &gv).sqrt();
            let proj = f.tr_mul(&DVector::from_vec(gv));
            cross = proj.iter().fold(cross, |m, v| m.max((v / norm).abs()));
        }
        OrthogonalityResiduals {
            orthonormality,
            cross,
        }
    }
}

/// Scales every basis matrix to unit Frobenius norm and records the factors.
pub fn normalize_basis(bs: &BasisSet) -> Result<BasisSet> {
    let mut given = Vec::with_capacity(bs.given.len());
    let mut scales = bs.scales.clone();
    for (j, g) in bs.given.iter().enumerate() {
        let norm = frob_norm(g);
        if norm == 0.0 {
            return Err(LcsmError::invalid(format!("basis matrix {j} is zero")));
        }
        given.push(g.scaled(1.0 / norm));
        scales[j] *= norm;
    }
    let offset = bs.given.len();
    let mut remainder = Vec::with_capacity(bs.remainder.len());
    for (k, f) in bs.remainder.iter().enumerate() {
        let norm = dot(f, f).sqrt();
        if norm == 0.0 {
            return Err(LcsmError::invalid(format!("basis matrix {} is zero", offset + k)));
        }
        if (norm - 1.0).abs() <= 1e-15 {
            remainder.push(f.clone());
        } else {
            remainder.push(f.iter().map(|x| x / norm).collect());
            scales[offset + k] *= norm;
        }
    }
    Ok(BasisSet {
        dim: bs.dim,
        given,
        remainder,
        scales,
        normalized: true,
        u_p: OnceLock::new(),
    })
}

pub fn compute_u_p(bs: &BasisSet) -> f64 {
    let mut best = 0;
    for j in 0..bs.len() {
        best = best.max(numerical_rank(&bs.matrix(j), DEFAULT_RANK_TOL));
        // no rank exceeds the dimension
        if best == bs.dim {
            break;
        }
    }
    (best as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{frob_inner, packed_len};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn swap2() -> SymMatrix {
        SymMatrix::from_lower_fn(2, |k, l| if k != l { 1.0 } else { 0.0 })
    }

    fn random_graph(d: usize, p: f64, rng: &mut impl Rng) -> SymMatrix {
        SymMatrix::from_lower_fn(d, |k, l| if k != l && rng.random_bool(p) { 1.0 } else { 0.0 })
    }

    fn assert_invariants(bs: &BasisSet) {
        let res = bs.residuals();
        assert!(res.orthonormality <= ORTHO_TOL, "{res:?}");
        assert!(res.cross <= ORTHO_TOL, "{res:?}");
        for f in bs.remainder_matrices() {
            for g in bs.given() {
                assert!(frob_inner(&f, g).unwrap().abs() <= ORTHO_TOL * (1.0 + frob_norm(g)));
            }
        }
    }

    #[test]
    fn powers_of_swap_and_identity() {
        let a = swap2();
        let p = adjacency_powers(&a, 2).unwrap();
        assert_eq!(p, vec![a.clone(), SymMatrix::identity(2)]);
        let i3 = SymMatrix::identity(3);
        assert_eq!(adjacency_powers(&i3, 3).unwrap(), vec![i3.clone(), i3.clone(), i3]);
        assert!(adjacency_powers(&a, 0).is_err());
    }

    /// Counts walks of length `len` from `from` to `to` by explicit enumeration.
    fn count_walks(a: &SymMatrix, from: usize, to: usize, len: usize) -> f64 {
        if len == 0 {
            return if from == to { 1.0 } else { 0.0 };
        }
        (0..a.dim())
            .filter(|&next| a.get(from, next) != 0.0)
            .map(|next| a.get(from, next) * count_walks(a, next, to, len - 1))
            .sum()
    }

    #[test]
    fn powers_count_walks() {
        // path graph 0 - 1 - 2
        let p3 = SymMatrix::from_lower_fn(3, |k, l| if k == l + 1 { 1.0 } else { 0.0 });
        let powers = adjacency_powers(&p3, 3).unwrap();
        assert_eq!(powers[1].get(0, 2), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_graph(6, 0.4, &mut rng);
        let powers = adjacency_powers(&g, 4).unwrap();
        for (j, pw) in powers.iter().enumerate() {
            for k in 0..6 {
                for l in 0..6 {
                    assert_eq!(pw.get(k, l), count_walks(&g, k, l, j + 1));
                }
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let bs = BasisSet::with_remainder(vec![SymMatrix::identity(4)], &[]).unwrap();
        let nb = normalize_basis(&bs).unwrap();
        assert_eq!(nb.given()[0], SymMatrix::identity(4).scaled(0.5));
        assert_eq!(nb.scales(), &[2.0]);

        let bs = BasisSet::new(vec![SymMatrix::identity(2), swap2().scaled(2.0)], RemainderSize::Full).unwrap();
        let nb = normalize_basis(&bs).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = &nb.given()[1];
        assert!((g.get(1, 0) - h).abs() < 1e-15 && g.get(0, 0) == 0.0);
        assert_eq!(nb.remainder_iso(0), bs.remainder_iso(0));
        for j in 0..nb.len() {
            assert!((frob_norm(&nb.matrix(j)) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_zero_matrix() {
        let bs = BasisSet {
            dim: 2,
            given: vec![SymMatrix::identity(2), SymMatrix::zeros(2)],
            remainder: vec![],
            scales: vec![1.0, 1.0],
            normalized: false,
            u_p: OnceLock::new(),
        };
        assert!(matches!(normalize_basis(&bs), Err(LcsmError::InvalidInput(_))));
    }

    #[test]
    fn trace_zero_complement_in_two_dimensions() {
        let f = remainder_basis(&[SymMatrix::identity(2)], RemainderSize::Count(2)).unwrap();
        assert_eq!(f.len(), 2);
        for a in &f {
            assert!(frob_inner(a, &SymMatrix::identity(2)).unwrap().abs() < 1e-15);
            assert!((frob_norm(a) - 1.0).abs() < 1e-15);
        }
        assert!(frob_inner(&f[0], &f[1]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn saturated_given_set_leaves_empty_complement() {
        let e11 = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let given = vec![SymMatrix::identity(2), swap2(), e11];
        assert!(remainder_basis(&given, RemainderSize::Full).unwrap().is_empty());
        assert!(remainder_basis(&given, RemainderSize::Count(1)).is_err());
    }

    #[test]
    fn random_graph_basis_holds_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut built = 0;
        while built < 20 {
            let a = random_graph(3, 0.6, &mut rng);
            let Ok(bs) = BasisSet::from_adjacency(&a, 2, RemainderSize::Full) else {
                continue;
            };
            assert_eq!(bs.n_remainder(), 3);
            assert_invariants(&bs);
            built += 1;
        }
    }

    #[test]
    fn independence_examples() {
        let i2 = SymMatrix::identity(2);
        assert!(check_linear_independence(&[i2.clone(), swap2()]).is_independent());
        assert!(matches!(
            check_linear_independence(&[i2.clone(), i2.scaled(2.0)]),
            Independence::Dependent { index: 1, .. }
        ));
        let a = swap2();
        let mut given = vec![i2];
        given.extend(adjacency_powers(&a, 2).unwrap());
        match check_linear_independence(&given) {
            Independence::Dependent { index, .. } => assert_eq!(index, 2),
            other => panic!("expected dependency, got {other:?}"),
        }
        let err = BasisSet::new(given, RemainderSize::Full).unwrap_err();
        assert!(matches!(err, LcsmError::Dependency { index: 2, .. }));
    }

    #[test]
    fn u_p_examples() {
        let bs = BasisSet::with_remainder(vec![SymMatrix::identity(5)], &[]).unwrap();
        assert_eq!(bs.u_p(), 5f64.sqrt());
        let u = [0.6, 0.8];
        let rank_one = SymMatrix::outer(&u);
        let bs = BasisSet::with_remainder(vec![rank_one], &[]).unwrap();
        assert_eq!(bs.u_p(), 1.0);
    }

    #[test]
    fn full_remainder_reconstructs_any_symmetric_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_graph(5, 0.5, &mut rng);
        let bs = BasisSet::from_adjacency(&a, 2, RemainderSize::Full).unwrap();
        assert_eq!(bs.len(), packed_len(5));
        let target = SymMatrix::from_lower_fn(5, |_, _| rng.random_range(-3.0..3.0));
        // least squares on the given block, projection on the remainder
        let s1 = bs.n_given();
        let gram = DMatrix::from_fn(s1, s1, |a, b| frob_inner(&bs.given()[a], &bs.given()[b]).unwrap());
        let rhs = nalgebra::DVector::from_fn(s1, |a, _| frob_inner(&bs.given()[a], &target).unwrap());
        let coef = gram.lu().solve(&rhs).unwrap();
        let mut recon = SymMatrix::zeros(5);
        for a in 0..s1 {
            recon.axpy(coef[a], &bs.given()[a]);
        }
        for k in 0..bs.n_remainder() {
            let f = bs.remainder_matrix(k);
            recon.axpy(frob_inner(&f, &target).unwrap(), &f);
        }
        assert!(frob_norm(&recon.sub(&target)) <= 1e-10 * frob_norm(&target));
    }

    #[test]
    fn construction_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_graph(6, 0.4, &mut rng);
        let x = BasisSet::from_adjacency(&a, 2, RemainderSize::Full).unwrap();
        let y = BasisSet::from_adjacency(&a, 2, RemainderSize::Full).unwrap();
        for k in 0..x.n_remainder() {
            let (u, v) = (x.remainder_iso(k), y.remainder_iso(k));
            assert!(u.iter().zip(v).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
        let t = BasisSet::from_adjacency(&a, 2, RemainderSize::Count(4)).unwrap();
        assert_eq!(t.n_remainder(), 4);
        for k in 0..4 {
            assert_eq!(t.remainder_iso(k), x.remainder_iso(k));
        }
    }

    #[test]
    fn with_remainder_rejects_non_orthogonal_matrices() {
        let i2 = SymMatrix::identity(2);
        let bad = SymMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(BasisSet::with_remainder(vec![i2], &[bad]).is_err());
    }

    #[test]
    fn parse_modes() {
        assert_eq!("full".parse::<RemainderSize>().unwrap(), RemainderSize::Full);
        assert_eq!("7".parse::<RemainderSize>().unwrap(), RemainderSize::Count(7));
        assert!("x".parse::<RemainderSize>().is_err());
        assert_eq!("remainder-only".parse::<PenaltyMode>().unwrap(), PenaltyMode::RemainderOnly);
        assert_eq!(PenaltyMode::Default.mask(2, 2), vec![false, true, true, true]);
        assert_eq!(PenaltyMode::RemainderOnly.mask(2, 1), vec![false, false, true]);
        assert_eq!(PenaltyMode::All.mask(1, 1), vec![true, true]);
    }
}
