//! Dense complex matrix kernel.
//!
//! Everything in the crate is built on `nalgebra::DMatrix<Complex64>`. Composite
//! indices on a bipartite space are factor-1 major: `i = i1 * d2 + i2`, which is
//! also the convention of [`DMatrix::kronecker`].

use std::ops::Range;

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Default relative tolerance for rank and degeneracy decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Eigenvalues down to this value are accepted as zero when validating states.
pub const POSITIVITY_SLACK: f64 = 1e-10;

// Dense decompositions are delegated to faer: nalgebra's bidiagonal SVD can
// return wrong factors for exactly rank-deficient inputs.
fn to_faer<T: Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: Copy + nalgebra::Scalar>(m: faer::MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Pauli matrices with `pauli(0) = I`, `pauli(1..=3) = σx, σy, σz`.
pub fn pauli(i: usize) -> CMatrix {
    let z = c64(0.0, 0.0);
    let one = c64(1.0, 0.0);
    let im = c64(0.0, 1.0);
    match i {
        0 => CMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        1 => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -im, im, z]),
        3 => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("pauli index {i} out of range 0..=3"),
    }
}

/// Kronecker product; row index of the result is `i1 * rows(b) + i2`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Embeds a factor-1 operator as `a ⊗ I`.
pub fn lift_first(a: &CMatrix, d2: usize) -> CMatrix {
    tensor(a, &identity(d2))
}

/// Embeds a factor-2 operator as `I ⊗ b`.
pub fn lift_second(b: &CMatrix, d1: usize) -> CMatrix {
    tensor(&identity(d1), b)
}

/// Hermitian operator on a single factor space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermOp(CMatrix);

impl HermOp {
    /// Validates squareness, finiteness and `‖M − M†‖_max ≤ 1e-12·max(1, ‖M‖_max)`.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, 1e-12)
    }

    pub fn with_tolerance(m: CMatrix, rel_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let defect = hermiticity_defect(&m);
        if defect > rel_tol * max_abs(&m).max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(HermOp(m))
    }

    /// Replaces `m` by its Hermitian part without checking.
    pub fn hermitize(m: &CMatrix) -> Self {
        HermOp((m + m.adjoint()) * c64(0.5, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        HermOp(identity(n))
    }

    pub fn pauli(i: usize) -> Self {
        HermOp(pauli(i))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

impl AsRef<CMatrix> for HermOp {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Which tensor factor an operation acts on (or traces out).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    First,
    Second,
}

/// Statistical operator on `C^d1 ⊗ C^d2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    d1: usize,
    d2: usize,
    rho: HermOp,
}

impl BipartiteState {
    /// Validates with the default slack of `1e-10` for positivity and trace.
    pub fn new(rho: CMatrix, d1: usize, d2: usize) -> Result<Self> {
        Self::with_tolerance(rho, d1, d2, POSITIVITY_SLACK)
    }

    /// Validates Hermiticity, positivity (eigenvalues ≥ −tol) and `|Tr ρ − 1| ≤ tol`.
    /// The stored matrix is the Hermitian part of the input.
    pub fn with_tolerance(rho: CMatrix, d1: usize, d2: usize, tol: f64) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::DimensionMismatch("factor dimensions must be positive".into()));
        }
        if rho.nrows() != d1 * d2 || rho.ncols() != d1 * d2 {
            return Err(Error::DimensionMismatch(format!(
                "state matrix is {}x{}, expected {}x{}",
                rho.nrows(),
                rho.ncols(),
                d1 * d2,
                d1 * d2
            )));
        }
        let herm = HermOp::with_tolerance(rho, tol.max(1e-12))?;
        let herm = HermOp::hermitize(herm.matrix());
        let trace = herm.trace();
        let eig = eigh(&herm, DEFAULT_TOL)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {min:.3e}"),
                eigenvalues: Some(eig.values),
            });
        }
        if (trace - 1.0).abs() > tol {
            return Err(Error::InvalidState {
                reason: format!("trace {trace} differs from 1"),
                eigenvalues: Some(eig.values),
            });
        }
        Ok(BipartiteState { d1, d2, rho: herm })
    }

    /// Projector onto a normalized (or normalizable) vector.
    pub fn pure(phi: &CVector, d1: usize, d2: usize) -> Result<Self> {
        let norm = phi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState { reason: "zero vector".into(), eigenvalues: None });
        }
        let v = phi / c64(norm, 0.0);
        Self::new(&v * v.adjoint(), d1, d2)
    }

    /// `ρ1 ⊗ ρ2`.
    pub fn product(rho1: &CMatrix, rho2: &CMatrix) -> Result<Self> {
        Self::new(tensor(rho1, rho2), rho1.nrows(), rho2.nrows())
    }

    /// Convex combination of states on the same space.
    pub fn mixture(terms: &[(f64, &BipartiteState)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidState { reason: "empty mixture".into(), eigenvalues: None })?;
        let (d1, d2) = (first.d1, first.d2);
        let mut acc = CMatrix::zeros(d1 * d2, d1 * d2);
        for (w, s) in terms {
            if s.d1 != d1 || s.d2 != d2 {
                return Err(Error::DimensionMismatch("mixture terms on different spaces".into()));
            }
            acc += s.matrix() * c64(*w, 0.0);
        }
        Self::new(acc, d1, d2)
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    pub fn herm(&self) -> &HermOp {
        &self.rho
    }

    /// Reduced state of factor 1 (`Tr₂ ρ`).
    pub fn rho1(&self) -> HermOp {
        partial_trace(self, Factor::Second)
    }

    /// Reduced state of factor 2 (`Tr₁ ρ`).
    pub fn rho2(&self) -> HermOp {
        partial_trace(self, Factor::First)
    }

    /// Reduced state of the given factor.
    pub fn reduced(&self, keep: Factor) -> HermOp {
        match keep {
            Factor::First => self.rho1(),
            Factor::Second => self.rho2(),
        }
    }

    /// `(U1 ⊗ U2) ρ (U1 ⊗ U2)†`.
    pub fn conjugate_local(&self, u1: &CMatrix, u2: &CMatrix) -> Result<Self> {
        let u = tensor(u1, u2);
        let m = &u * self.matrix() * u.adjoint();
        Self::new(m, self.d1, self.d2)
    }
}

/// Partial trace of a state over the factor `traced`.
pub fn partial_trace(s: &BipartiteState, traced: Factor) -> HermOp {
    HermOp::hermitize(&partial_trace_op(s.matrix(), s.d1, s.d2, traced))
}

/// Partial trace of an arbitrary operator on `C^d1 ⊗ C^d2`.
pub fn partial_trace_op(m: &CMatrix, d1: usize, d2: usize, traced: Factor) -> CMatrix {
    match traced {
        Factor::Second => CMatrix::from_fn(d1, d1, |i1, j1| {
            (0..d2).map(|k| m[(i1 * d2 + k, j1 * d2 + k)]).sum()
        }),
        Factor::First => CMatrix::from_fn(d2, d2, |i2, j2| {
            (0..d1).map(|k| m[(k * d2 + i2, k * d2 + j2)]).sum()
        }),
    }
}

/// Hermitian eigendecomposition, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: CMatrix,
    /// Index ranges of degenerate eigenvalue blocks.
    pub blocks: Vec<Range<usize>>,
}

impl Eigh {
    pub fn block_vectors(&self, block: &Range<usize>) -> CMatrix {
        self.vectors.columns(block.start, block.len()).into_owned()
    }

    pub fn block_value(&self, block: &Range<usize>) -> f64 {
        let s: f64 = self.values[block.clone()].iter().sum();
        s / block.len() as f64
    }

    /// Spectral projector of a block.
    pub fn block_projector(&self, block: &Range<usize>) -> CMatrix {
        let v = self.block_vectors(block);
        &v * v.adjoint()
    }
}

pub fn eigh(h: &HermOp, tol: f64) -> Result<Eigh> {
    eigh_matrix(h.matrix(), tol)
}

/// Eigendecomposition of a matrix assumed Hermitian (only the Hermitian part is used).
pub fn eigh_matrix(m: &CMatrix, tol: f64) -> Result<Eigh> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: CMatrix::zeros(0, 0), blocks: vec![] });
    }
    let herm = (m + m.adjoint()) * c64(0.5, 0.0);
    if !is_finite(&herm) {
        return Err(Error::NonFinite);
    }
    let eig = to_faer(&herm)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("Hermitian eigensolver failed: {e:?}")))?;
    let raw: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
    let u = from_faer(eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let values: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &u.column(src));
    }
    let scale = values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let blocks = group_sorted(&values, tol * scale);
    Ok(Eigh { values, vectors, blocks })
}

/// Splits a descending list into runs whose consecutive gaps are ≤ `threshold`.
pub fn group_sorted(values: &[f64], threshold: f64) -> Vec<Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i - 1] - values[i]).abs() > threshold {
            if i > start {
                blocks.push(start..i);
            }
            start = i;
        }
    }
    blocks
}

/// Thin SVD `M = U diag(σ) V†` with σ descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd { u: CMatrix::zeros(r, 0), singular_values: vec![], v: CMatrix::zeros(c, 0) });
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let dec = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::NumericalFailure(format!("SVD failed: {e:?}")))?;
    let u0 = from_faer(dec.U());
    let v0 = from_faer(dec.V());
    let raw: Vec<f64> = (0..k).map(|i| dec.S()[i].re).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let mut u = CMatrix::zeros(r, k);
    let mut v = CMatrix::zeros(c, k);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u0.column(src));
        v.set_column(dst, &v0.column(src));
        singular_values.push(raw[src]);
    }
    Ok(Svd { u, singular_values, v })
}

/// Thin real SVD `M = U diag(σ) Vᵀ` with σ descending.
#[derive(Debug, Clone)]
pub struct RealSvd {
    pub u: RMatrix,
    pub singular_values: Vec<f64>,
    pub v: RMatrix,
}

pub fn svd_real(m: &RMatrix) -> Result<RealSvd> {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(RealSvd { u: RMatrix::zeros(r, 0), singular_values: vec![], v: RMatrix::zeros(c, 0) });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let dec = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::NumericalFailure(format!("SVD failed: {e:?}")))?;
    let u0 = from_faer(dec.U());
    let v0 = from_faer(dec.V());
    let raw: Vec<f64> = (0..k).map(|i| dec.S()[i]).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let mut u = RMatrix::zeros(r, k);
    let mut v = RMatrix::zeros(c, k);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u0.column(src));
        v.set_column(dst, &v0.column(src));
        singular_values.push(raw[src]);
    }
    Ok(RealSvd { u, singular_values, v })
}

/// Kernel of a real matrix together with the singular values that decided it.
#[derive(Debug, Clone)]
pub struct Nullspace {
    /// Orthonormal kernel basis as columns (`ncols(A)` rows).
    pub basis: RMatrix,
    /// All `ncols(A)` singular values, descending (zero-padded when `A` is wide).
    pub singular_values: Vec<f64>,
    /// Absolute cutoff `tol · σ_max`.
    pub cutoff: f64,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Smallest singular value above the cutoff.
    pub fn smallest_kept(&self) -> Option<f64> {
        let rank = self.singular_values.len() - self.dim();
        rank.checked_sub(1).map(|i| self.singular_values[i])
    }

    /// Largest singular value at or below the cutoff.
    pub fn largest_dropped(&self) -> Option<f64> {
        let rank = self.singular_values.len() - self.dim();
        self.singular_values.get(rank).copied()
    }

    /// Ratio of the two singular values bracketing the cutoff; infinite when the
    /// dropped value is exactly zero or when one side is empty.
    pub fn gap(&self) -> f64 {
        match (self.smallest_kept(), self.largest_dropped()) {
            (Some(k), Some(d)) if d > 0.0 => k / d,
            _ => f64::INFINITY,
        }
    }
}

/// Orthonormal basis of `{x : ‖Ax‖ ≤ tol·σ_max}`.
pub fn nullspace_real(a: &RMatrix, tol: f64) -> Result<Nullspace> {
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(Nullspace { basis: RMatrix::zeros(0, 0), singular_values: vec![], cutoff: 0.0 });
    }
    // Pad to at least n rows so that V is square.
    let padded = if m < n {
        let mut p = RMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let dec = svd_real(&padded)?;
    let singular_values = dec.singular_values;
    let cutoff = tol * singular_values[0];
    let rank = singular_values.iter().take_while(|&&s| s > cutoff).count();
    let basis = dec.v.columns(rank, n - rank).into_owned();
    Ok(Nullspace { basis, singular_values, cutoff })
}

/// Orthonormal basis of the range of a positive operator (eigenvalues > `tol`).
pub fn range_basis(h: &HermOp, tol: f64) -> Result<CMatrix> {
    let eig = eigh(h, DEFAULT_TOL)?;
    let keep = eig.values.iter().take_while(|&&v| v > tol).count();
    Ok(eig.vectors.columns(0, keep).into_owned())
}

/// Projector onto the range of a positive operator.
pub fn range_projector(h: &HermOp, tol: f64) -> Result<CMatrix> {
    let v = range_basis(h, tol)?;
    Ok(&v * v.adjoint())
}

/// Orthonormal basis of the Hermitian `n×n` matrices (HS inner product):
/// diagonal units, then `(E_jk + E_kj)/√2` and `i(E_jk − E_kj)/√2` for `j < k`.
pub fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(j, j)] = c64(1.0, 0.0);
        out.push(e);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut s = CMatrix::zeros(n, n);
            s[(j, k)] = c64(r, 0.0);
            s[(k, j)] = c64(r, 0.0);
            out.push(s);
            let mut a = CMatrix::zeros(n, n);
            a[(j, k)] = c64(0.0, -r);
            a[(k, j)] = c64(0.0, r);
            out.push(a);
        }
    }
    out
}

/// Real coordinates of a Hermitian matrix in [`hermitian_basis`].
pub fn hermitian_coords(h: &CMatrix) -> Vec<f64> {
    hermitian_basis(h.nrows())
        .iter()
        .map(|b| (b.adjoint() * h).trace().re)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn identity_tensor_identity() {
        assert_eq!(tensor(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn sigma_z_tensor_sigma_z_is_diagonal() {
        let m = tensor(&pauli(3), &pauli(3));
        let expect = [1.0, -1.0, -1.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { expect[i] } else { 0.0 };
                assert_eq!(m[(i, j)], c64(want, 0.0));
            }
        }
    }

    #[test]
    fn sigma_x_pair_flips_both_spins() {
        let plus_plus = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let out = tensor(&pauli(1), &pauli(1)) * plus_plus;
        // |−−⟩ is the last basis vector
        assert_eq!(out[3], c64(1.0, 0.0));
        assert!(out.iter().take(3).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn tensor_is_associative() {
        let mut r = rng();
        let a = random::ginibre(2, 3, &mut r);
        let b = random::ginibre(3, 2, &mut r);
        let c = random::ginibre(2, 2, &mut r);
        let lhs = tensor(&tensor(&a, &b), &c);
        let rhs = tensor(&a, &tensor(&b, &c));
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_returns_factor() {
        let rho1 = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.7, 0.0), c64(0.3, 0.0)]));
        let rho2 = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(0.2, 0.0),
            c64(0.5, 0.0),
            c64(0.3, 0.0),
        ]));
        let s = BipartiteState::product(&rho1, &rho2).unwrap();
        assert!(max_abs(&(s.rho1().matrix() - &rho1)) < 1e-15);
        assert!(max_abs(&(s.rho2().matrix() - &rho2)) < 1e-15);
    }

    #[test]
    fn partial_trace_is_adjoint_of_lifting() {
        let mut r = rng();
        for (d1, d2) in [(2, 2), (2, 3), (3, 2)] {
            let s = random::state(d1, d2, &mut r);
            let x = random::ginibre(d1, d1, &mut r);
            let lhs = (&x * s.rho1().matrix()).trace();
            let rhs = (lift_first(&x, d2) * s.matrix()).trace();
            assert!((lhs - rhs).norm() < 1e-10);
            let y = random::ginibre(d2, d2, &mut r);
            let lhs = (&y * s.rho2().matrix()).trace();
            let rhs = (lift_second(&y, d1) * s.matrix()).trace();
            assert!((lhs - rhs).norm() < 1e-10);
            assert!((s.rho1().trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_of_half_identity_is_one_block() {
        let h = HermOp::new(identity(2) * c64(0.5, 0.0)).unwrap();
        let e = eigh(&h, DEFAULT_TOL).unwrap();
        assert_eq!(e.blocks, vec![0..2]);
        assert!((e.values[0] - 0.5).abs() < 1e-15 && (e.values[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eigh_of_sigma_z() {
        let e = eigh(&HermOp::pauli(3), DEFAULT_TOL).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        assert_eq!(e.blocks.len(), 2);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut r = rng();
        for n in [2, 3, 5, 9] {
            let h = random::hermitian(n, &mut r);
            let e = eigh(&h, DEFAULT_TOL).unwrap();
            let lam = CMatrix::from_diagonal(&CVector::from_iterator(
                n,
                e.values.iter().map(|&v| c64(v, 0.0)),
            ));
            let rec = &e.vectors * lam * e.vectors.adjoint();
            assert!(hs_norm(&(rec - h.matrix())) <= 1e-10 * hs_norm(h.matrix()));
            for j in 0..n {
                let v = e.vectors.column(j);
                let res = (h.matrix() * v - v * c64(e.values[j], 0.0)).norm();
                assert!(res <= 1e-10 * op_norm(h.matrix()));
            }
        }
    }

    #[test]
    fn svd_of_identity_and_rank_one() {
        let s = svd(&identity(4)).unwrap();
        assert!(s.singular_values.iter().all(|&v| (v - 1.0).abs() < 1e-14));

        let mut r = rng();
        let u = random::ginibre(3, 1, &mut r);
        let v = random::ginibre(4, 1, &mut r);
        let m = &u * v.adjoint();
        let s = svd(&m).unwrap();
        assert!((s.singular_values[0] - u.norm() * v.norm()).abs() < 1e-12);
        assert!(s.singular_values[1..].iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let mut r = rng();
        let m = random::ginibre(4, 4, &mut r);
        let s = svd(&m).unwrap();
        assert!(hs_norm(&(s.reconstruct() - &m)) < 1e-12);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn nullspace_of_zero_and_full_rank() {
        let z = RMatrix::zeros(3, 5);
        assert_eq!(nullspace_real(&z, 1e-9).unwrap().dim(), 5);
        let full = RMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        assert_eq!(nullspace_real(&full, 1e-9).unwrap().dim(), 0);
    }

    #[test]
    fn nullspace_of_constructed_rank_deficiency() {
        let mut r = rng();
        for deficiency in 0..=4 {
            let n = 6;
            let u = random::orthogonal(n, &mut r);
            let v = random::orthogonal(n, &mut r);
            let mut sig = RMatrix::zeros(n, n);
            for i in 0..(n - deficiency) {
                sig[(i, i)] = 1.0 + i as f64;
            }
            let a = &u * sig * v.transpose();
            let ns = nullspace_real(&a, 1e-9).unwrap();
            assert_eq!(ns.dim(), deficiency);
            let gram = ns.basis.transpose() * &ns.basis;
            assert!((gram - RMatrix::identity(deficiency, deficiency)).abs().max() < 1e-12);
            for j in 0..ns.dim() {
                assert!((&a * ns.basis.column(j)).norm() <= 10.0 * 1e-9 * ns.singular_values[0]);
            }
            if deficiency > 0 && deficiency < n {
                assert!(ns.gap() > 1e6);
            }
        }
    }

    #[test]
    fn wide_matrix_nullspace() {
        let a = RMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace_real(&a, 1e-9).unwrap();
        assert_eq!(ns.dim(), 2);
        assert_eq!(ns.singular_values.len(), 3);
    }

    #[test]
    fn state_validation_rejects_negative_spectrum() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(1.2, 0.0),
            c64(-0.2, 0.0),
            c64(0.0, 0.0),
            c64(0.0, 0.0),
        ]));
        match BipartiteState::new(m, 2, 2) {
            Err(Error::InvalidState { eigenvalues: Some(ev), .. }) => assert!(ev[3] < -0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let ip = (x.adjoint() * y).trace();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c64(want, 0.0)).norm() < 1e-15);
            }
        }
    }
}
