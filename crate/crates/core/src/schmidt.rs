//! Operator Schmidt decompositions of bipartite states.
//!
//! A state is viewed as a vector in the tensor product of the two factor
//! Hilbert–Schmidt spaces. Factor operators are flattened row-major
//! (`vec(X)[i·d + j] = X[i, j]`), so the realigned matrix `R` of a state has
//! `R[(i1,j1), (i2,j2)] = ρ[(i1,i2), (j1,j2)]` and `ρ = Σ s_k A_k ⊗ B_k` is the
//! same thing as `R = Σ s_k vec(A_k) vec(B_k)ᵀ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, hermiticity_defect, hs_norm, lift_first, max_abs, svd, tensor, BipartiteState, CMatrix,
    CVector, Factor, HermOp, DEFAULT_TOL,
};

/// Residual allowed when checking that a numerically computed subspace is
/// invariant under the adjoint involution.
const BLOCK_INVARIANCE_TOL: f64 = 1e-6;

/// Largest cross-group overlap accepted by [`weak_twin_osd`].
const BIORTHOGONALITY_TOL: f64 = 1e-8;

/// An operator viewed as a Hilbert–Schmidt vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperVec {
    op: CMatrix,
    norm: f64,
}

impl SuperVec {
    pub fn new(op: CMatrix) -> Self {
        let norm = hs_norm(&op);
        SuperVec { op, norm }
    }

    pub fn op(&self) -> &CMatrix {
        &self.op
    }

    pub fn hs_norm(&self) -> f64 {
        self.norm
    }

    /// Unit-norm copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> SuperVec {
        if self.norm == 0.0 {
            return self.clone();
        }
        SuperVec { op: &self.op / c64(self.norm, 0.0), norm: 1.0 }
    }
}

impl From<CMatrix> for SuperVec {
    fn from(op: CMatrix) -> Self {
        SuperVec::new(op)
    }
}

/// `⟨a|b⟩ = Tr a†b`.
pub fn hs_inner(a: &SuperVec, b: &SuperVec) -> Result<Complex64> {
    hs_inner_op(&a.op, &b.op)
}

pub fn hs_inner_op(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "HS inner product of {:?} and {:?} operators",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Row-major flattening of a square operator.
pub fn vectorize(op: &CMatrix) -> CVector {
    let (r, c) = op.shape();
    CVector::from_fn(r * c, |k, _| op[(k / c, k % c)])
}

/// Inverse of [`vectorize`] for a `d×d` operator.
pub fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// Antilinear map `x ↦ M·conj(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearMap {
    m: CMatrix,
}

impl AntilinearMap {
    pub fn new(m: CMatrix) -> Self {
        AntilinearMap { m }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.ncols()
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        &self.m * x.map(|z| z.conj())
    }

    /// Acts on a square operator through its row-major flattening.
    pub fn apply_op(&self, op: &CMatrix) -> CMatrix {
        unvectorize(&self.apply(&vectorize(op)), op.nrows())
    }

    /// `‖M·conj(M) − I‖_max`; zero for an involution.
    pub fn involution_defect(&self) -> f64 {
        let n = self.m.nrows();
        max_abs(&(&self.m * self.m.map(|z| z.conj()) - CMatrix::identity(n, n)))
    }

    /// The adjoint `X ↦ X†` on `d×d` operators, as a map on their flattenings.
    /// Its fixed points are the Hermitian operators.
    pub fn adjoint_involution(d: usize) -> Self {
        let mut m = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                m[(i * d + j, j * d + i)] = c64(1.0, 0.0);
            }
        }
        AntilinearMap { m }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTerm {
    pub coeff: f64,
    pub op_a: CMatrix,
    pub op_b: CMatrix,
}

/// `ρ/‖ρ‖_HS = Σ coeff_k · op_a_k ⊗ op_b_k` with HS-orthonormal factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomp {
    pub d1: usize,
    pub d2: usize,
    /// Terms in descending coefficient order.
    pub terms: Vec<SchmidtTerm>,
    pub hermitian: bool,
}

impl SchmidtDecomp {
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.d1 * self.d2;
        self.terms.iter().fold(CMatrix::zeros(n, n), |acc, t| {
            acc + tensor(&t.op_a, &t.op_b) * c64(t.coeff, 0.0)
        })
    }

    /// `‖Σ coeff·A⊗B − target/‖target‖‖_HS`.
    pub fn residual(&self, target: &CMatrix) -> f64 {
        let norm = hs_norm(target);
        hs_norm(&(self.reconstruct() - target / c64(norm, 0.0)))
    }

    /// Largest Hermiticity defect over all factor operators.
    pub fn hermiticity_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| hermiticity_defect(&t.op_a).max(hermiticity_defect(&t.op_b)))
            .fold(0.0, f64::max)
    }

    /// `max |Gram − I|` over the factor operators of one side.
    pub fn orthonormality_defect(&self, side: Factor) -> f64 {
        let ops: Vec<&CMatrix> = self
            .terms
            .iter()
            .map(|t| match side {
                Factor::First => &t.op_a,
                Factor::Second => &t.op_b,
            })
            .collect();
        let mut worst = 0.0_f64;
        for (i, a) in ops.iter().enumerate() {
            for (j, b) in ops.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let ip = hs_inner_op(a, b).expect("same side has equal shapes");
                worst = worst.max((ip - c64(want, 0.0)).norm());
            }
        }
        worst
    }

    fn sort_descending(&mut self) {
        self.terms.sort_by(|a, b| b.coeff.total_cmp(&a.coeff));
    }
}

/// Realignment of a state: `R[(i1,j1),(i2,j2)] = ρ[(i1,i2),(j1,j2)]`, shape `d1² × d2²`.
pub fn realign(s: &BipartiteState) -> CMatrix {
    realign_op(s.matrix(), s.d1(), s.d2())
}

pub fn realign_op(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d1 * d1, d2 * d2, |a, b| {
        let (i1, j1) = (a / d1, a % d1);
        let (i2, j2) = (b / d2, b % d2);
        m[(i1 * d2 + i2, j1 * d2 + j2)]
    })
}

/// Position of the entry that fixes the phase of a factor operator: the
/// largest-magnitude diagonal entry, else the largest strictly-lower entry,
/// else the largest strictly-upper entry. Ties go to the first in row-major order.
fn phase_pivot(op: &CMatrix) -> Option<(usize, usize)> {
    let d = op.nrows();
    let scale = max_abs(op);
    if scale == 0.0 {
        return None;
    }
    let groups: [Box<dyn Fn(usize, usize) -> bool>; 3] =
        [Box::new(|i, j| i == j), Box::new(|i, j| i > j), Box::new(|i, j| i < j)];
    for in_group in groups.iter() {
        let mut best: Option<((usize, usize), f64)> = None;
        for i in 0..d {
            for j in 0..op.ncols() {
                if !in_group(i, j) {
                    continue;
                }
                let mag = op[(i, j)].norm();
                match best {
                    Some((_, b)) if mag <= b * (1.0 + 1e-9) => {}
                    _ => best = Some(((i, j), mag)),
                }
            }
        }
        if let Some((pos, mag)) = best {
            if mag > 1e-12 * scale {
                return Some(pos);
            }
        }
    }
    None
}

/// Rotates the phase of `a` so its pivot entry is positive real; `b` absorbs the inverse.
fn fix_phase(a: &mut CMatrix, b: &mut CMatrix) {
    if let Some(pos) = phase_pivot(a) {
        let p = a[pos];
        let phase = p / p.norm();
        *a *= phase.conj();
        *b *= phase;
    }
}

/// Sign-only version of [`fix_phase`] for Hermitian pairs: the pivot's real
/// part (or imaginary part, for a purely imaginary pivot) is made positive.
pub(crate) fn fix_sign(a: &mut CMatrix, b: &mut CMatrix) {
    if let Some(pos) = phase_pivot(a) {
        let p = a[pos];
        let key = if p.re.abs() > 1e-12 * p.norm() { p.re } else { p.im };
        if key < 0.0 {
            *a = -a.clone();
            *b = -b.clone();
        }
    }
}

/// General (possibly non-Hermitian) Schmidt decomposition of `ρ/‖ρ‖_HS`.
pub fn osd(s: &BipartiteState, tol: f64) -> Result<SchmidtDecomp> {
    Ok(osd_operator(s.matrix(), s.d1(), s.d2(), tol)?.0)
}

/// Schmidt decomposition of an arbitrary operator on `C^d1 ⊗ C^d2`, normalized
/// to unit HS norm. Also returns the norm that was divided out.
pub fn osd_operator(m: &CMatrix, d1: usize, d2: usize, tol: f64) -> Result<(SchmidtDecomp, f64)> {
    if m.nrows() != d1 * d2 || m.ncols() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, factors {d1}x{d2}",
            m.nrows(),
            m.ncols()
        )));
    }
    let norm = hs_norm(m);
    let mut dec = SchmidtDecomp { d1, d2, terms: vec![], hermitian: false };
    if norm == 0.0 {
        return Ok((dec, 0.0));
    }
    let r = realign_op(&(m / c64(norm, 0.0)), d1, d2);
    let sv = svd(&r)?;
    let smax = sv.singular_values[0];
    for (k, &s) in sv.singular_values.iter().enumerate() {
        if s <= tol * smax {
            break;
        }
        let mut a = unvectorize(&sv.u.column(k).into_owned(), d1);
        let mut b = unvectorize(&sv.v.column(k).map(|z| z.conj()), d2);
        fix_phase(&mut a, &mut b);
        dec.terms.push(SchmidtTerm { coeff: s, op_a: a, op_b: b });
    }
    Ok((dec, norm))
}

/// Orthonormal basis of `span(vectors)` made of fixed points of the
/// antiunitary involution `v`.
///
/// Candidates `e + v(e)` and `i(e − v(e))` are taken over an orthonormal basis
/// `{e}` of the span and orthonormalized with real coefficients, largest
/// residual first. Inner products of fixed points are real, so real
/// Gram–Schmidt stays inside the fixed-point set.
pub fn invariant_basis(vectors: &[CMatrix], v: &AntilinearMap, tol: f64) -> Result<Vec<CMatrix>> {
    let Some(first) = vectors.first() else {
        return Ok(vec![]);
    };
    let d = first.nrows();
    let n = d * first.ncols();
    if v.dim() != n || vectors.iter().any(|x| x.shape() != first.shape()) {
        return Err(Error::DimensionMismatch("involution and vectors disagree in size".into()));
    }
    let mut stacked = CMatrix::zeros(n, vectors.len());
    for (j, x) in vectors.iter().enumerate() {
        stacked.set_column(j, &vectorize(x));
    }
    let sv = svd(&stacked)?;
    let smax = sv.singular_values[0];
    let rank = sv.singular_values.iter().take_while(|&&s| s > 1e-12 * smax).count();
    let q = sv.u.columns(0, rank).into_owned();

    let mut residual = 0.0_f64;
    for j in 0..rank {
        let w = v.apply(&q.column(j).into_owned());
        let proj = &q * (q.adjoint() * &w);
        residual = residual.max((w - proj).norm());
    }
    if residual > tol {
        return Err(Error::NotInvariant { residual });
    }

    let mut candidates = Vec::with_capacity(2 * rank);
    for j in 0..rank {
        let e = q.column(j).into_owned();
        let ve = v.apply(&e);
        candidates.push(&e + &ve);
        candidates.push((&e - &ve) * c64(0.0, 1.0));
    }
    let mut accepted: Vec<CVector> = Vec::with_capacity(rank);
    while accepted.len() < rank {
        let best = candidates
            .iter()
            .map(|c| {
                accepted
                    .iter()
                    .fold(c.clone(), |acc, a| &acc - a * c64(a.dotc(&acc).re, 0.0))
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("candidate list is non-empty");
        let norm = best.norm();
        if norm <= tol.max(1e-12) {
            return Err(Error::NotInvariant { residual: norm });
        }
        accepted.push(best / c64(norm, 0.0));
    }
    Ok(accepted
        .into_iter()
        .map(|x| {
            let mut a = unvectorize(&x, d);
            let mut dummy = CMatrix::zeros(0, 0);
            fix_sign(&mut a, &mut dummy);
            a
        })
        .collect())
}

/// Hermitian operator Schmidt decomposition of `ρ/‖ρ‖_HS`.
///
/// Left singular subspaces of the realigned state (the eigenspaces of the
/// reduced superoperator `R R†`) are grouped into degenerate blocks, each block
/// gets a Hermitian orthonormal basis from [`invariant_basis`], and every
/// second factor is the partial HS inner product `Tr₁[(A ⊗ I) σ] / coeff`.
pub fn hermitian_osd(s: &BipartiteState, tol: f64) -> Result<SchmidtDecomp> {
    let (d1, d2) = (s.d1(), s.d2());
    let sigma = s.matrix() / c64(hs_norm(s.matrix()), 0.0);
    let r = realign_op(&sigma, d1, d2);
    let sv = svd(&r)?;
    let smax = sv.singular_values[0];
    let kept = sv.singular_values.iter().take_while(|&&x| x > tol * smax).count();
    let blocks = crate::linalg::group_sorted(&sv.singular_values[..kept], tol * smax);
    let involution = AntilinearMap::adjoint_involution(d1);
    let rt = r.transpose();

    let mut dec = SchmidtDecomp { d1, d2, terms: Vec::with_capacity(kept), hermitian: true };
    for block in blocks {
        let vectors: Vec<CMatrix> = block
            .clone()
            .map(|k| unvectorize(&sv.u.column(k).into_owned(), d1))
            .collect();
        let herm = invariant_basis(&vectors, &involution, BLOCK_INVARIANCE_TOL).map_err(|e| {
            Error::NumericalFailure(format!("Schmidt block {block:?} is not adjoint-invariant: {e}"))
        })?;
        for a in herm {
            let b_raw = &rt * vectorize(&a).map(|z| z.conj());
            let coeff = b_raw.norm();
            let mut b = unvectorize(&(b_raw / c64(coeff, 0.0)), d2);
            b = HermOp::hermitize(&b).into_matrix();
            let mut a = HermOp::hermitize(&a).into_matrix();
            fix_sign(&mut a, &mut b);
            dec.terms.push(SchmidtTerm { coeff, op_a: a, op_b: b });
        }
    }
    dec.sort_descending();
    Ok(dec)
}

/// Schmidt decomposition continued through a twin projector.
#[derive(Debug, Clone)]
pub struct WeakTwinOsd {
    /// Concatenated decomposition of `ρ/‖ρ‖_HS`, descending.
    pub decomp: SchmidtDecomp,
    /// Group of each term: 0 for `P₁ρ`, 1 for `P₁⊥ρ`.
    pub group: Vec<usize>,
    /// HS norms of `P₁σ` and `P₁⊥σ` (`σ = ρ/‖ρ‖_HS`); their squares sum to 1.
    pub group_weights: [f64; 2],
    /// Largest `|Tr A†C|` or `|Tr B†D|` between terms of different groups.
    pub max_cross_overlap: f64,
}

/// Decomposes `ρ = P₁ρ + P₁⊥ρ` and continues each term with a general
/// Schmidt decomposition. Fails unless the two groups are biorthogonal on
/// both factors, which holds exactly when `P₁` is a twin projector.
pub fn weak_twin_osd(s: &BipartiteState, p1: &HermOp, tol: f64) -> Result<WeakTwinOsd> {
    let (d1, d2) = (s.d1(), s.d2());
    if p1.dim() != d1 {
        return Err(Error::DimensionMismatch(format!("projector has dim {}, factor 1 has {d1}", p1.dim())));
    }
    let p = p1.matrix();
    let defect = max_abs(&(p * p - p));
    if defect > 1e-10 {
        return Err(Error::NotAProjector { defect });
    }
    let sigma = s.matrix() / c64(hs_norm(s.matrix()), 0.0);
    let p_perp = CMatrix::identity(d1, d1) - p;
    let parts = [lift_first(p, d2) * &sigma, lift_first(&p_perp, d2) * &sigma];

    let mut terms: Vec<(usize, SchmidtTerm)> = Vec::new();
    let mut group_weights = [0.0; 2];
    for (g, part) in parts.iter().enumerate() {
        let (dec, norm) = osd_operator(part, d1, d2, tol)?;
        group_weights[g] = norm;
        if norm <= tol {
            continue;
        }
        for mut t in dec.terms {
            t.coeff *= norm;
            terms.push((g, t));
        }
    }

    let mut max_cross_overlap = 0.0_f64;
    for (gi, ti) in &terms {
        for (gj, tj) in &terms {
            if gi == gj {
                continue;
            }
            let a = hs_inner_op(&ti.op_a, &tj.op_a)?.norm();
            let b = hs_inner_op(&ti.op_b, &tj.op_b)?.norm();
            max_cross_overlap = max_cross_overlap.max(a).max(b);
        }
    }
    if max_cross_overlap > BIORTHOGONALITY_TOL {
        return Err(Error::NotATwin(format!(
            "projector groups are not biorthogonal (overlap {max_cross_overlap:.3e})"
        )));
    }

    // Keep ties in group order.
    terms.sort_by(|(ga, a), (gb, b)| b.coeff.total_cmp(&a.coeff).then(ga.cmp(gb)));
    let group = terms.iter().map(|(g, _)| *g).collect();
    let mut decomp = SchmidtDecomp { d1, d2, terms: terms.into_iter().map(|(_, t)| t).collect(), hermitian: false };
    decomp.hermitian = decomp.hermiticity_defect() <= DEFAULT_TOL;
    Ok(WeakTwinOsd { decomp, group, group_weights, max_cross_overlap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, CVector};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn bell_diag(t: [f64; 3]) -> BipartiteState {
        let mut m = tensor(&pauli(0), &pauli(0));
        for i in 0..3 {
            m += tensor(&pauli(i + 1), &pauli(i + 1)) * c64(t[i], 0.0);
        }
        BipartiteState::new(m * c64(0.25, 0.0), 2, 2).unwrap()
    }

    fn close_up_to_sign(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) < tol || max_abs(&(a + b)) < tol
    }

    #[test]
    fn inner_product_examples() {
        let half = SuperVec::new(CMatrix::identity(4, 4) * c64(0.5, 0.0));
        assert!((hs_inner(&half, &half).unwrap() - c64(1.0, 0.0)).norm() < 1e-15);
        let x = SuperVec::new(pauli(1) * c64(R2, 0.0));
        let y = SuperVec::new(pauli(2) * c64(R2, 0.0));
        assert!(hs_inner(&x, &y).unwrap().norm() < 1e-15);
        assert!(hs_inner(&x, &half).is_err());
    }

    #[test]
    fn inner_product_is_conjugate_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = SuperVec::new(random::ginibre(3, 3, &mut rng));
        let b = SuperVec::new(random::ginibre(3, 3, &mut rng));
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-13);
    }

    #[test]
    fn orthogonal_states_are_hs_orthogonal_and_conversely() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u = random::unitary(4, &mut rng);
            // supports on the first two and last two columns of u
            let mk = |cols: std::ops::Range<usize>, rng: &mut ChaCha8Rng| {
                let w = random::simplex(2, rng);
                let mut m = CMatrix::zeros(4, 4);
                for (k, c) in cols.enumerate() {
                    let v = u.column(c).into_owned();
                    m += &v * v.adjoint() * c64(w[k], 0.0);
                }
                m
            };
            let a = mk(0..2, &mut rng);
            let b = mk(2..4, &mut rng);
            let ip = hs_inner(&SuperVec::new(a.clone()), &SuperVec::new(b.clone())).unwrap();
            assert!(ip.norm() < 1e-12);
            assert!(crate::linalg::op_norm(&(&a * &b)) < 1e-9);
            // overlapping supports give a positive inner product
            let c = mk(1..3, &mut rng);
            assert!(hs_inner(&SuperVec::new(a), &SuperVec::new(c)).unwrap().re > 1e-6);
        }
    }

    #[test]
    fn realign_product_has_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r1 = random::density(2, &mut rng);
        let r2 = random::density(3, &mut rng);
        let s = BipartiteState::product(&r1, &r2).unwrap();
        let r = realign(&s);
        assert_eq!(r.shape(), (4, 9));
        let expect = vectorize(&r1) * vectorize(&r2).transpose();
        assert!(max_abs(&(r.clone() - expect)) < 1e-15);
        let sv = svd(&r).unwrap();
        assert!(sv.singular_values[1] < 1e-14);
        assert!((r.norm() - s.matrix().norm()).abs() < 1e-14);
    }

    #[test]
    fn realign_of_bell_diagonal_has_half_t_singular_values() {
        let t = [0.3, -0.5, 0.1];
        let sv = svd(&realign(&bell_diag(t))).unwrap();
        let mut want: Vec<f64> = vec![0.5, 0.15, 0.25, 0.05];
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in sv.singular_values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn osd_of_product_is_single_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = BipartiteState::product(&random::density(2, &mut rng), &random::density(2, &mut rng)).unwrap();
        let d = osd(&s, DEFAULT_TOL).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d.terms[0].coeff - 1.0).abs() < 1e-12);
    }

    #[test]
    fn osd_of_bell_state_has_four_equal_terms() {
        let d = osd(&bell_diag([-1.0, 1.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.terms.iter().all(|t| (t.coeff - 0.5).abs() < 1e-12));
        assert!(d.residual(bell_diag([-1.0, 1.0, 1.0]).matrix()) < 1e-12);
    }

    #[test]
    fn osd_of_equal_weight_binary_mixture_has_two_terms() {
        // (|++⟩⟨++| + |−−⟩⟨−−|)/2 = (I⊗I + σz⊗σz)/4
        let d = osd(&bell_diag([0.0, 0.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(d.len(), 2);
        for t in &d.terms {
            assert!((t.coeff - R2).abs() < 1e-12);
        }
    }

    #[test]
    fn invariant_basis_examples() {
        let adj = AntilinearMap::adjoint_involution(2);
        assert!(adj.involution_defect() < 1e-15);

        let out = invariant_basis(&[pauli(1)], &adj, 1e-10).unwrap();
        assert_eq!(out.len(), 1);
        assert!(close_up_to_sign(&out[0], &(pauli(1) * c64(R2, 0.0)), 1e-12));

        let mut up = CMatrix::zeros(2, 2);
        up[(0, 1)] = c64(1.0, 0.0);
        let down = up.transpose();
        let out = invariant_basis(&[up, down], &adj, 1e-10).unwrap();
        assert_eq!(out.len(), 2);
        for a in &out {
            assert!(hermiticity_defect(a) < 1e-15);
        }
        // the span of the output is the span of σx, σy
        let proj_x: f64 = out.iter().map(|a| hs_inner_op(a, &(pauli(1) * c64(R2, 0.0))).unwrap().norm_sqr()).sum();
        let proj_y: f64 = out.iter().map(|a| hs_inner_op(a, &(pauli(2) * c64(R2, 0.0))).unwrap().norm_sqr()).sum();
        assert!((proj_x - 1.0).abs() < 1e-12 && (proj_y - 1.0).abs() < 1e-12);

        let out = invariant_basis(&[pauli(2) * c64(0.0, 1.0)], &adj, 1e-10).unwrap();
        assert!(close_up_to_sign(&out[0], &(pauli(2) * c64(R2, 0.0)), 1e-12));
    }

    #[test]
    fn invariant_basis_rejects_non_invariant_span() {
        let adj = AntilinearMap::adjoint_involution(2);
        let mut up = CMatrix::zeros(2, 2);
        up[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(invariant_basis(&[up], &adj, 1e-10), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn invariant_basis_outputs_are_fixed_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let adj = AntilinearMap::adjoint_involution(3);
        for _ in 0..10 {
            // a random adjoint-invariant subspace: span of A and A† for random A
            let a = random::ginibre(3, 3, &mut rng);
            let b = random::ginibre(3, 3, &mut rng);
            let span = vec![a.clone(), a.adjoint(), b.clone(), b.adjoint()];
            let out = invariant_basis(&span, &adj, 1e-9).unwrap();
            assert_eq!(out.len(), 4);
            for (i, x) in out.iter().enumerate() {
                assert!(max_abs(&(adj.apply_op(x) - x)) < 1e-9);
                for (j, y) in out.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((hs_inner_op(x, y).unwrap() - c64(want, 0.0)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn hermitian_osd_of_bell_diagonal_matches_pauli_terms() {
        let t = [0.6, -0.3, 0.1];
        let s = bell_diag(t);
        let d = hermitian_osd(&s, DEFAULT_TOL).unwrap();
        let r0 = 1.0 / (1.0 + t.iter().map(|x| x * x).sum::<f64>());
        let mut want = vec![r0.sqrt()];
        want.extend(t.iter().map(|x| r0.sqrt() * x.abs()));
        want.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(d.len(), 4);
        for (a, b) in d.coefficients().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        // leading term is I/√2 ⊗ I/√2, then σx, σy, σz in order of |t|
        let id = pauli(0) * c64(R2, 0.0);
        assert!(max_abs(&(&d.terms[0].op_a - &id)) < 1e-12);
        assert!(max_abs(&(&d.terms[0].op_b - &id)) < 1e-12);
        for (term, (axis, sign)) in d.terms[1..].iter().zip([(1usize, 1.0), (2, -1.0), (3, 1.0)]) {
            assert!(max_abs(&(&term.op_a - pauli(axis) * c64(R2, 0.0))) < 1e-12);
            assert!(max_abs(&(&term.op_b - pauli(axis) * c64(sign * R2, 0.0))) < 1e-12);
        }
    }

    #[test]
    fn hermitian_osd_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r1 = random::density(2, &mut rng);
        let r2 = random::density(3, &mut rng);
        let s = BipartiteState::product(&r1, &r2).unwrap();
        let d = hermitian_osd(&s, DEFAULT_TOL).unwrap();
        assert_eq!(d.len(), 1);
        let a = &r1 / c64(r1.norm(), 0.0);
        let b = &r2 / c64(r2.norm(), 0.0);
        assert!(max_abs(&(&d.terms[0].op_a - a)) < 1e-12);
        assert!(max_abs(&(&d.terms[0].op_b - b)) < 1e-12);
    }

    #[test]
    fn hermitian_osd_of_random_qutrit_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let s = random::state(3, 3, &mut rng);
            let h = hermitian_osd(&s, DEFAULT_TOL).unwrap();
            assert!(h.hermiticity_defect() < 1e-10);
            assert!(h.residual(s.matrix()) < 1e-9);
            assert!(h.orthonormality_defect(Factor::First) < 1e-9);
            assert!(h.orthonormality_defect(Factor::Second) < 1e-9);
            let g = osd(&s, DEFAULT_TOL).unwrap();
            assert_eq!(g.len(), h.len());
            for (a, b) in g.coefficients().iter().zip(h.coefficients()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hermitian_osd_handles_degenerate_bell_state() {
        let s = bell_diag([-1.0, -1.0, -1.0]);
        let h = hermitian_osd(&s, DEFAULT_TOL).unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.hermiticity_defect() < 1e-12);
        assert!(h.residual(s.matrix()) < 1e-12);
    }

    fn schmidt_rank_two(p: f64) -> BipartiteState {
        let mut phi = CVector::zeros(4);
        phi[0] = c64(p.sqrt(), 0.0);
        phi[3] = c64((1.0 - p).sqrt(), 0.0);
        BipartiteState::pure(&phi, 2, 2).unwrap()
    }

    #[test]
    fn weak_twin_osd_on_pure_state() {
        let p = 0.7;
        let s = schmidt_rank_two(p);
        let p1 = HermOp::new((pauli(0) + pauli(3)) * c64(0.5, 0.0)).unwrap();
        let w = weak_twin_osd(&s, &p1, DEFAULT_TOL).unwrap();
        assert_eq!(w.decomp.len(), 4);
        let q = 1.0 - p;
        let mut want: Vec<f64> = vec![p, (p * q).sqrt(), (p * q).sqrt(), q];
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in w.decomp.coefficients().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(w.max_cross_overlap < 1e-12);
        assert!(w.decomp.residual(s.matrix()) < 1e-12);
        // every factor is a rank-one matrix unit
        for t in &w.decomp.terms {
            assert!((t.op_a.norm() - 1.0).abs() < 1e-12);
            assert_eq!(t.op_a.iter().filter(|z| z.norm() > 1e-12).count(), 1);
        }
        assert!(!w.decomp.hermitian);
        assert!((w.group_weights[0].powi(2) + w.group_weights[1].powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_twin_osd_matches_osd_coefficients() {
        let s = bell_diag([0.0, 0.0, 1.0]);
        let p1 = HermOp::new((pauli(0) + pauli(3)) * c64(0.5, 0.0)).unwrap();
        let w = weak_twin_osd(&s, &p1, DEFAULT_TOL).unwrap();
        let g = osd(&s, DEFAULT_TOL).unwrap();
        assert_eq!(w.decomp.len(), g.len());
        for (a, b) in w.decomp.coefficients().iter().zip(g.coefficients()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_twin_osd_rejects_non_projector_and_non_twin() {
        let s = schmidt_rank_two(0.7);
        let not_proj = HermOp::new(pauli(3)).unwrap();
        assert!(matches!(weak_twin_osd(&s, &not_proj, DEFAULT_TOL), Err(Error::NotAProjector { .. })));
        // |x+⟩⟨x+| has no twin for this state
        let px = HermOp::new((pauli(0) + pauli(1)) * c64(0.5, 0.0)).unwrap();
        assert!(matches!(weak_twin_osd(&s, &px, DEFAULT_TOL), Err(Error::NotATwin(_))));
    }
}
