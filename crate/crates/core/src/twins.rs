//! Twin observables: pairs `(A₁, A₂)` of Hermitian operators on opposite
//! factors with `(A₁ ⊗ I) ρ = (I ⊗ A₂) ρ`.
//!
//! Only the parts of `A₁`, `A₂` compressed to the ranges of the reduced states
//! ("detectable parts") enter the twin relation. Everything here works with
//! those compressions and returns twins whose null-space parts are zero.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, commutator, eigh_matrix, group_sorted, hermitian_basis, hs_norm, lift_first, lift_second,
    max_abs, nullspace_real, op_norm, range_basis, range_projector, svd, svd_real, BipartiteState, CMatrix,
    CVector, HermOp, Nullspace, RMatrix,
};
use crate::schmidt::AntilinearMap;

/// Default relative cutoff for the twin-equation kernel.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;

/// Residual below which a pair counts as twins.
pub const TWIN_TOL: f64 = 1e-8;

/// Eigenvalue matching tolerance between the two detectable spectra.
pub const PAIRING_TOL: f64 = 1e-7;

/// Eigenvalues of reduced states at or below this are treated as zero.
pub const RANGE_TOL: f64 = 1e-9;

/// A candidate twin pair with its defect measures.
#[derive(Debug, Clone)]
pub struct TwinPair {
    pub a1: HermOp,
    pub a2: HermOp,
    /// `‖(A₁⊗I)ρ − (I⊗A₂)ρ‖_HS`.
    pub residual: f64,
    /// `‖[A₁, ρ₁]‖_HS`.
    pub commutator1: f64,
    /// `‖[A₂, ρ₂]‖_HS`.
    pub commutator2: f64,
}

impl TwinPair {
    pub fn is_twin(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

/// Evaluates the twin equation for a given pair.
pub fn verify_twin(s: &BipartiteState, a1: &HermOp, a2: &HermOp) -> Result<TwinPair> {
    let (d1, d2) = (s.d1(), s.d2());
    if a1.dim() != d1 || a2.dim() != d2 {
        return Err(Error::DimensionMismatch(format!(
            "observables of dims ({}, {}) on a {d1}x{d2} state",
            a1.dim(),
            a2.dim()
        )));
    }
    let rho = s.matrix();
    let diff = lift_first(a1.matrix(), d2) * rho - lift_second(a2.matrix(), d1) * rho;
    Ok(TwinPair {
        a1: a1.clone(),
        a2: a2.clone(),
        residual: hs_norm(&diff),
        commutator1: hs_norm(&commutator(a1.matrix(), s.rho1().matrix())),
        commutator2: hs_norm(&commutator(a2.matrix(), s.rho2().matrix())),
    })
}

/// The singular values that decided a rank, for audit trails.
#[derive(Debug, Clone)]
pub struct RankDecision {
    pub singular_values: Vec<f64>,
    pub cutoff: f64,
    pub smallest_kept: Option<f64>,
    pub largest_dropped: Option<f64>,
    /// `smallest_kept / largest_dropped`; infinite if either is missing or the
    /// dropped value is exactly zero.
    pub gap: f64,
}

impl From<&Nullspace> for RankDecision {
    fn from(ns: &Nullspace) -> Self {
        RankDecision {
            singular_values: ns.singular_values.clone(),
            cutoff: ns.cutoff,
            smallest_kept: ns.smallest_kept(),
            largest_dropped: ns.largest_dropped(),
            gap: ns.gap(),
        }
    }
}

/// Real-linear basis of the solutions of the twin equation.
#[derive(Debug, Clone)]
pub struct TwinBasis {
    /// First entry is always `(Q₁, Q₂)`; the rest are orthonormal in
    /// coordinate space and orthogonal to it.
    pub pairs: Vec<TwinPair>,
    pub dim: usize,
    pub nontrivial: bool,
    pub range_projectors: (HermOp, HermOp),
    pub rank1: usize,
    pub rank2: usize,
    pub kernel: RankDecision,
}

/// Hermitian operators `V H V†` for `H` running over an orthonormal basis of
/// the Hermitian `r×r` matrices, `V` an isometry onto a range.
fn compressed_basis(v: &CMatrix) -> Vec<CMatrix> {
    hermitian_basis(v.ncols())
        .into_iter()
        .map(|h| v * h * v.adjoint())
        .collect()
}

fn real_vec(m: &CMatrix) -> Vec<f64> {
    m.iter().map(|z| z.re).chain(m.iter().map(|z| z.im)).collect()
}

fn combine(basis: &[CMatrix], coords: &[f64], d: usize) -> CMatrix {
    basis
        .iter()
        .zip(coords)
        .fold(CMatrix::zeros(d, d), |acc, (b, &x)| acc + b * c64(x, 0.0))
}

/// Flips `x` so its largest-magnitude component (first on ties) is positive.
fn fix_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if let Some(p) = x.iter().position(|v| v.abs() >= max * (1.0 - 1e-9)) {
        if x[p] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Solves the twin equation as a real linear system over the detectable
/// parts of `A₁` and `A₂`. `tol` is both the relative kernel cutoff and the
/// eigenvalue threshold defining the ranges of the reduced states.
pub fn twin_space(s: &BipartiteState, tol: f64) -> Result<TwinBasis> {
    let (d1, d2) = (s.d1(), s.d2());
    let rho = s.matrix();
    let v1 = range_basis(&s.rho1(), tol)?;
    let v2 = range_basis(&s.rho2(), tol)?;
    let (r1, r2) = (v1.ncols(), v2.ncols());
    let basis1 = compressed_basis(&v1);
    let basis2 = compressed_basis(&v2);
    let n1 = basis1.len();

    let rows = 2 * rho.len();
    let mut system = RMatrix::zeros(rows, n1 + basis2.len());
    for (j, b) in basis1.iter().enumerate() {
        let col = real_vec(&(lift_first(b, d2) * rho));
        system.column_mut(j).copy_from_slice(&col);
    }
    for (j, b) in basis2.iter().enumerate() {
        let col = real_vec(&(lift_second(b, d1) * rho));
        system.column_mut(n1 + j).copy_from_slice(&col);
        system.column_mut(n1 + j).neg_mut();
    }
    let ns = nullspace_real(&system, tol)?;
    let kernel = ns.basis.clone();
    let dim = kernel.ncols();

    // Coordinates of (Q₁, Q₂): ones on the diagonal units of each block.
    let mut q = vec![0.0; n1 + basis2.len()];
    q[..r1].iter_mut().for_each(|x| *x = 1.0);
    q[n1..n1 + r2].iter_mut().for_each(|x| *x = 1.0);
    let qv = nalgebra::DVector::from_vec(q.clone());

    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(dim);
    if dim > 0 {
        coords.push(q);
        let unit = &qv / qv.norm();
        let rest = &kernel - &unit * (unit.transpose() * &kernel);
        if dim > 1 {
            let dec = svd_real(&rest)?;
            for k in 0..dim - 1 {
                let mut x: Vec<f64> = dec.u.column(k).iter().copied().collect();
                fix_sign(&mut x);
                coords.push(x);
            }
        }
    }

    let mut pairs = Vec::with_capacity(coords.len());
    for x in &coords {
        let a1 = HermOp::hermitize(&combine(&basis1, &x[..n1], d1));
        let a2 = HermOp::hermitize(&combine(&basis2, &x[n1..], d2));
        pairs.push(verify_twin(s, &a1, &a2)?);
    }
    let range_projectors = (
        HermOp::hermitize(&(&v1 * v1.adjoint())),
        HermOp::hermitize(&(&v2 * v2.adjoint())),
    );
    Ok(TwinBasis {
        pairs,
        dim,
        nontrivial: dim >= 2,
        range_projectors,
        rank1: r1,
        rank2: r2,
        kernel: RankDecision::from(&ns),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrengthKind {
    Strong,
    Weak,
    PartiallyStrong,
}

#[derive(Debug, Clone)]
pub struct TwinStrength {
    pub kind: StrengthKind,
    /// `(a_n, strong)` for each common detectable eigenvalue.
    pub per_eigenvalue: Vec<(f64, bool)>,
    /// `‖[P₁⁽ⁿ⁾ ⊗ I, ρ]‖_HS` for each eigenvalue.
    pub commutators: Vec<f64>,
    /// `max(‖[A₁ ⊗ I, ρ]‖, ‖[I ⊗ A₂, ρ]‖)`.
    pub global_commutator: f64,
    /// Verdict of the global commutator test; agrees with `kind == Strong`
    /// for genuine twins.
    pub global_strong: bool,
}

/// Detectable spectral decomposition of an observable: distinct eigenvalues
/// of `V† A V` and the corresponding projectors `V W W† V†`.
struct DetectableSpectrum {
    values: Vec<f64>,
    projectors: Vec<CMatrix>,
    merged: bool,
}

fn detectable_spectrum(a: &HermOp, range: &CMatrix) -> Result<DetectableSpectrum> {
    let compressed = range.adjoint() * a.matrix() * range;
    let eig = eigh_matrix(&compressed, 0.0)?;
    let scale = eig.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let blocks = group_sorted(&eig.values, PAIRING_TOL * scale);
    let mut merged = false;
    let mut values = Vec::with_capacity(blocks.len());
    let mut projectors = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let vals = &eig.values[b.clone()];
        if vals[0] - vals[vals.len() - 1] > 1e-12 * scale {
            merged = true;
        }
        values.push(eig.block_value(b));
        let w = range * eig.block_vectors(b);
        projectors.push(&w * w.adjoint());
    }
    Ok(DetectableSpectrum { values, projectors, merged })
}

/// Common detectable spectrum of a twin pair and its projector pairs.
#[derive(Debug, Clone)]
pub struct SpectralPairing {
    /// Common eigenvalues `a_n`, descending.
    pub values: Vec<f64>,
    /// `(P₁⁽ⁿ⁾, P₂⁽ⁿ⁾)`, detectable parts only.
    pub proj_pairs: Vec<(HermOp, HermOp)>,
    /// `(k, f(k))`: index into the detectable spectrum of `A₁` and the index
    /// of the matched eigenvalue of `A₂`, both sorted descending.
    pub bijection: Vec<(usize, usize)>,
    /// Twin residual of each projector pair.
    pub pair_residuals: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Matches the detectable spectra of a twin pair and checks that the
/// matched spectral projectors are twins themselves.
pub fn spectral_pairing(s: &BipartiteState, p: &TwinPair, tol: f64) -> Result<SpectralPairing> {
    if p.residual > tol {
        return Err(Error::NotATwin(format!("pair residual {:.3e} exceeds {tol:.1e}", p.residual)));
    }
    let v1 = range_basis(&s.rho1(), RANGE_TOL)?;
    let v2 = range_basis(&s.rho2(), RANGE_TOL)?;
    let spec1 = detectable_spectrum(&p.a1, &v1)?;
    let spec2 = detectable_spectrum(&p.a2, &v2)?;
    let mut warnings = Vec::new();
    if spec1.merged || spec2.merged {
        warnings.push(format!(
            "degenerate spectrum: eigenvalues within {PAIRING_TOL:.0e} were merged into one projector"
        ));
    }
    let scale = spec1
        .values
        .iter()
        .chain(&spec2.values)
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut used = vec![false; spec2.values.len()];
    let mut bijection = Vec::with_capacity(spec1.values.len());
    for (k, &a) in spec1.values.iter().enumerate() {
        let best = spec2
            .values
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, &b)| (j, (a - b).abs()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((j, diff)) if diff <= PAIRING_TOL * scale => {
                used[j] = true;
                bijection.push((k, j));
            }
            _ => {
                return Err(Error::NotATwin(format!(
                    "detectable eigenvalue {a} of A1 has no partner in the spectrum of A2"
                )))
            }
        }
    }
    if let Some(j) = used.iter().position(|u| !u) {
        return Err(Error::NotATwin(format!(
            "detectable eigenvalue {} of A2 has no partner in the spectrum of A1",
            spec2.values[j]
        )));
    }

    let mut values = Vec::with_capacity(bijection.len());
    let mut proj_pairs = Vec::with_capacity(bijection.len());
    let mut pair_residuals = Vec::with_capacity(bijection.len());
    for &(k, j) in &bijection {
        let p1 = HermOp::hermitize(&spec1.projectors[k]);
        let p2 = HermOp::hermitize(&spec2.projectors[j]);
        let check = verify_twin(s, &p1, &p2)?;
        if check.residual > tol {
            return Err(Error::NotATwin(format!(
                "spectral projectors for eigenvalue {} are not twins (residual {:.3e})",
                spec1.values[k], check.residual
            )));
        }
        values.push(0.5 * (spec1.values[k] + spec2.values[j]));
        pair_residuals.push(check.residual);
        proj_pairs.push((p1, p2));
    }
    Ok(SpectralPairing { values, proj_pairs, bijection, pair_residuals, warnings })
}

/// Strong / weak / partially strong classification of a verified twin pair.
pub fn classify_twin(s: &BipartiteState, p: &TwinPair, tol: f64) -> Result<TwinStrength> {
    let pairing = spectral_pairing(s, p, tol)?;
    let (d1, d2) = (s.d1(), s.d2());
    let rho = s.matrix();
    let commutators: Vec<f64> = pairing
        .proj_pairs
        .iter()
        .map(|(p1, _)| hs_norm(&commutator(&lift_first(p1.matrix(), d2), rho)))
        .collect();
    let per_eigenvalue: Vec<(f64, bool)> = pairing
        .values
        .iter()
        .zip(&commutators)
        .map(|(&a, &c)| (a, c <= tol))
        .collect();
    let strong = per_eigenvalue.iter().filter(|(_, s)| *s).count();
    let kind = if strong == per_eigenvalue.len() {
        StrengthKind::Strong
    } else if strong == 0 {
        StrengthKind::Weak
    } else {
        StrengthKind::PartiallyStrong
    };
    let c1 = hs_norm(&commutator(&lift_first(p.a1.matrix(), d2), rho));
    let c2 = hs_norm(&commutator(&lift_second(p.a2.matrix(), d1), rho));
    let global_commutator = c1.max(c2);
    let scale = op_norm(p.a1.matrix()).max(op_norm(p.a2.matrix())).max(1.0);
    Ok(TwinStrength {
        kind,
        per_eigenvalue,
        commutators,
        global_commutator,
        global_strong: global_commutator <= tol * scale,
    })
}

#[derive(Debug, Clone)]
pub struct MixtureTerm {
    /// Eigenvalue `a_n` of the twin pair selecting this term.
    pub value: f64,
    pub weight: f64,
    pub state: BipartiteState,
    pub p1: HermOp,
    pub p2: HermOp,
}

/// Biorthogonal mixture generated by a strong twin pair.
#[derive(Debug, Clone)]
pub struct StrongMixture {
    pub terms: Vec<MixtureTerm>,
    /// `max ‖ρᵢ⁽ⁿ⁾ ρᵢ⁽ᵐ⁾‖` over `n ≠ m`, `i = 1, 2` (operator norm).
    pub max_biorthogonality_defect: f64,
    /// `max ‖Pᵢ⁽ⁿ⁾ ρᵢ⁽ⁿ⁾ − ρᵢ⁽ⁿ⁾‖` over terms and factors.
    pub max_support_defect: f64,
}

/// `ρ = Σ wₙ ρ⁽ⁿ⁾` with `wₙ = Tr ρ P₁⁽ⁿ⁾` and `ρ⁽ⁿ⁾ = P₁⁽ⁿ⁾ ρ / wₙ`.
/// Terms with `wₙ ≤ tol` are omitted.
pub fn strong_twin_mixture(s: &BipartiteState, p: &TwinPair, tol: f64) -> Result<StrongMixture> {
    let strength = classify_twin(s, p, tol)?;
    if strength.kind != StrengthKind::Strong {
        let commutator = strength.commutators.iter().cloned().fold(0.0, f64::max);
        return Err(Error::NotStrong { commutator });
    }
    let pairing = spectral_pairing(s, p, tol)?;
    let (d1, d2) = (s.d1(), s.d2());
    let rho = s.matrix();
    let mut terms = Vec::new();
    for (value, (p1, p2)) in pairing.values.iter().zip(pairing.proj_pairs) {
        let projected = lift_first(p1.matrix(), d2) * rho;
        let weight = projected.trace().re;
        if weight <= tol {
            continue;
        }
        let state = BipartiteState::with_tolerance(projected / c64(weight, 0.0), d1, d2, 1e-8)?;
        terms.push(MixtureTerm { value: *value, weight, state, p1, p2 });
    }

    let reduced: Vec<(HermOp, HermOp)> = terms.iter().map(|t| (t.state.rho1(), t.state.rho2())).collect();
    let mut max_biorthogonality_defect = 0.0_f64;
    for (n, (a1, a2)) in reduced.iter().enumerate() {
        for (m, (b1, b2)) in reduced.iter().enumerate() {
            if n != m {
                max_biorthogonality_defect = max_biorthogonality_defect
                    .max(op_norm(&(a1.matrix() * b1.matrix())))
                    .max(op_norm(&(a2.matrix() * b2.matrix())));
            }
        }
    }
    let mut max_support_defect = 0.0_f64;
    for (t, (r1, r2)) in terms.iter().zip(&reduced) {
        max_support_defect = max_support_defect
            .max(max_abs(&(t.p1.matrix() * r1.matrix() - r1.matrix())))
            .max(max_abs(&(t.p2.matrix() * r2.matrix() - r2.matrix())));
    }
    Ok(StrongMixture { terms, max_biorthogonality_defect, max_support_defect })
}

/// Schmidt decomposition of a pure bipartite vector.
#[derive(Debug, Clone)]
pub struct PureSchmidt {
    /// `rᵢ^{1/2}`, descending.
    pub coeffs: Vec<f64>,
    /// `|i⟩₁` as columns.
    pub vectors1: CMatrix,
    /// `|i⟩₂ = U_a |i⟩₁` as columns.
    pub vectors2: CMatrix,
    /// Correlation operator, `U_a x = M conj(x)`, mapping the range of `ρ₁`
    /// onto the range of `ρ₂` and vanishing on the null space of `ρ₁`.
    pub u_a: AntilinearMap,
}

impl PureSchmidt {
    pub fn reconstruct(&self) -> CVector {
        let d1 = self.vectors1.nrows();
        let d2 = self.vectors2.nrows();
        let mut phi = CVector::zeros(d1 * d2);
        for (k, &c) in self.coeffs.iter().enumerate() {
            let a = self.vectors1.column(k).into_owned();
            let b = self.vectors2.column(k).into_owned();
            phi += a.kronecker(&b) * c64(c, 0.0);
        }
        phi
    }
}

/// Schmidt decomposition of `phi` (normalized first) via the SVD of its
/// `d1×d2` coefficient matrix.
pub fn pure_schmidt(phi: &CVector, d1: usize, d2: usize, tol: f64) -> Result<PureSchmidt> {
    if phi.len() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!("vector of length {} on {d1}x{d2}", phi.len())));
    }
    let norm = phi.norm();
    if norm == 0.0 {
        return Err(Error::InvalidState { reason: "zero vector".into(), eigenvalues: None });
    }
    let m = CMatrix::from_fn(d1, d2, |i, j| phi[i * d2 + j] / c64(norm, 0.0));
    let sv = svd(&m)?;
    let smax = sv.singular_values[0];
    let keep = sv.singular_values.iter().take_while(|&&s| s > tol * smax).count();
    let vectors1 = sv.u.columns(0, keep).into_owned();
    let vectors2 = sv.v.columns(0, keep).map(|z| z.conj());
    let u_a = AntilinearMap::new(&vectors2 * vectors1.transpose());
    Ok(PureSchmidt { coeffs: sv.singular_values[..keep].to_vec(), vectors1, vectors2, u_a })
}

/// Twin of `a1` for the pure state `phi`: `A₂ = U_a A₁ U_a⁻¹ Q₂` with the
/// null-space part set to zero. Requires `[A₁, ρ₁] = 0`.
pub fn pure_twin_partner(phi: &CVector, d1: usize, d2: usize, a1: &HermOp, tol: f64) -> Result<HermOp> {
    if a1.dim() != d1 {
        return Err(Error::DimensionMismatch(format!("A1 has dim {}, factor 1 has {d1}", a1.dim())));
    }
    let ps = pure_schmidt(phi, d1, d2, RANGE_TOL)?;
    let rho1: CMatrix = (0..ps.coeffs.len()).fold(CMatrix::zeros(d1, d1), |acc, k| {
        let v = ps.vectors1.column(k);
        acc + v * v.adjoint() * c64(ps.coeffs[k] * ps.coeffs[k], 0.0)
    });
    let norm = hs_norm(&commutator(a1.matrix(), &rho1));
    if norm > tol * op_norm(a1.matrix()).max(1.0) {
        return Err(Error::CommutationViolated { norm });
    }
    // U_a A U_a⁻¹ is the linear map K conj(A) K† for U_a = K∘conj.
    let k = ps.u_a.matrix();
    let a2 = k * a1.matrix().map(|z| z.conj()) * k.adjoint();
    Ok(HermOp::hermitize(&a2))
}

/// One term `w · ρ₁ ⊗ ρ₂` of an explicit separable decomposition.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub weight: f64,
    pub rho1: HermOp,
    pub rho2: HermOp,
}

/// Validated separable decomposition `ρ = Σ w_k ρ₁⁽ᵏ⁾ ⊗ ρ₂⁽ᵏ⁾`.
#[derive(Debug, Clone)]
pub struct SeparableDecomp {
    terms: Vec<SeparableTerm>,
}

impl SeparableDecomp {
    /// Checks `w_k ∈ (0, 1]`, `Σ w_k = 1` within `1e-10`, and that every factor
    /// is a unit-trace positive operator within `tol`.
    pub fn new(terms: Vec<SeparableTerm>, tol: f64) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidDecomposition("no terms".into()))?;
        let (d1, d2) = (first.rho1.dim(), first.rho2.dim());
        let mut total = 0.0;
        for (k, t) in terms.iter().enumerate() {
            if !(t.weight > 0.0 && t.weight <= 1.0 + 1e-10) {
                return Err(Error::InvalidDecomposition(format!("weight {k} is {}", t.weight)));
            }
            total += t.weight;
            if t.rho1.dim() != d1 || t.rho2.dim() != d2 {
                return Err(Error::InvalidDecomposition(format!("term {k} has mismatched dimensions")));
            }
            for (side, r) in [(1, &t.rho1), (2, &t.rho2)] {
                let eig = eigh_matrix(r.matrix(), 0.0)?;
                let min = eig.values.last().copied().unwrap_or(0.0);
                if min < -tol || (r.trace() - 1.0).abs() > tol {
                    return Err(Error::InvalidDecomposition(format!(
                        "factor {side} of term {k} is not a state (min eigenvalue {min:.3e}, trace {})",
                        r.trace()
                    )));
                }
            }
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDecomposition(format!("weights sum to {total}")));
        }
        Ok(SeparableDecomp { terms })
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn d1(&self) -> usize {
        self.terms[0].rho1.dim()
    }

    pub fn d2(&self) -> usize {
        self.terms[0].rho2.dim()
    }

    /// The mixed state described by the decomposition.
    pub fn state(&self) -> Result<BipartiteState> {
        let (d1, d2) = (self.d1(), self.d2());
        let m = self.terms.iter().fold(CMatrix::zeros(d1 * d2, d1 * d2), |acc, t| {
            acc + t.rho1.matrix().kronecker(t.rho2.matrix()) * c64(t.weight, 0.0)
        });
        BipartiteState::with_tolerance(m, d1, d2, 1e-8)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }
}

/// Candidate twin projectors of one group, checked on the whole mixture.
#[derive(Debug, Clone)]
pub struct GroupProjectors {
    pub p1: HermOp,
    pub p2: HermOp,
    pub residual: f64,
    /// `‖[P₁ ⊗ I, ρ]‖_HS`.
    pub commutator: f64,
}

#[derive(Debug, Clone)]
pub struct SeparableGroups {
    /// Connected components of the overlap graph, each sorted, ordered by
    /// smallest member.
    pub components: Vec<Vec<usize>>,
    pub projectors: Vec<GroupProjectors>,
    /// Nontrivial twin events exist iff there are at least two groups.
    pub nontrivial: bool,
}

/// Groups the terms of a separable decomposition into mutually biorthogonal
/// classes. Terms `k`, `k'` are linked when `‖ρᵢ⁽ᵏ⁾ ρᵢ⁽ᵏ'⁾‖ > tol` for
/// `i = 1` or `i = 2`.
pub fn biortho_groups(d: &SeparableDecomp, tol: f64) -> Result<SeparableGroups> {
    let terms = d.terms();
    let n = terms.len();
    let mut sets = DisjointSets::new(n);
    for k in 0..n {
        for l in (k + 1)..n {
            let o1 = op_norm(&(terms[k].rho1.matrix() * terms[l].rho1.matrix()));
            let o2 = op_norm(&(terms[k].rho2.matrix() * terms[l].rho2.matrix()));
            if o1 > tol || o2 > tol {
                sets.union(k, l);
            }
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..n {
        let root = sets.find(k);
        by_root.entry(root).or_default().push(k);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
    components.sort_by_key(|c| c[0]);

    let state = d.state()?;
    let (d1, d2) = (d.d1(), d.d2());
    let mut projectors = Vec::with_capacity(components.len());
    for comp in &components {
        let sum1 = comp.iter().fold(CMatrix::zeros(d1, d1), |acc, &k| {
            acc + terms[k].rho1.matrix() * c64(terms[k].weight, 0.0)
        });
        let sum2 = comp.iter().fold(CMatrix::zeros(d2, d2), |acc, &k| {
            acc + terms[k].rho2.matrix() * c64(terms[k].weight, 0.0)
        });
        let p1 = HermOp::hermitize(&range_projector(&HermOp::hermitize(&sum1), RANGE_TOL)?);
        let p2 = HermOp::hermitize(&range_projector(&HermOp::hermitize(&sum2), RANGE_TOL)?);
        let check = verify_twin(&state, &p1, &p2)?;
        let comm = hs_norm(&commutator(&lift_first(p1.matrix(), d2), state.matrix()));
        projectors.push(GroupProjectors { p1, p2, residual: check.residual, commutator: comm });
    }
    Ok(SeparableGroups { nontrivial: components.len() >= 2, components, projectors })
}

#[derive(Debug, Clone)]
pub struct TermwiseTwinCheck {
    /// True iff the pair is a twin for every term.
    pub all_twins: bool,
    /// First term for which the pair fails.
    pub counterexample: Option<usize>,
    pub term_residuals: Vec<f64>,
    /// Residual of the pair on the mixture itself.
    pub mixture_residual: f64,
}

/// Checks a pair term by term against a mixture `Σ w_k ρ⁽ᵏ⁾`, and on the
/// mixture. For genuine mixtures the two verdicts coincide.
pub fn lemma2_check(
    terms: &[BipartiteState],
    weights: &[f64],
    a1: &HermOp,
    a2: &HermOp,
    tol: f64,
) -> Result<TermwiseTwinCheck> {
    if terms.len() != weights.len() || terms.is_empty() {
        return Err(Error::InvalidDecomposition("terms and weights differ in length".into()));
    }
    let mut term_residuals = Vec::with_capacity(terms.len());
    for t in terms {
        term_residuals.push(verify_twin(t, a1, a2)?.residual);
    }
    let counterexample = term_residuals.iter().position(|&r| r > tol);
    let pairs: Vec<(f64, &BipartiteState)> = weights.iter().cloned().zip(terms.iter()).collect();
    let mixture = BipartiteState::mixture(&pairs)?;
    let mixture_residual = verify_twin(&mixture, a1, a2)?.residual;
    Ok(TermwiseTwinCheck {
        all_twins: counterexample.is_none(),
        counterexample,
        term_residuals,
        mixture_residual,
    })
}
