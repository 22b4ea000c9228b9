//! Entropic quantities in bits: von Neumann mutual information, classical
//! mutual information of local measurements, and the perfect correlations
//! produced by twin observables.

use crate::error::{Error, Result};
use crate::linalg::{eigh, eigh_matrix, lift_first, lift_second, BipartiteState, CMatrix, HermOp, RMatrix};
use crate::twins::TwinPair;

/// Negative eigenvalues down to this size are treated as round-off.
pub const CLIP_SLACK: f64 = 1e-10;

/// Trace tolerance used when entropies are taken of validated states.
const STATE_TRACE_TOL: f64 = 1e-8;

/// Eigenvalues of observables closer than this (relative) share a projector.
pub const DEGENERACY_TOL: f64 = 1e-9;

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a probability vector, `0·log 0 = 0`.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// `−Σ λ log₂ λ`, eigenvalues clipped to `[0, 1]`.
pub fn vn_entropy(h: &HermOp, tol: f64) -> Result<f64> {
    let trace = h.trace();
    if (trace - 1.0).abs() > tol {
        return Err(Error::InvalidState { reason: format!("trace {trace} differs from 1"), eigenvalues: None });
    }
    let eig = eigh(h, 0.0)?;
    if let Some(&min) = eig.values.last() {
        if min < -CLIP_SLACK.max(tol) {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {min:.3e}"),
                eigenvalues: Some(eig.values),
            });
        }
    }
    let clipped: Vec<f64> = eig.values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(shannon(&clipped))
}

/// `C(ρ) = S(ρ₁) + S(ρ₂) − S(ρ)`.
pub fn mutual_info_c(s: &BipartiteState) -> f64 {
    let ent = |h: &HermOp| vn_entropy(h, STATE_TRACE_TOL).expect("validated state");
    ent(&s.rho1()) + ent(&s.rho2()) - ent(s.herm())
}

/// `p(k, l) = Tr ρ (P⁽ᵏ⁾ ⊗ Q⁽ˡ⁾)` over the distinct eigenvalues of `a` and `b`.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    /// Distinct eigenvalues of `a`, descending.
    pub values_a: Vec<f64>,
    pub values_b: Vec<f64>,
    pub p: RMatrix,
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.p.sum()
    }
}

fn spectral_projectors(a: &HermOp, tol: f64) -> Result<(Vec<f64>, Vec<CMatrix>)> {
    let eig = eigh_matrix(a.matrix(), tol)?;
    let values = eig.blocks.iter().map(|b| eig.block_value(b)).collect();
    let projectors = eig.blocks.iter().map(|b| eig.block_projector(b)).collect();
    Ok((values, projectors))
}

/// Joint outcome distribution of `a` on the first factor and `b` on the
/// second. Eigenvalues within `tol` (relative) are merged; negative
/// round-off is clipped to zero.
pub fn joint_distribution(s: &BipartiteState, a: &HermOp, b: &HermOp, tol: f64) -> Result<JointDistribution> {
    let (d1, d2) = (s.d1(), s.d2());
    if a.dim() != d1 || b.dim() != d2 {
        return Err(Error::DimensionMismatch(format!(
            "observables of dims ({}, {}) on a {d1}x{d2} state",
            a.dim(),
            b.dim()
        )));
    }
    let (values_a, proj_a) = spectral_projectors(a, tol)?;
    let (values_b, proj_b) = spectral_projectors(b, tol)?;
    let rho = s.matrix();
    let lifted_b: Vec<CMatrix> = proj_b.iter().map(|q| lift_second(q, d1)).collect();
    let mut p = RMatrix::zeros(values_a.len(), values_b.len());
    for (k, pk) in proj_a.iter().enumerate() {
        let left = lift_first(pk, d2) * rho;
        for (l, ql) in lifted_b.iter().enumerate() {
            p[(k, l)] = (&left * ql).trace().re.max(0.0);
        }
    }
    let p_a = (0..p.nrows()).map(|k| p.row(k).sum()).collect();
    let p_b = (0..p.ncols()).map(|l| p.column(l).sum()).collect();
    Ok(JointDistribution { values_a, values_b, p, p_a, p_b })
}

/// `H(p_k) + H(p_l) − H(p(k, l))`.
pub fn classical_mutual_info(j: &JointDistribution) -> f64 {
    let joint: Vec<f64> = j.p.iter().copied().collect();
    shannon(&j.p_a) + shannon(&j.p_b) - shannon(&joint)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladCheck {
    /// Classical mutual information of this observable pair.
    pub h: f64,
    /// Quantum mutual information of the state.
    pub c: f64,
    /// `h ≤ c + 1e-9`. One pair only lower-bounds the supremum over all pairs.
    pub ok: bool,
}

pub fn lindblad_check(s: &BipartiteState, a: &HermOp, b: &HermOp) -> Result<LindbladCheck> {
    let h = classical_mutual_info(&joint_distribution(s, a, b, DEGENERACY_TOL)?);
    let c = mutual_info_c(s);
    Ok(LindbladCheck { h, c, ok: h <= c + 1e-9 })
}

#[derive(Debug, Clone)]
pub struct PerfectCorrelation {
    /// `(a_k, b_f(k))` for every outcome of `a` with nonzero probability.
    pub bijection: Vec<(f64, f64)>,
    /// Probabilities `p_k` of the matched outcomes.
    pub probabilities: Vec<f64>,
    /// `H(A:B)`.
    pub h: f64,
    pub h_a: f64,
    pub h_b: f64,
}

/// Reads off the bijection `f` with `p(k, l) = p_k δ_{l, f(k)}` and checks
/// `H(A:B) = H(p_k) = H(p_l)` within `tol`.
pub fn perfect_correlation(s: &BipartiteState, p: &TwinPair, tol: f64) -> Result<PerfectCorrelation> {
    let j = joint_distribution(s, &p.a1, &p.a2, DEGENERACY_TOL)?;
    let mut bijection = Vec::new();
    let mut probabilities = Vec::new();
    let mut used = vec![false; j.values_b.len()];
    for k in 0..j.values_a.len() {
        if j.p_a[k] <= tol {
            continue;
        }
        let row = j.p.row(k);
        let (l, &best) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty row");
        let leak = j.p_a[k] - best;
        if leak > tol {
            return Err(Error::NotPerfectlyCorrelated(format!(
                "outcome {} of A1 spreads over several outcomes of A2 (off-target mass {leak:.3e})",
                j.values_a[k]
            )));
        }
        if used[l] {
            return Err(Error::NotPerfectlyCorrelated(format!(
                "outcome {} of A2 is hit twice",
                j.values_b[l]
            )));
        }
        used[l] = true;
        bijection.push((j.values_a[k], j.values_b[l]));
        probabilities.push(j.p_a[k]);
    }
    let h = classical_mutual_info(&j);
    let (h_a, h_b) = (shannon(&j.p_a), shannon(&j.p_b));
    if (h - h_a).abs() > tol || (h - h_b).abs() > tol {
        return Err(Error::NotPerfectlyCorrelated(format!(
            "H(A:B) = {h}, H(A) = {h_a}, H(B) = {h_b}"
        )));
    }
    Ok(PerfectCorrelation { bijection, probabilities, h, h_a, h_b })
}
