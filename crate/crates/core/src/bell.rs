//! Two-qubit states with maximally disordered subsystems: Bell states, the
//! correlation tetrahedron, binary-mixture recognition and the explicit twin
//! families of Bell mixtures.
//!
//! Basis convention: `|+⟩ = (1, 0)`, `|−⟩ = (0, 1)`, composite index
//! `2·i₁ + i₂`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c64, max_abs, pauli, svd, svd_real, tensor, BipartiteState, CMatrix, CVector, HermOp, RMatrix};
use crate::schmidt::{SchmidtDecomp, SchmidtTerm};
use crate::twins::twin_space;

/// Tolerance on `|tᵢ| − 1` for edge and vertex recognition.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Slack on negative weights in tetrahedron membership.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellIndex {
    /// Singlet `(|+−⟩ − |−+⟩)/√2`.
    Psi0,
    /// `(|++⟩ − |−−⟩)/√2`.
    Psi1,
    /// `(|++⟩ + |−−⟩)/√2`.
    Psi2,
    /// `(|+−⟩ + |−+⟩)/√2`.
    Psi3,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [BellIndex::Psi0, BellIndex::Psi1, BellIndex::Psi2, BellIndex::Psi3];

    pub fn from_k(k: usize) -> Option<Self> {
        Self::ALL.get(k).copied()
    }

    pub fn k(self) -> usize {
        self as usize
    }

    /// Correlation vector of the pure Bell state. Also the sign table of its
    /// twins: `A₂ = αI + Σ tᵢ βᵢ σᵢ`.
    pub fn t_vector(self) -> [f64; 3] {
        match self {
            BellIndex::Psi0 => [-1.0, -1.0, -1.0],
            BellIndex::Psi1 => [-1.0, 1.0, 1.0],
            BellIndex::Psi2 => [1.0, -1.0, 1.0],
            BellIndex::Psi3 => [1.0, 1.0, -1.0],
        }
    }

    pub fn vector(self) -> CVector {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let entries = match self {
            BellIndex::Psi0 => [0.0, r, -r, 0.0],
            BellIndex::Psi1 => [r, 0.0, 0.0, -r],
            BellIndex::Psi2 => [r, 0.0, 0.0, r],
            BellIndex::Psi3 => [0.0, r, r, 0.0],
        };
        CVector::from_iterator(4, entries.iter().map(|&x| c64(x, 0.0)))
    }

    /// Position in the weight vector `(w₁, w₂, w₃, w₀)`.
    pub fn slot(self) -> usize {
        (self.k() + 3) % 4
    }
}

impl std::fmt::Display for BellIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T{}", self.k())
    }
}

/// Pauli axis `σ₁`, `σ₂`, `σ₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// 1, 2 or 3.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(i: usize) -> Option<Self> {
        i.checked_sub(1).and_then(|j| Self::ALL.get(j).copied())
    }

    pub fn pauli(self) -> CMatrix {
        pauli(self.index())
    }

    /// Non-singlet Bell state `ψᵢ` carrying the same label.
    pub fn bell(self) -> BellIndex {
        BellIndex::ALL[self.index()]
    }
}

pub fn bell_state(k: BellIndex) -> BipartiteState {
    BipartiteState::pure(&k.vector(), 2, 2).expect("Bell vectors are normalized")
}

/// `(w₀, w₁, w₂, w₃)` from `t`, returned in the order `(w₁, w₂, w₃, w₀)`,
/// together with tetrahedron membership.
pub fn t_to_weights(t: [f64; 3]) -> ([f64; 4], bool) {
    let [t1, t2, t3] = t;
    let w = [
        (1.0 - t1 + t2 + t3) / 4.0,
        (1.0 + t1 - t2 + t3) / 4.0,
        (1.0 + t1 + t2 - t3) / 4.0,
        (1.0 - t1 - t2 - t3) / 4.0,
    ];
    let inside = w.iter().all(|&x| x >= -MEMBERSHIP_SLACK);
    (w, inside)
}

/// Weights `(w₁, w₂, w₃, w₀)` to the correlation vector.
pub fn weights_to_t(w: [f64; 4]) -> [f64; 3] {
    let [w1, w2, w3, w0] = w;
    [-w1 + w2 + w3 - w0, w1 - w2 + w3 - w0, w1 + w2 - w3 - w0]
}

const WEIGHT_NAMES: [&str; 4] = ["w1", "w2", "w3", "w0"];

/// `(1/4)(I⊗I + Σ tᵢ σᵢ⊗σᵢ)` without any membership check.
pub fn t_matrix(t: [f64; 3]) -> CMatrix {
    let mut m = tensor(&pauli(0), &pauli(0));
    for (i, &ti) in t.iter().enumerate() {
        m += tensor(&pauli(i + 1), &pauli(i + 1)) * c64(ti, 0.0);
    }
    m * c64(0.25, 0.0)
}

/// The MDS state with correlation vector `t`.
pub fn state_from_t(t: [f64; 3]) -> Result<BipartiteState> {
    let (w, inside) = t_to_weights(t);
    if !inside {
        let (slot, value) = w
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &v)| (i, v))
            .expect("four weights");
        let mut eigenvalues = w.to_vec();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        return Err(Error::InvalidState {
            reason: format!("t lies outside the tetrahedron ({} = {value})", WEIGHT_NAMES[slot]),
            eigenvalues: Some(eigenvalues),
        });
    }
    BipartiteState::new(t_matrix(t), 2, 2)
}

/// A mixture of the four Bell states, stored both as weights and as `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellMixture {
    /// `(w₁, w₂, w₃, w₀)`.
    pub weights: [f64; 4],
    pub t: [f64; 3],
}

impl BellMixture {
    pub fn from_weights(w: [f64; 4]) -> Result<Self> {
        for (i, &x) in w.iter().enumerate() {
            if !x.is_finite() || !(-MEMBERSHIP_SLACK..=1.0 + MEMBERSHIP_SLACK).contains(&x) {
                return Err(Error::OutsideTetrahedron { name: WEIGHT_NAMES[i], value: x });
            }
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDecomposition(format!("Bell weights sum to {total}")));
        }
        Ok(BellMixture { weights: w, t: weights_to_t(w) })
    }

    pub fn from_t(t: [f64; 3]) -> Result<Self> {
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (w, inside) = t_to_weights(t);
        if !inside {
            let i = (0..4).min_by(|&a, &b| w[a].total_cmp(&w[b])).expect("four weights");
            return Err(Error::OutsideTetrahedron { name: WEIGHT_NAMES[i], value: w[i] });
        }
        Ok(BellMixture { weights: w, t })
    }

    pub fn weight(&self, k: BellIndex) -> f64 {
        self.weights[k.slot()]
    }

    pub fn state(&self) -> Result<BipartiteState> {
        BipartiteState::with_tolerance(t_matrix(self.t), 2, 2, 1e-10)
    }

    /// Number of weights above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.weights.iter().filter(|&&w| w > tol).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixtureKind {
    PureBell(BellIndex),
    /// Exactly one `tᵢ = +1`; mixture of the two non-singlet states other
    /// than `ψᵢ`.
    BinaryNonSinglet(Axis),
    /// Exactly one `tᵢ = −1`; mixture of `ψᵢ` and the singlet.
    BinarySinglet(Axis),
    HigherRank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureClass {
    pub kind: MixtureKind,
    pub t: [f64; 3],
    /// `||tᵢ| − 1|` for each axis; the classification compares these with
    /// the tolerance.
    pub deviations: [f64; 3],
    pub tol: f64,
    /// Reconstructed two-term mixture for the binary cases.
    pub binary: Option<[(f64, BellIndex); 2]>,
}

impl MixtureClass {
    /// Distance of the closest deviation to the tolerance, signed positive
    /// when the decision is robust by that much.
    pub fn margin(&self) -> f64 {
        self.deviations
            .iter()
            .map(|&d| (d - self.tol).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Recognizes vertices, edges and higher-rank points of the tetrahedron.
///
/// Two components at `|tᵢ| = 1` can only occur numerically close to a vertex
/// (exactly, two imply the third), so that case is reported as the pure Bell
/// state of largest weight.
pub fn classify_mixture(m: &BellMixture, tol: f64) -> MixtureClass {
    let t = m.t;
    let deviations = t.map(|x| (x.abs() - 1.0).abs());
    let ones: Vec<usize> = (0..3).filter(|&i| deviations[i] <= tol).collect();
    let (kind, binary) = match ones.len() {
        0 => (MixtureKind::HigherRank, None),
        1 => {
            let i = ones[0];
            let axis = Axis::ALL[i];
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            if t[i] > 0.0 {
                let terms = [
                    ((1.0 - t[j]) / 2.0, Axis::ALL[j].bell()),
                    ((1.0 - t[k]) / 2.0, Axis::ALL[k].bell()),
                ];
                (MixtureKind::BinaryNonSinglet(axis), Some(terms))
            } else {
                let terms = [((1.0 + t[j]) / 2.0, axis.bell()), ((1.0 - t[j]) / 2.0, BellIndex::Psi0)];
                (MixtureKind::BinarySinglet(axis), Some(terms))
            }
        }
        _ => {
            let k = BellIndex::ALL
                .iter()
                .copied()
                .max_by(|a, b| m.weight(*a).total_cmp(&m.weight(*b)))
                .expect("four states");
            (MixtureKind::PureBell(k), None)
        }
    };
    MixtureClass { kind, t, deviations, tol, binary }
}

/// `A₁ = αI + βσᵢ`, `A₂ = αI + sign·βσᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwinFamily {
    pub axis: Axis,
    pub sign: f64,
}

impl TwinFamily {
    pub fn pair(&self, alpha: f64, beta: f64) -> (HermOp, HermOp) {
        let id = pauli(0) * c64(alpha, 0.0);
        let s = self.axis.pauli();
        let a1 = &id + &s * c64(beta, 0.0);
        let a2 = &id + &s * c64(self.sign * beta, 0.0);
        (HermOp::hermitize(&a1), HermOp::hermitize(&a2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BellTwins {
    Family(TwinFamily),
    /// Pure Bell state: every `A₁` has a twin, see [`bell_twin_partner`].
    PureState(BellIndex),
    None,
}

pub fn theorem6_twins(c: &MixtureClass) -> BellTwins {
    match c.kind {
        MixtureKind::BinaryNonSinglet(axis) => BellTwins::Family(TwinFamily { axis, sign: 1.0 }),
        MixtureKind::BinarySinglet(axis) => BellTwins::Family(TwinFamily { axis, sign: -1.0 }),
        MixtureKind::PureBell(k) => BellTwins::PureState(k),
        MixtureKind::HigherRank => BellTwins::None,
    }
}

/// Twin of `A₁ = αI + Σ βᵢσᵢ` in the Bell state `ψₖ`.
pub fn bell_twin_partner(k: BellIndex, beta: [f64; 3], alpha: f64) -> HermOp {
    let s = k.t_vector();
    let m = (0..3).fold(pauli(0) * c64(alpha, 0.0), |acc, i| {
        acc + pauli(i + 1) * c64(s[i] * beta[i], 0.0)
    });
    HermOp::hermitize(&m)
}

/// Closed-form Hermitian Schmidt decomposition of `T(t)`: the identity term
/// with coefficient `(1+Σtᵢ²)^{-1/2}` and one term per nonzero `tᵢ` with
/// coefficient `|tᵢ|(1+Σtᵢ²)^{-1/2}` and factors `(σᵢ/√2, sg(tᵢ)σᵢ/√2)`.
pub fn hermitian_schmidt_t(m: &BellMixture) -> SchmidtDecomp {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let norm = (1.0 + m.t.iter().map(|x| x * x).sum::<f64>()).sqrt().recip();
    let mut terms = vec![SchmidtTerm {
        coeff: norm,
        op_a: pauli(0) * c64(r, 0.0),
        op_b: pauli(0) * c64(r, 0.0),
    }];
    for (i, &ti) in m.t.iter().enumerate() {
        if ti != 0.0 {
            terms.push(SchmidtTerm {
                coeff: ti.abs() * norm,
                op_a: pauli(i + 1) * c64(r, 0.0),
                op_b: pauli(i + 1) * c64(ti.signum() * r, 0.0),
            });
        }
    }
    terms.sort_by(|a, b| b.coeff.total_cmp(&a.coeff));
    SchmidtDecomp { d1: 2, d2: 2, terms, hermitian: true }
}

#[derive(Debug, Clone)]
pub struct MdsNormalForm {
    pub u1: CMatrix,
    pub u2: CMatrix,
    pub t: [f64; 3],
    /// `max |(U₁⊗U₂)ρ(U₁⊗U₂)† − T(t)|`.
    pub residual: f64,
}

/// `Cᵢⱼ = Tr ρ σᵢ⊗σⱼ`.
pub fn correlation_matrix(s: &BipartiteState) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::from_fn(|i, j| {
        (s.matrix() * tensor(&pauli(i + 1), &pauli(j + 1))).trace().re
    })
}

/// Unit quaternion `(w, x, y, z)` of a proper rotation.
fn quaternion(r: &nalgebra::Matrix3<f64>) -> [f64; 4] {
    let rot = nalgebra::Rotation3::from_matrix_unchecked(*r);
    let q = nalgebra::UnitQuaternion::from_rotation_matrix(&rot);
    [q.w, q.i, q.j, q.k]
}

/// `U` with `U σₐ U† = Σₖ R_ka σₖ`, phase fixed so the first nonzero entry is
/// positive real.
fn su2_lift(r: &nalgebra::Matrix3<f64>) -> CMatrix {
    let [w, x, y, z] = quaternion(r);
    let mut u = pauli(0) * c64(w, 0.0)
        - (pauli(1) * c64(x, 0.0) + pauli(2) * c64(y, 0.0) + pauli(3) * c64(z, 0.0)) * c64(0.0, 1.0);
    if let Some(p) = u.iter().find(|z| z.norm() > 1e-12).copied() {
        u *= p.conj() / p.norm();
    }
    u
}

/// Brings an MDS two-qubit state to the form `T(t)` by local unitaries.
pub fn mds_normal_form(s: &BipartiteState, tol: f64) -> Result<MdsNormalForm> {
    if s.d1() != 2 || s.d2() != 2 {
        return Err(Error::DimensionMismatch(format!("need a 2x2 state, got {}x{}", s.d1(), s.d2())));
    }
    let half = pauli(0) * c64(0.5, 0.0);
    let deviation = max_abs(&(s.rho1().matrix() - &half)).max(max_abs(&(s.rho2().matrix() - &half)));
    if deviation > tol {
        return Err(Error::NotMds { deviation });
    }
    let c = correlation_matrix(s);
    let dec = svd_real(&RMatrix::from_fn(3, 3, |i, j| c[(i, j)]))?;
    let mut u = nalgebra::Matrix3::from_fn(|i, j| dec.u[(i, j)]);
    let mut v = nalgebra::Matrix3::from_fn(|i, j| dec.v[(i, j)]);
    let mut t = [dec.singular_values[0], dec.singular_values[1], dec.singular_values[2]];
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        t[2] = -t[2];
    }
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
        t[2] = -t[2];
    }
    let u1 = su2_lift(&u.transpose());
    let u2 = su2_lift(&v.transpose());
    let w = tensor(&u1, &u2);
    let rotated = &w * s.matrix() * w.adjoint();
    let residual = max_abs(&(rotated - t_matrix(t)));
    if residual > 1e-8 {
        return Err(Error::NumericalFailure(format!("normal form residual {residual:.3e}")));
    }
    Ok(MdsNormalForm { u1, u2, t, residual })
}

/// Where a grid point sits in the tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    Vertex,
    Edge,
    Face,
    Interior,
}

impl Stratum {
    pub fn from_rank(rank: usize) -> Self {
        match rank {
            1 => Stratum::Vertex,
            2 => Stratum::Edge,
            3 => Stratum::Face,
            _ => Stratum::Interior,
        }
    }

    /// Twin-space dimension predicted for this stratum.
    pub fn expected_dim(self) -> usize {
        match self {
            Stratum::Vertex => 4,
            Stratum::Edge => 2,
            Stratum::Face | Stratum::Interior => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stratum::Vertex => "vertex",
            Stratum::Edge => "edge",
            Stratum::Face => "face",
            Stratum::Interior => "interior",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Integer barycentric coordinates summing to the grid size, in the
    /// weight order `(w₁, w₂, w₃, w₀)`.
    pub counts: [usize; 4],
    pub mixture: BellMixture,
    pub stratum: Stratum,
    pub dim: usize,
    pub smallest_kept: Option<f64>,
    pub largest_dropped: Option<f64>,
    pub gap: f64,
}

impl SweepPoint {
    pub fn matches(&self) -> bool {
        self.dim == self.stratum.expected_dim()
    }
}

/// All integer points `(a, b, c, d)` with `a + b + c + d = n`, in
/// lexicographic order.
pub fn grid_counts(n: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=(n - a) {
            for c in 0..=(n - a - b) {
                out.push([a, b, c, n - a - b - c]);
            }
        }
    }
    out
}

/// Twin-space dimension over the lattice `w = counts / n` of the tetrahedron.
/// Points are evaluated in parallel and returned in grid order.
pub fn sweep(n: usize, tol: f64) -> Result<Vec<SweepPoint>> {
    if n == 0 {
        return Err(Error::DimensionMismatch("grid size must be positive".into()));
    }
    grid_counts(n)
        .into_par_iter()
        .map(|counts| {
            let w = counts.map(|c| c as f64 / n as f64);
            let mixture = BellMixture::from_weights(w)?;
            let rank = counts.iter().filter(|&&c| c > 0).count();
            let basis = twin_space(&mixture.state()?, tol)?;
            Ok(SweepPoint {
                counts,
                mixture,
                stratum: Stratum::from_rank(rank),
                dim: basis.dim,
                smallest_kept: basis.kernel.smallest_kept,
                largest_dropped: basis.kernel.largest_dropped,
                gap: basis.kernel.gap,
            })
        })
        .collect()
}

/// Largest singular value of `T(t)` minus the largest weight; zero for
/// genuine Bell mixtures since `T` is diagonal in the Bell basis.
pub fn spectrum_defect(m: &BellMixture) -> Result<f64> {
    let sv = svd(&t_matrix(m.t))?;
    let wmax = m.weights.iter().cloned().fold(f64::MIN, f64::max);
    Ok((sv.singular_values[0] - wmax).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_norm, op_norm};
    use crate::random;
    use crate::schmidt::hermitian_osd;
    use crate::twins::{classify_twin, verify_twin, StrengthKind, TWIN_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t_of(s: &BipartiteState) -> [f64; 3] {
        let c = correlation_matrix(s);
        [c[(0, 0)], c[(1, 1)], c[(2, 2)]]
    }

    #[test]
    fn bell_t_vectors() {
        for k in BellIndex::ALL {
            let s = bell_state(k);
            let t = t_of(&s);
            for i in 0..3 {
                assert!((t[i] - k.t_vector()[i]).abs() < 1e-14, "{k}: {t:?}");
            }
            let c = correlation_matrix(&s);
            assert!((c - nalgebra::Matrix3::from_diagonal(&c.diagonal())).abs().max() < 1e-14);
        }
    }

    #[test]
    fn bell_states_are_orthonormal() {
        for a in BellIndex::ALL {
            for b in BellIndex::ALL {
                let ip = a.vector().dotc(&b.vector());
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - c64(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn state_from_t_examples() {
        let s = state_from_t([0.0; 3]).unwrap();
        assert!(max_abs(&(s.matrix() - pauli(0).kronecker(&pauli(0)) * c64(0.25, 0.0))) < 1e-15);
        let s = state_from_t([-1.0; 3]).unwrap();
        assert!(max_abs(&(s.matrix() - bell_state(BellIndex::Psi0).matrix())) < 1e-15);
        for bad in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
            assert!(matches!(state_from_t(bad), Err(Error::InvalidState { .. })), "{bad:?}");
        }
    }

    #[test]
    fn weight_maps() {
        let t = weights_to_t([0.0, 0.3, 0.7, 0.0]);
        assert!((t[0] - 1.0).abs() < 1e-15 && (t[1] - 0.4).abs() < 1e-15 && (t[2] + 0.4).abs() < 1e-15);
        assert!(weights_to_t([0.25; 4]).iter().all(|x| x.abs() < 1e-15));
        let w3 = 0.35;
        let t = weights_to_t([0.0, 0.0, w3, 1.0 - w3]);
        assert!((t[0] - t[1]).abs() < 1e-15);
        assert!((t[2] + 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = random::simplex(4, &mut rng);
            let w = [p[0], p[1], p[2], p[3]];
            let (back, inside) = t_to_weights(weights_to_t(w));
            assert!(inside);
            for i in 0..4 {
                assert!((back[i] - w[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixture_state_matches_weighted_bell_projectors() {
        let m = BellMixture::from_weights([0.1, 0.2, 0.3, 0.4]).unwrap();
        let want = BellIndex::ALL.iter().fold(CMatrix::zeros(4, 4), |acc, &k| {
            acc + bell_state(k).matrix() * c64(m.weight(k), 0.0)
        });
        assert!(max_abs(&(m.state().unwrap().matrix() - want)) < 1e-15);
        assert!(spectrum_defect(&m).unwrap() < 1e-12);
    }

    #[test]
    fn from_t_reports_violated_weight() {
        match BellMixture::from_t([1.0, 1.0, 1.0]) {
            Err(Error::OutsideTetrahedron { name, value }) => {
                assert_eq!(name, "w0");
                assert!((value + 0.5).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify_mixture(&BellMixture::from_t([1.0, 0.4, -0.4]).unwrap(), CLASSIFY_TOL);
        assert_eq!(c.kind, MixtureKind::BinaryNonSinglet(Axis::X));
        let [(wa, ka), (wb, kb)] = c.binary.unwrap();
        assert_eq!((ka, kb), (BellIndex::Psi2, BellIndex::Psi3));
        assert!((wa - 0.3).abs() < 1e-15 && (wb - 0.7).abs() < 1e-15);

        let c = classify_mixture(&BellMixture::from_t([0.2, 0.2, -1.0]).unwrap(), CLASSIFY_TOL);
        assert_eq!(c.kind, MixtureKind::BinarySinglet(Axis::Z));
        let [(wa, ka), (wb, kb)] = c.binary.unwrap();
        assert_eq!((ka, kb), (BellIndex::Psi3, BellIndex::Psi0));
        assert!((wa - 0.6).abs() < 1e-15 && (wb - 0.4).abs() < 1e-15);

        let c = classify_mixture(&BellMixture::from_t([0.5, 0.1, 0.1]).unwrap(), CLASSIFY_TOL);
        assert_eq!(c.kind, MixtureKind::HigherRank);
        assert!(c.binary.is_none());

        for k in BellIndex::ALL {
            let c = classify_mixture(&BellMixture::from_t(k.t_vector()).unwrap(), CLASSIFY_TOL);
            assert_eq!(c.kind, MixtureKind::PureBell(k));
        }
    }

    #[test]
    fn classification_reconstructs_binary_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for a in BellIndex::ALL {
            for b in BellIndex::ALL {
                if a >= b {
                    continue;
                }
                let w: f64 = rand::Rng::gen_range(&mut rng, 0.05..0.95);
                let mut weights = [0.0; 4];
                weights[a.slot()] = w;
                weights[b.slot()] = 1.0 - w;
                let m = BellMixture::from_weights(weights).unwrap();
                let c = classify_mixture(&m, CLASSIFY_TOL);
                let terms = c.binary.expect("binary");
                let mut got = [0.0; 4];
                for (x, k) in terms {
                    got[k.slot()] += x;
                }
                for i in 0..4 {
                    assert!((got[i] - weights[i]).abs() < 1e-14, "{a} {b}: {got:?} vs {weights:?}");
                }
            }
        }
    }

    #[test]
    fn binary_families_are_twins() {
        for t in [[1.0, 0.4, -0.4], [0.2, 0.2, -1.0], [-0.3, 1.0, 0.3], [-1.0, 0.1, 0.1]] {
            let m = BellMixture::from_t(t).unwrap();
            let s = m.state().unwrap();
            let BellTwins::Family(f) = theorem6_twins(&classify_mixture(&m, CLASSIFY_TOL)) else {
                panic!("binary mixture {t:?}");
            };
            let (a1, a2) = f.pair(0.7, -1.3);
            assert!(verify_twin(&s, &a1, &a2).unwrap().residual < 1e-10);
        }
        let m = BellMixture::from_t([0.5, 0.1, 0.1]).unwrap();
        assert_eq!(theorem6_twins(&classify_mixture(&m, CLASSIFY_TOL)), BellTwins::None);
    }

    #[test]
    fn binary_twins_strong_exactly_at_equal_weights() {
        let m = BellMixture::from_weights([0.0, 0.5, 0.5, 0.0]).unwrap();
        let s = m.state().unwrap();
        let BellTwins::Family(f) = theorem6_twins(&classify_mixture(&m, CLASSIFY_TOL)) else { panic!() };
        let (a1, a2) = f.pair(0.0, 1.0);
        let p = verify_twin(&s, &a1, &a2).unwrap();
        assert_eq!(classify_twin(&s, &p, TWIN_TOL).unwrap().kind, StrengthKind::Strong);

        let m = BellMixture::from_weights([0.0, 0.2, 0.8, 0.0]).unwrap();
        let s = m.state().unwrap();
        let p = verify_twin(&s, &a1, &a2).unwrap();
        assert_eq!(classify_twin(&s, &p, TWIN_TOL).unwrap().kind, StrengthKind::Weak);
    }

    #[test]
    fn bell_partner_examples() {
        let a2 = bell_twin_partner(BellIndex::Psi0, [0.0, 0.0, 1.0], 0.0);
        assert!(max_abs(&(a2.matrix() + pauli(3))) < 1e-15);
        let a2 = bell_twin_partner(BellIndex::Psi3, [1.0, 0.0, 0.0], 0.0);
        assert!(max_abs(&(a2.matrix() - pauli(1))) < 1e-15);
        for k in BellIndex::ALL {
            let a2 = bell_twin_partner(k, [0.0; 3], 2.5);
            assert!(max_abs(&(a2.matrix() - pauli(0) * c64(2.5, 0.0))) < 1e-15);
        }
    }

    #[test]
    fn bell_partner_is_a_twin() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in BellIndex::ALL {
            let s = bell_state(k);
            for _ in 0..5 {
                let h = random::hermitian(2, &mut rng);
                let alpha = 0.5 * h.matrix().trace().re;
                let beta = [1, 2, 3].map(|i| 0.5 * (h.matrix() * pauli(i)).trace().re);
                let a2 = bell_twin_partner(k, beta, alpha);
                assert!(verify_twin(&s, &h, &a2).unwrap().residual < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_schmidt_examples() {
        let d = hermitian_schmidt_t(&BellMixture::from_t([-1.0; 3]).unwrap());
        assert_eq!(d.len(), 4);
        assert!(d.coefficients().iter().all(|c| (c - 0.5).abs() < 1e-15));
        let d = hermitian_schmidt_t(&BellMixture::from_t([0.0; 3]).unwrap());
        assert_eq!(d.len(), 1);
        assert!((d.terms[0].coeff - 1.0).abs() < 1e-15);
        let d = hermitian_schmidt_t(&BellMixture::from_t([1.0, 0.4, -0.4]).unwrap());
        let n = 2.32_f64.sqrt().recip();
        let want = [n, n, 0.4 * n, 0.4 * n];
        for (c, w) in d.coefficients().iter().zip(want) {
            assert!((c - w).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_schmidt_reconstructs_and_matches_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let p = random::simplex(4, &mut rng);
            let m = BellMixture::from_weights([p[0], p[1], p[2], p[3]]).unwrap();
            let s = m.state().unwrap();
            let d = hermitian_schmidt_t(&m);
            assert!(d.residual(s.matrix()) < 1e-14);
            assert!(d.orthonormality_defect(crate::Factor::First) < 1e-14);
            let g = hermitian_osd(&s, 1e-10).unwrap();
            let (a, b) = (d.coefficients(), g.coefficients());
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generic_osd_reproduces_closed_form_factors() {
        // nondegenerate |t| so the gauge is fixed by the sign convention alone
        let m = BellMixture::from_t([0.3, -0.2, 0.1]).unwrap();
        let d = hermitian_schmidt_t(&m);
        let g = hermitian_osd(&m.state().unwrap(), 1e-10).unwrap();
        for (x, y) in d.terms.iter().zip(&g.terms) {
            assert!(max_abs(&(&x.op_a - &y.op_a)) < 1e-12);
            assert!(max_abs(&(&x.op_b - &y.op_b)) < 1e-12);
        }
    }

    #[test]
    fn normal_form_of_diagonal_state() {
        let m = BellMixture::from_t([0.3, -0.2, 0.1]).unwrap();
        let nf = mds_normal_form(&m.state().unwrap(), 1e-9).unwrap();
        assert!(nf.residual < 1e-10);
        let mut got: Vec<f64> = nf.t.iter().map(|x| x.abs()).collect();
        got.sort_by(|a, b| b.total_cmp(a));
        assert!((got[0] - 0.3).abs() < 1e-12 && (got[1] - 0.2).abs() < 1e-12 && (got[2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn normal_form_round_trip_with_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = random::simplex(4, &mut rng);
            let m = BellMixture::from_weights([p[0], p[1], p[2], p[3]]).unwrap();
            let v1 = random::unitary(2, &mut rng);
            let v2 = random::unitary(2, &mut rng);
            let s = m.state().unwrap().conjugate_local(&v1, &v2).unwrap();
            let nf = mds_normal_form(&s, 1e-9).unwrap();
            assert!(nf.residual < 1e-10);
            let mut got: Vec<f64> = nf.t.iter().map(|x| x.abs()).collect();
            let mut want: Vec<f64> = m.t.iter().map(|x| x.abs()).collect();
            got.sort_by(|a, b| b.total_cmp(a));
            want.sort_by(|a, b| b.total_cmp(a));
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-10);
            }
            for u in [&nf.u1, &nf.u2] {
                assert!(op_norm(&(u.adjoint() * u - pauli(0))) < 1e-12);
                let first = u.iter().find(|z| z.norm() > 1e-12).unwrap();
                assert!(first.im.abs() < 1e-14 && first.re > 0.0);
            }
        }
    }

    #[test]
    fn normal_form_of_rotated_singlet() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v1 = random::unitary(2, &mut rng);
        let v2 = random::unitary(2, &mut rng);
        let s = bell_state(BellIndex::Psi0).conjugate_local(&v1, &v2).unwrap();
        let nf = mds_normal_form(&s, 1e-9).unwrap();
        // any proper-rotation normal form of the singlet has t1 t2 t3 = −1, |tᵢ| = 1
        assert!(nf.t.iter().all(|x| (x.abs() - 1.0).abs() < 1e-10));
        assert!((nf.t.iter().product::<f64>() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn normal_form_rejects_non_mds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random::state(2, 2, &mut rng);
        assert!(matches!(mds_normal_form(&s, 1e-9), Err(Error::NotMds { .. })));
    }

    #[test]
    fn grid_sizes() {
        let g = grid_counts(9);
        assert_eq!(g.len(), 220);
        let mut by_rank = [0usize; 5];
        for c in &g {
            by_rank[c.iter().filter(|&&x| x > 0).count()] += 1;
        }
        assert_eq!(by_rank, [0, 4, 48, 112, 56]);
    }

    #[test]
    fn small_sweep_matches_prediction() {
        let pts = sweep(3, 1e-9).unwrap();
        assert_eq!(pts.len(), 20);
        for p in &pts {
            assert!(p.matches(), "{:?} dim {}", p.counts, p.dim);
            assert!(p.gap >= 1e6);
        }
    }

    #[test]
    fn twins_covariant_under_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = BellMixture::from_t([1.0, 0.4, -0.4]).unwrap();
        let s = m.state().unwrap();
        let (a1, a2) = TwinFamily { axis: Axis::X, sign: 1.0 }.pair(0.2, 0.9);
        let u1 = random::unitary(2, &mut rng);
        let u2 = random::unitary(2, &mut rng);
        let s2 = s.conjugate_local(&u1, &u2).unwrap();
        let b1 = HermOp::hermitize(&(&u1 * a1.matrix() * u1.adjoint()));
        let b2 = HermOp::hermitize(&(&u2 * a2.matrix() * u2.adjoint()));
        assert!(verify_twin(&s2, &b1, &b2).unwrap().residual < 1e-9);
        assert!(hs_norm(b1.matrix()) > 0.0);
    }
}
