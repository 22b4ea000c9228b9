//! Random matrices and states for sweeps and property checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c64, BipartiteState, CMatrix, CVector, HermOp, RMatrix};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c64(normal(rng), normal(rng)))
}

pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermOp {
    HermOp::hermitize(&ginibre(n, n, rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed real orthogonal matrix.
pub fn orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RMatrix {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| normal(rng));
    let (mut q, r) = g.qr().unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Unit vector drawn uniformly from the sphere in `C^n`.
pub fn pure_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(n, |_, _| c64(normal(rng), normal(rng)));
    let norm = v.norm();
    v / c64(norm, 0.0)
}

/// Full-rank random state `G G† / Tr(G G†)` on `C^d1 ⊗ C^d2`.
pub fn state<R: Rng + ?Sized>(d1: usize, d2: usize, rng: &mut R) -> BipartiteState {
    state_of_rank(d1, d2, d1 * d2, rng)
}

/// Random state whose rank is at most `rank`.
pub fn state_of_rank<R: Rng + ?Sized>(d1: usize, d2: usize, rank: usize, rng: &mut R) -> BipartiteState {
    let g = ginibre(d1 * d2, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    BipartiteState::new(m / tr, d1, d2).expect("Wishart matrix is a state")
}

/// Random single-factor density matrix of full rank.
pub fn density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

/// Point drawn uniformly from the probability simplex with `n` vertices.
pub fn simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
