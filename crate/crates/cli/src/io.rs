//! JSON input files. Complex entries are `[re, im]` pairs; matrices are
//! nested row-major arrays.

use std::fs;
use std::path::{Path, PathBuf};

use hs_twins::linalg::c64;
use hs_twins::twins::{SeparableDecomp, SeparableTerm};
use hs_twins::{BipartiteState, CMatrix, HermOp};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub d1: usize,
    pub d2: usize,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpFile {
    pub matrix: JsonMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompTerm {
    pub w: f64,
    pub rho1: JsonMatrix,
    pub rho2: JsonMatrix,
}

/// A file that was read, with its digest for the report.
pub struct Loaded<T> {
    pub path: PathBuf,
    pub sha256: String,
    pub value: T,
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Loaded<T>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    let value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Loaded { path: path.to_path_buf(), sha256, value })
}

pub fn to_matrix(m: &JsonMatrix, what: &str) -> Result<CMatrix, CliError> {
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return Err(CliError::Input(format!("{what}: matrix must be square and nonempty")));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Input(format!("{what}: non-finite entry")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c64(m[i][j][0], m[i][j][1])))
}

pub fn from_matrix(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn load_state(path: &Path, tol: f64) -> Result<Loaded<BipartiteState>, CliError> {
    let f: Loaded<StateFile> = read(path)?;
    let m = to_matrix(&f.value.matrix, "state")?;
    let state = BipartiteState::with_tolerance(m, f.value.d1, f.value.d2, tol)?;
    Ok(Loaded { path: f.path, sha256: f.sha256, value: state })
}

pub fn load_op(path: &Path) -> Result<Loaded<HermOp>, CliError> {
    let f: Loaded<OpFile> = read(path)?;
    let op = HermOp::new(to_matrix(&f.value.matrix, "operator")?)?;
    Ok(Loaded { path: f.path, sha256: f.sha256, value: op })
}

pub fn load_decomp(path: &Path, tol: f64) -> Result<Loaded<SeparableDecomp>, CliError> {
    let f: Loaded<Vec<DecompTerm>> = read(path)?;
    let mut terms = Vec::with_capacity(f.value.len());
    for (k, t) in f.value.iter().enumerate() {
        terms.push(SeparableTerm {
            weight: t.w,
            rho1: HermOp::new(to_matrix(&t.rho1, &format!("term {k} rho1"))?)?,
            rho2: HermOp::new(to_matrix(&t.rho2, &format!("term {k} rho2"))?)?,
        });
    }
    let d = SeparableDecomp::new(terms, tol)?;
    Ok(Loaded { path: f.path, sha256: f.sha256, value: d })
}
