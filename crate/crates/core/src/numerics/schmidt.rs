//! Schmidt decomposition for the fixed 2 x 2 bipartition of a two-spin state.
//!
//! Amplitudes are ordered `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`; subsystem I is the first
//! (slow) index. The weights are the eigenvalues of the reduced density
//! matrix of subsystem I, and each partner vector is recovered by
//! contracting the state with the subsystem-I vector.

use num_complex::Complex64;

use super::linalg::{jacobi_eigen, StateVector};
use crate::error::{Error, Result};

/// Branches with weight below this are treated as absent.
pub const BRANCH_DROP_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtBranch {
    pub weight: f64,
    pub u: StateVector,
    pub v: StateVector,
}

/// Branches ordered by descending weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    pub branches: Vec<SchmidtBranch>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.branches.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    /// `Σ_j √p_j u_j ⊗ v_j` as raw amplitudes.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); 4];
        for b in &self.branches {
            let w = b.weight.sqrt();
            for (a, ua) in b.u.amplitudes().iter().enumerate() {
                for (c, vc) in b.v.amplitudes().iter().enumerate() {
                    out[2 * a + c] += ua * vc * w;
                }
            }
        }
        out
    }
}

fn coefficient_matrix(psi: &StateVector) -> [[Complex64; 2]; 2] {
    let a = psi.amplitudes();
    [[a[0], a[1]], [a[2], a[3]]]
}

pub fn schmidt_decompose(psi: &StateVector) -> Result<SchmidtDecomposition> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: psi.dim(),
        });
    }
    let m = coefficient_matrix(psi);
    // rho_I = M M†
    let mut rho = [Complex64::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            rho[2 * a + b] = (0..2).map(|c| m[a][c] * m[b][c].conj()).sum();
        }
    }
    let (values, vectors) = jacobi_eigen(2, &rho);

    let mut branches = Vec::with_capacity(2);
    for (p, u) in values.into_iter().zip(vectors).rev() {
        if p < BRANCH_DROP_THRESHOLD {
            continue;
        }
        let u = StateVector::new(u)?;
        let inv = 1.0 / p.sqrt();
        let v: Vec<Complex64> = (0..2)
            .map(|c| {
                (0..2)
                    .map(|a| u.amplitudes()[a].conj() * m[a][c])
                    .sum::<Complex64>()
                    * inv
            })
            .collect();
        branches.push(SchmidtBranch {
            weight: p,
            u,
            v: StateVector::new(v)?,
        });
    }
    let total: f64 = branches.iter().map(|b| b.weight).sum();
    for b in &mut branches {
        b.weight /= total;
    }
    Ok(SchmidtDecomposition { branches })
}

/// Exchanges the roles of subsystems I and II.
pub fn swap_subsystems(psi: &StateVector) -> StateVector {
    let a = psi.amplitudes();
    StateVector::from_normalized(vec![a[0], a[2], a[1], a[3]])
        .expect("permutation preserves the norm")
}
