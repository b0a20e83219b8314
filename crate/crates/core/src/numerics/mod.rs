//! Dense complex kernel: Hermitian eigensystems, Schmidt decomposition and
//! circle arithmetic for phases.

mod circle;
mod linalg;
mod schmidt;

pub use circle::{circle_distance, principal_arg, wrap_angle, AngleSum};
pub(crate) use linalg::jacobi_eigen;
pub use linalg::{hermitian_eigensystem, Eigensystem, HermitianOperator, StateVector, MAX_DIM};
pub use schmidt::{
    schmidt_decompose, swap_subsystems, SchmidtBranch, SchmidtDecomposition, BRANCH_DROP_THRESHOLD,
};
