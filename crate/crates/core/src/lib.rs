//! Berry phases of a driven two-spin loop and of its two subsystems.
//!
//! The crate follows the instantaneous eigenstates of a four-level
//! Hamiltonian around a closed loop, Schmidt-decomposes them into the two
//! spins, and evaluates two candidate subsystem phases:
//!
//! * the weighted sum of branch phases `Σ p_j γ_j`, which shifts by
//!   `2π Σ p_j m_j` under a gauge transformation with windings `m_j`, and
//! * the argument of the weighted sum of phase factors
//!   `arg(Σ p_j e^{iγ_j})`, which does not.
//!
//! The [`gauge`] module draws random smooth gauges and audits both
//! definitions; [`sweep`] runs parameter sweeps and writes CSV, JSON and SVG.

// `!(x <= limit)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gauge;
pub mod holonomy;
pub mod model;
pub mod numerics;
pub mod output;
pub mod subsystem;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use gauge::{
    apply_gauge, gauge_audit, random_gauge, AuditReport, AuditSettings, GaugeFunction,
};
pub use holonomy::{
    berry_phase_extrapolated, berry_phase_mod2pi, make_cyclic, track_eigenpaths,
    track_eigenpaths_with, unwrapped_phase, CyclicPath, EigenPath, Estimator, RayPath, SampledLoop,
    TrackingOptions,
};
pub use model::{covariance_check, field_direction, hamiltonian, CouplingForm, ModelParams};
pub use numerics::{circle_distance, principal_arg, wrap_angle, StateVector};
pub use output::{emit_audit_json, emit_csv, emit_json, emit_svg};
pub use subsystem::{
    branch_phases, naive_mixed_phase, proper_mixed_phase, schmidt_paths, subsystem_report,
    SchmidtPath, SubsystemPhases,
};
pub use sweep::{run_sweep, PhaseRow, PhaseTable, SweepConfig};

/// Version string recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
