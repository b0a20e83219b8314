//! Fixtures shared by the benchmarks.

use std::f64::consts::FRAC_PI_4;

use geophase::{CouplingForm, ModelParams};

/// The reference loop: θ = π/4, g = 0.5, xy coupling, `n_time` samples.
pub fn reference_params(n_time: usize) -> ModelParams {
    ModelParams::new(FRAC_PI_4, 0.5, CouplingForm::Xy, n_time).expect("valid reference parameters")
}
