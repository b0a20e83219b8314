//! The driven two-spin loop.
//!
//! Spin I sits in a unit field whose direction sweeps a cone of half-angle
//! `theta` around z once per loop; spin II only feels spin I through the
//! coupling term:
//!
//! ```text
//! H(s) = n(s)·σ ⊗ 1 + g C,   n(s) = (sinθ cos2πs, sinθ sin2πs, cosθ)
//! ```
//!
//! For the Heisenberg and XY couplings the loop is generated by a joint
//! z-rotation of both spins, `H(s) = U(s) H(0) U(s)†`, so the spectrum and
//! the Schmidt weights of every eigenstate are constant along the loop.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::HermitianOperator;

/// Smallest accepted number of loop samples.
pub const MIN_TIME_SAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// `σx⊗σx + σy⊗σy + σz⊗σz`
    Heisenberg,
    /// `σx⊗σx + σy⊗σy`
    #[default]
    Xy,
    /// `σz⊗σz`; eigenstates stay product states, useful as a control.
    IsingZz,
}

impl CouplingForm {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingForm::Heisenberg => "heisenberg",
            CouplingForm::Xy => "xy",
            CouplingForm::IsingZz => "ising_zz",
        }
    }

    fn operator(self) -> HermitianOperator {
        let (x, y, z) = (
            HermitianOperator::pauli_x(),
            HermitianOperator::pauli_y(),
            HermitianOperator::pauli_z(),
        );
        let xx = x.kron(&x).expect("4x4");
        let yy = y.kron(&y).expect("4x4");
        let zz = z.kron(&z).expect("4x4");
        match self {
            CouplingForm::Heisenberg => xx
                .combine(1.0, &yy, 1.0)
                .and_then(|c| c.combine(1.0, &zz, 1.0))
                .expect("sum of Hermitian terms"),
            CouplingForm::Xy => xx.combine(1.0, &yy, 1.0).expect("sum of Hermitian terms"),
            CouplingForm::IsingZz => zz,
        }
    }
}

impl fmt::Display for CouplingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heisenberg" => Ok(CouplingForm::Heisenberg),
            "xy" => Ok(CouplingForm::Xy),
            "ising_zz" | "ising" | "zz" => Ok(CouplingForm::IsingZz),
            other => Err(Error::InvalidParameter {
                name: "coupling_form",
                reason: format!("unknown coupling `{other}` (expected heisenberg, xy or ising_zz)"),
            }),
        }
    }
}

/// Loop parameters. The field magnitude is the unit of energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: f64,
    pub g: f64,
    pub coupling_form: CouplingForm,
    pub n_time: usize,
}

impl ModelParams {
    pub fn new(theta: f64, g: f64, coupling_form: CouplingForm, n_time: usize) -> Result<Self> {
        let params = Self {
            theta,
            g,
            coupling_form,
            n_time,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("{} is outside [0, π]", self.theta),
            });
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: "coupling must be finite".into(),
            });
        }
        if self.n_time < MIN_TIME_SAMPLES {
            return Err(Error::InvalidParameter {
                name: "n_time",
                reason: format!("{} < {MIN_TIME_SAMPLES}", self.n_time),
            });
        }
        Ok(())
    }

    /// Loop parameter of sample `k`.
    pub fn sample_point(&self, k: usize) -> f64 {
        k as f64 / self.n_time as f64
    }
}

/// Field direction at loop parameter `s`; `s` is reduced mod 1 first so
/// that `s = 0` and `s = 1` give identical bits.
pub fn field_direction(theta: f64, s: f64) -> [f64; 3] {
    let phi = TAU * s.rem_euclid(1.0);
    let (sin_t, cos_t) = theta.sin_cos();
    let (sin_p, cos_p) = phi.sin_cos();
    [sin_t * cos_p, sin_t * sin_p, cos_t]
}

pub fn hamiltonian(params: &ModelParams, s: f64) -> HermitianOperator {
    let [nx, ny, nz] = field_direction(params.theta, s);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // n·σ for spin I.
    let drive = [c(nz, 0.0), c(nx, -ny), c(nx, ny), c(-nz, 0.0)];
    let coupling = params.coupling_form.operator();
    let mut entries = vec![Complex64::new(0.0, 0.0); 16];
    for a in 0..2 {
        for b in 0..2 {
            let d = drive[2 * a + b];
            for k in 0..2 {
                entries[(2 * a + k) * 4 + (2 * b + k)] = d;
            }
        }
    }
    for (e, x) in entries.iter_mut().zip(coupling.entries()) {
        *e += x * params.g;
    }
    HermitianOperator::new(4, entries).expect("model Hamiltonian is Hermitian by construction")
}

/// Phases of the joint z-rotation `exp(-i 2πs (σz⊗1 + 1⊗σz)/2)`, which is
/// diagonal in the product basis.
pub fn loop_rotation(s: f64) -> [Complex64; 4] {
    let phi = TAU * s.rem_euclid(1.0);
    let one = Complex64::new(1.0, 0.0);
    [
        Complex64::from_polar(1.0, -phi),
        one,
        one,
        Complex64::from_polar(1.0, phi),
    ]
}

/// Largest Frobenius distance between `H(s_k)` and `U(s_k) H(0) U(s_k)†`
/// over the `n_time` loop samples.
pub fn covariance_check(params: &ModelParams) -> f64 {
    let h0 = hamiltonian(params, 0.0);
    (0..params.n_time)
        .map(|k| {
            let s = params.sample_point(k);
            let rotated = h0
                .conjugated_by_diagonal(&loop_rotation(s))
                .expect("dimension 4");
            hamiltonian(params, s).distance(&rotated)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::hermitian_eigensystem;
    use std::f64::consts::FRAC_PI_4;

    fn params(theta: f64, g: f64, form: CouplingForm) -> ModelParams {
        ModelParams::new(theta, g, form, 64).unwrap()
    }

    #[test]
    fn field_direction_examples() {
        for s in [0.0, 0.3, 0.77] {
            assert_eq!(field_direction(0.0, s), [0.0, 0.0, 1.0]);
        }
        let n = field_direction(PI / 2.0, 0.25);
        assert!(n[0].abs() < 1e-15 && (n[1] - 1.0).abs() < 1e-15 && n[2].abs() < 1e-15);
        let n = field_direction(FRAC_PI_4, 0.0);
        let h = 2f64.sqrt() / 2.0;
        assert!((n[0] - h).abs() < 1e-15 && n[1] == 0.0 && (n[2] - h).abs() < 1e-15);
        for s in [0.0, 0.1, 0.5, 0.9] {
            let n = field_direction(1.1, s);
            assert!((n.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn uncoupled_vertical_field() {
        let h = hamiltonian(&params(0.0, 0.0, CouplingForm::Heisenberg), 0.42);
        let es = hermitian_eigensystem(&h).unwrap();
        assert_eq!(es.eigenvalues, vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn hermitian_and_periodic() {
        for form in [
            CouplingForm::Heisenberg,
            CouplingForm::Xy,
            CouplingForm::IsingZz,
        ] {
            let p = params(1.0, 0.7, form);
            let h0 = hamiltonian(&p, 0.0);
            assert!(h0.hermiticity_defect() <= 1e-15);
            assert_eq!(h0, hamiltonian(&p, 1.0));
            for k in 0..16 {
                let s = k as f64 / 16.0;
                assert_eq!(hamiltonian(&p, s), hamiltonian(&p, s + 1.0));
            }
        }
    }

    #[test]
    fn matches_independent_assembly() {
        // Assemble n·σ⊗1 + g(σ·σ) directly from the Pauli algebra.
        let p = params(FRAC_PI_4, 0.5, CouplingForm::Heisenberg);
        let s = 0.3;
        let (x, y, z) = (
            HermitianOperator::pauli_x(),
            HermitianOperator::pauli_y(),
            HermitianOperator::pauli_z(),
        );
        let id = HermitianOperator::identity(2).unwrap();
        let (th, ph) = (FRAC_PI_4, TAU * s);
        let single = x
            .combine(th.sin() * ph.cos(), &y, th.sin() * ph.sin())
            .unwrap()
            .combine(1.0, &z, th.cos())
            .unwrap();
        let drive = single.kron(&id).unwrap();
        let coupling = x
            .kron(&x)
            .unwrap()
            .combine(1.0, &y.kron(&y).unwrap(), 1.0)
            .unwrap()
            .combine(1.0, &z.kron(&z).unwrap(), 1.0)
            .unwrap();
        let oracle = drive.combine(1.0, &coupling, 0.5).unwrap();
        let h = hamiltonian(&p, s);
        for (a, b) in h.entries().iter().zip(oracle.entries()) {
            assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn loop_is_covariant() {
        assert!(covariance_check(&params(FRAC_PI_4, 0.5, CouplingForm::Heisenberg)) <= 1e-12);
        assert!(covariance_check(&params(FRAC_PI_4, 0.5, CouplingForm::Xy)) <= 1e-12);
        assert!(covariance_check(&params(FRAC_PI_4, 0.0, CouplingForm::Heisenberg)) <= 1e-12);
        assert!(covariance_check(&params(0.0, 0.5, CouplingForm::Xy)) <= 1e-12);
    }

    #[test]
    fn spectrum_constant_along_loop() {
        for form in [CouplingForm::Heisenberg, CouplingForm::Xy] {
            let p = params(0.9, 0.6, form);
            let e0 = hermitian_eigensystem(&hamiltonian(&p, 0.0))
                .unwrap()
                .eigenvalues;
            for s in [0.13, 0.5, 0.81] {
                let e = hermitian_eigensystem(&hamiltonian(&p, s))
                    .unwrap()
                    .eigenvalues;
                for (a, b) in e.iter().zip(&e0) {
                    assert!((a - b).abs() <= 1e-11);
                }
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::new(-0.1, 0.0, CouplingForm::Xy, 64).is_err());
        assert!(ModelParams::new(4.0, 0.0, CouplingForm::Xy, 64).is_err());
        assert!(ModelParams::new(1.0, 0.0, CouplingForm::Xy, 8).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, CouplingForm::Xy, 64).is_err());
        assert_eq!(
            "ising_zz".parse::<CouplingForm>().unwrap(),
            CouplingForm::IsingZz
        );
        assert!("dipolar".parse::<CouplingForm>().is_err());
    }
}
