//! Subsystem phases of a composite eigenpath.
//!
//! Each composite sample is Schmidt-decomposed into `Σ_j √p_j u_j ⊗ v_j`.
//! Following the `u_j` (subsystem I) and `v_j` (subsystem II) vectors around
//! the loop gives per-branch phases `γ_j`, which are then combined with the
//! Schmidt weights in two ways:
//!
//! * [`naive_mixed_phase`]: `Σ_j p_j γ_j`, which depends on the integer
//!   windings of the branch gauges whenever `0 < p_j < 1`;
//! * [`proper_mixed_phase`]: `arg(Σ_j p_j e^{iγ_j})`, which does not.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holonomy::{EigenPath, Estimator, RayPath, SampledLoop, TrackingOptions};
use crate::numerics::{principal_arg, schmidt_decompose, SchmidtDecomposition, StateVector};

/// Branches closer than this in weight have no well-defined Schmidt basis.
pub const SCHMIDT_DEGENERACY: f64 = 1e-8;
/// Largest tolerated change of a Schmidt weight along the loop.
pub const WEIGHT_DRIFT_LIMIT: f64 = 1e-6;
/// Below this resultant magnitude the mixed phase is undefined.
pub const VANISHING_RESULTANT: f64 = 1e-10;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// One Schmidt branch followed around the loop.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchPath {
    pub weights: Vec<f64>,
    pub u: RayPath,
    pub v: RayPath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtPath {
    pub parent_label: usize,
    pub branches: Vec<BranchPath>,
    pub weight_drift: f64,
}

impl SchmidtPath {
    pub fn rank(&self) -> usize {
        self.branches.len()
    }

    /// Schmidt weights at `s = 0`.
    pub fn initial_weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weights[0]).collect()
    }
}

/// Per-branch phases of the two subsystems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchPhase {
    pub weight: f64,
    pub gamma_i: f64,
    pub gamma_ii: f64,
}

/// Phase and resultant magnitude of `Σ_j p_j e^{iγ_j}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedPhase {
    pub phase: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsystemPhases {
    pub label: usize,
    pub branches: Vec<BranchPhase>,
    pub weight_drift: f64,
    pub naive_i: f64,
    pub naive_ii: f64,
    pub proper_i: f64,
    pub proper_ii: f64,
    pub resultant_magnitude_i: f64,
    pub resultant_magnitude_ii: f64,
}

impl SubsystemPhases {
    pub fn weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    pub fn leading_weight(&self) -> f64 {
        self.branches.first().map_or(1.0, |b| b.weight)
    }
}

pub fn schmidt_paths(path: &EigenPath) -> Result<SchmidtPath> {
    schmidt_paths_with(path, &TrackingOptions::default())
}

pub fn schmidt_paths_with(path: &EigenPath, opts: &TrackingOptions) -> Result<SchmidtPath> {
    let decomps = path
        .samples()
        .iter()
        .map(schmidt_decompose)
        .collect::<Result<Vec<SchmidtDecomposition>>>()?;
    let rank = decomps[0].rank();

    let mut weights: Vec<Vec<f64>> = vec![Vec::with_capacity(decomps.len()); rank];
    let mut us: Vec<Vec<StateVector>> = vec![Vec::with_capacity(decomps.len()); rank];
    let mut vs: Vec<Vec<StateVector>> = vec![Vec::with_capacity(decomps.len()); rank];

    for (k, d) in decomps.into_iter().enumerate() {
        if d.rank() != rank {
            return Err(Error::StepAmbiguity {
                step: k,
                overlap: 0.0,
                threshold: opts.overlap_threshold,
            });
        }
        if rank == 2 {
            let splitting = (d.branches[0].weight - d.branches[1].weight).abs();
            if splitting < SCHMIDT_DEGENERACY {
                return Err(Error::SchmidtDegenerate { step: k, splitting });
            }
        }
        let order: Vec<usize> = if k == 0 {
            (0..rank).collect()
        } else {
            let mut taken = vec![false; rank];
            let mut order = Vec::with_capacity(rank);
            for j in 0..rank {
                let prev = us[j].last().expect("seeded at k = 0");
                let (best, overlap) = d
                    .branches
                    .iter()
                    .map(|b| prev.inner(&b.u).norm())
                    .enumerate()
                    .fold(
                        (0, -1.0),
                        |acc, (i, o)| if o > acc.1 { (i, o) } else { acc },
                    );
                let v_overlap = vs[j].last().unwrap().inner(&d.branches[best].v).norm();
                let worst = overlap.min(v_overlap);
                if worst < opts.overlap_threshold || taken[best] {
                    return Err(Error::StepAmbiguity {
                        step: k,
                        overlap: worst,
                        threshold: opts.overlap_threshold,
                    });
                }
                taken[best] = true;
                order.push(best);
            }
            order
        };
        let mut branches: Vec<Option<_>> = d.branches.into_iter().map(Some).collect();
        for (j, &i) in order.iter().enumerate() {
            let b = branches[i].take().expect("assignment is a permutation");
            weights[j].push(b.weight);
            us[j].push(b.u);
            vs[j].push(b.v);
        }
    }

    let weight_drift = weights
        .iter()
        .flat_map(|w| w.iter().map(move |p| (p - w[0]).abs()))
        .fold(0.0, f64::max);
    let branches = weights
        .into_iter()
        .zip(us)
        .zip(vs)
        .map(|((weights, u), v)| {
            Ok(BranchPath {
                weights,
                u: RayPath::new(u)?,
                v: RayPath::new(v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SchmidtPath {
        parent_label: path.label,
        branches,
        weight_drift,
    })
}

fn check_closure(
    path: &RayPath,
    branch: usize,
    subsystem: &'static str,
    threshold: f64,
) -> Result<()> {
    let s = path.samples();
    let overlap = s[s.len() - 1].inner(&s[0]).norm();
    if overlap < threshold {
        return Err(Error::NonCyclicBranch {
            branch,
            subsystem,
            overlap,
        });
    }
    Ok(())
}

fn as_branch_error(err: Error, branch: usize, subsystem: &'static str) -> Error {
    match err {
        Error::ZeroOverlap { magnitude, .. } => Error::NonCyclicBranch {
            branch,
            subsystem,
            overlap: magnitude,
        },
        other => other,
    }
}

/// Berry phases `(γ_j^I, γ_j^II)` of every Schmidt branch.
pub fn branch_phases(sp: &SchmidtPath, estimator: Estimator) -> Result<Vec<BranchPhase>> {
    let threshold = TrackingOptions::default().overlap_threshold;
    sp.branches
        .iter()
        .enumerate()
        .map(|(j, b)| {
            check_closure(&b.u, j + 1, "I", threshold)?;
            check_closure(&b.v, j + 1, "II", threshold)?;
            let gamma_i = estimator
                .phase(&b.u)
                .map_err(|e| as_branch_error(e, j + 1, "I"))?;
            let gamma_ii = estimator
                .phase(&b.v)
                .map_err(|e| as_branch_error(e, j + 1, "II"))?;
            Ok(BranchPhase {
                weight: b.weights[0],
                gamma_i,
                gamma_ii,
            })
        })
        .collect()
}

fn check_weights(weights: &[f64], gammas: &[f64]) -> Result<()> {
    if weights.len() != gammas.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            found: gammas.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: format!("weights must be non-negative and sum to 1 (sum = {sum})"),
        });
    }
    Ok(())
}

/// `Σ_j p_j γ_j`, evaluated as plain real arithmetic on the representatives
/// it is given.
pub fn naive_mixed_phase(weights: &[f64], gammas: &[f64]) -> Result<f64> {
    check_weights(weights, gammas)?;
    Ok(weights.iter().zip(gammas).map(|(p, g)| p * g).sum())
}

/// `arg(Σ_j p_j e^{iγ_j})` together with the resultant magnitude.
pub fn proper_mixed_phase(weights: &[f64], gammas: &[f64]) -> Result<MixedPhase> {
    check_weights(weights, gammas)?;
    let resultant: Complex64 = weights
        .iter()
        .zip(gammas)
        .map(|(&p, &g)| Complex64::from_polar(p, g))
        .sum();
    let magnitude = resultant.norm();
    if magnitude < VANISHING_RESULTANT {
        return Err(Error::VanishingResultant { magnitude });
    }
    Ok(MixedPhase {
        phase: principal_arg(resultant)?,
        magnitude,
    })
}

/// Both subsystem phase definitions for one composite eigenpath.
pub fn subsystem_report(path: &EigenPath, estimator: Estimator) -> Result<SubsystemPhases> {
    let sp = schmidt_paths(path)?;
    if sp.weight_drift > WEIGHT_DRIFT_LIMIT {
        return Err(Error::WeightDrift {
            drift: sp.weight_drift,
            limit: WEIGHT_DRIFT_LIMIT,
        });
    }
    let branches = branch_phases(&sp, estimator)?;
    let weights: Vec<f64> = branches.iter().map(|b| b.weight).collect();
    let gi: Vec<f64> = branches.iter().map(|b| b.gamma_i).collect();
    let gii: Vec<f64> = branches.iter().map(|b| b.gamma_ii).collect();
    let proper_i = proper_mixed_phase(&weights, &gi)?;
    let proper_ii = proper_mixed_phase(&weights, &gii)?;
    Ok(SubsystemPhases {
        label: path.label,
        naive_i: naive_mixed_phase(&weights, &gi)?,
        naive_ii: naive_mixed_phase(&weights, &gii)?,
        proper_i: proper_i.phase,
        proper_ii: proper_ii.phase,
        resultant_magnitude_i: proper_i.magnitude,
        resultant_magnitude_ii: proper_ii.magnitude,
        weight_drift: sp.weight_drift,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::{berry_phase_mod2pi, track_eigenpaths};
    use crate::model::{CouplingForm, ModelParams};
    use crate::numerics::{circle_distance, swap_subsystems};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI, TAU};

    fn paths(theta: f64, g: f64, form: CouplingForm, n: usize) -> Vec<EigenPath> {
        track_eigenpaths(&ModelParams::new(theta, g, form, n).unwrap()).unwrap()
    }

    #[test]
    fn uncoupled_paths_are_product() {
        for p in paths(1.0, 0.0, CouplingForm::Heisenberg, 128) {
            let sp = schmidt_paths(&p).unwrap();
            assert_eq!(sp.rank(), 1);
            assert!(sp.branches[0].weights.iter().all(|&w| w == 1.0));
            assert!(sp.weight_drift <= 1e-12);
        }
    }

    #[test]
    fn covariant_loop_keeps_weights() {
        for form in [CouplingForm::Heisenberg, CouplingForm::Xy] {
            for p in paths(FRAC_PI_4, 0.5, form, 1024) {
                assert!(schmidt_paths(&p).unwrap().weight_drift <= 1e-8);
            }
        }
    }

    #[test]
    fn maximally_entangled_path_is_degenerate() {
        let bell = StateVector::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .unwrap();
        let path = EigenPath {
            label: 1,
            samples: (0..=16).map(|k| bell.rephased(0.1 * k as f64)).collect(),
            energies: vec![0.0; 17],
            min_gap: 1.0,
            min_step_overlap: 1.0,
        };
        assert!(matches!(
            schmidt_paths(&path),
            Err(Error::SchmidtDegenerate { .. })
        ));
    }

    #[test]
    fn driven_branch_carries_the_solid_angle() {
        let all = paths(FRAC_PI_3, 0.0, CouplingForm::Xy, 4096);
        let oracle = -PI * (1.0 - FRAC_PI_3.cos());
        let mut seen = 0;
        for p in &all {
            let b = branch_phases(&schmidt_paths(p).unwrap(), Estimator::Pancharatnam).unwrap();
            assert_eq!(b.len(), 1);
            assert!(b[0].gamma_ii.abs() < 1e-9);
            if (p.energies[0] - 1.0).abs() < 1e-9 {
                assert!((b[0].gamma_i - oracle).abs() < 1e-6);
                seen += 1;
            } else {
                // Anti-aligned: -π(1 + cosθ), the same point as -oracle.
                assert!(circle_distance(b[0].gamma_i, -oracle) < 1e-6);
            }
        }
        assert_eq!(seen, 2);
    }

    #[test]
    fn vertical_field_gives_zero_phases() {
        for p in paths(0.0, 0.6, CouplingForm::Xy, 64) {
            let r = subsystem_report(&p, Estimator::Richardson).unwrap();
            for x in [r.proper_i, r.proper_ii, r.naive_i, r.naive_ii] {
                assert!(x.abs() < 1e-9);
            }
            for b in &r.branches {
                assert!(b.gamma_i.abs() < 1e-9 && b.gamma_ii.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn counter_rephasing_branches_changes_nothing() {
        let p = &paths(1.0, 0.5, CouplingForm::Xy, 256)[0];
        let sp = schmidt_paths(p).unwrap();
        assert_eq!(sp.rank(), 2);
        let before = branch_phases(&sp, Estimator::Pancharatnam).unwrap();
        let mut twisted = sp.clone();
        for (j, b) in twisted.branches.iter_mut().enumerate() {
            let chi = |k: usize| 0.37 * (k as f64).sin() + j as f64;
            b.u = RayPath::new(
                b.u.samples()
                    .iter()
                    .enumerate()
                    .map(|(k, x)| x.rephased(chi(k)))
                    .collect(),
            )
            .unwrap();
            b.v = RayPath::new(
                b.v.samples()
                    .iter()
                    .enumerate()
                    .map(|(k, x)| x.rephased(-chi(k)))
                    .collect(),
            )
            .unwrap();
        }
        let after = branch_phases(&twisted, Estimator::Pancharatnam).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!(circle_distance(a.gamma_i, b.gamma_i) < 1e-12);
            assert!(circle_distance(a.gamma_ii, b.gamma_ii) < 1e-12);
        }
    }

    #[test]
    fn naive_examples() {
        assert!((naive_mixed_phase(&[0.6, 0.4], &[1.0, 2.0]).unwrap() - 1.4).abs() < 1e-15);
        assert_eq!(naive_mixed_phase(&[1.0, 0.0], &[0.3, 99.0]).unwrap(), 0.3);
        let base = naive_mixed_phase(&[0.6, 0.4], &[1.0, 2.0]).unwrap();
        let shifted = naive_mixed_phase(&[0.6, 0.4], &[1.0 + TAU, 2.0]).unwrap();
        assert!((shifted - base - 1.2 * PI).abs() < 1e-12);
        assert!(circle_distance(shifted, base) > 0.5);
    }

    #[test]
    fn proper_examples() {
        let m = proper_mixed_phase(&[1.0, 0.0], &[0.7, 123.4]).unwrap();
        assert!((m.phase - 0.7).abs() < 1e-15);
        let m = proper_mixed_phase(&[0.5, 0.5], &[0.3, -0.3]).unwrap();
        assert!(m.phase.abs() < 1e-15);
        assert!((m.magnitude - 0.3f64.cos()).abs() < 1e-15);
        assert!(matches!(
            proper_mixed_phase(&[0.5, 0.5], &[0.0, PI]),
            Err(Error::VanishingResultant { .. })
        ));
        assert!(proper_mixed_phase(&[0.5, 0.6], &[0.0, 0.0]).is_err());
        assert!(naive_mixed_phase(&[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn additive_without_entanglement() {
        for p in paths(FRAC_PI_4, 0.0, CouplingForm::Xy, 1024) {
            let composite = berry_phase_mod2pi(&p).unwrap();
            let r = subsystem_report(&p, Estimator::Pancharatnam).unwrap();
            assert!(circle_distance(composite, r.proper_i + r.proper_ii) <= 1e-8);
        }
    }

    #[test]
    fn entanglement_breaks_additivity() {
        let gaps: Vec<f64> = paths(FRAC_PI_4, 0.5, CouplingForm::Xy, 1024)
            .iter()
            .map(|p| {
                let composite = berry_phase_mod2pi(p).unwrap();
                let r = subsystem_report(p, Estimator::Pancharatnam).unwrap();
                circle_distance(composite, r.proper_i + r.proper_ii)
            })
            .collect();
        assert!(gaps.iter().any(|&g| g > 1e-3), "{gaps:?}");
    }

    #[test]
    fn swapping_subsystems_swaps_phases() {
        for p in paths(1.2, 0.5, CouplingForm::Xy, 256) {
            let swapped = EigenPath {
                samples: p.samples.iter().map(swap_subsystems).collect(),
                ..p.clone()
            };
            let a = subsystem_report(&p, Estimator::Pancharatnam).unwrap();
            let b = subsystem_report(&swapped, Estimator::Pancharatnam).unwrap();
            assert!(circle_distance(a.proper_i, b.proper_ii) < 1e-10);
            assert!(circle_distance(a.proper_ii, b.proper_i) < 1e-10);
        }
    }

    fn arb_weights() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..1.0, 1..=4).prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn proper_is_gauge_invariant(
            weights in arb_weights(),
            gammas in proptest::collection::vec(-PI..PI, 4),
            shifts in proptest::collection::vec(-1000i64..=1000, 4),
        ) {
            let n = weights.len();
            let base = proper_mixed_phase(&weights, &gammas[..n]);
            let moved: Vec<f64> = gammas[..n].iter().zip(&shifts).map(|(g, m)| g + TAU * *m as f64).collect();
            let shifted = proper_mixed_phase(&weights, &moved);
            match (base, shifted) {
                (Ok(a), Ok(b)) => {
                    // Rounding of γ + 2πm itself bounds how exact this can be.
                    let scale = moved.iter().fold(1.0f64, |acc, g| acc.max(g.abs()));
                    let tol = 8.0 * f64::EPSILON * scale;
                    prop_assert!(circle_distance(a.phase, b.phase) <= tol / a.magnitude.min(1.0));
                    prop_assert!((a.magnitude - b.magnitude).abs() <= tol);
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }

        #[test]
        fn naive_shift_law(
            weights in arb_weights(),
            gammas in proptest::collection::vec(-PI..PI, 4),
            windings in proptest::collection::vec(-5i64..=5, 4),
        ) {
            let n = weights.len();
            let moved: Vec<f64> = gammas[..n].iter().zip(&windings).map(|(g, m)| g + TAU * *m as f64).collect();
            let shift = naive_mixed_phase(&weights, &moved).unwrap()
                - naive_mixed_phase(&weights, &gammas[..n]).unwrap();
            let law: f64 = TAU * weights.iter().zip(&windings).map(|(p, m)| p * *m as f64).sum::<f64>();
            prop_assert!((shift - law).abs() <= 1e-12 * law.abs().max(TAU) * 10.0);
        }

        #[test]
        fn naive_ambiguity_needs_entanglement(
            weights in arb_weights(),
            common in -3i64..=3,
            branch in 0usize..4,
        ) {
            let n = weights.len();
            let gammas = vec![0.1; n];
            let base = naive_mixed_phase(&weights, &gammas).unwrap();
            // Equal windings never change the value mod 2π.
            let equal: Vec<f64> = gammas.iter().map(|g| g + TAU * common as f64).collect();
            prop_assert!(circle_distance(naive_mixed_phase(&weights, &equal).unwrap(), base) <= 1e-9);
            // A single unit winding on branch j moves it by 2π p_j, which is
            // a full turn only for p_j ∈ {0, 1}.
            let j = branch % n;
            let mut single = gammas.clone();
            single[j] += TAU;
            let dev = circle_distance(naive_mixed_phase(&weights, &single).unwrap(), base);
            if n == 1 {
                prop_assert!(dev <= 1e-9);
            } else {
                let p = weights[j];
                prop_assert!(p > 0.0 && p < 1.0);
                prop_assert!((dev - TAU * p.min(1.0 - p)).abs() <= 1e-9);
                prop_assert!(dev > 0.0);
            }
        }
    }
}
