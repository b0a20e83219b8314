//! Eigenstate tracking around the loop and the discrete Berry-phase
//! functionals built on Pancharatnam overlaps.
//!
//! The loop is sampled at `s_k = k/N`, `k = 0..=N`. The gauge-invariant phase
//! of a sampled loop is
//!
//! ```text
//! γ = -arg( ⟨ψ_0|ψ_1⟩ ⟨ψ_1|ψ_2⟩ ··· ⟨ψ_{N-1}|ψ_N⟩ ⟨ψ_N|ψ_0⟩ )
//! ```
//!
//! which is unchanged by any per-sample rephasing and converges to the
//! continuum phase as `O(1/N²)`. The unwrapped phase of a cyclic path sums
//! the individual step phases instead, so it keeps the integer winding that
//! a gauge transformation adds.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{hamiltonian, ModelParams};
use crate::numerics::{
    hermitian_eigensystem, jacobi_eigen, principal_arg, wrap_angle, AngleSum, HermitianOperator,
    StateVector,
};

/// Overlaps below this magnitude are treated as vanishing.
pub const ZERO_OVERLAP: f64 = 1e-12;

/// Eigenvalue spreads below this (relative to the operator scale) count as
/// an exact degeneracy rather than a level crossing.
pub const EXACT_DEGENERACY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingOptions {
    pub gap_threshold: f64,
    pub overlap_threshold: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        Self {
            gap_threshold: 1e-6,
            overlap_threshold: 0.99,
        }
    }
}

/// Anything sampled at `N + 1` equally spaced loop points.
pub trait SampledLoop {
    fn samples(&self) -> &[StateVector];

    fn n_steps(&self) -> usize {
        self.samples().len().saturating_sub(1)
    }
}

/// A plain sampled loop of states with no further metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct RayPath {
    samples: Vec<StateVector>,
}

impl RayPath {
    pub fn new(samples: Vec<StateVector>) -> Result<Self> {
        check_samples(&samples)?;
        Ok(Self { samples })
    }

    pub fn into_samples(self) -> Vec<StateVector> {
        self.samples
    }
}

impl SampledLoop for RayPath {
    fn samples(&self) -> &[StateVector] {
        &self.samples
    }
}

fn check_samples(samples: &[StateVector]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: format!("a loop needs at least 2 samples, got {}", samples.len()),
        });
    }
    let dim = samples[0].dim();
    if let Some(bad) = samples.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    Ok(())
}

/// One instantaneous eigenstate followed around the loop.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPath {
    /// 1-based, ascending energy at `s = 0`.
    pub label: usize,
    pub samples: Vec<StateVector>,
    pub energies: Vec<f64>,
    /// Smallest gap to a neighbouring level over all samples. Zero for a
    /// level inside an exactly degenerate cluster.
    pub min_gap: f64,
    pub min_step_overlap: f64,
}

impl SampledLoop for EigenPath {
    fn samples(&self) -> &[StateVector] {
        &self.samples
    }
}

/// A sampled loop whose last sample is bit-identical to its first.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicPath {
    samples: Vec<StateVector>,
}

impl CyclicPath {
    pub fn new(samples: Vec<StateVector>) -> Result<Self> {
        check_samples(&samples)?;
        if samples.first() != samples.last() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "cyclic path must end on its first sample".into(),
            });
        }
        Ok(Self { samples })
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<StateVector>) -> Self {
        debug_assert_eq!(samples.first(), samples.last());
        Self { samples }
    }

    /// Phases `arg⟨ψ_k|ψ_{k+1}⟩` of the individual steps.
    pub fn step_args(&self) -> Result<Vec<f64>> {
        step_factors(&self.samples, 1)?
            .into_iter()
            .map(principal_arg)
            .collect()
    }

    /// Every other sample; `None` when the step count is odd.
    pub fn coarsened(&self) -> Option<CyclicPath> {
        coarsen(&self.samples).map(|samples| CyclicPath { samples })
    }
}

impl SampledLoop for CyclicPath {
    fn samples(&self) -> &[StateVector] {
        &self.samples
    }
}

fn coarsen(samples: &[StateVector]) -> Option<Vec<StateVector>> {
    let n = samples.len() - 1;
    if !n.is_multiple_of(2) || n < 2 {
        return None;
    }
    Some(samples.iter().step_by(2).cloned().collect())
}

/// Overlaps `⟨ψ_k|ψ_{k+stride}⟩` along the open path.
fn step_factors(samples: &[StateVector], stride: usize) -> Result<Vec<Complex64>> {
    let n = samples.len() - 1;
    (0..n)
        .step_by(stride)
        .map(|k| {
            let f = samples[k].inner(&samples[k + stride]);
            if f.norm() < ZERO_OVERLAP {
                Err(Error::ZeroOverlap {
                    step: k,
                    next: k + stride,
                    magnitude: f.norm(),
                })
            } else {
                Ok(f)
            }
        })
        .collect()
}

fn pancharatnam_phase(samples: &[StateVector], stride: usize) -> Result<f64> {
    let n = samples.len() - 1;
    let mut total = AngleSum::default();
    for f in step_factors(samples, stride)? {
        total.add(principal_arg(f)?);
    }
    let closure = samples[n].inner(&samples[0]);
    if closure.norm() < ZERO_OVERLAP {
        return Err(Error::ZeroOverlap {
            step: n,
            next: 0,
            magnitude: closure.norm(),
        });
    }
    total.add(principal_arg(closure)?);
    Ok(wrap_angle(-total.value()))
}

/// Gauge-invariant Berry phase of a sampled loop, in `(-π, π]`.
pub fn berry_phase_mod2pi<P: SampledLoop + ?Sized>(path: &P) -> Result<f64> {
    let samples = path.samples();
    check_samples(samples)?;
    pancharatnam_phase(samples, 1)
}

/// Richardson-extrapolated Berry phase: combines the full loop with its
/// even-index subsample, cancelling the leading `1/N²` error term.
pub fn berry_phase_extrapolated<P: SampledLoop + ?Sized>(path: &P) -> Result<f64> {
    let samples = path.samples();
    check_samples(samples)?;
    let n = samples.len() - 1;
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "n_time",
            reason: format!("extrapolation needs an even number of steps, got {n}"),
        });
    }
    let fine = pancharatnam_phase(samples, 1)?;
    let coarse = pancharatnam_phase(samples, 2)?;
    Ok(richardson(fine, coarse))
}

fn richardson(fine: f64, coarse: f64) -> f64 {
    wrap_angle(fine + wrap_angle(fine - coarse) / 3.0)
}

/// How reported phases are computed from a sampled loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// The Pancharatnam product at the sampled resolution.
    Pancharatnam,
    /// Pancharatnam product with one Richardson step (`N` and `N/2`).
    #[default]
    Richardson,
}

impl Estimator {
    pub fn phase<P: SampledLoop + ?Sized>(self, path: &P) -> Result<f64> {
        match self {
            Estimator::Pancharatnam => berry_phase_mod2pi(path),
            Estimator::Richardson => berry_phase_extrapolated(path),
        }
    }

    /// Unwrapped phase of a cyclic path; no wrapping is applied.
    pub fn unwrapped(self, path: &CyclicPath) -> Result<f64> {
        let fine = unwrapped_phase(path)?;
        match self {
            Estimator::Pancharatnam => Ok(fine),
            Estimator::Richardson => {
                let coarse = path.coarsened().ok_or_else(|| Error::InvalidParameter {
                    name: "n_time",
                    reason: "extrapolation needs an even number of steps".into(),
                })?;
                Ok(fine + (fine - unwrapped_phase(&coarse)?) / 3.0)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Pancharatnam => "pancharatnam",
            Estimator::Richardson => "richardson",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pancharatnam" | "plain" => Ok(Estimator::Pancharatnam),
            "richardson" => Ok(Estimator::Richardson),
            other => Err(Error::InvalidParameter {
                name: "estimator",
                reason: format!("unknown estimator `{other}` (expected plain or richardson)"),
            }),
        }
    }
}

/// Parallel-transports the samples, spreads the residual holonomy evenly
/// over the steps and closes the path exactly.
///
/// Every step of the result has phase `-γ/N`, so its unwrapped phase is the
/// mod-2π Berry phase `γ` itself.
pub fn make_cyclic<P: SampledLoop + ?Sized>(path: &P) -> Result<CyclicPath> {
    let samples = path.samples();
    check_samples(samples)?;
    let n = samples.len() - 1;
    let gamma = berry_phase_mod2pi(path)?;

    let mut transported = Vec::with_capacity(n + 1);
    transported.push(samples[0].clone());
    for k in 0..n {
        let f = transported[k].inner(&samples[k + 1]);
        let magnitude = f.norm();
        if magnitude < ZERO_OVERLAP {
            return Err(Error::ZeroOverlap {
                step: k,
                next: k + 1,
                magnitude,
            });
        }
        transported.push(samples[k + 1].scaled(f.conj() / magnitude));
    }

    let step = -gamma / n as f64;
    let mut out: Vec<StateVector> = transported
        .iter()
        .take(n)
        .enumerate()
        .map(|(k, v)| v.rephased(step * k as f64))
        .collect();
    out.push(out[0].clone());
    Ok(CyclicPath { samples: out })
}

/// Sum of the step phases `-arg⟨ψ_k|ψ_{k+1}⟩` of a cyclic path.
pub fn unwrapped_phase(path: &CyclicPath) -> Result<f64> {
    let mut total = AngleSum::default();
    for (k, f) in step_factors(&path.samples, 1)?.into_iter().enumerate() {
        let arg = principal_arg(f)?;
        if arg.abs() >= FRAC_PI_2 {
            return Err(Error::StepTooCoarse { step: k, arg });
        }
        total.add(-arg);
    }
    Ok(total.value())
}

/// `1 ⊗ σz`: polarization of the undriven spin, used to pick a basis inside
/// exactly degenerate eigenspaces.
fn partner_polarization() -> HermitianOperator {
    HermitianOperator::identity(2)
        .and_then(|id| id.kron(&HermitianOperator::pauli_z()))
        .expect("4x4")
}

/// Eigenbasis of `h` with exact degeneracies resolved by the partner
/// polarization. Near-degeneracies that are not exact raise `GapCollapse`.
fn resolved_eigenbasis(
    h: &HermitianOperator,
    s: f64,
    opts: &TrackingOptions,
) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let es = hermitian_eigensystem(h)?;
    let exact = EXACT_DEGENERACY * h.max_abs().max(1.0);
    let values = es.eigenvalues;
    let mut vectors = es.eigenvectors;

    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= exact {
            end += 1;
        }
        if end < values.len() {
            let gap = values[end] - values[end - 1];
            if gap < opts.gap_threshold {
                return Err(Error::GapCollapse {
                    s,
                    gap,
                    threshold: opts.gap_threshold,
                });
            }
        }
        if end - start > 1 {
            let block = &vectors[start..end];
            let resolved = split_cluster(block, s, opts)?;
            vectors.splice(start..end, resolved);
        }
        start = end;
    }
    Ok((values, vectors))
}

fn split_cluster(
    block: &[StateVector],
    s: f64,
    opts: &TrackingOptions,
) -> Result<Vec<StateVector>> {
    let t = partner_polarization();
    let d = block.len();
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for (i, a) in block.iter().enumerate() {
        let ta = t.apply(a);
        for (j, b) in block.iter().enumerate() {
            // m[j][i] = ⟨b|T|a⟩
            m[j * d + i] = b
                .amplitudes()
                .iter()
                .zip(&ta)
                .map(|(x, y)| x.conj() * y)
                .sum();
        }
    }
    let (tvals, tvecs) = jacobi_eigen(d, &m);
    if let Some(gap) = tvals
        .windows(2)
        .map(|w| w[1] - w[0])
        .find(|&gap| gap < opts.gap_threshold)
    {
        return Err(Error::GapCollapse {
            s,
            gap,
            threshold: opts.gap_threshold,
        });
    }
    // Descending partner polarization: spin-II up first.
    tvecs
        .into_iter()
        .rev()
        .map(|coeffs| {
            let mut amps = vec![Complex64::new(0.0, 0.0); block[0].dim()];
            for (c, v) in coeffs.iter().zip(block) {
                for (out, x) in amps.iter_mut().zip(v.amplitudes()) {
                    *out += c * x;
                }
            }
            StateVector::new(amps)
        })
        .collect()
}

/// Follows the four instantaneous eigenstates of `H(s)` around the loop
/// with default thresholds.
pub fn track_eigenpaths(params: &ModelParams) -> Result<Vec<EigenPath>> {
    track_eigenpaths_with(params, &TrackingOptions::default())
}

pub fn track_eigenpaths_with(
    params: &ModelParams,
    opts: &TrackingOptions,
) -> Result<Vec<EigenPath>> {
    params.validate()?;
    let n = params.n_time;
    let bases: Vec<(Vec<f64>, Vec<StateVector>)> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let s = params.sample_point(k);
            resolved_eigenbasis(&hamiltonian(params, s), s, opts)
        })
        .collect::<Result<_>>()?;
    assemble_paths(bases, opts)
}

/// Matches levels across consecutive samples by largest overlap and
/// packages them as labelled paths.
fn assemble_paths(
    bases: Vec<(Vec<f64>, Vec<StateVector>)>,
    opts: &TrackingOptions,
) -> Result<Vec<EigenPath>> {
    let levels = bases[0].0.len();
    let mut paths: Vec<EigenPath> = (0..levels)
        .map(|i| EigenPath {
            label: i + 1,
            samples: Vec::with_capacity(bases.len()),
            energies: Vec::with_capacity(bases.len()),
            min_gap: f64::INFINITY,
            min_step_overlap: 1.0,
        })
        .collect();

    for (k, (values, vectors)) in bases.into_iter().enumerate() {
        let assignment: Vec<(usize, f64)> = if k == 0 {
            (0..levels).map(|i| (i, 1.0)).collect()
        } else {
            let mut taken = vec![false; levels];
            let mut out = Vec::with_capacity(levels);
            for path in &paths {
                let prev = path.samples.last().expect("non-empty after k = 0");
                let (best, overlap) = vectors
                    .iter()
                    .map(|v| prev.inner(v).norm())
                    .enumerate()
                    .fold(
                        (0, -1.0),
                        |acc, (j, o)| if o > acc.1 { (j, o) } else { acc },
                    );
                if overlap < opts.overlap_threshold || taken[best] {
                    return Err(Error::StepAmbiguity {
                        step: k,
                        overlap,
                        threshold: opts.overlap_threshold,
                    });
                }
                taken[best] = true;
                out.push((best, overlap));
            }
            out
        };
        for (path, (j, overlap)) in paths.iter_mut().zip(assignment) {
            let below = if j > 0 {
                values[j] - values[j - 1]
            } else {
                f64::INFINITY
            };
            let above = if j + 1 < levels {
                values[j + 1] - values[j]
            } else {
                f64::INFINITY
            };
            path.min_gap = path.min_gap.min(below).min(above);
            path.min_step_overlap = path.min_step_overlap.min(overlap);
            path.energies.push(values[j]);
            path.samples.push(vectors[j].clone());
        }
    }

    for path in &paths {
        let closure = path.samples.last().unwrap().inner(&path.samples[0]).norm();
        if closure < opts.overlap_threshold {
            return Err(Error::OpenPath {
                overlap: closure,
                threshold: opts.overlap_threshold,
            });
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CouplingForm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    fn params(theta: f64, g: f64, n: usize) -> ModelParams {
        ModelParams::new(theta, g, CouplingForm::Heisenberg, n).unwrap()
    }

    fn rephase_randomly<P: SampledLoop>(path: &P, seed: u64) -> RayPath {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        RayPath::new(
            path.samples()
                .iter()
                .map(|v| v.rephased(rng.random_range(-PI..PI)))
                .collect(),
        )
        .unwrap()
    }

    /// Index of the path whose subsystem-I state is aligned with the field
    /// (energy +1 at g = 0) and whose partner is spin-up.
    fn aligned_up(paths: &[EigenPath]) -> &EigenPath {
        paths
            .iter()
            .find(|p| {
                let z2 = HermitianOperator::identity(2)
                    .unwrap()
                    .kron(&HermitianOperator::pauli_z())
                    .unwrap();
                (p.energies[0] - 1.0).abs() < 1e-9 && z2.expectation(&p.samples[0]) > 0.5
            })
            .expect("aligned branch")
    }

    #[test]
    fn vertical_uncoupled_paths_are_constant() {
        let paths = track_eigenpaths(&params(0.0, 0.0, 64)).unwrap();
        assert_eq!(paths.len(), 4);
        for p in &paths {
            assert!((p.min_step_overlap - 1.0).abs() < 1e-12);
            assert_eq!(p.samples.len(), 65);
            assert!(berry_phase_mod2pi(p).unwrap().abs() < 1e-9);
        }
        assert_eq!(
            paths.iter().map(|p| p.label).collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn tracking_is_smooth_at_moderate_coupling() {
        let paths = track_eigenpaths(&params(FRAC_PI_4, 0.5, 1024)).unwrap();
        for p in &paths {
            assert!(p.min_step_overlap >= 0.999);
            assert!(p.samples.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        }
        // Resolution check: doubling N leaves the labels' energies unchanged.
        let finer = track_eigenpaths(&params(FRAC_PI_4, 0.5, 2048)).unwrap();
        for (a, b) in paths.iter().zip(&finer) {
            assert!((a.energies[0] - b.energies[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn near_crossing_raises_gap_collapse() {
        // Spectrum-scan oracle: locate the crossing on the g axis at θ = π/4,
        // then step just off it so the gap is small but not an exact
        // degeneracy.
        let theta = FRAC_PI_4;
        let min_gap = |g: f64| {
            let e = hermitian_eigensystem(&hamiltonian(&params(theta, g, 16), 0.0))
                .unwrap()
                .eigenvalues;
            e.windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min)
        };
        let grid: Vec<f64> = (0..=2000).map(|i| -1.0 + i as f64 * 1e-3).collect();
        let (mut lo, mut hi) = {
            let best = grid
                .iter()
                .copied()
                .min_by(|a, b| min_gap(*a).total_cmp(&min_gap(*b)))
                .unwrap();
            (best - 1e-3, best + 1e-3)
        };
        for _ in 0..200 {
            let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if min_gap(a) < min_gap(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let crossing = 0.5 * (lo + hi);
        let g = crossing + 2e-7;
        let gap = min_gap(g);
        assert!(gap > 1e-12 && gap < 1e-6, "gap {gap} at g = {g}");
        assert!(matches!(
            track_eigenpaths(&params(theta, g, 64)),
            Err(Error::GapCollapse { .. })
        ));
    }

    #[test]
    fn coarse_sampling_is_ambiguous() {
        let opts = TrackingOptions {
            overlap_threshold: 0.99999,
            ..TrackingOptions::default()
        };
        let err = track_eigenpaths_with(&params(PI / 2.0, 0.5, 16), &opts).unwrap_err();
        assert!(matches!(err, Error::StepAmbiguity { .. }));
        assert!(err
            .to_string()
            .contains("increase the number of loop samples"));
    }

    #[test]
    fn single_spin_solid_angle() {
        let paths = track_eigenpaths(&params(FRAC_PI_3, 0.0, 4096)).unwrap();
        let gamma = berry_phase_mod2pi(aligned_up(&paths)).unwrap();
        let oracle = -PI * (1.0 - FRAC_PI_3.cos());
        assert!((gamma - oracle).abs() < 1e-6, "{gamma} vs {oracle}");
    }

    #[test]
    fn vertical_field_has_no_phase() {
        for g in [0.0, 0.3, 1.0] {
            for p in track_eigenpaths(&params(0.0, g, 64)).unwrap() {
                assert!(berry_phase_mod2pi(&p).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn phase_is_rephasing_invariant() {
        let paths = track_eigenpaths(&params(1.0, 0.4, 256)).unwrap();
        for (i, p) in paths.iter().enumerate() {
            let a = berry_phase_mod2pi(p).unwrap();
            let b = berry_phase_mod2pi(&rephase_randomly(p, i as u64)).unwrap();
            assert!(crate::numerics::circle_distance(a, b) < 1e-12);
        }
    }

    #[test]
    fn make_cyclic_properties() {
        let constant = track_eigenpaths(&params(0.0, 0.0, 64)).unwrap();
        for p in &constant {
            let c = make_cyclic(p).unwrap();
            assert!(c.step_args().unwrap().iter().all(|a| a.abs() < 1e-15));
            for (x, y) in c.samples().iter().zip(&p.samples) {
                assert!(x.ray_distance(y) < 1e-15);
            }
        }

        let paths = track_eigenpaths(&params(1.1, 0.7, 512)).unwrap();
        for p in &paths {
            let gamma = berry_phase_mod2pi(p).unwrap();
            let c = make_cyclic(p).unwrap();
            assert_eq!(c.samples().first(), c.samples().last());
            assert!((berry_phase_mod2pi(&c).unwrap() - gamma).abs() < 1e-12);
            let expected = -gamma / 512.0;
            for a in c.step_args().unwrap() {
                assert!((a - expected).abs() < 1e-12);
            }
            let unwrapped = unwrapped_phase(&c).unwrap();
            assert!(crate::numerics::circle_distance(unwrapped, gamma) <= 1e-10);
        }
    }

    #[test]
    fn cyclic_solid_angle_has_no_hidden_winding() {
        let paths = track_eigenpaths(&params(FRAC_PI_3, 0.0, 4096)).unwrap();
        let c = make_cyclic(aligned_up(&paths)).unwrap();
        assert!((unwrapped_phase(&c).unwrap() + PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn unwrap_rejects_coarse_steps() {
        let up = StateVector::basis(2, 0).unwrap();
        let samples = vec![up.clone(), up.rephased(2.0), up.clone()];
        let c = CyclicPath::new(samples).unwrap();
        assert!(matches!(
            unwrapped_phase(&c),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn zero_overlap_is_reported() {
        let up = StateVector::basis(2, 0).unwrap();
        let down = StateVector::basis(2, 1).unwrap();
        let path = RayPath::new(vec![up.clone(), down, up]).unwrap();
        assert!(matches!(
            berry_phase_mod2pi(&path),
            Err(Error::ZeroOverlap { .. })
        ));
        assert!(matches!(make_cyclic(&path), Err(Error::ZeroOverlap { .. })));
    }

    #[test]
    fn plain_product_converges_quadratically() {
        let at = |n| {
            let paths = track_eigenpaths(&params(FRAC_PI_4, 0.5, n)).unwrap();
            paths
                .iter()
                .map(|p| berry_phase_mod2pi(p).unwrap())
                .collect::<Vec<_>>()
        };
        let (a, b, c) = (at(256), at(512), at(1024));
        for m in 0..4 {
            let (d1, d2) = (b[m] - a[m], c[m] - b[m]);
            if d1.abs() > 1e-9 {
                let ratio = d1 / d2;
                assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
            }
        }
    }

    #[test]
    fn extrapolation_agrees_across_resolutions() {
        let at = |n| {
            let paths = track_eigenpaths(&params(FRAC_PI_4, 0.5, n)).unwrap();
            paths
                .iter()
                .map(|p| {
                    let cyc = make_cyclic(p).unwrap();
                    (
                        berry_phase_extrapolated(p).unwrap(),
                        Estimator::Richardson.unwrapped(&cyc).unwrap(),
                    )
                })
                .collect::<Vec<_>>()
        };
        let (a, b) = (at(4096), at(8192));
        for ((pa, ua), (pb, ub)) in a.iter().zip(&b) {
            assert!(crate::numerics::circle_distance(*pa, *pb) <= 1e-8);
            assert!((ua - ub).abs() <= 1e-8);
        }
    }

    #[test]
    fn extrapolation_needs_even_steps() {
        let up = StateVector::basis(2, 0).unwrap();
        let path = RayPath::new(vec![up.clone(), up.clone(), up.clone(), up]).unwrap();
        assert!(berry_phase_extrapolated(&path).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn invariants_hold_on_random_loops(
            theta in 0.0f64..PI,
            g in 0.05f64..1.5,
            form in proptest::sample::select(vec![CouplingForm::Heisenberg, CouplingForm::Xy]),
            seed in proptest::prelude::any::<u64>(),
        ) {
            let p = ModelParams::new(theta, g, form, 256).unwrap();
            let paths = track_eigenpaths(&p);
            proptest::prop_assume!(paths.is_ok());
            for path in paths.unwrap() {
                let gamma = berry_phase_mod2pi(&path).unwrap();
                let moved = berry_phase_mod2pi(&rephase_randomly(&path, seed)).unwrap();
                proptest::prop_assert!(crate::numerics::circle_distance(gamma, moved) <= 1e-12);
                let cyclic = make_cyclic(&path).unwrap();
                let unwrapped = unwrapped_phase(&cyclic).unwrap();
                proptest::prop_assert!(crate::numerics::circle_distance(unwrapped, gamma) <= 1e-10);
                proptest::prop_assert!(unwrapped > -PI - 1e-10 && unwrapped <= PI + 1e-10);
            }
        }
    }
}
