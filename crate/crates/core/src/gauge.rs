//! Smooth gauge transformations with integer winding, and the audit that
//! compares the two subsystem phase definitions under them.
//!
//! A gauge function is
//!
//! ```text
//! φ(s) = 2π m s + Σ_k [a_k sin(2πks) + b_k (cos(2πks) - 1)]
//! ```
//!
//! so `φ(1) - φ(0) = 2πm` holds exactly in floating point. Random gauges are
//! drawn from a ChaCha20 stream (`rand_chacha::ChaCha20Rng::seed_from_u64`),
//! which is stable across platforms.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{
    berry_phase_mod2pi, make_cyclic, track_eigenpaths, unwrapped_phase, CyclicPath, SampledLoop,
};
use crate::model::ModelParams;
use crate::numerics::circle_distance;
use crate::subsystem::{naive_mixed_phase, proper_mixed_phase, schmidt_paths};
use crate::sweep::with_thread_cap;

/// Upper bound on the number of harmonics of a gauge function.
pub const MAX_HARMONICS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeFunction {
    pub winding: i64,
    /// `(a_k, b_k)` for `k = 1..=K`.
    pub harmonics: Vec<(f64, f64)>,
}

impl GaugeFunction {
    pub fn new(winding: i64, harmonics: Vec<(f64, f64)>) -> Result<Self> {
        if harmonics.len() > MAX_HARMONICS {
            return Err(Error::InvalidParameter {
                name: "harmonics",
                reason: format!("at most {MAX_HARMONICS} harmonics, got {}", harmonics.len()),
            });
        }
        Ok(Self { winding, harmonics })
    }

    pub fn identity() -> Self {
        Self {
            winding: 0,
            harmonics: Vec::new(),
        }
    }

    /// `φ(s)`. The periodic part is evaluated at `s mod 1`.
    pub fn evaluate(&self, s: f64) -> f64 {
        let frac = s.rem_euclid(1.0);
        let periodic: f64 = self
            .harmonics
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let (sin, cos) = (TAU * (i + 1) as f64 * frac).sin_cos();
                a * sin + b * (cos - 1.0)
            })
            .sum();
        TAU * self.winding as f64 * s + periodic
    }
}

/// Draws a gauge with winding uniform in `[-max_winding, max_winding]` and
/// `harmonics` Fourier coefficients uniform in `[-amplitude, amplitude]`.
/// `max_winding = 0` forces a winding-free gauge.
pub fn random_gauge(
    rng_seed: u64,
    max_winding: i64,
    harmonics: usize,
    amplitude: f64,
) -> Result<GaugeFunction> {
    if max_winding < 0 {
        return Err(Error::InvalidParameter {
            name: "max_winding",
            reason: format!("must be non-negative, got {max_winding}"),
        });
    }
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: format!("must lie in [0, 1], got {amplitude}"),
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let winding = rng.random_range(-max_winding..=max_winding);
    let coeffs = (0..harmonics)
        .map(|_| {
            (
                rng.random_range(-amplitude..=amplitude),
                rng.random_range(-amplitude..=amplitude),
            )
        })
        .collect();
    GaugeFunction::new(winding, coeffs)
}

/// Multiplies sample `k` by `e^{-iφ(k/N)}`. The closing sample is set to the
/// transformed first sample, which keeps the path exactly cyclic.
pub fn apply_gauge(path: &CyclicPath, gauge: &GaugeFunction) -> Result<CyclicPath> {
    let samples = path.samples();
    let n = samples.len() - 1;
    let mut out: Vec<_> = samples[..n]
        .iter()
        .enumerate()
        .map(|(k, v)| v.rephased(-gauge.evaluate(k as f64 / n as f64)))
        .collect();
    out.push(out[0].clone());
    let gauged = CyclicPath::from_parts_unchecked(out);
    // Surfaces StepTooCoarse when the gauge outruns the sampling.
    unwrapped_phase(&gauged)?;
    Ok(gauged)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub trials: usize,
    pub seed: u64,
    pub max_winding: i64,
    pub harmonics: usize,
    pub amplitude: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 42,
            max_winding: 3,
            harmonics: 4,
            amplitude: 0.5,
        }
    }
}

/// Gauge drawn for one Schmidt-branch path in one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingRecord {
    pub label: usize,
    pub branch: usize,
    pub subsystem: String,
    pub winding: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub windings: Vec<WindingRecord>,
    pub branch_shift_error: f64,
    pub naive_shift_error: f64,
    pub naive_deviation_mod2pi: f64,
    /// Entangled (path, subsystem) cases that received unequal windings.
    pub entangled_unequal_cases: usize,
    /// Largest naive deviation among those cases.
    pub naive_deviation_unequal: f64,
    pub proper_deviation: f64,
    pub resultant_deviation: f64,
    pub composite_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub params: ModelParams,
    pub settings: AuditSettings,
    pub trials: usize,
    /// Largest `|γ̃_j - γ_j - 2πm_j|`.
    pub max_branch_shift_error: f64,
    /// Largest `|(naivẽ - naive) - 2πΣ p_j m_j|`.
    pub max_naive_shift_error: f64,
    pub max_naive_deviation_mod2pi: f64,
    /// Number of (trial, path, subsystem) cases that are entangled and
    /// received unequal windings.
    pub entangled_unequal_cases: usize,
    pub max_naive_deviation_unequal: f64,
    pub max_proper_deviation: f64,
    pub max_resultant_deviation: f64,
    pub max_composite_deviation: f64,
    pub records: Vec<TrialRecord>,
}

impl AuditReport {
    /// Contract failures, empty when the audit passes.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, what: String| {
            if !ok {
                out.push(what);
            }
        };
        check(
            self.max_branch_shift_error <= 1e-8,
            format!(
                "branch shift error {:e} > 1e-8",
                self.max_branch_shift_error
            ),
        );
        check(
            self.max_naive_shift_error <= 1e-8,
            format!("naive shift error {:e} > 1e-8", self.max_naive_shift_error),
        );
        check(
            self.max_proper_deviation <= 1e-9,
            format!(
                "proper phase deviation {:e} > 1e-9",
                self.max_proper_deviation
            ),
        );
        check(
            self.max_resultant_deviation <= 1e-9,
            format!(
                "resultant deviation {:e} > 1e-9",
                self.max_resultant_deviation
            ),
        );
        check(
            self.max_composite_deviation <= 1e-12,
            format!(
                "composite deviation {:e} > 1e-12",
                self.max_composite_deviation
            ),
        );
        if self.entangled_unequal_cases > 0 {
            check(
                self.max_naive_deviation_unequal >= 0.1,
                format!(
                    "naive deviation never reached 0.1 (max {:e})",
                    self.max_naive_deviation_unequal
                ),
            );
        }
        out
    }
}

/// Ungauged reference quantities of one subsystem of one composite path.
struct SubsystemBaseline {
    label: usize,
    name: &'static str,
    weights: Vec<f64>,
    cyclic: Vec<CyclicPath>,
    gammas: Vec<f64>,
    naive: f64,
    proper: f64,
    resultant: f64,
}

struct Baseline {
    composite: Vec<(CyclicPath, f64)>,
    subsystems: Vec<SubsystemBaseline>,
}

fn baseline(params: &ModelParams) -> Result<Baseline> {
    let paths = track_eigenpaths(params)?;
    let mut composite = Vec::with_capacity(paths.len());
    let mut subsystems = Vec::with_capacity(2 * paths.len());
    for path in &paths {
        let cyc = make_cyclic(path)?;
        let gamma = berry_phase_mod2pi(&cyc)?;
        composite.push((cyc, gamma));

        let sp = schmidt_paths(path)?;
        let weights = sp.initial_weights();
        for name in ["I", "II"] {
            let cyclic = sp
                .branches
                .iter()
                .map(|b| make_cyclic(if name == "I" { &b.u } else { &b.v }))
                .collect::<Result<Vec<_>>>()?;
            let gammas = cyclic
                .iter()
                .map(unwrapped_phase)
                .collect::<Result<Vec<_>>>()?;
            let proper = proper_mixed_phase(&weights, &gammas)?;
            subsystems.push(SubsystemBaseline {
                label: path.label,
                name,
                naive: naive_mixed_phase(&weights, &gammas)?,
                proper: proper.phase,
                resultant: proper.magnitude,
                weights: weights.clone(),
                cyclic,
                gammas,
            });
        }
    }
    Ok(Baseline {
        composite,
        subsystems,
    })
}

fn run_trial(
    base: &Baseline,
    settings: &AuditSettings,
    trial: usize,
    seed: u64,
) -> Result<TrialRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut draw = || {
        random_gauge(
            rng.next_u64(),
            settings.max_winding,
            settings.harmonics,
            settings.amplitude,
        )
    };

    let mut rec = TrialRecord {
        trial,
        seed,
        windings: Vec::new(),
        branch_shift_error: 0.0,
        naive_shift_error: 0.0,
        naive_deviation_mod2pi: 0.0,
        entangled_unequal_cases: 0,
        naive_deviation_unequal: 0.0,
        proper_deviation: 0.0,
        resultant_deviation: 0.0,
        composite_deviation: 0.0,
    };

    for sub in &base.subsystems {
        let mut gauged = Vec::with_capacity(sub.cyclic.len());
        let mut windings = Vec::with_capacity(sub.cyclic.len());
        for (j, (cyc, gamma)) in sub.cyclic.iter().zip(&sub.gammas).enumerate() {
            let gauge = draw()?;
            let shifted = unwrapped_phase(&apply_gauge(cyc, &gauge)?)?;
            let expected = TAU * gauge.winding as f64;
            rec.branch_shift_error = rec
                .branch_shift_error
                .max((shifted - gamma - expected).abs());
            rec.windings.push(WindingRecord {
                label: sub.label,
                branch: j + 1,
                subsystem: sub.name.to_string(),
                winding: gauge.winding,
            });
            windings.push(gauge.winding);
            gauged.push(shifted);
        }

        let naive = naive_mixed_phase(&sub.weights, &gauged)?;
        let law: f64 = TAU
            * sub
                .weights
                .iter()
                .zip(&windings)
                .map(|(p, &m)| p * m as f64)
                .sum::<f64>();
        rec.naive_shift_error = rec.naive_shift_error.max((naive - sub.naive - law).abs());
        let deviation = circle_distance(naive, sub.naive);
        rec.naive_deviation_mod2pi = rec.naive_deviation_mod2pi.max(deviation);
        let entangled = sub.weights.iter().filter(|&&p| p > 0.0 && p < 1.0).count() > 1;
        if entangled && windings.iter().any(|&m| m != windings[0]) {
            rec.entangled_unequal_cases += 1;
            rec.naive_deviation_unequal = rec.naive_deviation_unequal.max(deviation);
        }

        let proper = proper_mixed_phase(&sub.weights, &gauged)?;
        rec.proper_deviation = rec
            .proper_deviation
            .max(circle_distance(proper.phase, sub.proper));
        rec.resultant_deviation = rec
            .resultant_deviation
            .max((proper.magnitude - sub.resultant).abs());
    }

    for (cyc, gamma) in &base.composite {
        let gauge = draw()?;
        let phase = berry_phase_mod2pi(&apply_gauge(cyc, &gauge)?)?;
        rec.composite_deviation = rec.composite_deviation.max(circle_distance(phase, *gamma));
    }

    Ok(rec)
}

/// Runs `settings.trials` randomized gauge trials on every composite
/// eigenpath of `params` and aggregates the deviations.
pub fn gauge_audit(params: &ModelParams, settings: &AuditSettings) -> Result<AuditReport> {
    let base = baseline(params)?;
    let mut master = ChaCha20Rng::seed_from_u64(settings.seed);
    let seeds: Vec<u64> = (0..settings.trials).map(|_| master.next_u64()).collect();

    let records: Vec<TrialRecord> = with_thread_cap(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(trial, &seed)| run_trial(&base, settings, trial, seed))
            .collect::<Result<Vec<_>>>()
    })?;

    let max = |f: fn(&TrialRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    Ok(AuditReport {
        params: *params,
        settings: *settings,
        trials: settings.trials,
        max_branch_shift_error: max(|r| r.branch_shift_error),
        max_naive_shift_error: max(|r| r.naive_shift_error),
        max_naive_deviation_mod2pi: max(|r| r.naive_deviation_mod2pi),
        entangled_unequal_cases: records.iter().map(|r| r.entangled_unequal_cases).sum(),
        max_naive_deviation_unequal: max(|r| r.naive_deviation_unequal),
        max_proper_deviation: max(|r| r.proper_deviation),
        max_resultant_deviation: max(|r| r.resultant_deviation),
        max_composite_deviation: max(|r| r.composite_deviation),
        records,
    })
}
