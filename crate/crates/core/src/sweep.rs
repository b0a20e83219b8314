//! Coupling sweeps at fixed field angle.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{track_eigenpaths, Estimator};
use crate::model::{CouplingForm, ModelParams};
use crate::numerics::{circle_distance, wrap_angle};
use crate::subsystem::subsystem_report;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GEOPHASE_THREADS";

/// Runs `f` inside a rayon pool capped by `GEOPHASE_THREADS`, or in the
/// global pool when the variable is unset or unparsable.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Sweep and audit settings. As JSON, every key is optional (missing keys
/// take the defaults) and unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub theta: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub g_steps: usize,
    pub coupling_form: CouplingForm,
    pub n_time: usize,
    pub estimator: Estimator,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_4,
            g_min: 0.0,
            g_max: 1.0,
            g_steps: 51,
            coupling_form: CouplingForm::default(),
            n_time: 4096,
            estimator: Estimator::default(),
            csv: None,
            json: None,
            svg: None,
            trials: 100,
            seed: 42,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_min <= self.g_max) {
            return Err(Error::InvalidParameter {
                name: "g_min",
                reason: format!("g_min = {} exceeds g_max = {}", self.g_min, self.g_max),
            });
        }
        if self.g_steps < 1 {
            return Err(Error::InvalidParameter {
                name: "g_steps",
                reason: "need at least one grid point".into(),
            });
        }
        if self.estimator == Estimator::Richardson && !self.n_time.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "n_time",
                reason: "the richardson estimator needs an even n_time".into(),
            });
        }
        self.params_at(self.g_min)?;
        Ok(())
    }

    pub fn params_at(&self, g: f64) -> Result<ModelParams> {
        ModelParams::new(self.theta, g, self.coupling_form, self.n_time)
    }

    /// Uniform grid from `g_min` to `g_max` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        if self.g_steps == 1 {
            return vec![self.g_min];
        }
        let last = (self.g_steps - 1) as f64;
        (0..self.g_steps)
            .map(|i| {
                if i + 1 == self.g_steps {
                    self.g_max
                } else {
                    self.g_min + (self.g_max - self.g_min) * (i as f64 / last)
                }
            })
            .collect()
    }
}

/// One `(g, m)` entry of a sweep. Phases are wrapped to `(-π, π]`; values are
/// `None` when the point failed before they could be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub g: f64,
    pub m: usize,
    pub gamma_composite: Option<f64>,
    #[serde(rename = "gamma_I")]
    pub gamma_i: Option<f64>,
    #[serde(rename = "gamma_II")]
    pub gamma_ii: Option<f64>,
    pub gamma_sum: Option<f64>,
    pub additivity_gap: Option<f64>,
    pub p1: Option<f64>,
    #[serde(rename = "resultant_I")]
    pub resultant_i: Option<f64>,
    #[serde(rename = "resultant_II")]
    pub resultant_ii: Option<f64>,
    pub status: String,
}

impl PhaseRow {
    fn failed(g: f64, m: usize, err: &Error) -> Self {
        Self {
            g,
            m,
            gamma_composite: None,
            gamma_i: None,
            gamma_ii: None,
            gamma_sum: None,
            additivity_gap: None,
            p1: None,
            resultant_i: None,
            resultant_ii: None,
            status: err.kind().to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

pub const STATUS_OK: &str = "ok";

/// Sweep output ordered by `g`, then `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub config: SweepConfig,
    pub rows: Vec<PhaseRow>,
}

impl PhaseTable {
    /// Rows grouped per grid point.
    pub fn points(&self) -> impl Iterator<Item = &[PhaseRow]> {
        self.rows.chunk_by(|a, b| a.g == b.g)
    }
}

/// All four levels at one coupling value. Failures are recorded in the
/// rows' status instead of being returned.
pub fn sweep_point(config: &SweepConfig, g: f64) -> Vec<PhaseRow> {
    let paths = match config.params_at(g).and_then(|p| track_eigenpaths(&p)) {
        Ok(paths) => paths,
        Err(err) => return (1..=4).map(|m| PhaseRow::failed(g, m, &err)).collect(),
    };
    paths
        .iter()
        .map(|path| {
            let composite = match config.estimator.phase(path) {
                Ok(x) => x,
                Err(err) => return PhaseRow::failed(g, path.label, &err),
            };
            match subsystem_report(path, config.estimator) {
                Ok(r) => {
                    let sum = wrap_angle(r.proper_i + r.proper_ii);
                    PhaseRow {
                        g,
                        m: path.label,
                        gamma_composite: Some(composite),
                        gamma_i: Some(r.proper_i),
                        gamma_ii: Some(r.proper_ii),
                        gamma_sum: Some(sum),
                        additivity_gap: Some(circle_distance(composite, sum)),
                        p1: Some(r.leading_weight()),
                        resultant_i: Some(r.resultant_magnitude_i),
                        resultant_ii: Some(r.resultant_magnitude_ii),
                        status: STATUS_OK.to_string(),
                    }
                }
                Err(err) => PhaseRow {
                    gamma_composite: Some(composite),
                    ..PhaseRow::failed(g, path.label, &err)
                },
            }
        })
        .collect()
}

pub fn run_sweep(config: &SweepConfig) -> Result<PhaseTable> {
    config.validate()?;
    let grid = config.grid();
    let rows: Vec<Vec<PhaseRow>> =
        with_thread_cap(|| grid.par_iter().map(|&g| sweep_point(config, g)).collect());
    Ok(PhaseTable {
        config: config.clone(),
        rows: rows.into_iter().flatten().collect(),
    })
}
