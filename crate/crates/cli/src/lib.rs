//! Command-line front end: coupling sweeps, gauge audits and single-point
//! phase reports.
//!
//! Exit codes: `0` on success, `1` for usage, configuration and I/O errors,
//! `2` for numerical failures (including an audit whose contracts fail).

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use geophase::output::{csv_string, emit_audit_json, emit_csv, emit_json, emit_svg};
use geophase::{
    circle_distance, gauge_audit, run_sweep, subsystem_report, track_eigenpaths, wrap_angle,
    AuditReport, AuditSettings, CouplingForm, Error, Estimator, ModelParams, SweepConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "geophase",
    version,
    about = "Berry phases of a driven two-spin loop and of its subsystems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the coupling at fixed field angle and write CSV/JSON/SVG.
    Sweep(SweepArgs),
    /// Randomized gauge audit of the two subsystem phase definitions.
    Audit(AuditArgs),
    /// Phase report for one (theta, g) point.
    Single(SingleArgs),
}

#[derive(Args, Debug, Default)]
struct ModelFlags {
    /// Field cone angle in radians, in [0, pi].
    #[arg(long)]
    theta: Option<f64>,
    /// Coupling form: heisenberg, xy or ising_zz.
    #[arg(long)]
    coupling: Option<CouplingForm>,
    /// Number of loop samples.
    #[arg(long)]
    n_time: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON file with SweepConfig keys; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelFlags,
    /// First coupling value of the grid.
    #[arg(long, allow_negative_numbers = true)]
    g_min: Option<f64>,
    /// Last coupling value of the grid.
    #[arg(long, allow_negative_numbers = true)]
    g_max: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    g_steps: Option<usize>,
    /// Phase estimator: richardson or pancharatnam.
    #[arg(long)]
    estimator: Option<Estimator>,
    /// Write the table as CSV (printed to stdout when no output is given).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the table and the configuration as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the four-panel phase plot as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// JSON file with SweepConfig keys (theta, coupling_form, n_time, trials, seed).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelFlags,
    /// Coupling strength.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    g: f64,
    /// Number of randomized gauge trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed of the ChaCha20 gauge stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the full report, trial by trial, as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SingleArgs {
    #[command(flatten)]
    model: ModelFlags,
    /// Coupling strength.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    g: f64,
    /// Phase estimator: richardson or pancharatnam.
    #[arg(long)]
    estimator: Option<Estimator>,
}

/// Failure of a subcommand, already mapped to an exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidParameter { .. } | Error::Io { .. } | Error::DimensionMismatch { .. } => {
                EXIT_USAGE
            }
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a, out, err),
        Command::Audit(a) => audit(a, out),
        Command::Single(a) => single(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<SweepConfig, Failure> {
    let Some(path) = path else {
        return Ok(SweepConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("invalid config {}: {e}", path.display()),
    })
}

fn apply_model_flags(config: &mut SweepConfig, flags: &ModelFlags) {
    if let Some(theta) = flags.theta {
        config.theta = theta;
    }
    if let Some(form) = flags.coupling {
        config.coupling_form = form;
    }
    if let Some(n) = flags.n_time {
        config.n_time = n;
    }
}

fn sweep(args: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut config = load_config(args.config.as_deref())?;
    apply_model_flags(&mut config, &args.model);
    if let Some(v) = args.g_min {
        config.g_min = v;
    }
    if let Some(v) = args.g_max {
        config.g_max = v;
    }
    if let Some(v) = args.g_steps {
        config.g_steps = v;
    }
    if let Some(v) = args.estimator {
        config.estimator = v;
    }
    if args.csv.is_some() {
        config.csv = args.csv;
    }
    if args.json.is_some() {
        config.json = args.json;
    }
    if args.svg.is_some() {
        config.svg = args.svg;
    }

    let table = run_sweep(&config)?;
    if let Some(path) = &config.csv {
        emit_csv(&table, path)?;
    }
    if let Some(path) = &config.json {
        emit_json(&table, path)?;
    }
    if let Some(path) = &config.svg {
        emit_svg(&table, path)?;
    }
    if config.csv.is_none() && config.json.is_none() && config.svg.is_none() {
        write_out(out, &csv_string(&table)?)?;
    }

    let failed: Vec<_> = table.rows.iter().filter(|r| !r.is_ok()).collect();
    if !failed.is_empty() {
        let _ = writeln!(
            err,
            "warning: {} of {} rows failed and carry no phases",
            failed.len(),
            table.rows.len()
        );
        for r in failed {
            let _ = writeln!(err, "  g = {}, m = {}: {}", r.g, r.m, r.status);
        }
    }
    Ok(EXIT_OK)
}

fn audit(args: AuditArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut config = load_config(args.config.as_deref())?;
    apply_model_flags(&mut config, &args.model);
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    let params = ModelParams::new(config.theta, args.g, config.coupling_form, config.n_time)?;
    let settings = AuditSettings {
        trials: config.trials,
        seed: config.seed,
        ..AuditSettings::default()
    };
    let report = gauge_audit(&params, &settings)?;
    if let Some(path) = &args.json {
        emit_audit_json(&report, path)?;
    }
    write_out(out, &audit_summary(&report))?;
    Ok(if report.violations().is_empty() {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

fn audit_summary(r: &AuditReport) -> String {
    let p = &r.params;
    let mut s = format!(
        "gauge audit: theta = {}, g = {}, coupling = {}, n_time = {}, trials = {}, seed = {}\n",
        p.theta, p.g, p.coupling_form, p.n_time, r.trials, r.settings.seed
    );
    let lines = [
        (
            "branch shift error  |dγ_j - 2πm_j|",
            r.max_branch_shift_error,
            "<= 1e-8",
        ),
        (
            "naive shift error   |dΣpγ - 2πΣpm|",
            r.max_naive_shift_error,
            "<= 1e-8",
        ),
        (
            "naive deviation mod 2π (all)",
            r.max_naive_deviation_mod2pi,
            "",
        ),
        (
            "naive deviation mod 2π (unequal windings)",
            r.max_naive_deviation_unequal,
            ">= 0.1",
        ),
        ("proper phase deviation", r.max_proper_deviation, "<= 1e-9"),
        (
            "resultant magnitude deviation",
            r.max_resultant_deviation,
            "<= 1e-9",
        ),
        (
            "composite phase deviation",
            r.max_composite_deviation,
            "<= 1e-12",
        ),
    ];
    for (label, value, limit) in lines {
        s.push_str(&format!("  {label:<44} {value:>12.3e}  {limit}\n"));
    }
    s.push_str(&format!(
        "  entangled cases with unequal windings: {}\n",
        r.entangled_unequal_cases
    ));
    let violations = r.violations();
    if violations.is_empty() {
        s.push_str("result: all contracts hold\n");
    } else {
        for v in violations {
            s.push_str(&format!("violation: {v}\n"));
        }
        s.push_str("result: FAILED\n");
    }
    s
}

fn single(args: SingleArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let params = ModelParams::new(
        args.model.theta.unwrap_or(FRAC_PI_4),
        args.g,
        args.model.coupling.unwrap_or_default(),
        args.model.n_time.unwrap_or(4096),
    )?;
    let estimator = args.estimator.unwrap_or_default();
    if estimator == Estimator::Richardson && params.n_time % 2 != 0 {
        return Err(Error::InvalidParameter {
            name: "n_time",
            reason: "the richardson estimator needs an even n_time".into(),
        }
        .into());
    }
    let paths = track_eigenpaths(&params)?;
    let mut s = format!(
        "theta = {}, g = {}, coupling = {}, n_time = {}, estimator = {}\n",
        params.theta,
        params.g,
        params.coupling_form,
        params.n_time,
        estimator.as_str()
    );
    s.push_str(&format!(
        "{:>2} {:>10} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>12}\n",
        "m",
        "min_gap",
        "gamma",
        "gamma_I",
        "gamma_II",
        "naive_I",
        "naive_II",
        "additivity_gap",
        "weights"
    ));
    for path in &paths {
        let gamma = estimator.phase(path)?;
        let r = subsystem_report(path, estimator)?;
        let sum = wrap_angle(r.proper_i + r.proper_ii);
        let weights: Vec<String> = r.weights().iter().map(|w| format!("{w:.6}")).collect();
        s.push_str(&format!(
            "{:>2} {:>10.3e} {:>14.10} {:>14.10} {:>14.10} {:>14.10} {:>14.10} {:>14.3e} {}\n",
            path.label,
            path.min_gap,
            gamma,
            r.proper_i,
            r.proper_ii,
            wrap_angle(r.naive_i),
            wrap_angle(r.naive_ii),
            circle_distance(gamma, sum),
            weights.join("/")
        ));
    }
    write_out(out, &s)?;
    Ok(EXIT_OK)
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("cannot write output: {e}"),
    })
}
