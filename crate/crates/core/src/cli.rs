//! Command-line front end.
//!
//! Thin orchestration over the library: evaluates the analytical model,
//! sweeps it against scan speed or track width, runs Monte Carlo
//! estimates, optimizes the track width, tabulates efficiency factors,
//! and self-validates the jitter synthesis. Curve output is CSV with a
//! `#`-prefixed metadata header carrying the full parameter set, seed,
//! and tool version; identical invocations produce byte-identical files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::{self, AnalyticError, FailureEstimate, Precision};
use crate::config::{derive_scales, ConfigError, MissionParams, ValidationMode};
use crate::jitter::{self, DofLabel};
use crate::metrics::{self, MetricsError};
use crate::simulator::{self, DofMode, SimulatorError};

/// Default Monte Carlo sample size; enough for 3-sigma agreement checks
/// against the analytical model at the default failure probabilities.
const DEFAULT_TRIALS: u64 = 60_000;

/// Minimum sample count for the jitter self-validation; below this the
/// 2% statistical tolerances are not meaningful.
const MIN_VALIDATE_SAMPLES: u64 = 100_000;

/// Spatial-acquisition analysis for optical inter-satellite links under
/// correlated beam jitter.
#[derive(Parser)]
#[command(name = "spiral-acq", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytical failure model and derived scales.
    Analytic {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep failure probability over scan speed or track width.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Swept parameter.
        #[arg(long, value_enum)]
        variable: SweepVariable,
        /// Comma-separated sweep values with units, strictly increasing,
        /// e.g. "10 mrad/s,40 mrad/s" or "45 urad,62.8 urad,80 urad".
        #[arg(long)]
        values: String,
        /// Comma-separated methods: correlated-exact, linearized,
        /// uncorrelated, delta-mean, monte-carlo-1dof, monte-carlo-2dof.
        #[arg(long, default_value = "correlated-exact,uncorrelated")]
        methods: String,
    },
    /// Estimate failure probability or mean search time by Monte Carlo.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Quantity to estimate.
        #[arg(long, value_enum, default_value_t = SimMode::PFail)]
        mode: SimMode,
        /// Jitter degrees of freedom: 1 = radial only, 2 = radial and
        /// tangential.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        dof: u8,
    },
    /// Find the track width minimizing mean multi-scan search time.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
        /// Track-width range as two comma-separated angles.
        #[arg(long, default_value = "45 urad,79 urad")]
        range: String,
    },
    /// Tabulate the correlation efficiency factor at failure targets.
    Efficiency {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated target failure probabilities in (0, 1).
        #[arg(long, default_value = "0.01")]
        targets: String,
    },
    /// Check synthesized jitter statistics against their targets.
    ValidateJitter {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Mission parameter file (TOML); defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one parameter, e.g. --set scan_speed=40mrad/s. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Random seed for Monte Carlo and jitter synthesis.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo trial count, or sample count for validate-jitter.
    #[arg(long)]
    trials: Option<u64>,
    /// Write CSV output here instead of stdout (simulate: per-trial dump).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Averaged-model evaluation: interpolated correlation grid or full
    /// nested quadrature at every radius node.
    #[arg(long, value_enum, default_value_t = PrecisionArg::Fast)]
    precision: PrecisionArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Fast,
    Exact,
}

impl From<PrecisionArg> for Precision {
    fn from(arg: PrecisionArg) -> Self {
        match arg {
            PrecisionArg::Fast => Precision::Fast,
            PrecisionArg::Exact => Precision::Exact,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimMode {
    PFail,
    SearchTime,
}

/// Swept parameter of a [`SweepSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVariable {
    ScanSpeed,
    TrackWidth,
}

impl SweepVariable {
    fn config_key(self) -> &'static str {
        match self {
            SweepVariable::ScanSpeed => "scan_speed",
            SweepVariable::TrackWidth => "track_width",
        }
    }

    fn apply(self, p: &MissionParams, value: f64) -> MissionParams {
        match self {
            SweepVariable::ScanSpeed => MissionParams { gamma: value, ..*p },
            SweepVariable::TrackWidth => MissionParams { d_t: value, ..*p },
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.config_key())
    }
}

/// Failure-probability methods a sweep can tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMethod {
    CorrelatedExact,
    Linearized,
    Uncorrelated,
    DeltaMean,
    MonteCarlo1Dof,
    MonteCarlo2Dof,
}

impl SweepMethod {
    const ALL: &'static str = "correlated-exact, linearized, uncorrelated, \
                               delta-mean, monte-carlo-1dof, monte-carlo-2dof";

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, SweepMethod::MonteCarlo1Dof | SweepMethod::MonteCarlo2Dof)
    }
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMethod::CorrelatedExact => "correlated-exact",
            SweepMethod::Linearized => "linearized",
            SweepMethod::Uncorrelated => "uncorrelated",
            SweepMethod::DeltaMean => "delta-mean",
            SweepMethod::MonteCarlo1Dof => "monte-carlo-1dof",
            SweepMethod::MonteCarlo2Dof => "monte-carlo-2dof",
        })
    }
}

impl FromStr for SweepMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "correlated-exact" => Ok(SweepMethod::CorrelatedExact),
            "linearized" => Ok(SweepMethod::Linearized),
            "uncorrelated" => Ok(SweepMethod::Uncorrelated),
            "delta-mean" => Ok(SweepMethod::DeltaMean),
            "monte-carlo-1dof" => Ok(SweepMethod::MonteCarlo1Dof),
            "monte-carlo-2dof" => Ok(SweepMethod::MonteCarlo2Dof),
            other => Err(format!(
                "unknown sweep method `{other}` (valid: {})",
                SweepMethod::ALL
            )),
        }
    }
}

/// A validated sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Sweep values in SI units, strictly increasing.
    pub values: Vec<f64>,
    pub methods: Vec<SweepMethod>,
    /// Trial count for Monte Carlo methods.
    pub n_trials: u64,
    pub seed: u64,
}

impl SweepSpec {
    /// Checks the structural invariants: at least one value, strictly
    /// increasing order, at least one method, and a usable trial count
    /// whenever a Monte Carlo method is requested.
    pub fn validate(&self) -> Result<(), String> {
        if self.values.is_empty() {
            return Err("sweep needs at least one value".into());
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err("sweep values must be strictly increasing".into());
        }
        if self.methods.is_empty() {
            return Err("sweep needs at least one method".into());
        }
        if self.methods.iter().any(|m| m.is_monte_carlo()) && self.n_trials < 100 {
            return Err(format!(
                "Monte Carlo methods need at least 100 trials, got {}",
                self.n_trials
            ));
        }
        Ok(())
    }
}

/// Failure classified by exit code: 1 for runtime/numeric trouble, 2 for
/// configuration or request validation.
enum CliError {
    Runtime(String),
    Validation(String),
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Io(_) => CliError::Runtime(err.to_string()),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(err: AnalyticError) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(err: MetricsError) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<SimulatorError> for CliError {
    fn from(err: SimulatorError) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// Parses arguments from the environment and runs the requested command.
/// Returns the process exit code: 0 on success, 1 on runtime or numeric
/// failure, 2 on validation failure.
pub fn run() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Applies `SPIRAL_ACQ_THREADS` to the global worker pool. Silently keeps
/// the default when the pool was already initialized.
fn configure_threads() {
    let Ok(raw) = std::env::var("SPIRAL_ACQ_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => eprintln!("warning: ignoring SPIRAL_ACQ_THREADS={raw}; expected a positive integer"),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analytic { common } => {
            let p = load(&common, ValidationMode::Analytic)?;
            cmd_analytic(&p, common.precision.into())
        }
        Command::Sweep {
            common,
            variable,
            values,
            methods,
        } => {
            let methods = parse_methods(&methods)?;
            let spec = SweepSpec {
                variable,
                values: parse_sweep_values(variable, &values)?,
                methods,
                n_trials: common.trials.unwrap_or(DEFAULT_TRIALS),
                seed: common.seed,
            };
            spec.validate().map_err(CliError::Validation)?;
            // Analytic methods carry the overlap requirement; a pure Monte
            // Carlo sweep may visit gapped geometries.
            let mode = if spec.methods.iter().all(|m| m.is_monte_carlo()) {
                ValidationMode::Simulation
            } else {
                ValidationMode::Analytic
            };
            let p = load(&common, mode)?;
            cmd_sweep(&p, &spec, common.out.as_deref(), common.precision.into())
        }
        Command::Simulate { common, mode, dof } => {
            let p = load(&common, ValidationMode::Simulation)?;
            let dof_mode = if dof == 1 {
                DofMode::RadialOnly
            } else {
                DofMode::RadialAndTangential
            };
            cmd_simulate(
                &p,
                mode,
                dof_mode,
                common.trials.unwrap_or(DEFAULT_TRIALS),
                common.seed,
                common.out.as_deref(),
            )
        }
        Command::Optimize { common, range } => {
            let p = load(&common, ValidationMode::Analytic)?;
            let range = parse_range(&range)?;
            cmd_optimize(&p, range, common.out.as_deref())
        }
        Command::Efficiency { common, targets } => {
            let p = load(&common, ValidationMode::Analytic)?;
            let targets = parse_targets(&targets)?;
            cmd_efficiency(&p, &targets, common.out.as_deref())
        }
        Command::ValidateJitter { common } => {
            let p = load(&common, ValidationMode::Simulation)?;
            cmd_validate_jitter(&p, common.trials.unwrap_or(1_000_000), common.seed)
        }
    }
}

/// Loads parameters from the config file (or defaults), applies `--set`
/// overrides, validates, and prints any validation warnings to stderr.
fn load(common: &CommonArgs, mode: ValidationMode) -> Result<MissionParams, CliError> {
    let mut p = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
            MissionParams::from_config_str(&text)?
        }
        None => MissionParams::default(),
    };
    for entry in &common.set {
        let (key, value) = entry.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("--set expects KEY=VALUE, got `{entry}`"))
        })?;
        p.apply_override(key.trim(), value.trim())?;
    }
    for warning in p.validate(mode)? {
        eprintln!("warning: {warning}");
    }
    Ok(p)
}

fn parse_methods(raw: &str) -> Result<Vec<SweepMethod>, CliError> {
    let mut methods = Vec::new();
    for piece in raw.split(',') {
        let method: SweepMethod = piece.trim().parse().map_err(CliError::Validation)?;
        if !methods.contains(&method) {
            methods.push(method);
        }
    }
    Ok(methods)
}

/// Parses one united quantity by routing it through the config override
/// for the matching key, which owns the unit tables.
fn parse_via_key(key: &str, raw: &str) -> Result<f64, CliError> {
    let mut scratch = MissionParams::default();
    scratch.apply_override(key, raw.trim())?;
    Ok(match key {
        "scan_speed" => scratch.gamma,
        "track_width" => scratch.d_t,
        other => unreachable!("no sweepable field for key {other}"),
    })
}

fn parse_sweep_values(variable: SweepVariable, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|piece| parse_via_key(variable.config_key(), piece))
        .collect()
}

fn parse_range(raw: &str) -> Result<(f64, f64), CliError> {
    let pieces: Vec<&str> = raw.split(',').collect();
    if pieces.len() != 2 {
        return Err(CliError::Validation(format!(
            "--range expects two comma-separated angles, got `{raw}`"
        )));
    }
    let lo = parse_via_key("track_width", pieces[0])?;
    let hi = parse_via_key("track_width", pieces[1])?;
    if !(lo < hi) {
        return Err(CliError::Validation(format!(
            "--range must be increasing, got [{lo}, {hi}]"
        )));
    }
    Ok((lo, hi))
}

fn parse_targets(raw: &str) -> Result<Vec<f64>, CliError> {
    let mut targets = Vec::new();
    for piece in raw.split(',') {
        let t: f64 = piece.trim().parse().map_err(|_| {
            CliError::Validation(format!("target `{}` is not a number", piece.trim()))
        })?;
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Validation(format!(
                "target failure probability {t} outside (0, 1)"
            )));
        }
        targets.push(t);
    }
    if targets.is_empty() {
        return Err(CliError::Validation("no targets given".into()));
    }
    Ok(targets)
}

/// `#`-prefixed metadata block carried at the top of every CSV: tool
/// version, command, full parameter set, and the run settings. No
/// timestamps, so identical runs stay byte-identical.
fn metadata_block(p: &MissionParams, command: &str, extras: &[(&str, String)]) -> String {
    let mut block = format!(
        "# spiral-acq {}\n# command = {command}\n",
        env!("CARGO_PKG_VERSION")
    );
    for line in p.to_config_string().lines() {
        block.push_str("# ");
        block.push_str(line);
        block.push('\n');
    }
    block.push_str(&format!("# psd_level = \"{} rad^2/Hz\"\n", p.psd_level()));
    block.push_str(&format!("# params_fingerprint = {:#018x}\n", p.fingerprint()));
    for (key, value) in extras {
        block.push_str(&format!("# {key} = {value}\n"));
    }
    block
}

/// Writes CSV to `out`, or to stdout when no path was given.
fn emit_csv(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_analytic(p: &MissionParams, precision: Precision) -> Result<(), CliError> {
    let scales = derive_scales(p);
    let delta_mean = analytic::delta_mean(p);

    println!("mission parameters");
    for line in p.to_config_string().lines() {
        println!("  {line}");
    }
    println!("  psd_level = \"{} rad^2/Hz\"", p.psd_level());
    println!("derived scales");
    println!("  tau_0     = {} s", scales.tau_0);
    println!("  t_mean    = {} s", scales.t_mean);
    println!(
        "  gamma_min = {} rad/s ({:.4} mrad/s)",
        scales.gamma_min,
        scales.gamma_min * 1e3
    );
    println!("  beta      = {} 1/rad", scales.beta);
    println!("  eta       = {}", scales.eta);
    println!("  delta_mean = {delta_mean}");

    println!("failure probability");
    let averaged = analytic::p_fail_averaged_with(p, precision)?;
    let at_mean = analytic::p_fail_given_delta(delta_mean, p)?;
    let uncorrelated = analytic::p_fail_uncorrelated(p)?;
    let linearized = analytic::p_fail_linearized(p)?;
    let full = analytic::full_correlation_limit(p);
    for estimate in [&averaged, &at_mean, &uncorrelated, &linearized, &full] {
        let clamp_note = if estimate.clamped { "  (clamped at 0)" } else { "" };
        println!(
            "  {:<26} = {}{clamp_note}",
            estimate.method.to_string(),
            estimate.p_fail
        );
    }
    Ok(())
}

fn cmd_sweep(
    p: &MissionParams,
    spec: &SweepSpec,
    out: Option<&Path>,
    precision: Precision,
) -> Result<(), CliError> {
    let mut header = spec.variable.to_string();
    for method in &spec.methods {
        header.push(',');
        header.push_str(&method.to_string());
        if method.is_monte_carlo() {
            header.push(',');
            header.push_str(&format!("{method}_ci95"));
        }
    }

    // A cell that fails to evaluate becomes nan and warns on stderr; the
    // remaining rows still sweep.
    let analytic_cell = |res: Result<FailureEstimate, AnalyticError>, context: String| {
        match res {
            Ok(est) => est.p_fail.to_string(),
            Err(err) => {
                eprintln!("warning: {context}: {err}");
                "nan".into()
            }
        }
    };

    let mut rows = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let q = spec.variable.apply(p, value);
        let mut row = value.to_string();
        for method in &spec.methods {
            row.push(',');
            let cell = match method {
                SweepMethod::CorrelatedExact => analytic_cell(
                    analytic::p_fail_averaged_with(&q, precision),
                    format!("correlated-exact at {}={value}", spec.variable),
                ),
                SweepMethod::Linearized => analytic_cell(
                    analytic::p_fail_linearized(&q),
                    format!("linearized at {}={value}", spec.variable),
                ),
                SweepMethod::Uncorrelated => analytic_cell(
                    analytic::p_fail_uncorrelated(&q),
                    format!("uncorrelated at {}={value}", spec.variable),
                ),
                SweepMethod::DeltaMean => analytic_cell(
                    analytic::p_fail_given_delta(analytic::delta_mean(&q), &q),
                    format!("delta-mean at {}={value}", spec.variable),
                ),
                SweepMethod::MonteCarlo1Dof | SweepMethod::MonteCarlo2Dof => {
                    let dof = if *method == SweepMethod::MonteCarlo1Dof {
                        DofMode::RadialOnly
                    } else {
                        DofMode::RadialAndTangential
                    };
                    let est = simulator::estimate_p_fail(&q, spec.n_trials, spec.seed, dof);
                    format!("{},{}", est.p_fail, est.ci95_halfwidth)
                }
            };
            row.push_str(&cell);
        }
        rows.push(row);
    }

    let metadata = metadata_block(
        p,
        "sweep",
        &[
            ("variable", spec.variable.to_string()),
            ("seed", spec.seed.to_string()),
            ("trials", spec.n_trials.to_string()),
            ("precision", precision_name(precision).into()),
        ],
    );
    emit_csv(out, &format!("{metadata}{header}\n{}\n", rows.join("\n")))
}

fn precision_name(precision: Precision) -> &'static str {
    match precision {
        Precision::Fast => "fast",
        Precision::Exact => "exact",
    }
}

fn cmd_simulate(
    p: &MissionParams,
    mode: SimMode,
    dof_mode: DofMode,
    n_trials: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if n_trials < 100 {
        return Err(CliError::Validation(format!(
            "Monte Carlo needs at least 100 trials, got {n_trials}"
        )));
    }
    match mode {
        SimMode::PFail => {
            let est = simulator::estimate_p_fail(p, n_trials, seed, dof_mode);
            println!("monte-carlo failure probability ({dof_mode})");
            println!("  trials   = {}", est.n_trials);
            println!("  failures = {}", est.n_failures);
            println!("  p_fail   = {}", est.p_fail);
            println!("  ci95     = {}", est.ci95_halfwidth);
            println!("  seed     = {}", est.seed);
            match analytic::p_fail_averaged(p) {
                Ok(reference) => println!("  analytic correlated-exact = {}", reference.p_fail),
                Err(err) => println!("  analytic correlated-exact unavailable: {err}"),
            }
        }
        SimMode::SearchTime => {
            let (mean, ci) = simulator::estimate_mean_search_time(p, n_trials, seed)?;
            println!("monte-carlo mean search time (radial-only)");
            println!("  trials      = {n_trials}");
            println!("  t_mean      = {mean} s");
            println!("  ci95        = {ci} s");
            println!("  seed        = {seed}");
            println!("  single-scan reference T_1s = {} s", metrics::t_single_scan(p));
        }
    }
    if out.is_some() {
        dump_trials(p, n_trials, seed, dof_mode, out)?;
    }
    Ok(())
}

/// Per-trial record dump: one row per trial with the drawn position and
/// detection outcome. Undetected trials leave the detection fields empty.
fn dump_trials(
    p: &MissionParams,
    n_trials: u64,
    seed: u64,
    dof_mode: DofMode,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let records = simulator::collect_trials(p, n_trials, seed, dof_mode);
    let mut rows = Vec::with_capacity(records.len());
    for (idx, rec) in records.iter().enumerate() {
        let (time, track) = match (rec.detection_time, rec.detection_track) {
            (Some(t), Some(k)) => (t.to_string(), k.to_string()),
            _ => (String::new(), String::new()),
        };
        rows.push(format!(
            "{idx},{},{},{},{time},{track}",
            rec.sc_position[0],
            rec.sc_position[1],
            u8::from(rec.detected),
        ));
    }
    let metadata = metadata_block(
        p,
        "simulate",
        &[
            ("seed", seed.to_string()),
            ("trials", n_trials.to_string()),
            ("dof_mode", dof_mode.to_string()),
        ],
    );
    let header = "trial_idx,sc_x,sc_y,detected,detection_time,detection_track";
    emit_csv(out, &format!("{metadata}{header}\n{}\n", rows.join("\n")))
}

fn cmd_optimize(
    p: &MissionParams,
    range: (f64, f64),
    out: Option<&Path>,
) -> Result<(), CliError> {
    let curve = metrics::optimize_track_width(p, range)?;

    println!("search-time optimum");
    println!("  t_ms_min = {} s", curve.t_ms_min);
    println!(
        "  d_t_min  = {} rad ({:.3} urad)",
        curve.d_t_min,
        curve.d_t_min * 1e6
    );
    println!(
        "  overlap  = {} rad ({:.3} R_d)",
        curve.overlap_min,
        curve.overlap_min / p.r_d
    );
    if !curve.unimodal {
        println!("  note: curve is multimodal; reporting the grid argmin without refinement");
    }
    if curve.d_t_min == range.0 || curve.d_t_min == range.1 {
        println!("  note: minimum sits on the range boundary; widen --range to bracket it");
    }

    let rows: Vec<String> = curve
        .track_widths
        .iter()
        .zip(&curve.t_ms_values)
        .map(|(d, t)| format!("{d},{t}"))
        .collect();
    let metadata = metadata_block(
        p,
        "optimize",
        &[
            ("range", format!("{},{}", range.0, range.1)),
            ("unimodal", curve.unimodal.to_string()),
        ],
    );
    if out.is_some() {
        emit_csv(out, &format!("{metadata}track_width,t_ms\n{}\n", rows.join("\n")))?;
    }
    Ok(())
}

fn cmd_efficiency(
    p: &MissionParams,
    targets: &[f64],
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(targets.len());
    for &target in targets {
        let cell = match metrics::efficiency_factor(p, target) {
            Ok(f_eff) => f_eff.to_string(),
            Err(err) => {
                eprintln!("warning: target {target}: {err}");
                "nan".into()
            }
        };
        rows.push(format!("{target},{cell}"));
    }
    let metadata = metadata_block(p, "efficiency", &[]);
    emit_csv(out, &format!("{metadata}target_p_fail,f_eff\n{}\n", rows.join("\n")))
}

fn cmd_validate_jitter(p: &MissionParams, n: u64, seed: u64) -> Result<(), CliError> {
    if n < MIN_VALIDATE_SAMPLES {
        return Err(CliError::Validation(format!(
            "validate-jitter needs at least {MIN_VALIDATE_SAMPLES} samples, got {n}"
        )));
    }
    let scales = derive_scales(p);
    // Resolve the correlation time with ~159 samples so the lag closest to
    // tau_0 sits within 0.4% of it, and keep the record long enough that
    // the Welch plateau band below f_r/8 holds many segments.
    let dt = 1.0 / (1000.0 * p.f_r);
    let series = jitter::synthesize(p, dt, n as usize, seed, DofLabel::Radial);

    let rms = (series.samples.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    let lag = (scales.tau_0 / dt).round() as usize;
    let acf = jitter::estimate_acf(&series, lag).map_err(|e| CliError::Runtime(e.to_string()))?;
    let acf_at_tau = acf[lag];
    let psd = jitter::estimate_psd(&series).map_err(|e| CliError::Runtime(e.to_string()))?;
    let plateau = jitter::psd_plateau(&psd, p.f_r)
        .ok_or_else(|| CliError::Runtime("no PSD bins below f_r/8".into()))?;

    println!("jitter synthesis validation (n = {n}, dt = {dt} s, seed = {seed})");
    report_check("rms", rms, p.sigma_n, "rad", 0.02);
    report_check("acf(tau_0)", acf_at_tau, (-1.0_f64).exp(), "", 0.02);
    report_check("psd plateau", plateau, p.psd_level(), "rad^2/Hz", 0.10);
    Ok(())
}

fn report_check(label: &str, measured: f64, target: f64, unit: &str, tol: f64) {
    let deviation = if target != 0.0 {
        (measured - target).abs() / target.abs()
    } else {
        measured.abs()
    };
    let verdict = if deviation <= tol { "PASS" } else { "FAIL" };
    println!(
        "  {label:<12} = {measured} {unit}  target {target} {unit}  deviation {:.3}% (tol {:.0}%)  {verdict}",
        deviation * 100.0,
        tol * 100.0
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for name in [
            "correlated-exact",
            "linearized",
            "uncorrelated",
            "delta-mean",
            "monte-carlo-1dof",
            "monte-carlo-2dof",
        ] {
            let method: SweepMethod = name.parse().unwrap();
            assert_eq!(method.to_string(), name);
        }
        assert!("montecarlo".parse::<SweepMethod>().is_err());
    }

    #[test]
    fn sweep_values_parse_with_units() {
        let speeds = parse_sweep_values(SweepVariable::ScanSpeed, "10 mrad/s, 40 mrad/s")
            .map_err(|_| ())
            .unwrap();
        assert_eq!(speeds, vec![10e-3, 40e-3]);
        let widths = parse_sweep_values(SweepVariable::TrackWidth, "45 urad,62.8 urad")
            .map_err(|_| ())
            .unwrap();
        assert!((widths[0] - 45e-6).abs() < 1e-18);
        assert!((widths[1] - 62.8e-6).abs() < 1e-18);
        assert!(parse_sweep_values(SweepVariable::ScanSpeed, "10 furlongs").is_err());
    }

    #[test]
    fn sweep_spec_invariants_are_enforced() {
        let spec = SweepSpec {
            variable: SweepVariable::ScanSpeed,
            values: vec![0.01, 0.04],
            methods: vec![SweepMethod::CorrelatedExact],
            n_trials: 0,
            seed: 1,
        };
        assert!(spec.validate().is_ok());

        let empty = SweepSpec {
            values: vec![],
            ..spec.clone()
        };
        assert!(empty.validate().is_err());

        let unsorted = SweepSpec {
            values: vec![0.04, 0.01],
            ..spec.clone()
        };
        assert!(unsorted.validate().is_err());

        let mc_too_small = SweepSpec {
            methods: vec![SweepMethod::MonteCarlo1Dof],
            n_trials: 10,
            ..spec
        };
        assert!(mc_too_small.validate().is_err());
    }

    #[test]
    fn targets_must_be_probabilities() {
        assert_eq!(parse_targets("0.01,0.1").map_err(|_| ()).unwrap(), vec![0.01, 0.1]);
        assert!(parse_targets("0").is_err());
        assert!(parse_targets("1.5").is_err());
        assert!(parse_targets("ten").is_err());
    }

    #[test]
    fn range_must_be_ordered_pair() {
        let (lo, hi) = parse_range("45 urad,79 urad").map_err(|_| ()).unwrap();
        assert!((lo - 45e-6).abs() < 1e-18 && (hi - 79e-6).abs() < 1e-18);
        assert!(parse_range("79 urad,45 urad").is_err());
        assert!(parse_range("45 urad").is_err());
    }

    #[test]
    fn metadata_block_is_self_describing() {
        let p = MissionParams::default();
        let block = metadata_block(&p, "sweep", &[("seed", "7".into())]);
        assert!(block.contains("# command = sweep"));
        assert!(block.contains("# scan_speed = \"0.07 rad/s\""));
        assert!(block.contains("# psd_level"));
        assert!(block.contains("# params_fingerprint = 0x"));
        assert!(block.contains("# seed = 7"));
        assert!(!block.to_lowercase().contains("time:"));
    }
}
