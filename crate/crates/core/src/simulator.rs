//! Monte Carlo spiral-scan acquisition simulator.
//!
//! Direct simulation of the acquisition process: the spacecraft sits at a
//! Rayleigh-distributed transverse offset, the beam walks an Archimedean
//! spiral at constant tangential speed, and correlated pointing jitter rides
//! on top of the nominal trajectory. A trial fails when the beam never comes
//! within the detection radius over the full spiral. This shares no code
//! with the analytical failure model in [`crate::analytic`], so the two can
//! be checked against each other.
//!
//! Determinism: every logical random channel of a trial (spacecraft
//! position, radial jitter, tangential jitter) draws from its own counter
//! based ChaCha substream keyed by `(seed, trial, repeat, channel)`.
//! Results are therefore bit-for-bit reproducible regardless of thread
//! count or evaluation order, and the one and two degree-of-freedom modes
//! share the same radial jitter realization for a given seed.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{derive_scales, MissionParams};

/// 97.5th percentile of the standard normal, for 95% intervals.
const Z95: f64 = 1.959963984540054;

/// A trial that runs this many full spirals without detection aborts
/// search-time estimation; the configuration is then effectively
/// non-acquiring and a mean search time would be meaningless.
const REPEAT_BUDGET: u32 = 1000;

/// Substream channel indices within one (trial, repeat) block.
const CH_RADIAL: u64 = 0;
const CH_TANGENTIAL: u64 = 1;
const CH_POSITION: u64 = 2;

/// Errors from Monte Carlo estimation.
#[derive(Debug, Error)]
pub enum SimulatorError {
    /// A trial exhausted its repeated-scan budget without detecting the
    /// spacecraft. Mean search time diverges for such configurations.
    #[error(
        "trial {trial} ran {budget} full spirals without detection; \
         mean search time is not estimable for this configuration"
    )]
    RepeatBudgetExhausted { trial: u64, budget: u32 },
}

/// Which jitter components perturb the beam during a scan.
///
/// Radial-only matches the one-dimensional analytical model; the
/// two degree-of-freedom mode adds an independent tangential component
/// with the same statistics. Tangential jitter displaces the beam along
/// the track, which barely changes coverage, so both modes should agree
/// closely on the failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofMode {
    RadialOnly,
    RadialAndTangential,
}

impl fmt::Display for DofMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DofMode::RadialOnly => f.write_str("radial-only"),
            DofMode::RadialAndTangential => f.write_str("radial-and-tangential"),
        }
    }
}

/// Geometry and time step of the nominal spiral scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralScan {
    /// Radial separation between adjacent spiral arms (rad).
    pub pitch: f64,
    /// Tangential scan speed (rad/s).
    pub speed: f64,
    /// Outermost radius covered by the scan (rad).
    pub r_max: f64,
    /// Simulation time step (s).
    pub dt: f64,
}

impl SpiralScan {
    /// Builds the scan implied by the mission parameters.
    ///
    /// The time step is the tighter of two requirements: sample spacing
    /// along the track no coarser than a tenth of the detection radius, so
    /// a passage cannot be stepped over, and at least twenty samples per
    /// jitter correlation time, so the discretized process tracks the
    /// continuous one.
    pub fn from_params(p: &MissionParams) -> Self {
        let tau_0 = derive_scales(p).tau_0;
        let dt = (p.r_d / (10.0 * p.gamma)).min(tau_0 / 20.0);
        SpiralScan {
            pitch: p.d_t,
            speed: p.gamma,
            r_max: p.r_uc,
            dt,
        }
    }

    /// Duration of one full spiral from the center to `r_max`.
    ///
    /// The spiral covers area at rate `pitch * speed`, so a full pass over
    /// the disk of radius `r_max` takes `pi * r_max^2 / (pitch * speed)`.
    pub fn full_scan_duration(&self) -> f64 {
        PI * self.r_max * self.r_max / (self.pitch * self.speed)
    }

    /// Precomputes the nominal beam positions for every time step.
    ///
    /// The trajectory is identical for every trial, only the jitter and the
    /// spacecraft position differ, so estimators build it once and share it
    /// across threads. Stepping is exact in arc length: the closed-form
    /// Archimedean arc length is inverted by Newton iteration at each step,
    /// keeping the per-step advance equal to `speed * dt` to within rounding
    /// even through the innermost turns where a naive angular update is
    /// percent-level wrong.
    ///
    /// The spiral overshoots `r_max` by one pitch. The outermost passage at
    /// a given azimuth can sit a full pitch below where the spiral stops, so
    /// ending exactly at `r_max` would leave an annular sliver of positions
    /// inside `r_max` that no passage comes within the detection radius of;
    /// a jitter-free scan would then miss spacecraft it is guaranteed to
    /// find. Overshooting by one pitch makes coverage hold through `r_max`.
    fn trajectory(&self) -> Vec<Step> {
        let c = self.pitch / (2.0 * PI);
        let ds = self.speed * self.dt;
        let theta_max = (self.r_max + self.pitch) / c;
        let n_hint = (arc_length(c, theta_max) / ds) as usize + 2;
        let mut steps = Vec::with_capacity(n_hint);
        steps.push(Step::at(c, 0.0));
        let mut theta = 0.0_f64;
        let mut s_target = 0.0_f64;
        loop {
            s_target += ds;
            // Seed with a constant-speed Euler guess, then polish. Three
            // Newton iterations reach machine precision from this start.
            let mut th = theta + ds / (c * (1.0 + theta * theta).sqrt());
            for _ in 0..3 {
                let f = arc_length(c, th) - s_target;
                th -= f / (c * (1.0 + th * th).sqrt());
            }
            debug_assert!((arc_length(c, th) - s_target).abs() <= 1e-9 * ds);
            theta = th;
            if theta > theta_max {
                return steps;
            }
            steps.push(Step::at(c, theta));
        }
    }
}

/// Arc length of the spiral `r = c * theta` from the origin to `theta`.
fn arc_length(c: f64, theta: f64) -> f64 {
    0.5 * c * (theta * (1.0 + theta * theta).sqrt() + theta.asinh())
}

/// One precomputed point of the nominal trajectory.
#[derive(Debug, Clone, Copy)]
struct Step {
    x: f64,
    y: f64,
    /// Unit radial direction, which is also the jitter frame: radial jitter
    /// displaces along `(cos_t, sin_t)`, tangential along `(-sin_t, cos_t)`.
    cos_t: f64,
    sin_t: f64,
    theta: f64,
}

impl Step {
    fn at(c: f64, theta: f64) -> Self {
        let (sin_t, cos_t) = theta.sin_cos();
        let r = c * theta;
        Step {
            x: r * cos_t,
            y: r * sin_t,
            cos_t,
            sin_t,
            theta,
        }
    }
}

/// Outcome of a single acquisition trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    /// Spacecraft transverse position (rad, detector-plane angles).
    pub sc_position: [f64; 2],
    /// Whether the beam came within the detection radius at any step.
    pub detected: bool,
    /// Time of first detection from scan start (s), present iff detected.
    pub detection_time: Option<f64>,
    /// Spiral revolution index of the passage on which detection occurred,
    /// counted at the spacecraft's azimuth; present iff detected.
    pub detection_track: Option<i64>,
    /// Radial distance from the spacecraft to the nearest nominal spiral
    /// passage at its azimuth (rad). Diagnostic for coverage analyses.
    pub nearest_track_offset: f64,
}

/// Monte Carlo failure-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub n_trials: u64,
    pub n_failures: u64,
    /// Raw failure fraction `n_failures / n_trials`.
    pub p_fail: f64,
    /// Half-width of the 95% Wilson score interval. Nonzero even at zero
    /// observed failures, so closeness tests stay meaningful there.
    pub ci95_halfwidth: f64,
    pub seed: u64,
    pub dof_mode: DofMode,
}

fn stream_id(trial: u64, repeat: u32, channel: u64) -> u64 {
    debug_assert!(trial < 1 << 40);
    debug_assert!(repeat < 1 << 22);
    debug_assert!(channel < 4);
    (trial << 24) | (u64::from(repeat) << 2) | channel
}

fn channel_rng(seed: u64, trial: u64, repeat: u32, channel: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(trial, repeat, channel));
    rng
}

/// Draws the spacecraft position for a trial: Rayleigh radius resampled
/// until it lies within the scanned disk, uniform azimuth. The resampling
/// truncates the open-ended Rayleigh tail (0.27% of mass at the default
/// uncertainty-to-range ratio), which the analytical model keeps.
fn draw_sc_position(p: &MissionParams, seed: u64, trial: u64) -> [f64; 2] {
    let mut rng = channel_rng(seed, trial, 0, CH_POSITION);
    let radius = loop {
        let u: f64 = rng.gen();
        let r = p.sigma_uc * (-2.0 * (1.0 - u).ln()).sqrt();
        if r <= p.r_uc {
            break r;
        }
    };
    let phi = 2.0 * PI * rng.gen::<f64>();
    [radius * phi.cos(), radius * phi.sin()]
}

/// Ornstein-Uhlenbeck update coefficients for the scan time step: the
/// exact discrete transition `x' = a x + drive * xi` with `xi ~ N(0,1)`.
fn ou_coefficients(p: &MissionParams, dt: f64) -> (f64, f64) {
    let tau_0 = derive_scales(p).tau_0;
    let a = (-dt / tau_0).exp();
    let drive = p.sigma_n * (1.0 - a * a).sqrt();
    (a, drive)
}

/// Runs one spiral pass and returns the first detection as
/// `(step index, spiral angle at detection)`, or `None` if the beam never
/// enters the detection disk.
fn scan_detects(
    p: &MissionParams,
    scan: &SpiralScan,
    traj: &[Step],
    sc: [f64; 2],
    seed: u64,
    trial: u64,
    repeat: u32,
    dof_mode: DofMode,
) -> Option<(usize, f64)> {
    let r_d2 = p.r_d * p.r_d;
    if p.sigma_n == 0.0 {
        for (k, s) in traj.iter().enumerate() {
            let dx = s.x - sc[0];
            let dy = s.y - sc[1];
            if dx * dx + dy * dy < r_d2 {
                return Some((k, s.theta));
            }
        }
        return None;
    }

    let (a, drive) = ou_coefficients(p, scan.dt);
    let mut rad_rng = channel_rng(seed, trial, repeat, CH_RADIAL);
    let mut x_rad = p.sigma_n * rad_rng.sample::<f64, _>(StandardNormal);
    let mut tan = match dof_mode {
        DofMode::RadialOnly => None,
        DofMode::RadialAndTangential => {
            let mut rng = channel_rng(seed, trial, repeat, CH_TANGENTIAL);
            let x0 = p.sigma_n * rng.sample::<f64, _>(StandardNormal);
            Some((rng, x0))
        }
    };

    for (k, s) in traj.iter().enumerate() {
        if k > 0 {
            x_rad = a * x_rad + drive * rad_rng.sample::<f64, _>(StandardNormal);
            if let Some((rng, x_tan)) = tan.as_mut() {
                *x_tan = a * *x_tan + drive * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let x_tan = tan.as_ref().map_or(0.0, |(_, x)| *x);
        let bx = s.x + x_rad * s.cos_t - x_tan * s.sin_t;
        let by = s.y + x_rad * s.sin_t + x_tan * s.cos_t;
        let dx = bx - sc[0];
        let dy = by - sc[1];
        if dx * dx + dy * dy < r_d2 {
            return Some((k, s.theta));
        }
    }
    None
}

/// Runs a single acquisition trial and reports its full outcome.
///
/// Deterministic in `(seed, trial_idx, dof_mode)`: repeated calls return
/// identical records. Builds the nominal trajectory on every call; the
/// batch estimators share one trajectory instead, so prefer them for
/// anything beyond record dumps.
pub fn run_trial(
    p: &MissionParams,
    scan: &SpiralScan,
    seed: u64,
    trial_idx: u64,
    dof_mode: DofMode,
) -> TrialRecord {
    let traj = scan.trajectory();
    trial_record(p, scan, &traj, seed, trial_idx, dof_mode)
}

fn trial_record(
    p: &MissionParams,
    scan: &SpiralScan,
    traj: &[Step],
    seed: u64,
    trial_idx: u64,
    dof_mode: DofMode,
) -> TrialRecord {
    let sc = draw_sc_position(p, seed, trial_idx);
    let hit = scan_detects(p, scan, traj, sc, seed, trial_idx, 0, dof_mode);

    let rho = sc[0].hypot(sc[1]);
    let mut phi = sc[1].atan2(sc[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    // Fractional track coordinate of the spacecraft: the nominal spiral
    // passes its azimuth at radii pitch * (n + phi / 2 pi) for integer n.
    let q = rho / scan.pitch - phi / (2.0 * PI);
    let nearest_track_offset = (q - q.round()).abs() * scan.pitch;

    match hit {
        Some((k, theta)) => TrialRecord {
            sc_position: sc,
            detected: true,
            detection_time: Some(k as f64 * scan.dt),
            detection_track: Some(((theta - phi) / (2.0 * PI)).round() as i64),
            nearest_track_offset,
        },
        None => TrialRecord {
            sc_position: sc,
            detected: false,
            detection_time: None,
            detection_track: None,
            nearest_track_offset,
        },
    }
}

/// Estimates the spatial-acquisition failure probability by direct trials.
///
/// Each trial draws a fresh spacecraft position and jitter realization and
/// runs one full spiral. Trials are independent and processed in parallel;
/// the estimate depends only on `(params, n_trials, seed, dof_mode)`.
///
/// Panics if `n_trials < 100`; below that the Wilson interval is too wide
/// to mean anything.
pub fn estimate_p_fail(
    p: &MissionParams,
    n_trials: u64,
    seed: u64,
    dof_mode: DofMode,
) -> McEstimate {
    assert!(n_trials >= 100, "need at least 100 trials, got {n_trials}");
    let scan = SpiralScan::from_params(p);
    let traj = scan.trajectory();

    let n_failures = (0..n_trials)
        .into_par_iter()
        .filter(|&trial| {
            let sc = draw_sc_position(p, seed, trial);
            scan_detects(p, &scan, &traj, sc, seed, trial, 0, dof_mode).is_none()
        })
        .count() as u64;

    let p_fail = n_failures as f64 / n_trials as f64;
    McEstimate {
        n_trials,
        n_failures,
        p_fail,
        ci95_halfwidth: wilson_halfwidth(n_trials, n_failures),
        seed,
        dof_mode,
    }
}

/// Runs all trials and returns their individual records, sharing one
/// precomputed trajectory. Record order follows the trial index.
pub fn collect_trials(
    p: &MissionParams,
    n_trials: u64,
    seed: u64,
    dof_mode: DofMode,
) -> Vec<TrialRecord> {
    let scan = SpiralScan::from_params(p);
    let traj = scan.trajectory();
    (0..n_trials)
        .into_par_iter()
        .map(|trial| trial_record(p, &scan, &traj, seed, trial, dof_mode))
        .collect()
}

/// Estimates the mean search time with repeated scans on failure.
///
/// Each trial keeps its spacecraft position and reruns the spiral with
/// fresh jitter until detection, accumulating the full-scan duration
/// `pi * r_max^2 / (pitch * speed)` per failed pass plus the detection time
/// of the final pass. Radial-only jitter. Returns the sample mean and the
/// 95% confidence half-width of the mean.
///
/// Panics if `n_trials < 100`. Fails with
/// [`SimulatorError::RepeatBudgetExhausted`] if any trial runs 10^3 spirals
/// without detection.
pub fn estimate_mean_search_time(
    p: &MissionParams,
    n_trials: u64,
    seed: u64,
) -> Result<(f64, f64), SimulatorError> {
    assert!(n_trials >= 100, "need at least 100 trials, got {n_trials}");
    let scan = SpiralScan::from_params(p);
    let traj = scan.trajectory();
    let t_full = scan.full_scan_duration();

    let times: Vec<f64> = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let sc = draw_sc_position(p, seed, trial);
            let mut elapsed = 0.0;
            for repeat in 0..REPEAT_BUDGET {
                if let Some((k, _)) =
                    scan_detects(p, &scan, &traj, sc, seed, trial, repeat, DofMode::RadialOnly)
                {
                    return Ok(elapsed + k as f64 * scan.dt);
                }
                elapsed += t_full;
            }
            Err(SimulatorError::RepeatBudgetExhausted {
                trial,
                budget: REPEAT_BUDGET,
            })
        })
        .collect::<Result<_, _>>()?;

    // Summed sequentially in trial order so the estimate is independent of
    // how the parallel runner interleaved the work.
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, Z95 * (var / n).sqrt()))
}

fn wilson_halfwidth(n_trials: u64, n_failures: u64) -> f64 {
    let n = n_trials as f64;
    let p = n_failures as f64 / n;
    let z2 = Z95 * Z95;
    Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}
