//! Discrete-time jitter synthesis and spectral validation.
//!
//! Pointing jitter is modeled as a stationary Gaussian process with
//! Lorentzian PSD S(f) = S(0)/(1+(f/f_r)²), equivalently exponential
//! autocorrelation exp(−|τ|/τ₀) with τ₀ = 1/(2π·f_r). That is a first-order
//! Gauss-Markov process, which has an exact discretization:
//!
//! ```text
//! x₀ ~ N(0, σ_n²),   x_{k+1} = a·x_k + σ_n·√(1−a²)·ξ_k,
//! a = exp(−dt/τ₀),   ξ_k i.i.d. N(0, 1)
//! ```
//!
//! Unlike an Euler-Maruyama step, this recurrence reproduces the target
//! variance and lag correlation for any sample interval, so the simulator's
//! dt can be chosen purely for geometric resolution.
//!
//! [`estimate_acf`] and [`estimate_psd`] close the loop: they validate a
//! realization against the target statistics without assuming how it was
//! generated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::config::{derive_scales, MissionParams};

#[derive(Debug, Error)]
pub enum JitterError {
    #[error("series of {len} samples is too short: need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("series has zero variance; normalized statistics are undefined")]
    ZeroVariance,
}

/// Which pointing degree of freedom a series realizes. The two axes are
/// statistically identical and independent; the label exists so simulator
/// records and debug dumps stay unambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofLabel {
    Radial,
    Tangential,
}

/// A sampled jitter realization.
#[derive(Debug, Clone)]
pub struct JitterSeries {
    /// Sample interval (seconds).
    pub dt: f64,
    /// Jitter displacement per sample (radians).
    pub samples: Vec<f64>,
    pub dof_label: DofLabel,
}

/// Synthesizes `n` samples of the jitter process at interval `dt` from a
/// 64-bit seed. Identical `(params, dt, n, seed, label)` reproduce the
/// series bit-for-bit.
pub fn synthesize(
    p: &MissionParams,
    dt: f64,
    n: usize,
    seed: u64,
    dof_label: DofLabel,
) -> JitterSeries {
    assert!(dt > 0.0 && n >= 1, "synthesize needs dt > 0 and n >= 1");
    let mut samples = vec![0.0; n];
    if p.sigma_n > 0.0 {
        let tau_0 = derive_scales(p).tau_0;
        let a = (-dt / tau_0).exp();
        let drive = p.sigma_n * (1.0 - a * a).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = p.sigma_n * rng.sample::<f64, _>(StandardNormal);
        samples[0] = x;
        for sample in samples.iter_mut().skip(1) {
            x = a * x + drive * rng.sample::<f64, _>(StandardNormal);
            *sample = x;
        }
    }
    JitterSeries {
        dt,
        samples,
        dof_label,
    }
}

/// Biased normalized sample autocorrelation up to `max_lag` inclusive;
/// index k holds the lag-k value, with value 1 at lag 0.
///
/// The biased estimator (dividing by n rather than n−k) trades a small
/// downward bias at large lags for guaranteed positive-semidefiniteness;
/// `max_lag` is capped at a tenth of the series so that bias stays below
/// the statistical error.
pub fn estimate_acf(series: &JitterSeries, max_lag: usize) -> Result<Vec<f64>, JitterError> {
    let n = series.samples.len();
    if max_lag >= n / 10 {
        return Err(JitterError::TooShort {
            len: n,
            needed: 10 * (max_lag + 1),
        });
    }
    let mean = series.samples.iter().sum::<f64>() / n as f64;
    let c0 = series
        .samples
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / n as f64;
    // a constant series leaves only rounding residue after mean removal;
    // compare against the sample scale rather than exact zero
    let peak = series.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if c0 <= (1e-9 * peak) * (1e-9 * peak) {
        return Err(JitterError::ZeroVariance);
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let ck = series.samples[..n - k]
            .iter()
            .zip(&series.samples[k..])
            .map(|(x, y)| (x - mean) * (y - mean))
            .sum::<f64>()
            / n as f64;
        acf.push(ck / c0);
    }
    Ok(acf)
}

/// Welch-averaged one-sided PSD estimate: segments of up to 2¹⁴ samples,
/// Hann window, 50% overlap. Returns (frequency in Hz, density in rad²/Hz)
/// pairs from df up to the Nyquist frequency; the DC bin is omitted because
/// the sample mean inflates it.
///
/// Scaled so that ∑ PSD·df recovers the sample variance (Parseval).
pub fn estimate_psd(series: &JitterSeries) -> Result<Vec<(f64, f64)>, JitterError> {
    const MIN_SAMPLES: usize = 1024;
    const MAX_SEGMENT: usize = 1 << 14;
    let n = series.samples.len();
    if n < MIN_SAMPLES {
        return Err(JitterError::TooShort {
            len: n,
            needed: MIN_SAMPLES,
        });
    }
    let seg_len = MAX_SEGMENT.min(prev_power_of_two(n));
    let fs = 1.0 / series.dt;

    let window: Vec<f64> = (0..seg_len)
        .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / seg_len as f64).cos()))
        .collect();
    let window_power = window.iter().map(|w| w * w).sum::<f64>() / seg_len as f64;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg_len);
    let mut spectrum = vec![0.0; seg_len / 2 + 1];
    let mut buffer = vec![Complex::new(0.0, 0.0); seg_len];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + seg_len <= n {
        for (slot, (x, w)) in buffer
            .iter_mut()
            .zip(series.samples[start..start + seg_len].iter().zip(&window))
        {
            *slot = Complex::new(x * w, 0.0);
        }
        fft.process(&mut buffer);
        for (acc, value) in spectrum.iter_mut().zip(&buffer[..seg_len / 2 + 1]) {
            *acc += value.norm_sqr();
        }
        segments += 1;
        start += seg_len / 2;
    }

    // one-sided normalization: interior bins carry both halves of the
    // spectrum, DC and Nyquist only one
    let scale = 1.0 / (fs * seg_len as f64 * window_power * segments as f64);
    let df = fs / seg_len as f64;
    let psd = spectrum
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, &power)| {
            let one_sided = if m == seg_len / 2 { 1.0 } else { 2.0 };
            (m as f64 * df, one_sided * power * scale)
        })
        .collect();
    Ok(psd)
}

/// Mean PSD over the plateau band 0 < f ≤ f_r/8, where the Lorentzian has
/// rolled off by less than 2%.
pub fn psd_plateau(psd: &[(f64, f64)], f_r: f64) -> Option<f64> {
    let band: Vec<f64> = psd
        .iter()
        .take_while(|(f, _)| *f <= f_r / 8.0)
        .map(|(_, s)| *s)
        .collect();
    if band.is_empty() {
        None
    } else {
        Some(band.iter().sum::<f64>() / band.len() as f64)
    }
}

fn prev_power_of_two(n: usize) -> usize {
    debug_assert!(n >= 1);
    1 << (usize::BITS - 1 - n.leading_zeros())
}

// ---------------------------------------------------------------------------
