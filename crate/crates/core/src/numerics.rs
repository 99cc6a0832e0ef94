//! Numerical kernels shared by the analytic and metrics modules:
//!
//! - error functions `erf`/`erfc` (rational approximations, ~1 ulp) and the
//!   scaled complement `erfcx(x) = exp(x²)·erfc(x)`, which stays finite where
//!   `exp(x²)` alone would overflow
//! - adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals
//! - bracketed bisection root finding and golden-section minimization
//! - monotone (shape-preserving) cubic interpolation
//!
//! Everything here is domain-agnostic and pure; all tolerances are supplied
//! by the caller through [`QuadratureSpec`] or explicit `tol` arguments.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("invalid interval: lo={lo} must be strictly less than hi={hi}")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("no sign change in bracket: f({lo})={f_lo}, f({hi})={f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("interpolation needs at least two strictly increasing nodes")]
    DegenerateNodes,
}

// ---------------------------------------------------------------------------
// Error functions.
//
// erf/erfc follow the SunPro rational-approximation scheme (via FreeBSD's
// s_erf.c); relative error is below 1e-15 over the whole real line.
//
// ====================================================
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//
// Developed at SunPro, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this
// software is freely granted, provided that this notice
// is preserved.
// ====================================================
// ---------------------------------------------------------------------------

const ERX: f64 = 8.450_629_115_104_675_3e-1;

// coefficients for approximation to erf in [0, 0.84375]
const EFX: f64 = 1.283_791_670_955_125_9e-1;
const EFX8: f64 = 1.027_033_336_764_100_7;
const PP0: f64 = 1.283_791_670_955_125_6e-1;
const PP1: f64 = -3.250_421_072_470_015e-1;
const PP2: f64 = -2.848_174_957_559_851e-2;
const PP3: f64 = -5.770_270_296_489_441_6e-3;
const PP4: f64 = -2.376_301_665_665_016_3e-5;
const QQ1: f64 = 3.979_172_239_591_553_5e-1;
const QQ2: f64 = 6.502_224_998_876_729e-2;
const QQ3: f64 = 5.081_306_281_875_766e-3;
const QQ4: f64 = 1.324_947_380_043_216_4e-4;
const QQ5: f64 = -3.960_228_278_775_368e-6;

// coefficients for approximation to erf in [0.84375, 1.25]
const PA0: f64 = -2.362_118_560_752_659_4e-3;
const PA1: f64 = 4.148_561_186_837_483e-1;
const PA2: f64 = -3.722_078_760_357_013_2e-1;
const PA3: f64 = 3.183_466_199_011_617_5e-1;
const PA4: f64 = -1.108_946_942_823_966_8e-1;
const PA5: f64 = 3.547_830_432_561_823_6e-2;
const PA6: f64 = -2.166_375_594_868_790_8e-3;
const QA1: f64 = 1.064_208_804_008_442_3e-1;
const QA2: f64 = 5.403_979_177_021_710_5e-1;
const QA3: f64 = 7.182_865_441_419_627e-2;
const QA4: f64 = 1.261_712_198_087_616_4e-1;
const QA5: f64 = 1.363_708_391_202_905e-2;
const QA6: f64 = 1.198_449_984_679_910_7e-2;

// coefficients for approximation to erfc in [1.25, 1/0.35]
const RA0: f64 = -9.864_944_034_847_148e-3;
const RA1: f64 = -6.938_585_727_071_818e-1;
const RA2: f64 = -1.055_862_622_532_329_1e1;
const RA3: f64 = -6.237_533_245_032_601e1;
const RA4: f64 = -1.623_966_694_625_734_7e2;
const RA5: f64 = -1.846_050_929_067_110_4e2;
const RA6: f64 = -8.128_743_550_630_659e1;
const RA7: f64 = -9.814_329_344_169_145;
const SA1: f64 = 1.965_127_166_743_925_7e1;
const SA2: f64 = 1.376_577_541_435_190_4e2;
const SA3: f64 = 4.345_658_774_752_292_3e2;
const SA4: f64 = 6.453_872_717_332_679e2;
const SA5: f64 = 4.290_081_400_275_678_4e2;
const SA6: f64 = 1.086_350_055_417_794_4e2;
const SA7: f64 = 6.570_249_770_319_282;
const SA8: f64 = -6.042_441_521_485_81e-2;

// coefficients for approximation to erfc in [1/0.35, 28]
const RB0: f64 = -9.864_942_924_700_099e-3;
const RB1: f64 = -7.992_832_376_805_23e-1;
const RB2: f64 = -1.775_795_491_775_475_2e1;
const RB3: f64 = -1.606_363_848_558_219_2e2;
const RB4: f64 = -6.375_664_433_683_896e2;
const RB5: f64 = -1.025_095_131_611_077_2e3;
const RB6: f64 = -4.835_191_916_086_514e2;
const SB1: f64 = 3.033_806_074_348_246e1;
const SB2: f64 = 3.257_925_129_965_739_2e2;
const SB3: f64 = 1.536_729_586_084_437e3;
const SB4: f64 = 3.199_858_219_508_595_4e3;
const SB5: f64 = 2.553_050_406_433_164_4e3;
const SB6: f64 = 4.745_285_412_069_553_7e2;
const SB7: f64 = -2.244_095_244_658_581_8e1;

const VERY_TINY: f64 = 2.848_094_538_889_218e-306; // 2^-1015
const TINY: f64 = 1.387_778_780_781_445_7e-17; // 2^-56
const SMALL: f64 = 3.725_290_298_461_914e-9; // 2^-28

/// Rational tail correction R/S with `s = 1/x²`, valid for `1.25 <= x < 28`,
/// such that `erfc(x) = exp(-x² - 0.5625 + R/S) / x`.
fn erfc_tail_rs(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    let (r, q) = if x < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s
                * (SA1
                    + s * (SA2
                        + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    r / q
}

/// Error function `erf(x) = (2/√π)∫₀ˣ exp(-t²) dt`.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return -1.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    if x < 0.84375 {
        let temp = if x < SMALL {
            if x < VERY_TINY {
                0.125 * (8.0 * x + EFX8 * x) // avoid underflow
            } else {
                x + EFX * x
            }
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            x + x * (r / s)
        };
        return if sign { -temp } else { temp };
    }
    if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if sign { -ERX - p / q } else { ERX + p / q };
    }
    if x >= 6.0 {
        return if sign { -1.0 } else { 1.0 };
    }
    // 1.25 <= x < 6: compute through the erfc tail; split x into a truncated
    // head z so that -x² = -z² + (z-x)(z+x) is evaluated without cancellation
    let rs = erfc_tail_rs(x);
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    let r = f64::exp(-z * z - 0.5625) * f64::exp((z - x) * (z + x) + rs);
    if sign {
        r / x - 1.0
    } else {
        1.0 - r / x
    }
}

/// Complementary error function `erfc(x) = 1 - erf(x)`, accurate in the far
/// tail where `1 - erf(x)` would lose all significance.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    if x < 0.84375 {
        let temp = if x < TINY {
            x
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = x * (r / s);
            if x < 0.25 {
                x + y
            } else {
                0.5 + (y + (x - 0.5))
            }
        };
        return if sign { 1.0 + temp } else { 1.0 - temp };
    }
    if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if sign { 1.0 + ERX + p / q } else { 1.0 - ERX - p / q };
    }
    if x < 28.0 {
        if sign && x > 6.0 {
            return 2.0;
        }
        let rs = erfc_tail_rs(x);
        let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
        let r = f64::exp(-z * z - 0.5625) * f64::exp((z - x) * (z + x) + rs);
        return if sign { 2.0 - r / x } else { r / x };
    }
    if sign {
        2.0
    } else {
        0.0
    }
}

/// Scaled complementary error function `erfcx(x) = exp(x²)·erfc(x)`.
///
/// For large positive `x` this decays like `1/(x√π)` while both factors of
/// the defining product overflow/underflow; the mid range reuses the erfc
/// rational tail so that `exp(x²)` cancels exactly:
/// `erfcx(x) = exp(-0.5625 + R/S)/x` for `1.25 <= x < 28`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // erfcx(-x) = 2·exp(x²) - erfcx(x); overflows to +inf for x < -26.6
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 1.25 {
        return (x * x).exp() * erfc(x);
    }
    if x < 28.0 {
        return f64::exp(-0.5625 + erfc_tail_rs(x)) / x;
    }
    // asymptotic series erfcx(x) ~ (1/x√π)·Σ (-1)^k (2k-1)!!/(2x²)^k;
    // at x >= 28 the k=8 term is already below f64 resolution
    let z = 0.5 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=8u32 {
        term *= -(f64::from(2 * k - 1)) * z;
        sum += term;
    }
    sum / (x * std::f64::consts::PI.sqrt())
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature (7-point Gauss / 15-point Kronrod pair).
// ---------------------------------------------------------------------------

/// Tolerances and subdivision budget for [`integrate`] /
/// [`integrate_semi_infinite`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Relative tolerance on the accumulated integral.
    pub rel_tol: f64,
    /// Absolute tolerance floor, for integrals near zero.
    pub abs_tol: f64,
    /// Maximum number of interval bisections before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 256,
        }
    }
}

impl QuadratureSpec {
    /// Same budget with a different relative tolerance; used for inner
    /// integrals of nested quadrature, which must run tighter than the outer.
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..self }
    }
}

/// Outcome of an adaptive quadrature: best estimate plus diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    /// Conservative estimate of the absolute error in `value`.
    pub error_estimate: f64,
    /// False when the subdivision budget ran out before the tolerance was met;
    /// `value` is then still the best available estimate.
    pub converged: bool,
    pub subdivisions: usize,
    pub evaluations: usize,
}

// Kronrod abscissae: positive half, the even-indexed entries are the
// embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_47,
    0.405_845_151_377_397_17,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_4,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];
const WGK: [f64; 8] = [
    0.209_482_141_084_727_83,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_92,
    0.104_790_010_322_250_18,
    0.063_092_092_629_978_55,
    0.022_935_322_010_529_225,
];
const WG: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_94,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// QUADPACK-style error rescaling: damps the raw |Kronrod - Gauss| difference
/// by the integrand's variation so that nearly-exact rules do not report
/// spuriously optimistic errors, with a floor at 50 ulps of the L1 norm.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    let min_err = 50.0 * f64::EPSILON * result_abs;
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && min_err > err {
        err = min_err;
    }
    err
}

/// One 15-point Kronrod evaluation over [a, b]: returns (integral, error).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut result_gauss = WG[0] * f_center;
    let mut result_kronrod = WGK[0] * f_center;
    let mut result_abs = WGK[0] * f_center.abs();

    let mut fv = [0.0f64; 8]; // pair sums f(center-hx) + f(center+hx)
    fv[0] = f_center;
    for j in 1..8 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1 + f2;
        result_kronrod += WGK[j] * fv[j];
        result_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 0 {
            result_gauss += WG[j / 2] * fv[j];
        }
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[0] * (f_center - mean).abs();
    for j in 1..8 {
        // |f - mean| accumulated per node; fv holds pair sums, so split evenly
        result_asc += WGK[j] * (fv[j] - 2.0 * mean).abs();
    }

    let value = result_kronrod * half;
    let raw_err = ((result_kronrod - result_gauss) * half).abs();
    let err = rescale_error(raw_err, result_abs * half.abs(), result_asc * half.abs());
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn integrate_segments<F: Fn(f64) -> f64>(
    f: &F,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Quadrature {
    let mut segments: Vec<Segment> = Vec::with_capacity(breakpoints.len() + 7);
    let mut evaluations = 0usize;
    for w in breakpoints.windows(2) {
        let (v, e) = qk15(f, w[0], w[1]);
        evaluations += 15;
        segments.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    let mut subdivisions = 0usize;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        let tolerance = (spec.rel_tol * total.abs()).max(spec.abs_tol);
        if total_err <= tolerance {
            return Quadrature {
                value: total,
                error_estimate: total_err,
                converged: true,
                subdivisions,
                evaluations,
            };
        }
        if subdivisions >= spec.max_subdivisions {
            return Quadrature {
                value: total,
                error_estimate: total_err,
                converged: false,
                subdivisions,
                evaluations,
            };
        }

        let worst = segments
            .iter()
            .enumerate()
            .max_by(|(_, s1), (_, s2)| s1.error.total_cmp(&s2.error))
            .map(|(i, _)| i)
            .unwrap();
        let Segment { a, b, .. } = segments[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval no longer splittable at f64 resolution
            return Quadrature {
                value: total,
                error_estimate: total_err,
                converged: false,
                subdivisions,
                evaluations,
            };
        }
        let (v1, e1) = qk15(f, a, mid);
        let (v2, e2) = qk15(f, mid, b);
        evaluations += 30;
        segments[worst] = Segment {
            a,
            b: mid,
            value: v1,
            error: e1,
        };
        segments.push(Segment {
            a: mid,
            b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
}

/// Adaptive quadrature of `f` over the finite interval [a, b].
///
/// Bisects the sub-interval with the largest error estimate until the summed
/// error falls below `max(rel_tol·|I|, abs_tol)` or the subdivision budget is
/// exhausted (flagged through [`Quadrature::converged`]).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, NumericsError> {
    if !(a < b) {
        return Err(NumericsError::InvalidInterval { lo: a, hi: b });
    }
    Ok(integrate_segments(&f, &[a, b], spec))
}

/// Adaptive quadrature of `f` over [a, ∞) for integrands that decay at least
/// exponentially.
///
/// Maps x = a + t/(1-t) onto t ∈ [0, 1] and integrates the transformed
/// integrand, seeding the refinement with a geometric ladder of breakpoints
/// near t = 0 so that decay scales many orders of magnitude shorter than the
/// (infinite) range are resolved before the first convergence check.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, NumericsError> {
    let g = move |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let x = a + t / u;
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx / (u * u)
        }
    };
    let breakpoints = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0];
    Ok(integrate_segments(&g, &breakpoints, spec))
}

// ---------------------------------------------------------------------------
// Root finding and scalar minimization.
// ---------------------------------------------------------------------------

/// Bracketed bisection: finds x in [lo, hi] with f(x) = 0, assuming
/// f(lo)·f(hi) <= 0. The bracket halves every step, so the iteration count is
/// bounded by log2((hi-lo)/tol) regardless of f's shape.
pub fn find_root<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    if !(lo < hi) {
        return Err(NumericsError::InvalidInterval { lo, hi });
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(NumericsError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f_lo;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at f64 resolution
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 - 1)/2

/// Golden-section search for the minimizer of a unimodal `f` on [lo, hi].
///
/// Returns `(argmin, f(argmin))` with the argmin located within `tol`.
/// Unimodality is the caller's responsibility; on a multimodal function the
/// result is only guaranteed to be a local minimum.
pub fn minimize_scalar<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), NumericsError> {
    if !(lo < hi) {
        return Err(NumericsError::InvalidInterval { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        if x2 <= x1 {
            break; // interval at f64 resolution
        }
    }
    let xm = 0.5 * (a + b);
    Ok((xm, f(xm)))
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation (Fritsch-Carlson).
// ---------------------------------------------------------------------------

/// Shape-preserving piecewise-cubic interpolant: where the data are monotone,
/// the interpolant is monotone too (no overshoot between nodes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    derivs: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from strictly increasing nodes `xs`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, NumericsError> {
        let n = xs.len();
        if n < 2 || ys.len() != n || xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(NumericsError::DegenerateNodes);
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut d = vec![0.0; n];
        d[0] = endpoint_deriv(h[0], h.get(1).copied().unwrap_or(h[0]), secants[0], secants.get(1).copied().unwrap_or(secants[0]));
        d[n - 1] = endpoint_deriv(
            h[n - 2],
            if n > 2 { h[n - 3] } else { h[n - 2] },
            secants[n - 2],
            if n > 2 { secants[n - 3] } else { secants[n - 2] },
        );
        for i in 1..n - 1 {
            let (s0, s1) = (secants[i - 1], secants[i]);
            if s0 * s1 <= 0.0 {
                d[i] = 0.0;
            } else {
                // weighted harmonic mean keeps the interpolant monotone
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / s0 + w2 / s1);
            }
        }
        Ok(MonotoneCubic { xs, ys, derivs: d })
    }

    /// Evaluates the interpolant, clamping to the end values outside the node
    /// range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            k => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
        // cubic Hermite basis
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * h * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * h * (t3 - t2)
    }
}

/// Three-point end-slope estimate with the usual shape-preserving clamps.
fn endpoint_deriv(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

// ---------------------------------------------------------------------------
