//! Mission parameter model: the seven quantities that fix the acquisition
//! geometry and dynamics, their validation rules, and ingestion from a flat
//! TOML file with unit-suffixed values.
//!
//! Internal units are SI throughout (radians, seconds, hertz). Config files
//! carry explicit unit suffixes (`"40 urad"`, `"70 mrad/s"`) and the loader
//! converts; bare numbers are rejected so a µrad/mrad mix-up cannot slip
//! through as a silent factor of 1000.

use std::f64::consts::PI;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown config key `{key}` (valid keys: {valid})")]
    UnknownKey { key: String, valid: &'static str },
    #[error("config key `{key}`: expected a string like \"40 urad\", got {found}")]
    NotAString { key: String, found: String },
    #[error("config key `{key}`: {reason}")]
    BadQuantity { key: String, reason: String },
    #[error("validation failed: {invariant}")]
    Validation { invariant: String },
}

const VALID_KEYS: &str = "radius_of_detection, track_width, rms_jitter, rolloff_frequency, \
                          uncertainty_sigma, max_scan_radius, scan_speed";

/// How strictly [`MissionParams::validate`] interprets the geometry rules.
///
/// Analytic operations rest on the assumption that the beam can only miss
/// into one of the two adjacent scan tracks, which requires `d_t < 2·r_d`
/// (adjacent detection circles overlap). The Monte Carlo simulator makes no
/// such assumption and accepts gapped geometries, so it validates leniently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    Analytic,
    Simulation,
}

/// Mission parameters, SI units.
///
/// Defaults reproduce a representative LEO crosslink: detection radius
/// 40 µrad, track width 62.8 µrad, per-axis RMS jitter 15.85 µrad with 1 Hz
/// roll-off, pointing uncertainty 290.7 µrad scanned out to 1000 µrad at
/// 70 mrad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionParams {
    /// Radius of detection R_d: maximum beam-to-receiver separation that
    /// still closes the link (radians).
    pub r_d: f64,
    /// Spiral track width D_t: radial distance between successive
    /// revolutions (radians).
    pub d_t: f64,
    /// RMS beam jitter per degree of freedom σ_n (radians).
    pub sigma_n: f64,
    /// Jitter spectral roll-off frequency f_r (hertz).
    pub f_r: f64,
    /// Width σ_uc of the Rayleigh-distributed initial pointing uncertainty
    /// (radians).
    pub sigma_uc: f64,
    /// Maximum scan radius R_uc: the spiral terminates here (radians).
    pub r_uc: f64,
    /// Tangential scan speed γ (radians/second).
    pub gamma: f64,
    /// Explicit PSD plateau override (rad²/Hz); `None` keeps S(0) coupled
    /// to `sigma_n` (see [`MissionParams::psd_level`]).
    pub psd_override: Option<f64>,
}

impl Default for MissionParams {
    fn default() -> Self {
        MissionParams {
            r_d: 40e-6,
            d_t: 62.8e-6,
            sigma_n: 15.85e-6,
            f_r: 1.0,
            sigma_uc: 290.7e-6,
            r_uc: 1000e-6,
            gamma: 70e-3,
            psd_override: None,
        }
    }
}

impl MissionParams {
    /// PSD plateau S(0) in rad²/Hz.
    ///
    /// Unless overridden, this is `2σ_n²/(π·f_r)`, the unique plateau for
    /// which a Lorentzian spectrum with roll-off `f_r` integrates to a
    /// per-axis variance of σ_n² (159.9 µrad²/Hz at the defaults).
    pub fn psd_level(&self) -> f64 {
        self.psd_override
            .unwrap_or(2.0 * self.sigma_n * self.sigma_n / (PI * self.f_r))
    }

    /// Checks the parameter invariants, returning human-readable warnings
    /// for conditions that stretch the model without invalidating it.
    pub fn validate(&self, mode: ValidationMode) -> Result<Vec<String>, ConfigError> {
        let fields = [
            ("radius_of_detection", self.r_d),
            ("track_width", self.d_t),
            ("rms_jitter", self.sigma_n),
            ("rolloff_frequency", self.f_r),
            ("uncertainty_sigma", self.sigma_uc),
            ("max_scan_radius", self.r_uc),
            ("scan_speed", self.gamma),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ConfigError::Validation {
                    invariant: format!("{name} must be finite, got {value}"),
                });
            }
            // jitter-free runs (sigma_n = 0) are meaningful for both model
            // routes; every other quantity must be strictly positive
            let lo_ok = if name == "rms_jitter" { value >= 0.0 } else { value > 0.0 };
            if !lo_ok {
                return Err(ConfigError::Validation {
                    invariant: format!("{name} must be strictly positive, got {value}"),
                });
            }
        }
        if self.r_uc <= self.sigma_uc {
            return Err(ConfigError::Validation {
                invariant: format!(
                    "r_uc > sigma_uc violated (r_uc={} rad, sigma_uc={} rad): the scan must \
                     cover the core of the uncertainty distribution",
                    self.r_uc, self.sigma_uc
                ),
            });
        }
        if let Some(psd) = self.psd_override {
            let coupled = 2.0 * self.sigma_n * self.sigma_n / (PI * self.f_r);
            let consistent = if coupled == 0.0 {
                psd == 0.0
            } else {
                ((psd - coupled) / coupled).abs() <= 0.01
            };
            if !consistent {
                return Err(ConfigError::Validation {
                    invariant: format!(
                        "psd_level={psd:e} rad²/Hz contradicts rms_jitter (plateau consistent \
                         with sigma_n is {coupled:e} rad²/Hz); they must agree within 1%"
                    ),
                });
            }
        }

        let mut warnings = Vec::new();
        if self.d_t >= 2.0 * self.r_d {
            match mode {
                ValidationMode::Analytic => {
                    return Err(ConfigError::Validation {
                        invariant: format!(
                            "d_t < 2·r_d violated (d_t={} rad, r_d={} rad): adjacent detection \
                             circles must overlap for the two-track failure model",
                            self.d_t, self.r_d
                        ),
                    });
                }
                ValidationMode::Simulation => warnings.push(format!(
                    "d_t >= 2·r_d (d_t={} rad, r_d={} rad) leaves gaps between tracks; the \
                     simulator accepts this but analytic operations reject it",
                    self.d_t, self.r_d
                )),
            }
        }
        if self.sigma_n >= self.r_d.min(self.d_t) {
            warnings.push(format!(
                "rms_jitter={} rad is not small compared to min(r_d, d_t)={} rad; the two-track \
                 failure model is outside its stated validity range",
                self.sigma_n,
                self.r_d.min(self.d_t)
            ));
        }
        Ok(warnings)
    }

    /// Applies one `key=value` override (the CLI `--set` path). Accepts the
    /// seven config-file keys plus `psd_level`.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "radius_of_detection" => self.r_d = parse_quantity(key, value, Dimension::Angle)?,
            "track_width" => self.d_t = parse_quantity(key, value, Dimension::Angle)?,
            "rms_jitter" => self.sigma_n = parse_quantity(key, value, Dimension::Angle)?,
            "rolloff_frequency" => self.f_r = parse_quantity(key, value, Dimension::Frequency)?,
            "uncertainty_sigma" => self.sigma_uc = parse_quantity(key, value, Dimension::Angle)?,
            "max_scan_radius" => self.r_uc = parse_quantity(key, value, Dimension::Angle)?,
            "scan_speed" => self.gamma = parse_quantity(key, value, Dimension::AngularSpeed)?,
            "psd_level" => {
                self.psd_override = Some(parse_quantity(key, value, Dimension::PsdLevel)?)
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    valid: "radius_of_detection, track_width, rms_jitter, rolloff_frequency, \
                            uncertainty_sigma, max_scan_radius, scan_speed, psd_level",
                })
            }
        }
        Ok(())
    }

    /// Serializes to the config-file format, full-precision SI values.
    /// `from_config_str(to_config_string())` reproduces the parameters
    /// exactly.
    pub fn to_config_string(&self) -> String {
        format!(
            "radius_of_detection = \"{} rad\"\n\
             track_width = \"{} rad\"\n\
             rms_jitter = \"{} rad\"\n\
             rolloff_frequency = \"{} Hz\"\n\
             uncertainty_sigma = \"{} rad\"\n\
             max_scan_radius = \"{} rad\"\n\
             scan_speed = \"{} rad/s\"\n",
            self.r_d, self.d_t, self.sigma_n, self.f_r, self.sigma_uc, self.r_uc, self.gamma
        )
    }

    /// Parses the config-file format. Missing keys keep their defaults;
    /// unknown keys are an error so typos cannot silently fall back.
    pub fn from_config_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse()?;
        let mut params = MissionParams::default();
        for (key, value) in &table {
            let raw = value.as_str().ok_or_else(|| ConfigError::NotAString {
                key: key.clone(),
                found: value.to_string(),
            })?;
            match key.as_str() {
                "radius_of_detection" | "track_width" | "rms_jitter" | "rolloff_frequency"
                | "uncertainty_sigma" | "max_scan_radius" | "scan_speed" => {
                    params.apply_override(key, raw)?
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        key: key.clone(),
                        valid: VALID_KEYS,
                    })
                }
            }
        }
        Ok(params)
    }

    /// FNV-1a hash of the parameter bits, for tagging results with the
    /// exact inputs that produced them.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut absorb = |v: f64| {
            for byte in v.to_bits().to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        absorb(self.r_d);
        absorb(self.d_t);
        absorb(self.sigma_n);
        absorb(self.f_r);
        absorb(self.sigma_uc);
        absorb(self.r_uc);
        absorb(self.gamma);
        absorb(self.psd_level());
        hash
    }
}

/// Loads and validates mission parameters from a TOML file. An empty file
/// (or one with a subset of keys) fills in the defaults.
pub fn load_params(path: &Path) -> Result<MissionParams, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let params = MissionParams::from_config_str(&text)?;
    params.validate(ValidationMode::Analytic)?;
    Ok(params)
}

/// Characteristic scales derived from the mission parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Jitter autocorrelation 1/e width τ₀ = 1/(2π·f_r) (seconds).
    pub tau_0: f64,
    /// Mean spiral revolution time T_mean = √(π/2)·2π·σ_uc/γ (seconds).
    pub t_mean: f64,
    /// Scan speed below which one revolution outlasts τ₀ on average, so
    /// adjacent-track jitter decorrelates: γ_min = f_r·√(π/2)·(2π)²·σ_uc
    /// (radians/second).
    pub gamma_min: f64,
    /// Decay constant of the adjacent-track correlation δ(r) = e^(−βr):
    /// β = (2π)²·f_r/γ (radians⁻¹).
    pub beta: f64,
    /// Compound correlation parameter η = γ/(σ_uc·f_r), dimensionless;
    /// the averaged failure probability depends on γ, σ_uc, f_r only
    /// through η (and on R_uc only through R_uc/σ_uc).
    pub eta: f64,
}

/// Computes the derived scales; `p` is assumed validated.
pub fn derive_scales(p: &MissionParams) -> DerivedScales {
    let two_pi = 2.0 * PI;
    DerivedScales {
        tau_0: 1.0 / (two_pi * p.f_r),
        t_mean: (PI / 2.0).sqrt() * two_pi * p.sigma_uc / p.gamma,
        gamma_min: p.f_r * (PI / 2.0).sqrt() * two_pi * two_pi * p.sigma_uc,
        beta: two_pi * two_pi * p.f_r / p.gamma,
        eta: p.gamma / (p.sigma_uc * p.f_r),
    }
}

// ---------------------------------------------------------------------------
// Unit-suffixed quantity parsing.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Dimension {
    Angle,
    AngularSpeed,
    Frequency,
    PsdLevel,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Angle => &[("rad", 1.0), ("mrad", 1e-3), ("urad", 1e-6), ("µrad", 1e-6)],
            Dimension::AngularSpeed => &[
                ("rad/s", 1.0),
                ("mrad/s", 1e-3),
                ("urad/s", 1e-6),
                ("µrad/s", 1e-6),
            ],
            Dimension::Frequency => &[("Hz", 1.0), ("mHz", 1e-3), ("kHz", 1e3)],
            Dimension::PsdLevel => &[
                ("rad^2/Hz", 1.0),
                ("rad²/Hz", 1.0),
                ("mrad^2/Hz", 1e-6),
                ("mrad²/Hz", 1e-6),
                ("urad^2/Hz", 1e-12),
                ("urad²/Hz", 1e-12),
                ("µrad^2/Hz", 1e-12),
                ("µrad²/Hz", 1e-12),
            ],
        }
    }

    fn expectation(self) -> &'static str {
        match self {
            Dimension::Angle => "an angle like \"40 urad\", \"0.07 mrad\", or \"4e-5 rad\"",
            Dimension::AngularSpeed => "an angular speed like \"70 mrad/s\" or \"0.07 rad/s\"",
            Dimension::Frequency => "a frequency like \"1 Hz\"",
            Dimension::PsdLevel => "a PSD level like \"160 urad^2/Hz\"",
        }
    }
}

fn parse_quantity(key: &str, raw: &str, dim: Dimension) -> Result<f64, ConfigError> {
    let bad = |reason: String| ConfigError::BadQuantity {
        key: key.to_string(),
        reason,
    };
    // The unit may follow the number directly ("40mrad/s") or after
    // whitespace ("40 mrad/s"); the number is the longest prefix of
    // numeric characters. Exponents keep their sign ("1e-3 rad").
    let trimmed = raw.trim();
    let split = trimmed
        .char_indices()
        .scan(' ', |prev, (i, c)| {
            let numeric = c.is_ascii_digit()
                || c == '.'
                || c == 'e'
                || c == 'E'
                || ((c == '+' || c == '-') && (i == 0 || *prev == 'e' || *prev == 'E'));
            *prev = c;
            Some((i, numeric))
        })
        .find(|(_, numeric)| !numeric)
        .map(|(i, _)| i)
        .unwrap_or(trimmed.len());
    let (number, unit) = trimmed.split_at(split);
    let unit = unit.trim_start();
    if number.is_empty() {
        return Err(bad(format!(
            "no number in \"{raw}\", expected {}",
            dim.expectation()
        )));
    }
    if unit.is_empty() {
        return Err(bad(format!(
            "missing unit in \"{raw}\", expected {}",
            dim.expectation()
        )));
    }
    let value: f64 = number
        .parse()
        .map_err(|_| bad(format!("cannot parse \"{number}\" as a number")))?;
    if !value.is_finite() {
        return Err(bad(format!("\"{number}\" is not finite")));
    }
    let scale = dim
        .units()
        .iter()
        .find(|(name, _)| *name == unit)
        .map(|(_, scale)| *scale)
        .ok_or_else(|| {
            bad(format!(
                "unknown unit \"{unit}\", expected {}",
                dim.expectation()
            ))
        })?;
    Ok(value * scale)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_rel(actual: f64, expected: f64, tol: f64) {
        let err = if expected == 0.0 {
            actual.abs()
        } else {
            ((actual - expected) / expected).abs()
        };
        assert!(
            err <= tol,
            "actual={actual:e} expected={expected:e} rel_err={err:e} tol={tol:e}"
        );
    }

    #[test]
    fn defaults_are_the_documented_mission() {
        let p = MissionParams::default();
        assert_eq!(p.r_d, 40e-6);
        assert_eq!(p.d_t, 62.8e-6);
        assert_eq!(p.sigma_n, 15.85e-6);
        assert_eq!(p.f_r, 1.0);
        assert_eq!(p.sigma_uc, 290.7e-6);
        assert_eq!(p.r_uc, 1000e-6);
        assert_eq!(p.gamma, 70e-3);
        assert!(p.validate(ValidationMode::Analytic).unwrap().is_empty());
        // S(0) = 2σ_n²/(π f_r) ≈ 160 µrad²/Hz
        assert_rel(p.psd_level(), 1.59933210763615e-10, 1e-12);
        assert_rel(p.psd_level(), 160e-12, 5e-4);
    }

    #[test]
    fn derived_scales_reference_values() {
        let scales = derive_scales(&MissionParams::default());
        assert_rel(scales.tau_0, 0.159154943091895, 1e-12);
        assert_rel(scales.t_mean, 0.0327029400801536, 1e-12);
        assert_rel(scales.gamma_min, 0.0143835042829237, 1e-12);
        assert_rel(scales.eta, 240.798073615411, 1e-12);

        let slow = MissionParams {
            gamma: 10e-3,
            ..MissionParams::default()
        };
        assert_rel(derive_scales(&slow).beta, 3947.84176043574, 1e-12);
    }

    #[test]
    fn derived_scales_scale_consistently() {
        let p = MissionParams::default();
        let s1 = derive_scales(&p);
        let s2 = derive_scales(&MissionParams { gamma: 2.0 * p.gamma, ..p });
        assert_rel(s2.beta, 0.5 * s1.beta, 1e-15);
        assert_rel(s2.t_mean, 0.5 * s1.t_mean, 1e-15);
        assert_eq!(s2.tau_0, s1.tau_0);
        // t_mean·γ = √(π/2)·2π·σ_uc independent of γ
        assert_rel(s1.t_mean * p.gamma, s2.t_mean * 2.0 * p.gamma, 1e-15);
    }

    #[test]
    fn eta_equality_implies_equal_sigma_uc_beta_product() {
        let p = MissionParams::default();
        for k in [0.5, 2.0, 5.0] {
            let q = MissionParams {
                sigma_uc: k * p.sigma_uc,
                r_uc: k * p.r_uc,
                gamma: k * p.gamma,
                ..p
            };
            let (sp, sq) = (derive_scales(&p), derive_scales(&q));
            assert_rel(sq.eta, sp.eta, 1e-14);
            assert_rel(q.sigma_uc * sq.beta, p.sigma_uc * sp.beta, 1e-14);
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        let p = MissionParams::from_config_str("").unwrap();
        assert_eq!(p, MissionParams::default());
    }

    #[test]
    fn unit_suffixes_convert_to_si() {
        let text = r#"
            scan_speed = "40 mrad/s"
            track_width = "62.8 urad"
            radius_of_detection = "40 µrad"
            rolloff_frequency = "1 Hz"
        "#;
        let p = MissionParams::from_config_str(text).unwrap();
        assert_rel(p.gamma, 0.040, 1e-15);
        assert_rel(p.d_t, 62.8e-6, 1e-15);
        assert_rel(p.r_d, 40e-6, 1e-15);
        assert_eq!(p.f_r, 1.0);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = MissionParams::from_config_str("track_widht = \"60 urad\"").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { .. }));
        assert!(err.to_string().contains("track_widht"));
    }

    #[test]
    fn bare_number_is_rejected() {
        let err = MissionParams::from_config_str("track_width = \"62.8\"").unwrap_err();
        assert!(err.to_string().contains("missing unit"));
        let err = MissionParams::from_config_str("track_width = 62.8").unwrap_err();
        assert!(matches!(err, ConfigError::NotAString { .. }));
    }

    #[test]
    fn wrong_dimension_unit_is_rejected() {
        let err = MissionParams::from_config_str("scan_speed = \"70 mrad\"").unwrap_err();
        assert!(err.to_string().contains("unknown unit"));
    }

    #[test]
    fn track_width_overlap_rule_by_mode() {
        let text = "track_width = \"90 urad\"\nradius_of_detection = \"40 urad\"";
        let p = MissionParams::from_config_str(text).unwrap();
        let err = p.validate(ValidationMode::Analytic).unwrap_err();
        assert!(err.to_string().contains("d_t < 2·r_d"));
        let warnings = p.validate(ValidationMode::Simulation).unwrap();
        assert!(warnings.iter().any(|w| w.contains("gaps between tracks")));
    }

    #[test]
    fn scan_must_cover_uncertainty_core() {
        let p = MissionParams {
            r_uc: 200e-6,
            ..MissionParams::default()
        };
        let err = p.validate(ValidationMode::Simulation).unwrap_err();
        assert!(err.to_string().contains("r_uc > sigma_uc"));
    }

    #[test]
    fn large_jitter_warns_but_passes() {
        let p = MissionParams {
            sigma_n: 45e-6,
            ..MissionParams::default()
        };
        let warnings = p.validate(ValidationMode::Analytic).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("validity range"));
    }

    #[test]
    fn zero_jitter_is_accepted() {
        let p = MissionParams {
            sigma_n: 0.0,
            ..MissionParams::default()
        };
        assert!(p.validate(ValidationMode::Simulation).is_ok());
        assert_eq!(p.psd_level(), 0.0);
    }

    #[test]
    fn psd_override_must_match_jitter() {
        let mut p = MissionParams::default();
        p.apply_override("psd_level", "160 urad^2/Hz").unwrap();
        assert!(p.validate(ValidationMode::Analytic).is_ok()); // 159.9 vs 160: within 1%
        assert_rel(p.psd_level(), 160e-12, 1e-12);

        p.apply_override("psd_level", "200 urad^2/Hz").unwrap();
        let err = p.validate(ValidationMode::Analytic).unwrap_err();
        assert!(err.to_string().contains("psd_level"));
    }

    #[test]
    fn roundtrip_preserves_every_bit() {
        let p = MissionParams {
            r_d: 41.7e-6,
            d_t: 58.31e-6,
            sigma_n: 12.3e-6,
            f_r: 2.5,
            sigma_uc: 301.777e-6,
            r_uc: 1.1e-3,
            gamma: 43.21e-3,
            psd_override: None,
        };
        let back = MissionParams::from_config_str(&p.to_config_string()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn fingerprint_tracks_parameter_changes() {
        let p = MissionParams::default();
        let base = p.fingerprint();
        assert_eq!(base, MissionParams::default().fingerprint());
        let q = MissionParams {
            gamma: 40e-3,
            ..p
        };
        assert_ne!(base, q.fingerprint());
    }

    proptest! {
        // serialize → parse is the identity for any physically plausible
        // parameter set, including values with no short decimal form
        #[test]
        fn roundtrip_identity(
            r_d in 1e-6f64..1e-3,
            d_t in 1e-6f64..1e-3,
            sigma_n in 0.0f64..1e-4,
            f_r in 1e-2f64..1e3,
            sigma_uc in 1e-5f64..1e-2,
            r_uc in 1e-5f64..1e-1,
            gamma in 1e-4f64..1.0,
        ) {
            let p = MissionParams {
                r_d, d_t, sigma_n, f_r, sigma_uc, r_uc, gamma,
                psd_override: None,
            };
            let back = MissionParams::from_config_str(&p.to_config_string()).unwrap();
            prop_assert_eq!(p, back);
        }
    }
}
