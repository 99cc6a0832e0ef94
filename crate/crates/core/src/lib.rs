//! Acquisition-failure modeling for optical inter-satellite links whose
//! scanning terminal sweeps an Archimedean spiral over a Rayleigh-distributed
//! pointing uncertainty while the beam jitters with a Lorentzian spectrum.
//!
//! The crate provides three independent routes to the probability that a
//! spiral scan misses the counter-spacecraft, plus the scan-architecture
//! metrics built on top of them:
//!
//! - [`analytic`]: the correlated two-track model, a closed quadrature over
//!   the jitter statistics, with its uncorrelated, fully correlated, and
//!   linearized limits and the average over the uncertainty distribution.
//! - [`simulator`]: a Monte Carlo spiral-scan simulator with hard-sphere
//!   detection and an exactly discretized Gauss-Markov jitter process, used to
//!   cross-validate the quadrature model.
//! - [`metrics`]: single- and multi-scan search times, the correlation
//!   efficiency factor, and track-width optimization.
//!
//! Supporting modules: [`config`] (mission parameters, unit-suffixed config
//! files, validation), [`numerics`] (adaptive Gauss-Kronrod quadrature, error
//! functions, root finding, scalar minimization), [`jitter`] (time-series
//! synthesis and spectral estimators).
//!
//! All angles are radians, times seconds, frequencies Hz; config files and
//! reports use µrad/mrad prefixes for readability.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod jitter;
pub mod metrics;
pub mod numerics;
pub mod simulator;

pub use config::{DerivedScales, MissionParams};
