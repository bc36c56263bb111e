//! Tracking of fundamental, harmonic and interharmonic components in a
//! sampled current.
//!
//! The current is modelled as a sum of complex exponentials with a
//! fundamental at `ω0`, harmonics at `l·ω0` and fault sidebands at
//! `ω0 + k·ωc` (a Vandermonde model). The record is split into fixed-length
//! segments; on each one the frequencies and phasors are estimated by
//! gradient descent on the mean squared residual, and the segment is
//! decomposed into its fundamental, harmonic, interharmonic and residual
//! parts.
//!
//! ```
//! use mcsa::estimation::EstimatorConfig;
//! use mcsa::signal::{reference_signal, NoiseSpec};
//! use mcsa::tracking::{track, Initialization};
//!
//! let (x, _truth, structure) = reference_signal(NoiseSpec::none());
//! let result = track(&x, 250, &structure, &EstimatorConfig::default(), &Initialization::default())?;
//! let f0 = result.per_segment[0].params.f0_hz(x.sample_rate());
//! assert!((f0 - 60.0).abs() < 0.01);
//! # Ok::<(), mcsa::Error>(())
//! ```
//!
//! Modules, bottom up: [`signal`] (model, synthesis, noise), [`estimation`]
//! (loss, gradient, least squares, descent), [`spectral`] (spectra and
//! starting points), [`tracking`] (segments and decomposition),
//! [`validation`] (Monte Carlo RMSE), [`io`], [`config`] and [`cli`].

pub mod cli;
pub mod config;
pub mod error;
pub mod estimation;
pub mod io;
pub mod signal;
pub mod spectral;
pub mod tracking;
pub mod validation;

pub use error::{Error, Result};
