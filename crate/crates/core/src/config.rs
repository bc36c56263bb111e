//! Run configuration, read from TOML.
//!
//! Every key is optional; missing keys take the defaults of the built-in
//! reference run (see `configs/default.toml`). Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{EstimatorConfig, Mode};
use crate::signal::{NoiseSpec, ReferenceSpec};
use crate::spectral::SearchRanges;
use crate::tracking::Initialization;
use crate::validation::{InitStrategy, MonteCarloSetup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub sample_rate: f64,
    pub n_samples: usize,
    pub f0_hz: f64,
    pub fundamental_amplitude: f64,
    pub fundamental_phase: f64,
    /// Amplitudes of harmonics `l = 2, 3, …`.
    pub harmonic_amplitudes: Vec<f64>,
    pub harmonic_phases: Vec<f64>,
    pub fc_hz: f64,
    pub interharmonic_indices: Vec<i32>,
    pub interharmonic_amplitudes: Vec<f64>,
    pub interharmonic_phases: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            sample_rate: 1000.0,
            n_samples: 1000,
            f0_hz: 60.0,
            fundamental_amplitude: 0.7,
            fundamental_phase: 0.0,
            harmonic_amplitudes: vec![0.6, 0.5, 0.4],
            harmonic_phases: vec![0.0, 0.0, 0.0],
            fc_hz: 5.0,
            interharmonic_indices: vec![1, 2, 3],
            interharmonic_amplitudes: vec![0.3, 0.2, 0.1],
            interharmonic_phases: vec![0.0, 0.0, 0.0],
            sigma: 0.25,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    #[default]
    Spectral,
    /// Start from the generating parameters (synthetic runs only).
    Truth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub alpha: f64,
    pub max_iters: usize,
    pub mode: Mode,
    pub rel_tol: f64,
    pub freq_precondition: bool,
    pub init: InitKind,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let d = EstimatorConfig::default();
        Self {
            alpha: d.alpha,
            max_iters: d.max_iters,
            mode: d.mode,
            rel_tol: d.rel_tol,
            freq_precondition: d.freq_precondition,
            init: InitKind::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingSection {
    pub segment_length: usize,
}

impl Default for TrackingSection {
    fn default() -> Self {
        Self {
            segment_length: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    /// FFT size for spectrum outputs; 0 means the signal length.
    pub n_fft: usize,
    pub f0_search_hz: [f64; 2],
    pub fc_search_hz: [f64; 2],
}

impl Default for SpectralSection {
    fn default() -> Self {
        let r = SearchRanges::default();
        Self {
            n_fft: 0,
            f0_search_hz: [*r.f0_hz.start(), *r.f0_hz.end()],
            fc_search_hz: [*r.fc_hz.start(), *r.fc_hz.end()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub n_trials: usize,
    pub base_seed: u64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            n_trials: 200,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub signal: SignalSection,
    pub estimator: EstimatorSection,
    pub tracking: TrackingSection,
    pub spectral: SpectralSection,
    pub montecarlo: MonteCarloSection,
}

fn first_backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let key = first_backticked(&message).unwrap_or("<file>").to_string();
            Error::Config { key, message }
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::config("<file>", format!("{}: {e}", p.display())))?;
                Self::from_toml_str(&text)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.signal;
        if !(s.sample_rate.is_finite() && s.sample_rate > 0.0) {
            return Err(Error::config("sample_rate", "must be finite and > 0"));
        }
        if s.n_samples == 0 {
            return Err(Error::config("n_samples", "must be >= 1"));
        }
        if !(s.sigma.is_finite() && s.sigma >= 0.0) {
            return Err(Error::config("sigma", "must be finite and >= 0"));
        }
        if s.harmonic_phases.len() != s.harmonic_amplitudes.len() {
            return Err(Error::config(
                "harmonic_phases",
                "needs one phase per harmonic amplitude",
            ));
        }
        let n_inter = s.interharmonic_indices.len();
        if s.interharmonic_amplitudes.len() != n_inter {
            return Err(Error::config(
                "interharmonic_amplitudes",
                "needs one amplitude per interharmonic index",
            ));
        }
        if s.interharmonic_phases.len() != n_inter {
            return Err(Error::config(
                "interharmonic_phases",
                "needs one phase per interharmonic index",
            ));
        }
        let all_amplitudes = std::iter::once(s.fundamental_amplitude)
            .chain(s.harmonic_amplitudes.iter().copied())
            .chain(s.interharmonic_amplitudes.iter().copied());
        for a in all_amplitudes {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::config(
                    "amplitudes",
                    format!("{a} is not a valid amplitude"),
                ));
            }
        }
        self.reference_spec()
            .params()
            .map_err(|e| Error::config("signal", e.to_string()))?;

        self.estimator_config().validate()?;

        let m = self.tracking.segment_length;
        if m == 0 {
            return Err(Error::config("segment_length", "must be >= 1"));
        }
        let components = 1 + s.harmonic_amplitudes.len() + n_inter;
        if m < components {
            return Err(Error::config(
                "segment_length",
                format!("{m} samples cannot determine {components} components"),
            ));
        }

        let sp = &self.spectral;
        if sp.n_fft != 0 && sp.n_fft < s.n_samples {
            return Err(Error::config("n_fft", "must be 0 or >= n_samples"));
        }
        let nyquist = s.sample_rate / 2.0;
        for (key, [lo, hi]) in [
            ("f0_search_hz", sp.f0_search_hz),
            ("fc_search_hz", sp.fc_search_hz),
        ] {
            if !(lo > 0.0 && lo <= hi && hi < nyquist) {
                return Err(Error::config(
                    key,
                    format!("range [{lo}, {hi}] must be non-empty and inside (0, {nyquist})"),
                ));
            }
        }

        if self.montecarlo.n_trials == 0 {
            return Err(Error::config("n_trials", "must be >= 1"));
        }
        Ok(())
    }

    pub fn reference_spec(&self) -> ReferenceSpec {
        let s = &self.signal;
        ReferenceSpec {
            sample_rate: s.sample_rate,
            n_samples: s.n_samples,
            f0_hz: s.f0_hz,
            fundamental_amplitude: s.fundamental_amplitude,
            fundamental_phase: s.fundamental_phase,
            harmonics: s
                .harmonic_amplitudes
                .iter()
                .zip(&s.harmonic_phases)
                .enumerate()
                .map(|(i, (&a, &phi))| (i as u32 + 2, a, phi))
                .collect(),
            fc_hz: s.fc_hz,
            interharmonics: s
                .interharmonic_indices
                .iter()
                .zip(&s.interharmonic_amplitudes)
                .zip(&s.interharmonic_phases)
                .map(|((&k, &a), &phi)| (k, a, phi))
                .collect(),
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            sigma: self.signal.sigma,
            seed: self.signal.seed,
        }
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        let e = &self.estimator;
        EstimatorConfig {
            alpha: e.alpha,
            max_iters: e.max_iters,
            mode: e.mode,
            rel_tol: e.rel_tol,
            freq_precondition: e.freq_precondition,
        }
    }

    pub fn search_ranges(&self) -> SearchRanges {
        let [a, b] = self.spectral.f0_search_hz;
        let [c, d] = self.spectral.fc_search_hz;
        SearchRanges {
            f0_hz: a..=b,
            fc_hz: c..=d,
        }
    }

    /// First-segment start for tracking; `truth` is used for
    /// [`InitKind::Truth`].
    pub fn initialization(&self, truth: &crate::signal::ModelParams) -> Initialization {
        match self.estimator.init {
            InitKind::Spectral => Initialization::Spectral(self.search_ranges()),
            InitKind::Truth => Initialization::Given(truth.clone()),
        }
    }

    pub fn n_fft(&self) -> usize {
        match self.spectral.n_fft {
            0 => self.signal.n_samples,
            n => n,
        }
    }

    pub fn montecarlo_setup(&self) -> MonteCarloSetup {
        MonteCarloSetup {
            reference: self.reference_spec(),
            segment_length: self.tracking.segment_length,
            noise_sigma: self.signal.sigma,
            n_trials: self.montecarlo.n_trials,
            base_seed: self.montecarlo.base_seed,
            config: self.estimator_config(),
            init: match self.estimator.init {
                InitKind::Spectral => InitStrategy::Spectral(self.search_ranges()),
                InitKind::Truth => InitStrategy::Truth,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_run() {
        let c = RunConfig::load(None).unwrap();
        assert_eq!(c.signal.f0_hz, 60.0);
        assert_eq!(c.signal.sigma, 0.25);
        assert_eq!(c.estimator.alpha, 0.1);
        assert_eq!(c.estimator.max_iters, 350);
        assert_eq!(c.tracking.segment_length, 250);
        assert_eq!(c.montecarlo.n_trials, 200);
        assert_eq!(c.reference_spec(), ReferenceSpec::default());
    }

    #[test]
    fn negative_sigma_names_the_key() {
        let err = RunConfig::from_toml_str("[signal]\nsigma = -1.0\n").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref key, .. } if key == "sigma"),
            "{err}"
        );
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let c = RunConfig::from_toml_str("[estimator]\nalpha = 0.05\n").unwrap();
        assert_eq!(c.estimator.alpha, 0.05);
        let mut expected = RunConfig::default();
        expected.estimator.alpha = 0.05;
        assert_eq!(c, expected);
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = RunConfig::from_toml_str("[signal]\nsigmaa = 0.1\n").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref key, .. } if key == "sigmaa"),
            "{err}"
        );
    }

    #[test]
    fn malformed_file_is_a_config_error() {
        assert!(matches!(
            RunConfig::from_toml_str("[signal\nsigma = "),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn mode_parses_from_file() {
        let c = RunConfig::from_toml_str("[estimator]\nmode = \"joint\"\n").unwrap();
        assert_eq!(c.estimator.mode, Mode::Joint);
    }

    #[test]
    fn mismatched_phase_count_is_rejected() {
        let err = RunConfig::from_toml_str("[signal]\nharmonic_phases = [0.0]\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "harmonic_phases"));
    }

    #[test]
    fn committed_default_file_matches_builtin_defaults() {
        let text = include_str!("../configs/default.toml");
        assert_eq!(
            RunConfig::from_toml_str(text).unwrap(),
            RunConfig::default()
        );
    }
}
