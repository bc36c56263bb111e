//! Structured multi-sinusoid current model.
//!
//! A current record is modelled as a sum of complex exponentials
//!
//! ```text
//! y[n] = c1·e^{jω0 n} + Σ_l c_l·e^{j l ω0 n} + Σ_k c_k·e^{j(ω0 + k ωc) n} + b[n]
//! ```
//!
//! with a fundamental at `ω0`, harmonics at integer multiples `l ≥ 2` and
//! fault-induced interharmonic sidebands at `ω0 + k·ωc`, `k ≠ 0`. Stacking the
//! carriers column-wise gives the N × L Vandermonde matrix `V(ω)` so that the
//! noiseless signal is `V(ω)·C`.
//!
//! Frequencies are stored in rad/sample; Hz only appears at the edges through
//! [`hz_to_omega`] and [`omega_to_hz`].

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub fn hz_to_omega(freq_hz: f64, sample_rate: f64) -> f64 {
    2.0 * PI * freq_hz / sample_rate
}

pub fn omega_to_hz(omega: f64, sample_rate: f64) -> f64 {
    omega * sample_rate / (2.0 * PI)
}

/// Uniformly sampled complex current, in amperes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("signal has no samples"));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Mean of `|x[n]|²`.
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Copy of the samples `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.len())
            .ok_or_else(|| {
                Error::InvalidSignal(format!(
                    "slice [{start}, {start}+{len}) exceeds signal length {}",
                    self.len()
                ))
            })?;
        Self::new(self.samples[start..end].to_vec(), self.sample_rate)
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }
}

/// Identifies one modelled component. The derived ordering (fundamental,
/// harmonics by `l`, interharmonics by `k`) is the canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKey {
    Fundamental,
    Harmonic(u32),
    Interharmonic(i32),
}

impl ComponentKey {
    /// Multiplier of ω0 in this component's frequency.
    pub fn omega0_factor(self) -> f64 {
        match self {
            ComponentKey::Fundamental | ComponentKey::Interharmonic(_) => 1.0,
            ComponentKey::Harmonic(l) => l as f64,
        }
    }

    /// Multiplier of ωc in this component's frequency.
    pub fn omegac_factor(self) -> f64 {
        match self {
            ComponentKey::Interharmonic(k) => k as f64,
            _ => 0.0,
        }
    }

    /// Angular frequency of this component, without range checks.
    pub fn omega(self, omega0: f64, omegac: f64) -> f64 {
        match self {
            ComponentKey::Fundamental => omega0,
            ComponentKey::Harmonic(l) => l as f64 * omega0,
            ComponentKey::Interharmonic(k) => omega0 + k as f64 * omegac,
        }
    }
}

impl fmt::Display for ComponentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKey::Fundamental => write!(f, "c1"),
            ComponentKey::Harmonic(l) => write!(f, "h{l}"),
            ComponentKey::Interharmonic(k) => write!(f, "i{k}"),
        }
    }
}

impl std::str::FromStr for ComponentKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidStructure(format!("unknown component name {s:?}"));
        if s == "c1" {
            return Ok(ComponentKey::Fundamental);
        }
        if let Some(rest) = s.strip_prefix('h') {
            return rest.parse().map(ComponentKey::Harmonic).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix('i') {
            return rest
                .parse()
                .map(ComponentKey::Interharmonic)
                .map_err(|_| bad());
        }
        Err(bad())
    }
}

/// Which harmonics and interharmonics are modelled. The fundamental is
/// always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelStructure {
    harmonics: BTreeSet<u32>,
    interharmonics: BTreeSet<i32>,
}

impl ModelStructure {
    pub fn new(
        harmonics: impl IntoIterator<Item = u32>,
        interharmonics: impl IntoIterator<Item = i32>,
    ) -> Result<Self> {
        let mut h = BTreeSet::new();
        for l in harmonics {
            if l < 2 {
                return Err(Error::InvalidStructure(format!(
                    "harmonic index must be >= 2, got {l}"
                )));
            }
            if !h.insert(l) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate harmonic index {l}"
                )));
            }
        }
        let mut i = BTreeSet::new();
        for k in interharmonics {
            if k == 0 {
                return Err(Error::InvalidStructure(
                    "interharmonic index 0 would duplicate the fundamental".into(),
                ));
            }
            if !i.insert(k) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate interharmonic index {k}"
                )));
            }
        }
        Ok(Self {
            harmonics: h,
            interharmonics: i,
        })
    }

    /// Harmonics `{2, …, H + 1}` and upper sidebands `{1, …, K}`.
    pub fn with_counts(n_harmonics: u32, n_interharmonics: i32) -> Self {
        Self::new(2..n_harmonics + 2, 1..=n_interharmonics).expect("counting indices are valid")
    }

    pub fn fundamental_only() -> Self {
        Self::with_counts(0, 0)
    }

    pub fn harmonics(&self) -> impl Iterator<Item = u32> + '_ {
        self.harmonics.iter().copied()
    }

    pub fn interharmonics(&self) -> impl Iterator<Item = i32> + '_ {
        self.interharmonics.iter().copied()
    }

    pub fn has_interharmonics(&self) -> bool {
        !self.interharmonics.is_empty()
    }

    /// All component keys in canonical order.
    pub fn components(&self) -> Vec<ComponentKey> {
        std::iter::once(ComponentKey::Fundamental)
            .chain(self.harmonics().map(ComponentKey::Harmonic))
            .chain(self.interharmonics().map(ComponentKey::Interharmonic))
            .collect()
    }

    pub fn component_count(&self) -> usize {
        1 + self.harmonics.len() + self.interharmonics.len()
    }

    /// Mean of `k²` over the interharmonic set, 0 when there is none.
    pub fn mean_k_squared(&self) -> f64 {
        if self.interharmonics.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.interharmonics().map(|k| (k as f64).powi(2)).sum();
        sum / self.interharmonics.len() as f64
    }
}

/// Fundamental and fault angular frequencies plus one phasor per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub omega0: f64,
    pub omegac: f64,
    pub phasors: BTreeMap<ComponentKey, Complex64>,
}

impl ModelParams {
    pub fn new(omega0: f64, omegac: f64, phasors: BTreeMap<ComponentKey, Complex64>) -> Self {
        Self {
            omega0,
            omegac,
            phasors,
        }
    }

    /// Phasors given in canonical order for `structure`.
    pub fn from_ordered(
        omega0: f64,
        omegac: f64,
        structure: &ModelStructure,
        phasors: &[Complex64],
    ) -> Result<Self> {
        let keys = structure.components();
        if keys.len() != phasors.len() {
            return Err(Error::InvalidParams(format!(
                "structure has {} components but {} phasors were given",
                keys.len(),
                phasors.len()
            )));
        }
        Ok(Self::new(
            omega0,
            omegac,
            keys.into_iter().zip(phasors.iter().copied()).collect(),
        ))
    }

    /// All phasors zero.
    pub fn zeros(omega0: f64, omegac: f64, structure: &ModelStructure) -> Self {
        Self::new(
            omega0,
            omegac,
            structure
                .components()
                .into_iter()
                .map(|k| (k, Complex64::new(0.0, 0.0)))
                .collect(),
        )
    }

    pub fn phasor(&self, key: ComponentKey) -> Option<Complex64> {
        self.phasors.get(&key).copied()
    }

    /// Phasors in canonical order.
    pub fn ordered_phasors(&self) -> Vec<Complex64> {
        self.phasors.values().copied().collect()
    }

    pub fn f0_hz(&self, sample_rate: f64) -> f64 {
        omega_to_hz(self.omega0, sample_rate)
    }

    pub fn fc_hz(&self, sample_rate: f64) -> f64 {
        omega_to_hz(self.omegac, sample_rate)
    }

    /// Checks the frequency ordering and that the phasor keys match
    /// `structure` exactly.
    pub fn validate(&self, structure: &ModelStructure) -> Result<()> {
        self.check_shape(structure)?;
        if !(self.omega0 > 0.0 && self.omega0 < PI) {
            return Err(Error::InvalidParams(format!(
                "omega0 must lie in (0, pi), got {}",
                self.omega0
            )));
        }
        if structure.has_interharmonics() && !(self.omegac > 0.0 && self.omegac < self.omega0) {
            return Err(Error::InvalidParams(format!(
                "omegac must lie in (0, omega0) = (0, {}), got {}",
                self.omega0, self.omegac
            )));
        }
        Ok(())
    }

    /// Weaker check used inside the estimator: finite values and matching
    /// keys, no frequency ordering.
    pub(crate) fn check_shape(&self, structure: &ModelStructure) -> Result<()> {
        if !self.omega0.is_finite() || !self.omegac.is_finite() {
            return Err(Error::InvalidParams("frequencies must be finite".into()));
        }
        let keys = structure.components();
        if keys.len() != self.phasors.len() || !keys.iter().all(|k| self.phasors.contains_key(k)) {
            return Err(Error::InvalidParams(format!(
                "phasor keys {:?} do not match structure components {:?}",
                self.phasors.keys().collect::<Vec<_>>(),
                keys
            )));
        }
        if let Some((k, _)) = self.phasors.iter().find(|(_, c)| !c.is_finite()) {
            return Err(Error::InvalidParams(format!("phasor {k} is not finite")));
        }
        Ok(())
    }

    /// Same model with its time origin moved `samples` later: each phasor
    /// picks up the carrier phase `e^{jω·samples}` accumulated in between.
    pub fn time_shifted(&self, samples: usize) -> Self {
        let t = samples as f64;
        Self {
            phasors: self
                .phasors
                .iter()
                .map(|(k, c)| {
                    (
                        *k,
                        c * Complex64::cis(k.omega(self.omega0, self.omegac) * t),
                    )
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Every phasor multiplied by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            phasors: self.phasors.iter().map(|(k, c)| (*k, c * s)).collect(),
            ..self.clone()
        }
    }
}

/// Additive complex white Gaussian noise: independent real and imaginary
/// channels, each with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(Self { sigma, seed })
    }

    pub fn none() -> Self {
        Self {
            sigma: 0.0,
            seed: 0,
        }
    }
}

/// Component frequencies in canonical order.
pub fn frequency_grid(
    params: &ModelParams,
    structure: &ModelStructure,
) -> Result<Vec<(ComponentKey, f64)>> {
    structure
        .components()
        .into_iter()
        .map(|key| {
            let omega = key.omega(params.omega0, params.omegac);
            if omega.is_finite() && omega > -PI && omega < PI {
                Ok((key, omega))
            } else {
                Err(Error::FrequencyOutOfRange {
                    component: key.to_string(),
                    omega,
                })
            }
        })
        .collect()
}

/// N × L matrix with entry `(n, l) = e^{j ω_l n}`.
pub fn build_vandermonde(omegas: &[f64], n_samples: usize) -> Result<DMatrix<Complex64>> {
    if n_samples == 0 {
        return Err(Error::EmptyInput(
            "vandermonde matrix needs at least one row",
        ));
    }
    if omegas.is_empty() {
        return Err(Error::EmptyInput(
            "vandermonde matrix needs at least one frequency",
        ));
    }
    Ok(DMatrix::from_fn(n_samples, omegas.len(), |n, l| {
        Complex64::cis(omegas[l] * n as f64)
    }))
}

/// Noiseless samples `Σ_u c_u e^{j ω_u n}` for `n = 0..n_samples`.
pub fn synthesize(
    params: &ModelParams,
    structure: &ModelStructure,
    n_samples: usize,
    sample_rate: f64,
) -> Result<ComplexSignal> {
    params.check_shape(structure)?;
    let grid = frequency_grid(params, structure)?;
    let samples = model_samples(&grid, &params.phasors, n_samples);
    ComplexSignal::new(samples, sample_rate)
}

pub(crate) fn model_samples(
    grid: &[(ComponentKey, f64)],
    phasors: &BTreeMap<ComponentKey, Complex64>,
    n_samples: usize,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n_samples];
    for (key, omega) in grid {
        let c = phasors[key];
        for (n, y) in out.iter_mut().enumerate() {
            *y += c * Complex64::cis(omega * n as f64);
        }
    }
    out
}

/// Adds seeded complex Gaussian noise. Deterministic in `(signal, sigma, seed)`.
pub fn add_noise(signal: &ComplexSignal, noise: NoiseSpec) -> ComplexSignal {
    if noise.sigma == 0.0 {
        return signal.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let normal = Normal::new(0.0, noise.sigma).expect("sigma validated finite and >= 0");
    let samples = signal
        .samples()
        .iter()
        .map(|s| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            s + Complex64::new(re, im)
        })
        .collect();
    ComplexSignal::from_parts_unchecked(samples, signal.sample_rate())
}

/// Recipe for a synthetic reference current, in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSpec {
    pub sample_rate: f64,
    pub n_samples: usize,
    pub f0_hz: f64,
    pub fundamental_amplitude: f64,
    pub fundamental_phase: f64,
    /// `(l, amplitude, phase)` per harmonic.
    pub harmonics: Vec<(u32, f64, f64)>,
    pub fc_hz: f64,
    /// `(k, amplitude, phase)` per interharmonic.
    pub interharmonics: Vec<(i32, f64, f64)>,
}

impl Default for ReferenceSpec {
    /// 1 s at 1 kHz: 60 Hz fundamental (0.7 A), harmonics 2–4
    /// (0.6, 0.5, 0.4 A) and 5 Hz upper sidebands k = 1–3 (0.3, 0.2, 0.1 A),
    /// all at zero phase.
    fn default() -> Self {
        Self {
            sample_rate: 1000.0,
            n_samples: 1000,
            f0_hz: 60.0,
            fundamental_amplitude: 0.7,
            fundamental_phase: 0.0,
            harmonics: vec![(2, 0.6, 0.0), (3, 0.5, 0.0), (4, 0.4, 0.0)],
            fc_hz: 5.0,
            interharmonics: vec![(1, 0.3, 0.0), (2, 0.2, 0.0), (3, 0.1, 0.0)],
        }
    }
}

impl ReferenceSpec {
    pub fn structure(&self) -> Result<ModelStructure> {
        ModelStructure::new(
            self.harmonics.iter().map(|h| h.0),
            self.interharmonics.iter().map(|i| i.0),
        )
    }

    /// Ground-truth parameters, amplitude/phase converted to phasors.
    pub fn params(&self) -> Result<(ModelParams, ModelStructure)> {
        let structure = self.structure()?;
        let mut phasors = BTreeMap::new();
        phasors.insert(
            ComponentKey::Fundamental,
            Complex64::from_polar(self.fundamental_amplitude, self.fundamental_phase),
        );
        for &(l, a, phi) in &self.harmonics {
            phasors.insert(ComponentKey::Harmonic(l), Complex64::from_polar(a, phi));
        }
        for &(k, a, phi) in &self.interharmonics {
            phasors.insert(
                ComponentKey::Interharmonic(k),
                Complex64::from_polar(a, phi),
            );
        }
        let params = ModelParams::new(
            hz_to_omega(self.f0_hz, self.sample_rate),
            hz_to_omega(self.fc_hz, self.sample_rate),
            phasors,
        );
        params.validate(&structure)?;
        frequency_grid(&params, &structure)?;
        Ok((params, structure))
    }

    pub fn generate(
        &self,
        noise: NoiseSpec,
    ) -> Result<(ComplexSignal, ModelParams, ModelStructure)> {
        let (params, structure) = self.params()?;
        let clean = synthesize(&params, &structure, self.n_samples, self.sample_rate)?;
        Ok((add_noise(&clean, noise), params, structure))
    }
}

/// The default reference current with the given noise.
pub fn reference_signal(noise: NoiseSpec) -> (ComplexSignal, ModelParams, ModelStructure) {
    ReferenceSpec::default()
        .generate(noise)
        .expect("default reference recipe is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_matches_reference_frequencies() {
        let (params, structure) = ReferenceSpec::default().params().unwrap();
        let hz: Vec<f64> = frequency_grid(&params, &structure)
            .unwrap()
            .into_iter()
            .map(|(_, w)| omega_to_hz(w, 1000.0))
            .collect();
        let expected = [60.0, 120.0, 180.0, 240.0, 65.0, 70.0, 75.0];
        for (got, want) in hz.iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn degenerate_grid_is_fundamental_only() {
        let s = ModelStructure::fundamental_only();
        let p = ModelParams::zeros(0.3, 0.0, &s);
        let g = frequency_grid(&p, &s).unwrap();
        assert_eq!(g, vec![(ComponentKey::Fundamental, 0.3)]);
    }

    #[test]
    fn lower_and_upper_sidebands() {
        let s = ModelStructure::new([], [-1, 1]).unwrap();
        let p = ModelParams::zeros(hz_to_omega(60.0, 1000.0), hz_to_omega(5.0, 1000.0), &s);
        let hz: Vec<f64> = frequency_grid(&p, &s)
            .unwrap()
            .into_iter()
            .map(|(_, w)| omega_to_hz(w, 1000.0))
            .collect();
        assert_relative_eq!(hz[1], 55.0, epsilon = 1e-9);
        assert_relative_eq!(hz[2], 65.0, epsilon = 1e-9);
    }

    #[test]
    fn grid_rejects_aliased_harmonic() {
        let s = ModelStructure::new([4], []).unwrap();
        let p = ModelParams::zeros(1.0, 0.0, &s);
        assert!(matches!(
            frequency_grid(&p, &s),
            Err(Error::FrequencyOutOfRange { .. })
        ));
    }

    #[test]
    fn structure_rejects_bad_indices() {
        assert!(ModelStructure::new([1], []).is_err());
        assert!(ModelStructure::new([2, 2], []).is_err());
        assert!(ModelStructure::new([], [0]).is_err());
        assert!(ModelStructure::new([], [3, 3]).is_err());
    }

    #[test]
    fn vandermonde_identity_and_quarter_turn() {
        let v = build_vandermonde(&[0.0], 3).unwrap();
        assert!(v.iter().all(|e| *e == c(1.0, 0.0)));

        let v = build_vandermonde(&[PI / 2.0], 4).unwrap();
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (got, want) in v.column(0).iter().zip(want) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn vandermonde_empty_inputs() {
        assert!(matches!(
            build_vandermonde(&[0.1], 0),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            build_vandermonde(&[], 4),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn synthesize_at_origin_sums_amplitudes() {
        let (params, structure) = ReferenceSpec::default().params().unwrap();
        let y = synthesize(&params, &structure, 10, 1000.0).unwrap();
        assert!((y.samples()[0] - c(2.8, 0.0)).norm() < 1e-12);

        let s = ModelStructure::fundamental_only();
        let p = ModelParams::from_ordered(0.77, 0.0, &s, &[c(1.0, 0.0)]).unwrap();
        let y = synthesize(&p, &s, 5, 1.0).unwrap();
        assert_eq!(y.samples()[0], c(1.0, 0.0));
    }

    #[test]
    fn single_component_has_constant_modulus() {
        let (params, structure) = ReferenceSpec::default().params().unwrap();
        for key in structure.components() {
            let one = ModelStructure::new(
                match key {
                    ComponentKey::Harmonic(l) => vec![l],
                    _ => vec![],
                },
                match key {
                    ComponentKey::Interharmonic(k) => vec![k],
                    _ => vec![],
                },
            )
            .unwrap();
            let mut p = ModelParams::zeros(params.omega0, params.omegac, &one);
            p.phasors.insert(key, params.phasors[&key]);
            let y = synthesize(&p, &one, 200, 1000.0).unwrap();
            let amp = params.phasors[&key].norm();
            for s in y.samples() {
                assert!((s.norm() - amp).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noise_zero_sigma_is_identity_and_seeded_noise_is_deterministic() {
        let (x, _, _) = reference_signal(NoiseSpec::none());
        assert_eq!(add_noise(&x, NoiseSpec::new(0.0, 9).unwrap()), x);
        let n = NoiseSpec::new(0.25, 42).unwrap();
        assert_eq!(add_noise(&x, n), add_noise(&x, n));
        assert_ne!(
            add_noise(&x, n),
            add_noise(&x, NoiseSpec::new(0.25, 43).unwrap())
        );
    }

    #[test]
    fn noise_mean_concentrates() {
        let zero = ComplexSignal::new(vec![c(0.0, 0.0); 1000], 1000.0).unwrap();
        let noisy = add_noise(&zero, NoiseSpec::new(0.25, 7).unwrap());
        let mean: Complex64 = noisy.samples().iter().sum::<Complex64>() / 1000.0;
        assert!(mean.norm() < 4.0 * 0.25 / 1000f64.sqrt());
        // per-channel variance sigma^2, so E|b|^2 = 2 sigma^2
        assert!((noisy.mean_power() - 0.125).abs() < 0.125 * 0.15);
    }

    #[test]
    fn reference_signal_ground_truth() {
        let (x, p, s) = reference_signal(NoiseSpec::none());
        assert_eq!(x.len(), 1000);
        assert_eq!(x.sample_rate(), 1000.0);
        assert_relative_eq!(p.omega0, 2.0 * PI * 60.0 / 1000.0);
        assert_relative_eq!(p.omegac, 2.0 * PI * 5.0 / 1000.0);
        assert_eq!(s.component_count(), 7);
    }

    #[test]
    fn signal_rejects_non_finite_and_bad_rate() {
        assert!(ComplexSignal::new(vec![], 1.0).is_err());
        assert!(ComplexSignal::new(vec![c(f64::NAN, 0.0)], 1.0).is_err());
        assert!(ComplexSignal::new(vec![c(0.0, f64::INFINITY)], 1.0).is_err());
        assert!(ComplexSignal::new(vec![c(0.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn params_validation() {
        let s = ModelStructure::with_counts(1, 1);
        let good = ModelParams::zeros(0.4, 0.03, &s);
        good.validate(&s).unwrap();
        assert!(ModelParams::zeros(0.4, 0.5, &s).validate(&s).is_err());
        assert!(ModelParams::zeros(3.5, 0.1, &s).validate(&s).is_err());
        let other = ModelStructure::with_counts(2, 1);
        assert!(good.validate(&other).is_err());
    }

    #[test]
    fn time_shift_matches_later_samples() {
        let (p, s) = ReferenceSpec::default().params().unwrap();
        let whole = synthesize(&p, &s, 400, 1000.0).unwrap();
        let later = synthesize(&p.time_shifted(250), &s, 150, 1000.0).unwrap();
        for (a, b) in later.samples().iter().zip(&whole.samples()[250..]) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn component_key_names_round_trip() {
        for key in [
            ComponentKey::Fundamental,
            ComponentKey::Harmonic(3),
            ComponentKey::Interharmonic(-2),
        ] {
            assert_eq!(key.to_string().parse::<ComponentKey>().unwrap(), key);
        }
    }
}
