//! Monte Carlo RMSE study of the tracker.
//!
//! Estimates of segment `s` are compared with the generating parameters
//! moved to that segment's time origin, `s·M` samples in.
//!
//! Trial `t` draws noise with seed `base_seed + t` (wrapping), so trials are
//! independent and run in parallel while the report stays a pure function of
//! the setup.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::EstimatorConfig;
use crate::signal::{ComponentKey, ModelParams, NoiseSpec, ReferenceSpec};
use crate::spectral::SearchRanges;
use crate::tracking::{segment_signal, track_partial, Initialization};

/// Distance used by [`rmse`]: absolute difference for reals, modulus of the
/// complex difference for phasors.
pub trait Deviation: Copy {
    fn deviation(self, reference: Self) -> f64;
}

impl Deviation for f64 {
    fn deviation(self, reference: Self) -> f64 {
        (self - reference).abs()
    }
}

impl Deviation for Complex64 {
    fn deviation(self, reference: Self) -> f64 {
        (self - reference).norm()
    }
}

/// `sqrt(Σ |est_i − ref|² / n)`.
pub fn rmse<T: Deviation>(estimates: &[T], reference: T) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("rmse needs at least one estimate"));
    }
    let sum: f64 = estimates
        .iter()
        .map(|e| e.deviation(reference).powi(2))
        .sum();
    Ok((sum / estimates.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    /// Start the first segment at the generating parameters.
    Truth,
    Spectral(SearchRanges),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSetup {
    pub reference: ReferenceSpec,
    pub segment_length: usize,
    pub noise_sigma: f64,
    pub n_trials: usize,
    pub base_seed: u64,
    pub config: EstimatorConfig,
    pub init: InitStrategy,
}

impl Default for MonteCarloSetup {
    fn default() -> Self {
        Self {
            reference: ReferenceSpec::default(),
            segment_length: 250,
            noise_sigma: 0.25,
            n_trials: 200,
            base_seed: 0,
            config: EstimatorConfig::concentrated(),
            init: InitStrategy::Spectral(SearchRanges::default()),
        }
    }
}

/// RMSE of one segment's estimates over the trials that produced one.
/// `None` when every trial diverged before reaching this segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRmse {
    pub omega0: Option<f64>,
    pub omegac: Option<f64>,
    pub phasors: BTreeMap<ComponentKey, Option<f64>>,
    /// Trials that diverged at or before this segment.
    pub divergence_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub n_trials: usize,
    pub base_seed: u64,
    pub noise_sigma: f64,
    pub per_segment: Vec<SegmentRmse>,
}

impl MonteCarloReport {
    /// Every finite RMSE value in the report.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_segment.iter().flat_map(|s| {
            [s.omega0, s.omegac]
                .into_iter()
                .chain(s.phasors.values().copied())
                .flatten()
        })
    }

    pub fn total_divergences(&self) -> usize {
        self.per_segment.iter().map(|s| s.divergence_count).sum()
    }
}

/// Per-segment estimates of one trial; `None` from the failing segment on.
fn run_trial(
    setup: &MonteCarloSetup,
    truth: &ModelParams,
    seed: u64,
) -> Result<Vec<Option<ModelParams>>> {
    let noise = NoiseSpec::new(setup.noise_sigma, seed)?;
    let (signal, _, structure) = setup.reference.generate(noise)?;
    let init = match &setup.init {
        InitStrategy::Truth => Initialization::Given(truth.clone()),
        InitStrategy::Spectral(ranges) => Initialization::Spectral(ranges.clone()),
    };
    let partial = track_partial(
        &signal,
        setup.segment_length,
        &structure,
        &setup.config,
        &init,
    )?;
    if let Some(e) = &partial.failure {
        log::warn!("trial seed {seed}: {e}");
    }
    let mut out: Vec<Option<ModelParams>> = partial
        .completed
        .into_iter()
        .map(|s| Some(s.params))
        .collect();
    out.resize(partial.segment_count, None);
    Ok(out)
}

pub fn monte_carlo(setup: &MonteCarloSetup) -> Result<MonteCarloReport> {
    if setup.n_trials == 0 {
        return Err(Error::config("n_trials", "must be >= 1"));
    }
    setup.config.validate()?;
    NoiseSpec::new(setup.noise_sigma, setup.base_seed)?;
    let (truth, structure) = setup.reference.params()?;
    let (probe, _, _) = setup.reference.generate(NoiseSpec::none())?;
    let n_segments = segment_signal(&probe, setup.segment_length)?.len();

    let trials: Vec<Vec<Option<ModelParams>>> = (0..setup.n_trials)
        .into_par_iter()
        .map(|t| run_trial(setup, &truth, setup.base_seed.wrapping_add(t as u64)))
        .collect::<Result<_>>()?;

    let keys = structure.components();
    let per_segment = (0..n_segments)
        .map(|s| {
            // phasors are estimated on each segment's own time axis
            let truth = truth.time_shifted(s * setup.segment_length);
            let ok: Vec<&ModelParams> = trials.iter().filter_map(|t| t[s].as_ref()).collect();
            let divergence_count = trials.len() - ok.len();
            let of = |values: Vec<f64>, reference: f64| rmse(&values, reference).ok();
            let omega0 = of(ok.iter().map(|p| p.omega0).collect(), truth.omega0);
            let omegac = of(ok.iter().map(|p| p.omegac).collect(), truth.omegac);
            let phasors = keys
                .iter()
                .map(|k| {
                    let est: Vec<Complex64> = ok.iter().map(|p| p.phasors[k]).collect();
                    (*k, rmse(&est, truth.phasors[k]).ok())
                })
                .collect();
            SegmentRmse {
                omega0,
                omegac,
                phasors,
                divergence_count,
            }
        })
        .collect();

    Ok(MonteCarloReport {
        n_trials: setup.n_trials,
        base_seed: setup.base_seed,
        noise_sigma: setup.noise_sigma,
        per_segment,
    })
}
