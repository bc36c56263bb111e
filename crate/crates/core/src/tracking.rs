//! Segment-wise tracking and component reconstruction.
//!
//! The record is cut into consecutive, non-overlapping segments of `M`
//! samples; a trailing remainder shorter than `M` is dropped. Each segment
//! is fitted with [`fit_segment`], warm-started from the previous segment's
//! estimate advanced by `M` samples, and split into fundamental, harmonic, interharmonic and
//! residual parts on the local time axis `n = 0..M`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimation::{fit_segment, EstimationTrace, EstimatorConfig};
use crate::signal::{frequency_grid, ComplexSignal, ComponentKey, ModelParams, ModelStructure};
use crate::spectral::{initialize_from_spectrum, SearchRanges};

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    pub segments: Vec<ComplexSignal>,
    pub segment_length: usize,
    pub dropped_tail: usize,
}

impl SegmentSet {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

pub fn segment_signal(signal: &ComplexSignal, segment_length: usize) -> Result<SegmentSet> {
    let n = signal.len();
    if segment_length == 0 || segment_length > n {
        return Err(Error::InvalidSegmentLength {
            segment_length,
            signal_length: n,
        });
    }
    let segments = signal
        .samples()
        .chunks_exact(segment_length)
        .map(|chunk| ComplexSignal::new(chunk.to_vec(), signal.sample_rate()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentSet {
        segments,
        segment_length,
        dropped_tail: n % segment_length,
    })
}

/// The four parts of one segment. `residual` is defined as the exact
/// difference, so the parts always add back to the segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecomposition {
    pub fundamental: ComplexSignal,
    pub harmonic: ComplexSignal,
    pub interharmonic: ComplexSignal,
    pub residual: ComplexSignal,
}

impl ComponentDecomposition {
    /// Sample-wise sum of the four parts.
    pub fn recombined(&self) -> Vec<Complex64> {
        (0..self.fundamental.len())
            .map(|n| {
                self.fundamental.samples()[n]
                    + self.harmonic.samples()[n]
                    + self.interharmonic.samples()[n]
                    + self.residual.samples()[n]
            })
            .collect()
    }

    pub fn parts(&self) -> [(&'static str, &ComplexSignal); 4] {
        [
            ("fundamental", &self.fundamental),
            ("harmonic", &self.harmonic),
            ("interharmonic", &self.interharmonic),
            ("residual", &self.residual),
        ]
    }
}

pub fn reconstruct_components(
    segment: &ComplexSignal,
    params: &ModelParams,
    structure: &ModelStructure,
) -> Result<ComponentDecomposition> {
    params.check_shape(structure)?;
    let grid = frequency_grid(params, structure)?;
    let m = segment.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut fundamental = vec![zero; m];
    let mut harmonic = vec![zero; m];
    let mut interharmonic = vec![zero; m];
    for (key, omega) in grid {
        let c = params.phasors[&key];
        let target = match key {
            ComponentKey::Fundamental => &mut fundamental,
            ComponentKey::Harmonic(_) => &mut harmonic,
            ComponentKey::Interharmonic(_) => &mut interharmonic,
        };
        for (n, y) in target.iter_mut().enumerate() {
            *y += c * Complex64::cis(omega * n as f64);
        }
    }
    let residual = (0..m)
        .map(|n| segment.samples()[n] - (fundamental[n] + harmonic[n] + interharmonic[n]))
        .collect();
    let fs = segment.sample_rate();
    let wrap = |v| ComplexSignal::new(v, fs);
    Ok(ComponentDecomposition {
        fundamental: wrap(fundamental)?,
        harmonic: wrap(harmonic)?,
        interharmonic: wrap(interharmonic)?,
        residual: wrap(residual)?,
    })
}

/// How the first segment is started.
#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    Given(ModelParams),
    Spectral(SearchRanges),
}

impl Default for Initialization {
    fn default() -> Self {
        Initialization::Spectral(SearchRanges::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEstimate {
    pub params: ModelParams,
    pub trace: EstimationTrace,
    pub decomposition: ComponentDecomposition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingResult {
    pub per_segment: Vec<SegmentEstimate>,
    pub dropped_tail: usize,
}

fn tag(segment: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Segment {
        segment,
        source: Box::new(e),
    }
}

/// Fits every segment in order, warm-starting each from its predecessor.
pub fn track(
    signal: &ComplexSignal,
    segment_length: usize,
    structure: &ModelStructure,
    config: &EstimatorConfig,
    init: &Initialization,
) -> Result<TrackingResult> {
    let partial = track_partial(signal, segment_length, structure, config, init)?;
    match partial.failure {
        Some(e) => Err(e),
        None => Ok(TrackingResult {
            per_segment: partial.completed,
            dropped_tail: partial.dropped_tail,
        }),
    }
}

/// Segments fitted before the first failure, and that failure if any.
#[derive(Debug)]
pub struct PartialTracking {
    pub completed: Vec<SegmentEstimate>,
    pub failure: Option<Error>,
    pub segment_count: usize,
    pub dropped_tail: usize,
}

/// Like [`track`], but keeps the segments fitted before a failure. Only
/// segmentation errors are returned as `Err`.
pub fn track_partial(
    signal: &ComplexSignal,
    segment_length: usize,
    structure: &ModelStructure,
    config: &EstimatorConfig,
    init: &Initialization,
) -> Result<PartialTracking> {
    let set = segment_signal(signal, segment_length)?;
    let mut completed: Vec<SegmentEstimate> = Vec::with_capacity(set.len());
    let mut failure = None;
    for (index, segment) in set.segments.iter().enumerate() {
        match fit_one(segment, completed.last(), structure, config, init) {
            Ok(est) => {
                log::debug!(
                    "segment {index}: {} iterations, final loss {:.3e}",
                    est.trace.iterations_run,
                    est.trace.final_loss()
                );
                completed.push(est);
            }
            Err(e) => {
                failure = Some(tag(index)(e));
                break;
            }
        }
    }
    Ok(PartialTracking {
        completed,
        failure,
        segment_count: set.len(),
        dropped_tail: set.dropped_tail,
    })
}

fn fit_one(
    segment: &ComplexSignal,
    previous: Option<&SegmentEstimate>,
    structure: &ModelStructure,
    config: &EstimatorConfig,
    init: &Initialization,
) -> Result<SegmentEstimate> {
    let start = match (previous, init) {
        (Some(prev), _) => prev.params.time_shifted(segment.len()),
        (None, Initialization::Given(p)) => p.clone(),
        (None, Initialization::Spectral(ranges)) => initialize_from_spectrum(
            segment,
            structure,
            ranges.f0_hz.clone(),
            ranges.fc_hz.clone(),
        )?,
    };
    let trace = fit_segment(segment, &start, structure, config)?;
    let params = trace.final_params.clone();
    let decomposition = reconstruct_components(segment, &params, structure)?;
    Ok(SegmentEstimate {
        params,
        trace,
        decomposition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{reference_signal, NoiseSpec};

    #[test]
    fn segment_counts() {
        let (x, _, _) = reference_signal(NoiseSpec::none());
        let s = segment_signal(&x, 250).unwrap();
        assert_eq!((s.len(), s.dropped_tail), (4, 0));
        let s = segment_signal(&x, 1000).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.segments[0], x);
        let s = segment_signal(&x, 300).unwrap();
        assert_eq!((s.len(), s.dropped_tail), (3, 100));
    }

    #[test]
    fn segmentation_is_a_prefix_partition() {
        let (x, _, _) = reference_signal(NoiseSpec::new(0.25, 1).unwrap());
        let s = segment_signal(&x, 300).unwrap();
        let joined: Vec<Complex64> = s
            .segments
            .iter()
            .flat_map(|seg| seg.samples().iter().copied())
            .collect();
        assert_eq!(joined.as_slice(), &x.samples()[..900]);
    }

    #[test]
    fn invalid_segment_lengths() {
        let (x, _, _) = reference_signal(NoiseSpec::none());
        assert!(matches!(
            segment_signal(&x, 0),
            Err(Error::InvalidSegmentLength { .. })
        ));
        assert!(matches!(
            segment_signal(&x, 1001),
            Err(Error::InvalidSegmentLength { .. })
        ));
    }

    #[test]
    fn exact_params_leave_zero_residual() {
        let (x, p, s) = reference_signal(NoiseSpec::none());
        let seg = x.slice(0, 250).unwrap();
        let d = reconstruct_components(&seg, &p, &s).unwrap();
        assert!(d.residual.samples().iter().all(|r| r.norm() < 1e-12));
        assert!(d
            .fundamental
            .samples()
            .iter()
            .all(|v| (v.norm() - 0.7).abs() < 1e-12));
    }

    #[test]
    fn parts_always_add_back() {
        let (x, p, s) = reference_signal(NoiseSpec::new(0.25, 5).unwrap());
        let mut off = p.clone();
        off.omega0 *= 1.01;
        let seg = x.slice(250, 250).unwrap();
        let d = reconstruct_components(&seg, &off, &s).unwrap();
        for (a, b) in d.recombined().iter().zip(seg.samples()) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn noiseless_tracking_from_truth() {
        let (x, p, s) = reference_signal(NoiseSpec::none());
        let r = track(
            &x,
            250,
            &s,
            &EstimatorConfig::concentrated(),
            &Initialization::Given(p.clone()),
        )
        .unwrap();
        assert_eq!(r.per_segment.len(), 4);
        for (i, est) in r.per_segment.iter().enumerate() {
            assert!((est.params.omega0 - p.omega0).abs() < 1e-6);
            assert!((est.params.omegac - p.omegac).abs() < 1e-6);
            let energy: f64 = est
                .decomposition
                .residual
                .samples()
                .iter()
                .map(|v| v.norm_sqr())
                .sum();
            assert!(energy <= 1e-12, "segment {i}: {energy}");
        }
    }

    #[test]
    fn divergence_is_tagged_with_segment() {
        let (x, p, s) = reference_signal(NoiseSpec::new(0.25, 2).unwrap());
        let mut init = p.clone();
        init.omega0 *= 1.01;
        let cfg = EstimatorConfig {
            alpha: 10.0,
            freq_precondition: false,
            ..EstimatorConfig::default()
        };
        let err = track(&x, 250, &s, &cfg, &Initialization::Given(init)).unwrap_err();
        assert!(matches!(err, Error::Segment { segment: 0, .. }));
        assert!(err.is_divergence());
    }
}
