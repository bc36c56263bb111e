//! Magnitude spectra and spectrum-based starting points.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::estimation::solve_phasors_ls;
use crate::signal::{hz_to_omega, ComplexSignal, ModelParams, ModelStructure};

/// Zero-padding factor used when locating peaks for initialization.
pub const INIT_PADDING: usize = 4;

/// Search windows for [`initialize_from_spectrum`], in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRanges {
    pub f0_hz: RangeInclusive<f64>,
    pub fc_hz: RangeInclusive<f64>,
}

impl Default for SearchRanges {
    fn default() -> Self {
        Self {
            f0_hz: 40.0..=80.0,
            fc_hz: 1.0..=20.0,
        }
    }
}

/// Magnitude spectrum in centered order, `[-f_s/2, f_s/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub n_fft: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Index of the bin closest to `freq_hz`.
    pub fn nearest_bin(&self, freq_hz: f64) -> usize {
        self.bin_frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - freq_hz).abs().total_cmp(&(b.1 - freq_hz).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        self.magnitudes[self.nearest_bin(freq_hz)]
    }

    /// Indices of local maxima (`≥` both neighbours, strictly above one).
    pub fn local_maxima(&self) -> Vec<usize> {
        let n = self.len();
        if n < 3 {
            return (0..n).collect();
        }
        (0..n)
            .filter(|&i| {
                let left = self.magnitudes[(i + n - 1) % n];
                let right = self.magnitudes[(i + 1) % n];
                let m = self.magnitudes[i];
                m >= left && m >= right && (m > left || m > right)
            })
            .collect()
    }

    fn median_magnitude(&self) -> f64 {
        let mut sorted = self.magnitudes.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    }
}

/// Rectangular-window DFT magnitude, zero-padded to `n_fft` and normalized
/// by the signal length, so a bin-aligned tone of amplitude `A` reads `A`.
pub fn dft_magnitude(signal: &ComplexSignal, n_fft: usize) -> Result<Spectrum> {
    let n = signal.len();
    if n_fft < n {
        return Err(Error::InvalidFftSize {
            n_fft,
            signal_length: n,
        });
    }
    let mut buffer = signal.samples().to_vec();
    buffer.resize(n_fft, Complex64::new(0.0, 0.0));
    FftPlanner::new()
        .plan_fft_forward(n_fft)
        .process(&mut buffer);

    let fs = signal.sample_rate();
    let split = n_fft - n_fft / 2;
    let order = (split..n_fft).chain(0..split);
    let mut bin_frequencies = Vec::with_capacity(n_fft);
    let mut magnitudes = Vec::with_capacity(n_fft);
    for k in order {
        let signed = if k < split {
            k as f64
        } else {
            k as f64 - n_fft as f64
        };
        bin_frequencies.push(signed * fs / n_fft as f64);
        magnitudes.push(buffer[k].norm() / n as f64);
    }
    Ok(Spectrum {
        bin_frequencies,
        magnitudes,
        n_fft,
    })
}

fn check_range(name: &str, range: &RangeInclusive<f64>, nyquist: f64) -> Result<()> {
    let (lo, hi) = (*range.start(), *range.end());
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi && hi < nyquist) {
        return Err(Error::config(
            name,
            format!("search range [{lo}, {hi}] Hz must be non-empty and inside (0, {nyquist})"),
        ));
    }
    Ok(())
}

/// Starting point for the first segment: the strongest bin in `f0_search`
/// gives f0, the strongest remaining peak within `f0 ± fc_search` gives the
/// spacing f_c, and the phasors are the least-squares solution there.
pub fn initialize_from_spectrum(
    segment: &ComplexSignal,
    structure: &ModelStructure,
    f0_search: RangeInclusive<f64>,
    fc_search: RangeInclusive<f64>,
) -> Result<ModelParams> {
    let fs = segment.sample_rate();
    check_range("f0_search", &f0_search, fs / 2.0)?;
    check_range("fc_search", &fc_search, fs / 2.0)?;

    let spectrum = dft_magnitude(segment, INIT_PADDING * segment.len())?;
    let median = spectrum.median_magnitude();

    let f0_bin = (0..spectrum.len())
        .filter(|&i| f0_search.contains(&spectrum.bin_frequencies[i]))
        .max_by(|&a, &b| spectrum.magnitudes[a].total_cmp(&spectrum.magnitudes[b]))
        .filter(|&i| spectrum.magnitudes[i] > median)
        .ok_or_else(|| {
            Error::InitializationFailed(format!(
                "no spectral peak above the median in f0 range {f0_search:?} Hz"
            ))
        })?;
    let f0 = spectrum.bin_frequencies[f0_bin];

    let fc = if structure.has_interharmonics() {
        let upper = structure.interharmonics().any(|k| k > 0);
        let lower = structure.interharmonics().any(|k| k < 0);
        let in_window = |f: f64| {
            (upper && fc_search.contains(&(f - f0))) || (lower && fc_search.contains(&(f0 - f)))
        };
        let peak = spectrum
            .local_maxima()
            .into_iter()
            .filter(|&i| i != f0_bin && in_window(spectrum.bin_frequencies[i]))
            .max_by(|&a, &b| spectrum.magnitudes[a].total_cmp(&spectrum.magnitudes[b]))
            .filter(|&i| spectrum.magnitudes[i] > median)
            .ok_or_else(|| {
                Error::InitializationFailed(format!(
                    "no sideband peak above the median within {fc_search:?} Hz of {f0} Hz"
                ))
            })?;
        (spectrum.bin_frequencies[peak] - f0).abs()
    } else {
        0.5 * (fc_search.start() + fc_search.end())
    };

    let omega0 = hz_to_omega(f0, fs);
    let omegac = hz_to_omega(fc, fs);
    let phasors = solve_phasors_ls(segment, omega0, omegac, structure)
        .map_err(|e| Error::InitializationFailed(e.to_string()))?;
    let params = ModelParams::new(omega0, omegac, phasors);
    params
        .validate(structure)
        .map_err(|e| Error::InitializationFailed(e.to_string()))?;
    Ok(params)
}
