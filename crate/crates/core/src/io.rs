//! Flat CSV files for signals, spectra, traces, parameters and Monte Carlo
//! reports.
//!
//! | file      | header                                   |
//! |-----------|------------------------------------------|
//! | signal    | `index,real,imag`                        |
//! | spectrum  | `freq_hz,magnitude`                      |
//! | trace     | `iteration,loss`                         |
//! | params    | `name,value_real,value_imag`             |
//! | report    | `segment,parameter,rmse,divergence_count`|
//!
//! Reals are written in shortest round-trip form, so reading a file back
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::EstimationTrace;
use crate::signal::{hz_to_omega, ComplexSignal, ComponentKey, ModelParams};
use crate::spectral::Spectrum;
use crate::tracking::ComponentDecomposition;
use crate::validation::MonteCarloReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalRow {
    pub index: usize,
    pub real: f64,
    pub imag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub freq_hz: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub name: String,
    pub value_real: f64,
    pub value_imag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub segment: usize,
    pub parameter: String,
    /// Empty when no trial produced an estimate for this segment.
    pub rmse: Option<f64>,
    pub divergence_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub index: usize,
    pub fundamental_real: f64,
    pub fundamental_imag: f64,
    pub harmonic_real: f64,
    pub harmonic_imag: f64,
    pub interharmonic_real: f64,
    pub interharmonic_imag: f64,
    pub residual_real: f64,
    pub residual_imag: f64,
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

pub fn write_records<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read, T: DeserializeOwned>(reader: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|row| row.map_err(csv_error))
        .collect()
}

pub fn write_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_records(std::fs::File::create(path)?, rows)
}

pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_records(std::fs::File::open(path)?)
}

pub fn signal_rows(signal: &ComplexSignal) -> Vec<SignalRow> {
    signal
        .samples()
        .iter()
        .enumerate()
        .map(|(index, s)| SignalRow {
            index,
            real: s.re,
            imag: s.im,
        })
        .collect()
}

/// Rows must be indexed `0, 1, 2, …` in order.
pub fn signal_from_rows(rows: &[SignalRow], sample_rate: f64) -> Result<ComplexSignal> {
    for (i, row) in rows.iter().enumerate() {
        if row.index != i {
            return Err(Error::Parse {
                line: i as u64 + 2,
                message: format!("expected index {i}, found {}", row.index),
            });
        }
    }
    ComplexSignal::new(
        rows.iter()
            .map(|r| Complex64::new(r.real, r.imag))
            .collect(),
        sample_rate,
    )
}

pub fn spectrum_rows(spectrum: &Spectrum) -> Vec<SpectrumRow> {
    spectrum
        .bin_frequencies
        .iter()
        .zip(&spectrum.magnitudes)
        .map(|(&freq_hz, &magnitude)| SpectrumRow { freq_hz, magnitude })
        .collect()
}

/// Iterations are numbered from 1; iteration 0 is the starting loss.
pub fn trace_rows(trace: &EstimationTrace) -> Vec<TraceRow> {
    std::iter::once(trace.initial_loss)
        .chain(trace.loss_history.iter().copied())
        .enumerate()
        .map(|(iteration, loss)| TraceRow { iteration, loss })
        .collect()
}

/// `f0_hz` and `fc_hz` first (imaginary part 0), then one row per phasor.
pub fn param_rows(params: &ModelParams, sample_rate: f64) -> Vec<ParamRow> {
    let freq = |name: &str, value: f64| ParamRow {
        name: name.to_string(),
        value_real: value,
        value_imag: 0.0,
    };
    let mut rows = vec![
        freq("f0_hz", params.f0_hz(sample_rate)),
        freq("fc_hz", params.fc_hz(sample_rate)),
    ];
    rows.extend(params.phasors.iter().map(|(k, c)| ParamRow {
        name: k.to_string(),
        value_real: c.re,
        value_imag: c.im,
    }));
    rows
}

pub fn params_from_rows(rows: &[ParamRow], sample_rate: f64) -> Result<ModelParams> {
    let mut f0 = None;
    let mut fc = None;
    let mut phasors = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        match row.name.as_str() {
            "f0_hz" => f0 = Some(row.value_real),
            "fc_hz" => fc = Some(row.value_real),
            name => {
                let key: ComponentKey = name.parse().map_err(|_| Error::Parse {
                    line: i as u64 + 2,
                    message: format!("unknown parameter name {name:?}"),
                })?;
                phasors.insert(key, Complex64::new(row.value_real, row.value_imag));
            }
        }
    }
    let missing = |what: &str| Error::Parse {
        line: 0,
        message: format!("missing {what} row"),
    };
    Ok(ModelParams::new(
        hz_to_omega(f0.ok_or_else(|| missing("f0_hz"))?, sample_rate),
        hz_to_omega(fc.ok_or_else(|| missing("fc_hz"))?, sample_rate),
        phasors,
    ))
}

/// Frequencies are reported in rad/sample, phasor errors in amperes.
pub fn report_rows(report: &MonteCarloReport) -> Vec<RmseRow> {
    let mut rows = Vec::new();
    for (segment, s) in report.per_segment.iter().enumerate() {
        let mut push = |parameter: String, rmse: Option<f64>| {
            rows.push(RmseRow {
                segment,
                parameter,
                rmse,
                divergence_count: s.divergence_count,
            })
        };
        push("omega0".into(), s.omega0);
        push("omegac".into(), s.omegac);
        for (k, v) in &s.phasors {
            push(k.to_string(), *v);
        }
    }
    rows
}

pub fn decomposition_rows(d: &ComponentDecomposition) -> Vec<DecompositionRow> {
    (0..d.fundamental.len())
        .map(|index| {
            let f = d.fundamental.samples()[index];
            let h = d.harmonic.samples()[index];
            let i = d.interharmonic.samples()[index];
            let r = d.residual.samples()[index];
            DecompositionRow {
                index,
                fundamental_real: f.re,
                fundamental_imag: f.im,
                harmonic_real: h.re,
                harmonic_imag: h.im,
                interharmonic_real: i.re,
                interharmonic_imag: i.im,
                residual_real: r.re,
                residual_imag: r.im,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{reference_signal, NoiseSpec};

    fn to_string<T: Serialize>(rows: &[T]) -> String {
        let mut buf = Vec::new();
        write_records(&mut buf, rows).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn headers() {
        let (x, p, _) = reference_signal(NoiseSpec::none());
        assert!(to_string(&signal_rows(&x)).starts_with("index,real,imag\n"));
        let s = crate::spectral::dft_magnitude(&x, 1000).unwrap();
        assert!(to_string(&spectrum_rows(&s)).starts_with("freq_hz,magnitude\n"));
        assert!(to_string(&param_rows(&p, 1000.0)).starts_with("name,value_real,value_imag\n"));
        let rows = vec![TraceRow {
            iteration: 0,
            loss: 1.0,
        }];
        assert!(to_string(&rows).starts_with("iteration,loss\n"));
        let rows = vec![RmseRow {
            segment: 0,
            parameter: "omega0".into(),
            rmse: Some(0.5),
            divergence_count: 0,
        }];
        assert!(to_string(&rows).starts_with("segment,parameter,rmse,divergence_count\n"));
    }

    #[test]
    fn reference_signal_round_trips_exactly() {
        let (x, _, _) = reference_signal(NoiseSpec::new(0.25, 3).unwrap());
        let text = to_string(&signal_rows(&x));
        let rows: Vec<SignalRow> = read_records(text.as_bytes()).unwrap();
        assert_eq!(signal_from_rows(&rows, 1000.0).unwrap(), x);
    }

    #[test]
    fn params_round_trip() {
        let (_, p, _) = reference_signal(NoiseSpec::none());
        let text = to_string(&param_rows(&p, 1000.0));
        let rows: Vec<ParamRow> = read_records(text.as_bytes()).unwrap();
        let back = params_from_rows(&rows, 1000.0).unwrap();
        assert_eq!(back.phasors, p.phasors);
        assert!((back.omega0 - p.omega0).abs() < 1e-15);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "index,real,imag\n0,1.0,2.0\n1,oops,2.0\n";
        match read_records::<_, SignalRow>(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_order_index_is_rejected() {
        let rows = vec![
            SignalRow {
                index: 0,
                real: 0.0,
                imag: 0.0,
            },
            SignalRow {
                index: 2,
                real: 0.0,
                imag: 0.0,
            },
        ];
        assert!(matches!(
            signal_from_rows(&rows, 1.0),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn missing_rmse_is_an_empty_field() {
        let rows = vec![RmseRow {
            segment: 1,
            parameter: "c1".into(),
            rmse: None,
            divergence_count: 200,
        }];
        let text = to_string(&rows);
        assert!(text.ends_with("1,c1,,200\n"));
        let back: Vec<RmseRow> = read_records(text.as_bytes()).unwrap();
        assert_eq!(back, rows);
    }
}
