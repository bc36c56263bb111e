//! Command-line front end: argument parsing, overrides and the commands
//! that write plot-ready CSV files.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimation::{fit_segment, Mode};
use crate::io::{
    decomposition_rows, param_rows, report_rows, signal_rows, spectrum_rows, trace_rows, write_file,
};
use crate::spectral::{dft_magnitude, initialize_from_spectrum};
use crate::tracking::{segment_signal, track, Initialization};
use crate::validation::monte_carlo;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_ESTIMATION: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Write the synthetic current
    Generate,
    /// Write its magnitude spectrum
    Spectrum,
    /// Fit the first segment
    Estimate,
    /// Fit every segment and write the component decomposition
    Track,
    /// Monte Carlo RMSE study
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Joint,
    Concentrated,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Joint => Mode::Joint,
            ModeArg::Concentrated => Mode::Concentrated,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mcsa",
    version,
    about = "Harmonic/interharmonic current tracking by gradient descent",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML configuration; built-in defaults when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Noise seed (also the Monte Carlo base seed)
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

impl Cli {
    /// Loads the config file and applies flag overrides.
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut config = RunConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            config.signal.seed = seed;
            config.montecarlo.base_seed = seed;
        }
        if let Some(sigma) = self.sigma {
            config.signal.sigma = sigma;
        }
        if let Some(alpha) = self.alpha {
            config.estimator.alpha = alpha;
        }
        if let Some(iters) = self.iters {
            config.estimator.max_iters = iters;
        }
        if let Some(mode) = self.mode {
            config.estimator.mode = mode.into();
        }
        config.validate()?;
        Ok(config)
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error.root() {
        Error::Config { .. } => EXIT_CONFIG,
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        Error::Io(_) | Error::Parse { .. } => EXIT_IO,
        _ => EXIT_ESTIMATION,
    }
}

/// Runs one command and returns the files it wrote.
pub fn run_command(command: Command, config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let reference = config.reference_spec();
    let (signal, truth, structure) = reference.generate(config.noise())?;
    let fs = signal.sample_rate();
    let estimator = config.estimator_config();
    let m = config.tracking.segment_length;
    let mut written = Vec::new();
    let mut out = |name: String| {
        let p = out_dir.join(name);
        written.push(p.clone());
        p
    };

    match command {
        Command::Generate => {
            write_file(&out("signal.csv".into()), &signal_rows(&signal))?;
            write_file(&out("truth_params.csv".into()), &param_rows(&truth, fs))?;
        }
        Command::Spectrum => {
            let spectrum = dft_magnitude(&signal, config.n_fft())?;
            write_file(&out("spectrum.csv".into()), &spectrum_rows(&spectrum))?;
        }
        Command::Estimate => {
            let segments = segment_signal(&signal, m)?;
            let first = &segments.segments[0];
            let init = match config.initialization(&truth) {
                Initialization::Given(p) => p,
                Initialization::Spectral(r) => {
                    initialize_from_spectrum(first, &structure, r.f0_hz, r.fc_hz)?
                }
            };
            let trace = fit_segment(first, &init, &structure, &estimator)?;
            write_file(&out("trace.csv".into()), &trace_rows(&trace))?;
            write_file(
                &out("params.csv".into()),
                &param_rows(&trace.final_params, fs),
            )?;
        }
        Command::Track => {
            let result = track(
                &signal,
                m,
                &structure,
                &estimator,
                &config.initialization(&truth),
            )?;
            for (s, est) in result.per_segment.iter().enumerate() {
                write_file(
                    &out(format!("segment_{s}_params.csv")),
                    &param_rows(&est.params, fs),
                )?;
                write_file(
                    &out(format!("segment_{s}_trace.csv")),
                    &trace_rows(&est.trace),
                )?;
                write_file(
                    &out(format!("segment_{s}_decomposition.csv")),
                    &decomposition_rows(&est.decomposition),
                )?;
                for (name, part) in est.decomposition.parts() {
                    let spectrum = dft_magnitude(part, part.len())?;
                    write_file(
                        &out(format!("segment_{s}_{name}_spectrum.csv")),
                        &spectrum_rows(&spectrum),
                    )?;
                }
            }
        }
        Command::Montecarlo => {
            let report = monte_carlo(&config.montecarlo_setup())?;
            write_file(&out("montecarlo.csv".into()), &report_rows(&report))?;
        }
    }
    for p in &written {
        log::info!("wrote {}", p.display());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let cli = Cli::parse_from([
            "mcsa", "track", "--sigma", "0", "--seed", "9", "--alpha", "0.2", "--iters", "10",
            "--mode", "joint",
        ]);
        let c = cli.resolve_config().unwrap();
        assert_eq!(c.signal.sigma, 0.0);
        assert_eq!(c.signal.seed, 9);
        assert_eq!(c.montecarlo.base_seed, 9);
        assert_eq!(c.estimator.alpha, 0.2);
        assert_eq!(c.estimator.max_iters, 10);
        assert_eq!(c.estimator.mode, Mode::Joint);
    }

    #[test]
    fn invalid_override_is_a_config_error() {
        let cli = Cli::parse_from(["mcsa", "generate", "--sigma", "-1"]);
        let err = cli.resolve_config().unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let div = Error::Segment {
            segment: 1,
            source: Box::new(Error::Divergence {
                iteration: 3,
                reason: "nan".into(),
            }),
        };
        let io = Error::Io(std::io::Error::other("x"));
        let codes = [
            exit_code(&Error::config("a", "b")),
            exit_code(&div),
            exit_code(&io),
            exit_code(&Error::InitializationFailed("x".into())),
        ];
        assert_eq!(
            codes,
            [EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO, EXIT_ESTIMATION]
        );
    }
}
