//! Fits one noisy segment from the spectral starting point with both
//! descent modes and prints how the loss falls.

use mcsa::estimation::{fit_segment, EstimatorConfig};
use mcsa::signal::{reference_signal, ModelParams, NoiseSpec};
use mcsa::spectral::{initialize_from_spectrum, SearchRanges};

fn main() -> mcsa::Result<()> {
    let (x, truth, structure) = reference_signal(NoiseSpec::new(0.25, 5)?);
    let fs = x.sample_rate();
    let segment = x.slice(0, 250)?;
    let ranges = SearchRanges::default();
    let start = initialize_from_spectrum(&segment, &structure, ranges.f0_hz, ranges.fc_hz)?;
    // keep the frequencies, forget the phasors
    let start = ModelParams::zeros(start.omega0, start.omegac, &structure);

    for config in [EstimatorConfig::joint(), EstimatorConfig::concentrated()] {
        let trace = fit_segment(&segment, &start, &structure, &config)?;
        let h = &trace.loss_history;
        println!("{:?}: {} iterations", config.mode, trace.iterations_run);
        for i in [0, 4, 19, 99, h.len() - 1] {
            if let Some(l) = h.get(i) {
                println!("  iteration {:>3}: loss {l:.6}", i + 1);
            }
        }
        let p = &trace.final_params;
        println!(
            "  f0 {:.4} Hz (true {:.1}), fc {:.4} Hz (true {:.1})",
            p.f0_hz(fs),
            truth.f0_hz(fs),
            p.fc_hz(fs),
            truth.fc_hz(fs)
        );
    }
    Ok(())
}
