//! Magnitude spectrum of the noiseless reference current, its peaks, and the
//! starting point the spectral initializer derives from one segment.

use mcsa::signal::{reference_signal, NoiseSpec};
use mcsa::spectral::{dft_magnitude, initialize_from_spectrum, SearchRanges};

fn main() -> mcsa::Result<()> {
    let (x, _, structure) = reference_signal(NoiseSpec::none());
    let spectrum = dft_magnitude(&x, x.len())?;
    println!("peaks above 0.01:");
    for i in spectrum.local_maxima() {
        if spectrum.magnitudes[i] > 0.01 {
            println!(
                "  {:7.1} Hz  {:.6}",
                spectrum.bin_frequencies[i], spectrum.magnitudes[i]
            );
        }
    }

    let segment = x.slice(0, 250)?;
    let ranges = SearchRanges::default();
    let init = initialize_from_spectrum(&segment, &structure, ranges.f0_hz, ranges.fc_hz)?;
    let fs = x.sample_rate();
    println!(
        "initializer on the first 250 samples: f0 = {:.3} Hz, fc = {:.3} Hz",
        init.f0_hz(fs),
        init.fc_hz(fs)
    );
    Ok(())
}
