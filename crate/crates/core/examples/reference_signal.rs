//! Builds the reference current (60 Hz fundamental, three harmonics and three
//! 5 Hz interharmonics), adds noise and writes it as CSV.
//!
//! ```text
//! cargo run --example reference_signal -- [out.csv]
//! ```

use mcsa::io::{signal_rows, write_file};
use mcsa::signal::{reference_signal, NoiseSpec};

fn main() -> mcsa::Result<()> {
    let (x, truth, structure) = reference_signal(NoiseSpec::new(0.25, 1)?);
    let fs = x.sample_rate();
    println!(
        "{} samples at {fs} Hz, mean power {:.4}",
        x.len(),
        x.mean_power()
    );
    println!(
        "f0 = {:.1} Hz, fc = {:.1} Hz",
        truth.f0_hz(fs),
        truth.fc_hz(fs)
    );
    for key in structure.components() {
        let w = key.omega(truth.omega0, truth.omegac);
        let c = truth.phasors[&key];
        println!(
            "  {key:>3}: {:6.1} Hz  |c| = {:.2}",
            w * fs / std::f64::consts::TAU,
            c.norm()
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        write_file(path.as_ref(), &signal_rows(&x))?;
        println!("wrote {path}");
    }
    Ok(())
}
