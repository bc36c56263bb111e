//! Compares the analytic gradient of the segment loss with central finite
//! differences at a point away from the optimum.

use mcsa::estimation::{fd_gradient, gradient, loss, FdSteps};
use mcsa::signal::{hz_to_omega, reference_signal, ModelParams, NoiseSpec};
use num_complex::Complex64;

fn main() -> mcsa::Result<()> {
    let (x, truth, structure) = reference_signal(NoiseSpec::new(0.25, 3)?);
    let segment = x.slice(0, 250)?;
    let fs = x.sample_rate();
    let point = ModelParams::new(
        truth.omega0 + hz_to_omega(0.4, fs),
        truth.omegac - hz_to_omega(0.3, fs),
        truth
            .phasors
            .iter()
            .map(|(k, c)| (*k, c * Complex64::new(0.8, 0.1)))
            .collect(),
    );

    let analytic = gradient(&segment, &point, &structure)?;
    let numeric = fd_gradient(&segment, &point, &structure, FdSteps::default())?;
    println!("loss {:.6}", loss(&segment, &point, &structure)?);
    println!(
        "{:>14} {:>14} {:>14}",
        "coordinate", "analytic", "finite diff"
    );
    let mut names = vec!["w0".to_string(), "wc".to_string()];
    for key in analytic.d_phasors.keys() {
        names.push(format!("re {key}"));
        names.push(format!("im {key}"));
    }
    for (name, (a, n)) in names
        .iter()
        .zip(analytic.coordinates().iter().zip(numeric.coordinates()))
    {
        println!("{name:>14} {a:>14.6e} {n:>14.6e}");
    }
    println!(
        "max relative error {:.2e}",
        analytic.max_relative_error(&numeric, 1e-6)
    );
    Ok(())
}
