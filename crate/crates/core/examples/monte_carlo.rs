//! A small Monte Carlo study of the tracker at two noise levels.
//!
//! ```text
//! cargo run --release --example monte_carlo -- [n_trials]
//! ```

use mcsa::validation::{monte_carlo, MonteCarloSetup};

fn main() -> mcsa::Result<()> {
    let n_trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(40);
    for sigma in [0.1, 0.25] {
        let setup = MonteCarloSetup {
            n_trials,
            noise_sigma: sigma,
            ..MonteCarloSetup::default()
        };
        let report = monte_carlo(&setup)?;
        println!(
            "sigma {sigma}, {n_trials} trials, {} divergences",
            report.total_divergences()
        );
        println!("  segment  rmse w0     rmse wc     rmse c1");
        for (s, seg) in report.per_segment.iter().enumerate() {
            let c1 = seg.phasors.values().next().copied().flatten();
            let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3e}"));
            println!(
                "  {s:>7}  {:<11} {:<11} {}",
                show(seg.omega0),
                show(seg.omegac),
                show(c1)
            );
        }
    }
    Ok(())
}
