//! Drives the command-line pipeline from a TOML string: parse, override,
//! validate and write the tracking CSV files into a directory.
//!
//! ```text
//! cargo run --example run_config -- [out_dir]
//! ```

use mcsa::cli::{run_command, Command};
use mcsa::config::RunConfig;

const CONFIG: &str = r#"
[signal]
sigma = 0.1
seed = 42

[estimator]
mode = "concentrated"
alpha = 0.1

[tracking]
segment_length = 200
"#;

fn main() -> mcsa::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/run_config".into());
    let mut config = RunConfig::from_toml_str(CONFIG)?;
    config.estimator.max_iters = 500;
    config.validate()?;
    let written = run_command(Command::Track, &config, out.as_ref())?;
    println!("{} files written to {out}", written.len());
    for path in written
        .iter()
        .filter(|p| p.to_string_lossy().ends_with("_params.csv"))
    {
        println!("  {}", path.display());
    }
    Ok(())
}
