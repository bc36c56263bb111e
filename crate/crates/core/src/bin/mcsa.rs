use clap::Parser;
use mcsa::cli::{exit_code, run_command, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("MCSA_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = cli
        .resolve_config()
        .and_then(|config| run_command(cli.command, &config, &cli.out));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
