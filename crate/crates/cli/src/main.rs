use std::process::ExitCode;

use clap::Parser;
use psr_sim::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("psr-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
