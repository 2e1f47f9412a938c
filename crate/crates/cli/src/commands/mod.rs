mod fit;
mod limits;
mod matsko;
mod noise;
mod polarimetry;
mod sweep;

use std::path::PathBuf;

use crate::config::Config;
use crate::error::CliError;
use crate::output::Report;
use crate::Command;

pub struct Context {
    pub config: Config,
    /// Relative data paths in the config resolve against this directory.
    pub base_dir: PathBuf,
    pub deplete: bool,
}

pub fn dispatch(command: Command, ctx: &Context) -> Result<Report, CliError> {
    match command {
        Command::Sweep => sweep::run(ctx),
        Command::Noise => noise::run(ctx),
        Command::Limits => limits::run(ctx),
        Command::Matsko => matsko::run(ctx),
        Command::Fit => fit::run(ctx),
        Command::Polarimetry => polarimetry::run(ctx),
    }
}
