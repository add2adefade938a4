// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(name = "infoengine", version, about = "Information engine scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate engine yield, information gain and generator cost.
    ThermoTable(Common),
    /// Optimize a swap trajectory and refine a bit stream.
    Refine(Common),
    /// Run an autonomous Turing machine and write its ledger trace.
    AtmRun(Common),
    /// Train the pattern learner on a gaze walk.
    Learn(Common),
    /// Plan a path across a resource field.
    Terrain(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (kind, common) = match &cli.command {
        Command::ThermoTable(c) => ("thermo-table", c),
        Command::Refine(c) => ("refine", c),
        Command::AtmRun(c) => ("atm-run", c),
        Command::Learn(c) => ("learn", c),
        Command::Terrain(c) => ("terrain", c),
    };
    let cfg = Config::load(&common.config)?;
    std::fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", common.out.display())))?;
    let outputs = match kind {
        "thermo-table" => commands::thermo_table::run(&cfg)?,
        "refine" => commands::refine::run(&cfg, common.seed)?,
        "atm-run" => commands::atm::run(&cfg, common.seed)?,
        "learn" => commands::learn::run(&cfg, common.seed)?,
        _ => commands::terrain::run(&cfg)?,
    };
    for (name, contents) in &outputs.files {
        write_out(&common.out, name, contents)?;
    }
    outputs.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("infoengine: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
