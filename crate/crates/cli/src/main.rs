//! Command-line front end for the fleetplan mission planner.

mod commands;
mod config;
mod manifest;
mod plot;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fleetplan",
    version,
    about = "Multi-UAV sensor-network data-collection mission planner",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Master seed; every random sub-stream derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// TOML or JSON file overriding scenario/DE/weights/planner defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a scenario file.
    Generate(commands::generate::GenerateArgs),
    /// Plan a mission in one mode and write plan, metrics, traces, and plot.
    Plan(commands::plan::PlanArgs),
    /// Compare collaborative vs non-collaborative planning over seeds.
    Compare(commands::compare::CompareArgs),
    /// Time the planning stages.
    Bench(commands::bench::BenchArgs),
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let file_config = config::load_file_config(cli.global.config.as_deref())?;
    match cli.command {
        Command::Generate(args) => commands::generate::run(&cli.global, &file_config, args),
        Command::Plan(args) => commands::plan::run(&cli.global, &file_config, args),
        Command::Compare(args) => commands::compare::run(&cli.global, &file_config, args),
        Command::Bench(args) => commands::bench::run(&cli.global, &file_config, args),
    }
}
