//! `fleetplan generate`: synthesize a scenario file.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use fleetplan_core::scenario::{GenerateConfig, generate_scenario, scenario_to_json};

use crate::GlobalArgs;
use crate::config::FileConfig;
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct GenerateArgs {
    /// Number of sensors.
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,

    /// Number of UAVs.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,

    /// Field width in meters (also the height unless --field-h is given).
    #[arg(long, default_value_t = 3400.0)]
    pub field: f64,

    /// Field height in meters.
    #[arg(long)]
    pub field_h: Option<f64>,

    /// Battery lifetime per UAV in seconds.
    #[arg(long)]
    pub battery: Option<f64>,

    /// Ground speed in meters per second.
    #[arg(long)]
    pub speed: Option<f64>,

    /// Hover time per sensor in seconds.
    #[arg(long)]
    pub dwell: Option<f64>,

    /// Takeoff/landing time in seconds.
    #[arg(long)]
    pub t0: Option<f64>,

    /// Number of scatter blobs.
    #[arg(long)]
    pub blobs: Option<usize>,

    /// Output scenario file.
    #[arg(short, long, value_name = "FILE")]
    pub output: PathBuf,
}

pub fn resolve_generate_config(file: &FileConfig, args: &GenerateArgs) -> GenerateConfig {
    let mut config = file.generate_config();
    if let Some(battery) = args.battery {
        config.battery_s = battery;
    }
    if let Some(speed) = args.speed {
        config.speed_mps = speed;
    }
    if let Some(dwell) = args.dwell {
        config.dwell_s = dwell;
    }
    if let Some(t0) = args.t0 {
        config.t0_s = t0;
    }
    if let Some(blobs) = args.blobs {
        config.blob_count = blobs;
    }
    config
}

pub fn run(global: &GlobalArgs, file: &FileConfig, args: GenerateArgs) -> Result<()> {
    let config = resolve_generate_config(file, &args);
    let field = (args.field, args.field_h.unwrap_or(args.field));
    let scenario = generate_scenario(args.n as usize, args.q as usize, field, global.seed, &config)
        .context("generating scenario")?;

    let mut manifest = ManifestBuilder::new(serde_json::to_value(&config)?, vec![global.seed]);
    manifest.write_output(&args.output, &scenario_to_json(&scenario))?;
    manifest.mark("generate");
    let dir = args
        .output
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    manifest.finish(&dir)?;

    if !global.quiet {
        println!(
            "wrote {} ({} sensors, {} UAVs, {:.0}x{:.0} m, seed {})",
            args.output.display(),
            args.n,
            args.q,
            field.0,
            field.1,
            global.seed
        );
    }
    Ok(())
}
