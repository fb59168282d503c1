//! `fleetplan compare`: run both modes over one or many seeds and emit
//! the per-seed plus median comparison report.

use std::path::PathBuf;

use anyhow::{Context, Result, bail};
use clap::Args;
use fleetplan_core::planner::compare_modes;
use fleetplan_core::route_eval::Mode;
use fleetplan_core::scenario::{Scenario, generate_scenario, load_scenario};
use rayon::prelude::*;

use crate::GlobalArgs;
use crate::config::FileConfig;
use crate::manifest::ManifestBuilder;
use crate::report::{ReportRow, to_csv, to_table};

#[derive(Args)]
pub struct CompareArgs {
    /// Fixed scenario file; omit to generate one per seed.
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,

    /// Seeds to run: `a..b` (inclusive) or a comma list like `1,4,9`.
    /// Defaults to the single global --seed.
    #[arg(long, value_name = "RANGE")]
    pub seeds: Option<String>,

    /// Sensors per generated scenario.
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,

    /// UAVs per generated scenario.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,

    /// Field size in meters (square) for generated scenarios.
    #[arg(long, default_value_t = 3400.0)]
    pub field: f64,

    /// Output directory.
    #[arg(short, long, value_name = "DIR")]
    pub output: PathBuf,
}

pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = spec.split_once("..") {
        let start: u64 = a.trim().parse().context("seed range start")?;
        let end: u64 = b.trim().parse().context("seed range end")?;
        if end < start {
            bail!("--seeds range end {end} is below start {start}");
        }
        return Ok((start..=end).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("seed {s:?}")))
        .collect()
}

pub fn run(global: &GlobalArgs, file: &FileConfig, args: CompareArgs) -> Result<()> {
    let seeds = match &args.seeds {
        Some(spec) => parse_seeds(spec)?,
        None => vec![global.seed],
    };

    let fixed_scenario: Option<Scenario> = match &args.scenario {
        Some(path) => Some(
            load_scenario(path).with_context(|| format!("loading scenario {}", path.display()))?,
        ),
        None => None,
    };

    let mut manifest = ManifestBuilder::new(
        serde_json::json!({
            "de": file.planner_config(Mode::Collaborative, 0)?.de,
            "weights": file.planner_config(Mode::Collaborative, 0)?.weights,
            "n": args.n,
            "q": args.q,
            "field": args.field,
            "scenario": args.scenario.as_ref().map(|p| p.display().to_string()),
        }),
        seeds.clone(),
    );
    if let Some(path) = &args.scenario {
        manifest.record_input(path)?;
    }

    let generate_config = file.generate_config();
    let rows: Vec<Result<ReportRow>> = seeds
        .par_iter()
        .map(|&seed| {
            let scenario = match &fixed_scenario {
                Some(s) => s.clone(),
                None => generate_scenario(
                    args.n as usize,
                    args.q as usize,
                    (args.field, args.field),
                    seed,
                    &generate_config,
                )?,
            };
            let config = file.planner_config(Mode::Collaborative, seed)?;
            let report = compare_modes(&scenario, &config)?;
            Ok(ReportRow::from_report(&report))
        })
        .collect();
    let rows: Vec<ReportRow> = rows.into_iter().collect::<Result<_>>()?;
    manifest.mark("compare");

    let csv = to_csv(&rows);
    let table = to_table(&rows);
    manifest.write_output(&args.output.join("compare.csv"), &csv)?;
    manifest.write_output(&args.output.join("report.txt"), &table)?;
    manifest.mark("outputs");
    manifest.finish(&args.output)?;

    if !global.quiet {
        print!("{table}");
        println!("-> {}", args.output.display());
    }
    Ok(())
}
