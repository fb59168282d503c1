//! `fleetplan bench`: wall-clock timings of the planning stages.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use fleetplan_core::clustering::cluster_sensors;
use fleetplan_core::planner::{plan_collaborative, plan_non_collaborative};
use fleetplan_core::route_eval::Mode;
use fleetplan_core::scenario::{DistanceMatrix, generate_scenario};
use fleetplan_core::seeds;

use crate::GlobalArgs;
use crate::config::FileConfig;
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct BenchArgs {
    /// Sensors in the benchmark scenario.
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,

    /// UAVs in the benchmark scenario.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,

    /// Field size in meters (square).
    #[arg(long, default_value_t = 3400.0)]
    pub field: f64,

    /// Repetitions per stage.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,

    /// Output directory.
    #[arg(short, long, value_name = "DIR")]
    pub output: PathBuf,
}

pub fn run(global: &GlobalArgs, file: &FileConfig, args: BenchArgs) -> Result<()> {
    let generate_config = file.generate_config();
    let config = file.planner_config(Mode::Collaborative, global.seed)?;

    let mut stages: Vec<(String, Vec<f64>)> = Vec::new();
    let mut time_stage = |name: &str, mut body: Box<dyn FnMut() -> Result<()> + '_>| -> Result<()> {
        let mut samples = Vec::with_capacity(args.reps as usize);
        for _ in 0..args.reps {
            let t = Instant::now();
            body()?;
            samples.push(t.elapsed().as_secs_f64() * 1e3);
        }
        stages.push((name.to_string(), samples));
        Ok(())
    };

    let field = (args.field, args.field);
    let scenario = generate_scenario(args.n as usize, args.q as usize, field, global.seed, &generate_config)?;
    let dm = DistanceMatrix::build(&scenario);

    time_stage(
        "generate",
        Box::new(|| {
            generate_scenario(args.n as usize, args.q as usize, field, global.seed, &generate_config)?;
            Ok(())
        }),
    )?;
    time_stage(
        "distance_matrix",
        Box::new(|| {
            DistanceMatrix::build(&scenario);
            Ok(())
        }),
    )?;
    time_stage(
        "clustering",
        Box::new(|| {
            cluster_sensors(
                &scenario,
                &dm,
                scenario.n_uavs(),
                config.cluster_restarts,
                seeds::child_seed(global.seed, "clustering"),
            )?;
            Ok(())
        }),
    )?;
    time_stage(
        "plan_non_collaborative",
        Box::new(|| {
            plan_non_collaborative(&scenario, &config)?;
            Ok(())
        }),
    )?;
    time_stage(
        "plan_collaborative",
        Box::new(|| {
            plan_collaborative(&scenario, &config)?;
            Ok(())
        }),
    )?;

    let mut csv = String::from("stage,rep,millis\n");
    let mut table = format!("{:<24} {:>10} {:>10}\n", "stage", "median ms", "reps");
    for (name, samples) in &stages {
        for (rep, ms) in samples.iter().enumerate() {
            csv.push_str(&format!("{name},{rep},{ms:.3}\n"));
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        table.push_str(&format!("{name:<24} {median:>10.1} {:>10}\n", samples.len()));
    }

    let mut manifest = ManifestBuilder::new(
        serde_json::json!({"n": args.n, "q": args.q, "field": args.field, "reps": args.reps}),
        vec![global.seed],
    );
    manifest.write_output(&args.output.join("bench.csv"), &csv)?;
    manifest.write_output(&args.output.join("bench.txt"), &table)?;
    manifest.mark("bench");
    manifest.finish(&args.output).context("writing manifest")?;

    if !global.quiet {
        print!("{table}");
    }
    Ok(())
}
