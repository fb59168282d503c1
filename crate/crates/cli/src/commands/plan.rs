//! `fleetplan plan`: run one mode and write plan JSON, metrics CSV,
//! per-UAV trace CSVs, the assignment CSV, and an SVG route plot.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use fleetplan_core::planner::{self, InsertionPolicy, TracePhase, plan_mission, plan_to_json};
use fleetplan_core::route_eval::{Mode, metrics_csv};
use fleetplan_core::scenario::{DistanceMatrix, load_scenario};

use crate::GlobalArgs;
use crate::config::FileConfig;
use crate::manifest::ManifestBuilder;
use crate::plot;

#[derive(Args)]
pub struct PlanArgs {
    /// Scenario file to plan against.
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,

    /// Planning regime.
    #[arg(long, value_enum, default_value_t = ModeArg::Collaborative)]
    pub mode: ModeArg,

    /// Simulate this UAV aborting: its sensors are redistributed to the
    /// remaining fleet.
    #[arg(long, value_name = "UAV_ID")]
    pub fail_uav: Option<u32>,

    /// Reassign by appending to route tails instead of cheapest insertion.
    #[arg(long)]
    pub append_only: bool,

    /// Skip the DE polish pass after reassignment.
    #[arg(long)]
    pub no_polish: bool,

    /// Output directory.
    #[arg(short, long, value_name = "DIR")]
    pub output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Collaborative,
    NonCollaborative,
}

impl From<ModeArg> for Mode {
    fn from(mode: ModeArg) -> Mode {
        match mode {
            ModeArg::Collaborative => Mode::Collaborative,
            ModeArg::NonCollaborative => Mode::NonCollaborative,
        }
    }
}

pub fn run(global: &GlobalArgs, file: &FileConfig, args: PlanArgs) -> Result<()> {
    let mut config = file.planner_config(args.mode.into(), global.seed)?;
    if args.append_only {
        config.insertion = InsertionPolicy::AppendOnly;
    }
    if args.no_polish {
        config.polish = false;
    }

    let scenario = load_scenario(&args.scenario)
        .with_context(|| format!("loading scenario {}", args.scenario.display()))?;
    let mut manifest = ManifestBuilder::new(
        serde_json::json!({
            "mode": config.mode,
            "seed": config.seed,
            "de": config.de,
            "weights": config.weights,
            "cluster_restarts": config.cluster_restarts,
            "insertion": config.insertion,
            "polish": config.polish,
            "fail_uav": args.fail_uav,
        }),
        vec![global.seed],
    );
    manifest.record_input(&args.scenario)?;

    let outcome = plan_mission(&scenario, &config).context("planning mission")?;
    manifest.mark("plan");

    let dm = DistanceMatrix::build(&scenario);
    let (plan, metrics) = match args.fail_uav {
        Some(failed) => {
            let plan = planner::fail_uav(&outcome.plan, &scenario, &dm, failed, config.insertion)
                .context("redistributing the failed UAV's load")?;
            let metrics =
                fleetplan_core::route_eval::plan_metrics(&plan, &scenario, &dm, &config.weights)?;
            (plan, metrics)
        }
        None => (outcome.plan, outcome.metrics),
    };
    manifest.mark("failover");

    plan.validate(&scenario).context("validating final plan")?;

    manifest.write_output(&args.output.join("plan.json"), &plan_to_json(&plan, global.seed))?;
    manifest.write_output(&args.output.join("metrics.csv"), &metrics_csv(&metrics))?;
    let mut assignment = String::from("sensor_id,label\n");
    for (i, &owner) in plan.owner_of.iter().enumerate() {
        assignment.push_str(&format!("{},{}\n", i + 1, owner));
    }
    manifest.write_output(&args.output.join("assignment.csv"), &assignment)?;
    for trace in &outcome.traces {
        let name = match trace.phase {
            TracePhase::Route => format!("trace_u{}.csv", trace.uav_id),
            TracePhase::Polish => format!("trace_u{}_polish.csv", trace.uav_id),
        };
        manifest.write_output(&args.output.join(name), &trace.to_csv())?;
    }
    manifest.write_output(&args.output.join("routes.svg"), &plot::render(&scenario, &plan))?;
    manifest.mark("outputs");
    manifest.finish(&args.output)?;

    if !global.quiet {
        println!(
            "{} plan: visited {}/{} sensors, fleet cost {:.1}, violations {:.1}s -> {}",
            plan.mode,
            plan.visited_count(),
            scenario.n_sensors(),
            metrics.fleet.cost,
            metrics.fleet.violation_s,
            args.output.display()
        );
    }
    Ok(())
}
