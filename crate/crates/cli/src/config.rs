//! Layered run configuration: built-in defaults, then an optional
//! TOML/JSON config file, then explicit command-line flags.

use std::path::Path;

use anyhow::{Context, Result, bail};
use fleetplan_core::de::DeConfig;
use fleetplan_core::planner::{InsertionPolicy, PlannerConfig};
use fleetplan_core::route_eval::{CostWeights, Mode};
use fleetplan_core::scenario::GenerateConfig;
use serde::Deserialize;

/// Planner-level knobs exposed in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub cluster_restarts: usize,
    /// `cheapest-position` or `append-only`.
    pub insertion: String,
    pub polish: bool,
}

impl Default for PlannerSection {
    fn default() -> Self {
        PlannerSection {
            cluster_restarts: 50,
            insertion: "cheapest-position".to_string(),
            polish: true,
        }
    }
}

/// Optional config file contents. Every section falls back to defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<GenerateConfig>,
    pub de: Option<DeConfig>,
    pub weights: Option<CostWeights>,
    pub planner: Option<PlannerSection>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed: FileConfig = if is_json {
        serde_json::from_str(&text)
            .with_context(|| format!("parsing JSON config {}", path.display()))?
    } else {
        toml::from_str(&text)
            .with_context(|| format!("parsing TOML config {}", path.display()))?
    };
    Ok(parsed)
}

impl FileConfig {
    pub fn generate_config(&self) -> GenerateConfig {
        self.scenario.clone().unwrap_or_default()
    }

    /// Assemble the planner configuration for `mode` under `seed`.
    pub fn planner_config(&self, mode: Mode, seed: u64) -> Result<PlannerConfig> {
        let section = self.planner.clone().unwrap_or_default();
        let insertion = match section.insertion.as_str() {
            "cheapest-position" => InsertionPolicy::CheapestPosition,
            "append-only" => InsertionPolicy::AppendOnly,
            other => bail!("planner.insertion must be cheapest-position or append-only, got {other:?}"),
        };
        let config = PlannerConfig {
            de: self.de.unwrap_or_default(),
            weights: self.weights.unwrap_or_default(),
            mode,
            cluster_restarts: section.cluster_restarts,
            insertion,
            polish: section.polish,
            seed,
        };
        config.validate()?;
        Ok(config)
    }
}
