//! Mission orchestration: clustering + per-UAV differential evolution,
//! collaborative reassignment of abandoned sensors, and mode comparison.
//!
//! Non-collaborative planning clusters the sensors into one group per
//! UAV, evolves each UAV's visiting order independently, and truncates
//! every route to its battery budget; whatever truncation dropped is
//! abandoned. Collaborative planning starts from the same stage and
//! then lets UAVs with spare battery absorb abandoned sensors
//! (nearest-first, cheapest insertion position), followed by a DE
//! polish of each modified route whose fitness also penalizes unused
//! battery, and a final absorption sweep.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering;
use crate::de::{self, DeConfig, Genome};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::route_eval::{
    self, CostWeights, Mode, Plan, Route, RouteMetrics, plan_metrics, truncated_route_cost,
};
use crate::scenario::{DistanceMatrix, Node, Scenario, UavSpec};
use crate::seeds;

/// Where reassignment may place an absorbed sensor in a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InsertionPolicy {
    /// Try every position and take the one with the smallest detour.
    CheapestPosition,
    /// Only append after the last visited sensor.
    AppendOnly,
}

/// Full planner configuration. The DE seed field is ignored: every DE
/// run derives its own stream from `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub de: DeConfig,
    pub weights: CostWeights,
    pub mode: Mode,
    pub cluster_restarts: usize,
    pub insertion: InsertionPolicy,
    /// Run a half-length DE polish on routes modified by reassignment.
    pub polish: bool,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            de: DeConfig::default(),
            weights: CostWeights::default(),
            mode: Mode::Collaborative,
            cluster_restarts: 50,
            insertion: InsertionPolicy::CheapestPosition,
            polish: true,
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        self.de.validate()?;
        self.weights.validate()?;
        if self.cluster_restarts == 0 {
            return Err(Error::validation("cluster_restarts", "must be at least 1"));
        }
        Ok(())
    }
}

/// One convergence row: fleet-facing cost statistics of the generation's
/// best route.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub generation: usize,
    pub best_cost: f64,
    pub mean_cost: f64,
    pub violation_sum: f64,
    pub tdiff_sum: f64,
}

/// Which optimization pass produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TracePhase {
    Route,
    Polish,
}

/// Convergence history of one UAV's DE run.
#[derive(Debug, Clone, PartialEq)]
pub struct UavTrace {
    pub uav_id: u32,
    pub phase: TracePhase,
    pub rows: Vec<TraceRow>,
}

impl UavTrace {
    /// CSV export: `generation,best_cost,mean_cost,violation_sum,tdiff_sum`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_cost,mean_cost,violation_sum,tdiff_sum\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6}\n",
                row.generation, row.best_cost, row.mean_cost, row.violation_sum, row.tdiff_sum
            ));
        }
        out
    }
}

/// A planned mission in one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOutcome {
    pub plan: Plan,
    pub metrics: RouteMetrics,
    pub traces: Vec<UavTrace>,
}

/// Side-by-side outcome of both modes on the same scenario and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub seed: u64,
    pub non_collaborative: ModeOutcome,
    pub collaborative: ModeOutcome,
    pub visited_ratio_non_collaborative: f64,
    pub visited_ratio_collaborative: f64,
    /// `1 - cost_collaborative / cost_non_collaborative`.
    pub cost_reduction: f64,
}

/// Recover a visiting order from random keys: ascending key order, ties
/// by sensor id. `ids` must be sorted ascending; gene `i` belongs to
/// `ids[i]`.
pub fn decode_visit_order(keys: &[f64], ids: &[u32]) -> Vec<u32> {
    debug_assert_eq!(keys.len(), ids.len());
    let mut ranked: Vec<usize> = (0..ids.len()).collect();
    ranked.sort_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(ids[a].cmp(&ids[b]))
    });
    ranked.into_iter().map(|i| ids[i]).collect()
}

/// Keys that decode to exactly `order` under [`decode_visit_order`].
fn keys_for_order(order: &[u32], ids: &[u32]) -> Genome {
    let len = order.len().max(1) as f64;
    let keys = ids
        .iter()
        .map(|id| {
            let rank = order.iter().position(|s| s == id).expect("id in order");
            (rank as f64 + 0.5) / len
        })
        .collect();
    Genome { keys }
}

struct RouteFitness<'a> {
    ids: &'a [u32],
    uav: &'a UavSpec,
    scenario: &'a Scenario,
    dm: &'a DistanceMatrix,
    weights: &'a CostWeights,
    /// Charge unused battery time (the collaborative objective term).
    include_slack: bool,
}

impl RouteFitness<'_> {
    fn mode(&self) -> Mode {
        if self.include_slack { Mode::Collaborative } else { Mode::NonCollaborative }
    }

    fn eval(&self, keys: &[f64]) -> Result<f64> {
        let order = decode_visit_order(keys, self.ids);
        truncated_route_cost(&order, self.uav, self.scenario, self.dm, self.weights, self.mode())
    }
}

/// Plan each UAV independently over its own cluster, then truncate to
/// the battery budget. Abandoned sensors stay abandoned.
pub fn plan_non_collaborative(scenario: &Scenario, config: &PlannerConfig) -> Result<ModeOutcome> {
    scenario.validate()?;
    config.validate()?;
    let dm = DistanceMatrix::build(scenario);
    non_collaborative_stage(scenario, &dm, config)
}

/// Plan collaboratively: the non-collaborative stage, then reassignment
/// of abandoned sensors into slack routes, a DE polish of modified
/// routes, and a final absorption sweep.
pub fn plan_collaborative(scenario: &Scenario, config: &PlannerConfig) -> Result<ModeOutcome> {
    scenario.validate()?;
    config.validate()?;
    let dm = DistanceMatrix::build(scenario);
    let stage = non_collaborative_stage(scenario, &dm, config)?;
    collaborative_from_stage(scenario, &dm, config, stage)
}

/// Run the configured mode.
pub fn plan_mission(scenario: &Scenario, config: &PlannerConfig) -> Result<ModeOutcome> {
    match config.mode {
        Mode::NonCollaborative => plan_non_collaborative(scenario, config),
        Mode::Collaborative => plan_collaborative(scenario, config),
    }
}

/// Run both modes from the same seed and assemble the comparison.
pub fn compare_modes(scenario: &Scenario, config: &PlannerConfig) -> Result<ComparisonReport> {
    scenario.validate()?;
    config.validate()?;
    let dm = DistanceMatrix::build(scenario);
    let non_collaborative = non_collaborative_stage(scenario, &dm, config)?;
    let collaborative =
        collaborative_from_stage(scenario, &dm, config, non_collaborative.clone())?;
    let cost_nc = non_collaborative.metrics.fleet.cost;
    let cost_c = collaborative.metrics.fleet.cost;
    Ok(ComparisonReport {
        seed: config.seed,
        visited_ratio_non_collaborative: non_collaborative.plan.visited_ratio(scenario),
        visited_ratio_collaborative: collaborative.plan.visited_ratio(scenario),
        cost_reduction: 1.0 - cost_c / cost_nc,
        non_collaborative,
        collaborative,
    })
}

fn check_feasible(scenario: &Scenario, dm: &DistanceMatrix) -> Result<()> {
    for uav in &scenario.uavs {
        let direct = route_eval::route_duration(&[], uav, scenario, dm)?;
        if direct.return_time_s > uav.time_budget_s() {
            return Err(Error::Infeasible(format!(
                "UAV {}: direct start-to-end flight needs {:.1}s of a {:.1}s budget",
                uav.id,
                direct.return_time_s,
                uav.time_budget_s()
            )));
        }
    }
    Ok(())
}

fn non_collaborative_stage(
    scenario: &Scenario,
    dm: &DistanceMatrix,
    config: &PlannerConfig,
) -> Result<ModeOutcome> {
    check_feasible(scenario, dm)?;
    let q = scenario.n_uavs();
    let assignment = clustering::cluster_sensors(
        scenario,
        dm,
        q,
        config.cluster_restarts,
        seeds::child_seed(config.seed, "clustering"),
    )?;
    let groups = assignment.groups();
    let group_of_uav = match_clusters_to_uavs(&groups, scenario);

    let mut owner_of = vec![0u32; scenario.n_sensors()];
    for (uav_rank, &group) in group_of_uav.iter().enumerate() {
        for &id in &groups[group] {
            owner_of[(id - 1) as usize] = (uav_rank + 1) as u32;
        }
    }

    let results: Vec<Result<(Route, Vec<u32>, UavTrace)>> = group_of_uav
        .par_iter()
        .enumerate()
        .map(|(uav_rank, &group)| {
            let uav = &scenario.uavs[uav_rank];
            evolve_route(&groups[group], uav, scenario, dm, config, false)
        })
        .collect();

    let mut routes = Vec::with_capacity(q);
    let mut abandoned = BTreeSet::new();
    let mut traces = Vec::with_capacity(q);
    for result in results {
        let (route, dropped, trace) = result?;
        abandoned.extend(dropped);
        routes.push(route);
        traces.push(trace);
    }

    let plan = Plan {
        mode: Mode::NonCollaborative,
        routes,
        abandoned,
        owner_of,
    };
    plan.validate(scenario)?;
    let metrics = plan_metrics(&plan, scenario, dm, &config.weights)?;
    Ok(ModeOutcome { plan, metrics, traces })
}

/// Evolve one UAV's visiting order over the sensor ids in `members`.
fn evolve_route(
    members: &[u32],
    uav: &UavSpec,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    config: &PlannerConfig,
    include_slack: bool,
) -> Result<(Route, Vec<u32>, UavTrace)> {
    let mut ids = members.to_vec();
    ids.sort_unstable();
    if ids.is_empty() {
        let route = Route::build(uav.id, Vec::new(), scenario, dm)?;
        return Ok((
            route,
            Vec::new(),
            UavTrace { uav_id: uav.id, phase: TracePhase::Route, rows: Vec::new() },
        ));
    }

    let fitness = RouteFitness {
        ids: &ids,
        uav,
        scenario,
        dm,
        weights: &config.weights,
        include_slack,
    };
    let de_config = DeConfig {
        seed: seeds::child_seed(config.seed, &format!("de/u{}", uav.id)),
        ..config.de
    };
    let mut rows = Vec::with_capacity(de_config.max_generations + 1);
    let budget = uav.time_budget_s();
    let (best, _trace) = de::optimize_seeded(
        |keys| fitness.eval(keys),
        &de_config,
        ids.len(),
        &[],
        |generation, best_genome, best_cost, mean_cost| {
            let order = decode_visit_order(&best_genome.keys, &ids);
            let (kept, _) = route_eval::truncate_to_budget(&order, uav, scenario, dm)
                .expect("fitness already evaluated this genome");
            let timing = route_eval::route_duration(&kept, uav, scenario, dm)
                .expect("kept order references valid sensors");
            rows.push(TraceRow {
                generation,
                best_cost,
                mean_cost,
                violation_sum: (timing.return_time_s - budget).max(0.0),
                tdiff_sum: budget - timing.return_time_s,
            });
        },
    )?;

    let order = decode_visit_order(&best.keys, &ids);
    let (kept, dropped) = route_eval::truncate_to_budget(&order, uav, scenario, dm)?;
    let route = Route::build(uav.id, kept, scenario, dm)?;
    Ok((
        route,
        dropped,
        UavTrace { uav_id: uav.id, phase: TracePhase::Route, rows },
    ))
}

fn collaborative_from_stage(
    scenario: &Scenario,
    dm: &DistanceMatrix,
    config: &PlannerConfig,
    stage: ModeOutcome,
) -> Result<ModeOutcome> {
    let mut traces = stage.traces;
    let stage_orders: Vec<Vec<u32>> =
        stage.plan.routes.iter().map(|r| r.visit_order.clone()).collect();
    let mut plan = Plan { mode: Mode::Collaborative, ..stage.plan };

    plan = reassign_abandoned(&plan, scenario, dm, config.insertion)?;

    if config.polish && config.de.max_generations >= 2 {
        // Only routes that reassignment touched get a polish pass; an
        // untouched plan must come out identical to the stage output.
        let polish_results: Vec<Result<Option<(usize, Route, UavTrace)>>> = plan
            .routes
            .par_iter()
            .enumerate()
            .filter(|(rank, route)| route.visit_order != stage_orders[*rank])
            .map(|(rank, route)| {
                polish_route(route, scenario, dm, config)
                    .map(|polished| polished.map(|(r, t)| (rank, r, t)))
            })
            .collect();
        let mut polished_any = false;
        for result in polish_results {
            if let Some((rank, route, trace)) = result? {
                plan.routes[rank] = route;
                traces.push(trace);
                polished_any = true;
            }
        }
        // Polish may shorten a route and free enough slack for another
        // absorption sweep.
        if polished_any && !plan.abandoned.is_empty() {
            plan = reassign_abandoned(&plan, scenario, dm, config.insertion)?;
        }
    }

    plan.validate(scenario)?;
    let metrics = plan_metrics(&plan, scenario, dm, &config.weights)?;
    Ok(ModeOutcome { plan, metrics, traces })
}

/// Re-optimize the visiting order of one route with the collaborative
/// objective (duration plus unused-battery penalty), warm-started from
/// the current order. Returns `None` when the incumbent stays best.
fn polish_route(
    route: &Route,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    config: &PlannerConfig,
) -> Result<Option<(Route, UavTrace)>> {
    if route.visit_order.len() < 2 {
        return Ok(None);
    }
    let uav = scenario.uav(route.uav_id);
    let mut ids = route.visit_order.clone();
    ids.sort_unstable();
    let fitness = RouteFitness {
        ids: &ids,
        uav,
        scenario,
        dm,
        weights: &config.weights,
        include_slack: true,
    };
    let incumbent = keys_for_order(&route.visit_order, &ids);
    let incumbent_cost = fitness.eval(&incumbent.keys)?;
    let de_config = DeConfig {
        max_generations: config.de.max_generations / 2,
        seed: seeds::child_seed(config.seed, &format!("polish/u{}", uav.id)),
        ..config.de
    };
    let budget = uav.time_budget_s();
    let mut rows = Vec::with_capacity(de_config.max_generations + 1);
    let (best, _trace) = de::optimize_seeded(
        |keys| fitness.eval(keys),
        &de_config,
        ids.len(),
        std::slice::from_ref(&incumbent),
        |generation, best_genome, best_cost, mean_cost| {
            let order = decode_visit_order(&best_genome.keys, &ids);
            let (kept, _) = route_eval::truncate_to_budget(&order, uav, scenario, dm)
                .expect("fitness already evaluated this genome");
            let timing = route_eval::route_duration(&kept, uav, scenario, dm)
                .expect("kept order references valid sensors");
            rows.push(TraceRow {
                generation,
                best_cost,
                mean_cost,
                violation_sum: (timing.return_time_s - budget).max(0.0),
                tdiff_sum: budget - timing.return_time_s,
            });
        },
    )?;

    let best_cost = fitness.eval(&best.keys)?;
    if best_cost >= incumbent_cost {
        return Ok(None);
    }
    let order = decode_visit_order(&best.keys, &ids);
    let (kept, dropped) = route_eval::truncate_to_budget(&order, uav, scenario, dm)?;
    if !dropped.is_empty() {
        // A reorder that abandons sensors never replaces a feasible
        // incumbent, whatever its cost.
        return Ok(None);
    }
    let polished = Route::build(uav.id, kept, scenario, dm)?;
    Ok(Some((
        polished,
        UavTrace { uav_id: uav.id, phase: TracePhase::Polish, rows },
    )))
}

/// Absorb abandoned sensors into routes with battery slack.
///
/// UAVs take turns in id order. Each UAV repeatedly considers the
/// abandoned sensors nearest to its current route and inserts the first
/// one that still fits its budget (at the cheapest position, or
/// appended under [`InsertionPolicy::AppendOnly`]), until nothing fits.
/// Sweeps repeat until a full pass absorbs nothing. The abandoned set
/// shrinks strictly with every insertion and no visited sensor is ever
/// removed.
pub fn reassign_abandoned(
    plan: &Plan,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    policy: InsertionPolicy,
) -> Result<Plan> {
    reassign_within(plan, scenario, dm, policy, None)
}

fn reassign_within(
    plan: &Plan,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    policy: InsertionPolicy,
    eligible: Option<&BTreeSet<u32>>,
) -> Result<Plan> {
    for route in &plan.routes {
        let uav = scenario.uav(route.uav_id);
        let timing = route_eval::route_duration(&route.visit_order, uav, scenario, dm)?;
        if timing.return_time_s > uav.time_budget_s() {
            return Err(Error::validation(
                "plan",
                format!("UAV {} violates its budget before reassignment", route.uav_id),
            ));
        }
    }

    let mut orders: Vec<Vec<u32>> = plan.routes.iter().map(|r| r.visit_order.clone()).collect();
    let mut abandoned = plan.abandoned.clone();

    loop {
        let mut inserted_any = false;
        for (rank, route) in plan.routes.iter().enumerate() {
            if eligible.is_some_and(|e| !e.contains(&route.uav_id)) {
                continue;
            }
            let uav = scenario.uav(route.uav_id);
            while let Some((sensor, position)) =
                next_insertion(&orders[rank], &abandoned, uav, scenario, dm, policy)?
            {
                orders[rank].insert(position, sensor);
                abandoned.remove(&sensor);
                inserted_any = true;
            }
        }
        if !inserted_any {
            break;
        }
    }

    let mut routes = Vec::with_capacity(plan.routes.len());
    for (route, order) in plan.routes.iter().zip(orders) {
        routes.push(Route::build(route.uav_id, order, scenario, dm)?);
    }
    let new_plan = Plan {
        mode: plan.mode,
        routes,
        abandoned,
        owner_of: plan.owner_of.clone(),
    };
    new_plan.validate(scenario)?;
    Ok(new_plan)
}

/// The nearest abandoned sensor this UAV can still absorb, with its
/// insertion position; `None` when nothing fits.
fn next_insertion(
    order: &[u32],
    abandoned: &BTreeSet<u32>,
    uav: &UavSpec,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    policy: InsertionPolicy,
) -> Result<Option<(u32, usize)>> {
    if abandoned.is_empty() {
        return Ok(None);
    }
    // Distance from each abandoned sensor to the route's node chain.
    let mut candidates: Vec<(f64, u32)> = abandoned
        .iter()
        .map(|&sensor| {
            let s = Node::Sensor(sensor);
            let mut d = dm
                .dist(Node::UavStart(uav.id), s)
                .min(dm.dist(s, Node::End));
            for &visited in order {
                d = d.min(dm.dist(Node::Sensor(visited), s));
            }
            (d, sensor)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let budget = uav.time_budget_s();
    for (_, sensor) in candidates {
        let position = match policy {
            InsertionPolicy::AppendOnly => order.len(),
            InsertionPolicy::CheapestPosition => {
                cheapest_position(order, sensor, uav, dm)
            }
        };
        let mut trial = order.to_vec();
        trial.insert(position, sensor);
        let timing = route_eval::route_duration(&trial, uav, scenario, dm)?;
        if timing.return_time_s <= budget {
            return Ok(Some((sensor, position)));
        }
    }
    Ok(None)
}

/// Slot with the smallest added distance; earliest slot wins ties. The
/// dwell cost is position-independent, so the smallest detour is also
/// the smallest added time.
fn cheapest_position(order: &[u32], sensor: u32, uav: &UavSpec, dm: &DistanceMatrix) -> usize {
    let s = Node::Sensor(sensor);
    let mut best_pos = 0;
    let mut best_detour = f64::INFINITY;
    for pos in 0..=order.len() {
        let prev = if pos == 0 { Node::UavStart(uav.id) } else { Node::Sensor(order[pos - 1]) };
        let next = if pos == order.len() { Node::End } else { Node::Sensor(order[pos]) };
        let detour = dm.dist(prev, s) + dm.dist(s, next) - dm.dist(prev, next);
        if detour < best_detour {
            best_detour = detour;
            best_pos = pos;
        }
    }
    best_pos
}

/// Simulate the loss of one UAV: its whole visit list joins the
/// abandoned pool (the vehicle still returns to the end station) and
/// the remaining UAVs absorb what they can.
pub fn fail_uav(
    plan: &Plan,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    failed_uav: u32,
    policy: InsertionPolicy,
) -> Result<Plan> {
    let Some(rank) = plan.routes.iter().position(|r| r.uav_id == failed_uav) else {
        return Err(Error::validation(
            "fail_uav",
            format!("no route for UAV {failed_uav}"),
        ));
    };
    let mut dropped_plan = plan.clone();
    let removed = std::mem::take(&mut dropped_plan.routes[rank].visit_order);
    dropped_plan.routes[rank] = Route::build(failed_uav, Vec::new(), scenario, dm)?;
    dropped_plan.abandoned.extend(removed);

    let eligible: BTreeSet<u32> = plan
        .routes
        .iter()
        .map(|r| r.uav_id)
        .filter(|&id| id != failed_uav)
        .collect();
    reassign_within(&dropped_plan, scenario, dm, policy, Some(&eligible))
}

/// Match cluster groups to UAVs by minimal total start-to-centroid
/// distance. Exact for small fleets (permutation enumeration up to
/// `q = 9`), greedy nearest-centroid beyond.
fn match_clusters_to_uavs(groups: &[Vec<u32>], scenario: &Scenario) -> Vec<usize> {
    let q = groups.len();
    let centroids: Vec<Point> = groups
        .iter()
        .map(|group| {
            let mut x = 0.0;
            let mut y = 0.0;
            for &id in group {
                let p = scenario.sensor(id).position;
                x += p.x;
                y += p.y;
            }
            let len = group.len().max(1) as f64;
            Point::new(x / len, y / len)
        })
        .collect();
    let cost = |uav_rank: usize, group: usize| -> f64 {
        scenario.uavs[uav_rank].start_position.dist(&centroids[group])
    };

    if q <= 9 {
        let mut perm: Vec<usize> = (0..q).collect();
        let mut best = perm.clone();
        let mut best_cost = f64::INFINITY;
        loop {
            let total: f64 = (0..q).map(|u| cost(u, perm[u])).sum();
            if total < best_cost {
                best_cost = total;
                best = perm.clone();
            }
            if !next_perm(&mut perm) {
                break;
            }
        }
        best
    } else {
        let mut taken = vec![false; q];
        (0..q)
            .map(|u| {
                let group = (0..q)
                    .filter(|&g| !taken[g])
                    .min_by(|&a, &b| cost(u, a).total_cmp(&cost(u, b)))
                    .expect("one group per UAV");
                taken[group] = true;
                group
            })
            .collect()
    }
}

fn next_perm(items: &mut [usize]) -> bool {
    let n = items.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// Plan JSON export
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PlanRouteFile<'a> {
    id: u32,
    visit_order: &'a [u32],
    arrival_times_s: &'a [f64],
    return_time_s: f64,
    total_distance_m: f64,
}

#[derive(Serialize)]
struct PlanFile<'a> {
    mode: Mode,
    seed: u64,
    uavs: Vec<PlanRouteFile<'a>>,
    abandoned: Vec<u32>,
}

/// Serialize a plan to its canonical JSON text: per-UAV ordered sensor
/// ids with arrival and return times, the abandoned ids, mode, and seed.
pub fn plan_to_json(plan: &Plan, seed: u64) -> String {
    let file = PlanFile {
        mode: plan.mode,
        seed,
        uavs: plan
            .routes
            .iter()
            .map(|r| PlanRouteFile {
                id: r.uav_id,
                visit_order: &r.visit_order,
                arrival_times_s: &r.arrival_times_s,
                return_time_s: r.return_time_s,
                total_distance_m: r.total_distance_m,
            })
            .collect(),
        abandoned: plan.abandoned.iter().copied().collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("plan file model serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::scenario::{GenerateConfig, Sensor, generate_scenario};

    fn quick_config(seed: u64) -> PlannerConfig {
        PlannerConfig {
            de: DeConfig {
                population_size: 20,
                max_generations: 60,
                ..DeConfig::default()
            },
            cluster_restarts: 10,
            seed,
            ..PlannerConfig::default()
        }
    }

    #[test]
    fn decode_orders_by_key_then_id() {
        let ids = [3u32, 7, 9];
        assert_eq!(decode_visit_order(&[0.5, 0.1, 0.9], &ids), vec![7, 3, 9]);
        assert_eq!(decode_visit_order(&[0.5, 0.5, 0.1], &ids), vec![9, 3, 7]);
    }

    #[test]
    fn keys_round_trip_an_order() {
        let ids = [2u32, 4, 8, 9];
        let order = [8u32, 2, 9, 4];
        let genome = keys_for_order(&order, &ids);
        assert_eq!(decode_visit_order(&genome.keys, &ids), order.to_vec());
    }

    #[test]
    fn slack_budget_leaves_nothing_abandoned() {
        let config = GenerateConfig { battery_s: 1e7, ..GenerateConfig::default() };
        let scenario = generate_scenario(12, 2, (400.0, 400.0), 3, &config).unwrap();
        let outcome = plan_non_collaborative(&scenario, &quick_config(3)).unwrap();
        assert!(outcome.plan.abandoned.is_empty());
        assert_eq!(outcome.plan.visited_count(), 12);
        for m in &outcome.metrics.per_uav {
            assert_eq!(m.violation_s, 0.0);
        }
    }

    #[test]
    fn single_uav_small_instance_matches_oracle() {
        for seed in [1u64, 2, 3] {
            let gen_config = GenerateConfig {
                battery_s: 3000.0,
                ..GenerateConfig::default()
            };
            let scenario = generate_scenario(6, 1, (600.0, 600.0), seed, &gen_config).unwrap();
            let dm = DistanceMatrix::build(&scenario);
            let planner_config = PlannerConfig {
                de: DeConfig {
                    population_size: 30,
                    max_generations: 150,
                    ..DeConfig::default()
                },
                cluster_restarts: 5,
                seed,
                ..PlannerConfig::default()
            };
            let outcome = plan_non_collaborative(&scenario, &planner_config).unwrap();
            let ids: Vec<u32> = (1..=6).collect();
            let oracle = oracle::brute_force_route(
                &ids,
                scenario.uav(1),
                &scenario,
                &dm,
                &planner_config.weights,
                Mode::NonCollaborative,
            )
            .unwrap();
            let plan_cost = outcome.metrics.fleet.cost;
            assert!(
                plan_cost <= oracle.optimal_value * (1.0 + 1e-9),
                "seed {seed}: DE cost {plan_cost} vs oracle {}",
                oracle.optimal_value
            );
        }
    }

    fn hand_plan(scenario: &Scenario, dm: &DistanceMatrix, orders: Vec<Vec<u32>>, mode: Mode) -> Plan {
        let visited: BTreeSet<u32> = orders.iter().flatten().copied().collect();
        let abandoned: BTreeSet<u32> = (1..=scenario.n_sensors() as u32)
            .filter(|id| !visited.contains(id))
            .collect();
        let routes = orders
            .into_iter()
            .enumerate()
            .map(|(i, order)| Route::build((i + 1) as u32, order, scenario, dm).unwrap())
            .collect();
        Plan {
            mode,
            routes,
            abandoned,
            owner_of: vec![1; scenario.n_sensors()],
        }
    }

    /// Start at (0,0), end at (1000,0); sensors on the x axis.
    fn corridor(sensor_xs: &[f64], budget: f64, q: usize) -> Scenario {
        Scenario {
            sensors: sensor_xs
                .iter()
                .enumerate()
                .map(|(i, &x)| Sensor {
                    id: (i + 1) as u32,
                    position: Point::new(x, 0.0),
                    priority: 50.0,
                })
                .collect(),
            uavs: (0..q)
                .map(|i| UavSpec {
                    id: (i + 1) as u32,
                    start_position: Point::new(0.0, i as f64),
                    battery_budget_s: budget,
                    energy_rate: 1.0,
                    ground_speed_mps: 1.0,
                })
                .collect(),
            end_position: Point::new(1000.0, 0.0),
            field_bound: (1000.0, 1000.0),
            takeoff_landing_s: 0.0,
            dwell_s: 10.0,
            rng_seed: 0,
        }
    }

    #[test]
    fn reassign_absorbs_on_route_sensor() {
        // Sensor 2 sits on the line between sensor 1 and the end
        // station: zero detour, only the dwell is added.
        let scenario = corridor(&[200.0, 600.0], 1030.0, 1);
        let dm = DistanceMatrix::build(&scenario);
        let plan = hand_plan(&scenario, &dm, vec![vec![1]], Mode::Collaborative);
        assert_eq!(plan.abandoned.len(), 1);
        // Route time 1010; absorbing sensor 2 adds exactly one dwell.
        let out = reassign_abandoned(&plan, &scenario, &dm, InsertionPolicy::CheapestPosition).unwrap();
        assert!(out.abandoned.is_empty());
        assert_eq!(out.routes[0].visit_order, vec![1, 2]);
        assert!(out.routes[0].return_time_s <= 1030.0);
    }

    #[test]
    fn reassign_without_slack_is_a_noop() {
        // Budget equals the current return time: no dwell fits.
        let scenario = corridor(&[200.0, 600.0], 1010.0, 1);
        let dm = DistanceMatrix::build(&scenario);
        let plan = hand_plan(&scenario, &dm, vec![vec![1]], Mode::Collaborative);
        let out = reassign_abandoned(&plan, &scenario, &dm, InsertionPolicy::CheapestPosition).unwrap();
        assert_eq!(out.abandoned, plan.abandoned);
        assert_eq!(out.routes[0].visit_order, plan.routes[0].visit_order);
    }

    #[test]
    fn reassign_matches_exhaustive_insertion_oracle() {
        // Two slack UAVs, three abandoned sensors near the corridor.
        let scenario = corridor(&[100.0, 400.0, 500.0, 600.0, 900.0], 1075.0, 2);
        let dm = DistanceMatrix::build(&scenario);
        let plan = hand_plan(
            &scenario,
            &dm,
            vec![vec![1], vec![5]],
            Mode::Collaborative,
        );
        assert_eq!(plan.abandoned.len(), 3);
        let oracle_best = oracle::brute_force_insertion(&plan, &scenario, &dm).unwrap();
        let out = reassign_abandoned(&plan, &scenario, &dm, InsertionPolicy::CheapestPosition).unwrap();
        let absorbed = plan.abandoned.len() - out.abandoned.len();
        assert_eq!(
            absorbed,
            oracle_best.optimal_value as usize,
            "greedy absorbed {absorbed}, oracle {}",
            oracle_best.optimal_value
        );
        out.validate(&scenario).unwrap();
    }

    #[test]
    fn reassign_rejects_violating_plans() {
        let scenario = corridor(&[200.0], 500.0, 1); // direct flight alone needs 1000 s
        let dm = DistanceMatrix::build(&scenario);
        let route = Route::build(1, vec![1], &scenario, &dm).unwrap();
        let plan = Plan {
            mode: Mode::Collaborative,
            routes: vec![route],
            abandoned: BTreeSet::new(),
            owner_of: vec![1],
        };
        assert!(reassign_abandoned(&plan, &scenario, &dm, InsertionPolicy::CheapestPosition).is_err());
    }

    #[test]
    fn append_only_inserts_at_the_tail() {
        // Sensor 2 lies between start and sensor 1, so cheapest
        // insertion would prepend; append-only must still absorb it at
        // the tail when the budget allows.
        let scenario = corridor(&[600.0, 200.0], 2000.0, 1);
        let dm = DistanceMatrix::build(&scenario);
        let plan = hand_plan(&scenario, &dm, vec![vec![1]], Mode::Collaborative);
        let out = reassign_abandoned(&plan, &scenario, &dm, InsertionPolicy::AppendOnly).unwrap();
        assert_eq!(out.routes[0].visit_order, vec![1, 2]);
        let cheap = reassign_abandoned(&plan, &scenario, &dm, InsertionPolicy::CheapestPosition).unwrap();
        assert_eq!(cheap.routes[0].visit_order, vec![2, 1]);
        assert!(cheap.routes[0].return_time_s <= out.routes[0].return_time_s);
    }

    #[test]
    fn collaborative_without_abandonment_equals_stage_output() {
        let gen_config = GenerateConfig {
            battery_s: 1e7,
            ..GenerateConfig::default()
        };
        let scenario = generate_scenario(10, 2, (300.0, 300.0), 5, &gen_config).unwrap();
        let config = quick_config(5);
        let nc = plan_non_collaborative(&scenario, &config).unwrap();
        assert!(nc.plan.abandoned.is_empty());
        let collab = plan_collaborative(&scenario, &config).unwrap();
        // Same routes; only the declared mode differs.
        assert_eq!(collab.plan.mode, Mode::Collaborative);
        for (a, b) in collab.plan.routes.iter().zip(&nc.plan.routes) {
            assert_eq!(a.visit_order, b.visit_order);
        }
        assert!(collab.plan.abandoned.is_empty());
    }

    #[test]
    fn collaborative_never_visits_fewer_sensors() {
        for seed in [11u64, 12, 13] {
            let gen_config = GenerateConfig {
                battery_s: 900.0,
                ..GenerateConfig::default()
            };
            let scenario = generate_scenario(24, 3, (800.0, 800.0), seed, &gen_config).unwrap();
            let config = quick_config(seed);
            let report = compare_modes(&scenario, &config).unwrap();
            let nc = &report.non_collaborative;
            let collab = &report.collaborative;
            assert!(collab.plan.visited_count() >= nc.plan.visited_count());
            // Zero violation in both final plans.
            for m in nc.metrics.per_uav.iter().chain(&collab.metrics.per_uav) {
                assert_eq!(m.violation_s, 0.0);
            }
            // Collaborative visited set contains the stage set.
            let nc_visited: BTreeSet<u32> =
                nc.plan.routes.iter().flat_map(|r| r.visit_order.clone()).collect();
            let c_visited: BTreeSet<u32> =
                collab.plan.routes.iter().flat_map(|r| r.visit_order.clone()).collect();
            assert!(nc_visited.is_subset(&c_visited));
        }
    }

    #[test]
    fn unconstrained_budgets_match_up_to_the_slack_term() {
        let gen_config = GenerateConfig {
            battery_s: 1e7,
            ..GenerateConfig::default()
        };
        let scenario = generate_scenario(14, 2, (500.0, 500.0), 9, &gen_config).unwrap();
        let report = compare_modes(&scenario, &quick_config(9)).unwrap();
        assert_eq!(report.visited_ratio_collaborative, 1.0);
        assert_eq!(report.visited_ratio_non_collaborative, 1.0);
        for (a, b) in report
            .collaborative
            .plan
            .routes
            .iter()
            .zip(&report.non_collaborative.plan.routes)
        {
            assert_eq!(a.visit_order, b.visit_order);
        }
        // Identical routes: costs differ exactly by the collaborative
        // slack term, so the reduction is its (negative) share.
        let cost_nc = report.non_collaborative.metrics.fleet.cost;
        let cost_c = report.collaborative.metrics.fleet.cost;
        let dm = DistanceMatrix::build(&scenario);
        let breakdown = route_eval::mission_cost(
            &report.collaborative.plan,
            &scenario,
            &dm,
            &quick_config(9).weights,
        )
        .unwrap();
        assert!((cost_c - cost_nc - breakdown.slack_term).abs() < 1e-9 * cost_nc);
        assert!((report.cost_reduction + breakdown.slack_term / cost_nc).abs() < 1e-9);
    }

    #[test]
    fn comparison_is_deterministic() {
        let scenario = generate_scenario(16, 2, (600.0, 600.0), 21, &GenerateConfig::default()).unwrap();
        let a = compare_modes(&scenario, &quick_config(21)).unwrap();
        let b = compare_modes(&scenario, &quick_config(21)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduction_field_is_consistent_with_metrics() {
        let scenario = generate_scenario(16, 2, (600.0, 600.0), 2, &GenerateConfig::default()).unwrap();
        let report = compare_modes(&scenario, &quick_config(2)).unwrap();
        let recomputed = 1.0
            - report.collaborative.metrics.fleet.cost / report.non_collaborative.metrics.fleet.cost;
        assert_eq!(report.cost_reduction, recomputed);
    }

    #[test]
    fn failed_uav_load_is_redistributed() {
        let gen_config = GenerateConfig {
            battery_s: 1e6,
            ..GenerateConfig::default()
        };
        let scenario = generate_scenario(15, 3, (500.0, 500.0), 4, &gen_config).unwrap();
        let dm = DistanceMatrix::build(&scenario);
        let outcome = plan_collaborative(&scenario, &quick_config(4)).unwrap();
        let failed = fail_uav(&outcome.plan, &scenario, &dm, 2, InsertionPolicy::CheapestPosition).unwrap();
        failed.validate(&scenario).unwrap();
        let rank = failed.routes.iter().position(|r| r.uav_id == 2).unwrap();
        assert!(failed.routes[rank].visit_order.is_empty());
        // With an effectively infinite budget everything is re-absorbed.
        assert!(failed.abandoned.is_empty());
        // Nothing got duplicated.
        let mut seen = BTreeSet::new();
        for route in &failed.routes {
            for &id in &route.visit_order {
                assert!(seen.insert(id));
            }
        }
    }

    #[test]
    fn infeasible_scenario_is_detected() {
        let scenario = corridor(&[500.0], 100.0, 1);
        match plan_non_collaborative(&scenario, &quick_config(0)) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn plan_json_is_stable_and_complete() {
        let scenario = generate_scenario(8, 2, (300.0, 300.0), 6, &GenerateConfig::default()).unwrap();
        let outcome = plan_collaborative(&scenario, &quick_config(6)).unwrap();
        let a = plan_to_json(&outcome.plan, 6);
        let b = plan_to_json(&outcome.plan, 6);
        assert_eq!(a, b);
        let value: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(value["mode"], "collaborative");
        assert_eq!(value["seed"], 6);
        assert_eq!(value["uavs"].as_array().unwrap().len(), 2);
        assert!(value["abandoned"].is_array());
    }

    #[test]
    fn trace_csv_shape() {
        let scenario = generate_scenario(8, 1, (300.0, 300.0), 1, &GenerateConfig::default()).unwrap();
        let outcome = plan_non_collaborative(&scenario, &quick_config(1)).unwrap();
        let csv = outcome.traces[0].to_csv();
        assert!(csv.starts_with("generation,best_cost,mean_cost,violation_sum,tdiff_sum\n"));
        // Initial population plus one row per generation.
        assert_eq!(csv.lines().count(), 1 + 60 + 1);
    }
}
