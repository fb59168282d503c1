//! Route timing, battery truncation, mission cost, and per-UAV metrics.
//!
//! A route is an ordered list of sensor visits for one UAV. Timing
//! follows the arrival recursion: takeoff is charged once at departure,
//! each leg costs `distance / ground_speed`, each visited sensor adds a
//! dwell, and landing is charged once at the end station. An "arrival
//! time" below is the instant collection at that sensor completes, so
//! it includes the dwell.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{DistanceMatrix, Node, Scenario, UavSpec};

/// Weights of the mission cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    /// Cost per second of mission duration.
    pub time_per_s: f64,
    /// Cost per priority unit of every abandoned sensor.
    pub abandon_per_priority: f64,
    /// Cost per second of battery-budget violation.
    pub violation_per_s: f64,
    /// Cost per second of unused battery (collaborative mode only).
    pub slack_per_s: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            time_per_s: 1.0,
            abandon_per_priority: 60.0,
            violation_per_s: 1000.0,
            slack_per_s: 0.5,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("time_per_s", self.time_per_s),
            ("abandon_per_priority", self.abandon_per_priority),
            ("violation_per_s", self.violation_per_s),
            ("slack_per_s", self.slack_per_s),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(name, "weights must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// Planning regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Collaborative,
    NonCollaborative,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Collaborative => write!(f, "collaborative"),
            Mode::NonCollaborative => write!(f, "non-collaborative"),
        }
    }
}

/// Timing of a visit order: completion times per sensor, time back at
/// the end station, and total flown distance.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTiming {
    pub arrival_times_s: Vec<f64>,
    pub return_time_s: f64,
    pub total_distance_m: f64,
}

/// One UAV's planned route with its timing.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub uav_id: u32,
    pub visit_order: Vec<u32>,
    pub arrival_times_s: Vec<f64>,
    pub return_time_s: f64,
    pub total_distance_m: f64,
}

impl Route {
    /// Build a route for `uav_id` over `visit_order`, computing timing.
    pub fn build(
        uav_id: u32,
        visit_order: Vec<u32>,
        scenario: &Scenario,
        dm: &DistanceMatrix,
    ) -> Result<Route> {
        let timing = route_duration(&visit_order, scenario.uav(uav_id), scenario, dm)?;
        Ok(Route {
            uav_id,
            visit_order,
            arrival_times_s: timing.arrival_times_s,
            return_time_s: timing.return_time_s,
            total_distance_m: timing.total_distance_m,
        })
    }

    pub fn visited_count(&self) -> usize {
        self.visit_order.len()
    }
}

/// A complete fleet plan: one route per UAV, the pool of abandoned
/// sensors, and the cluster owner of every sensor (used to attribute
/// abandonment cost to a UAV).
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub mode: Mode,
    pub routes: Vec<Route>,
    pub abandoned: BTreeSet<u32>,
    /// `owner_of[sensor_id - 1]` is the UAV id whose cluster the sensor
    /// belongs to.
    pub owner_of: Vec<u32>,
}

impl Plan {
    /// Check structural invariants: routes visit disjoint sensor sets,
    /// and visited plus abandoned cover exactly the scenario's sensors.
    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let n = scenario.n_sensors();
        if self.owner_of.len() != n {
            return Err(Error::validation("owner_of", "length must equal sensor count"));
        }
        let mut seen = BTreeSet::new();
        for route in &self.routes {
            for &id in &route.visit_order {
                if id == 0 || id as usize > n {
                    return Err(Error::validation(
                        "visit_order",
                        format!("unknown sensor id {id}"),
                    ));
                }
                if !seen.insert(id) {
                    return Err(Error::validation(
                        "visit_order",
                        format!("sensor {id} appears in more than one route"),
                    ));
                }
            }
        }
        for &id in &self.abandoned {
            if !seen.insert(id) {
                return Err(Error::validation(
                    "abandoned",
                    format!("sensor {id} is both visited and abandoned"),
                ));
            }
        }
        if seen.len() != n {
            return Err(Error::validation(
                "plan",
                format!("visited + abandoned covers {} of {} sensors", seen.len(), n),
            ));
        }
        Ok(())
    }

    pub fn visited_count(&self) -> usize {
        self.routes.iter().map(Route::visited_count).sum()
    }

    pub fn visited_ratio(&self, scenario: &Scenario) -> f64 {
        self.visited_count() as f64 / scenario.n_sensors() as f64
    }
}

/// Apply the arrival recursion to a visit order.
///
/// Completion time of the first sensor is `t0 + D(start, s1)/v + dwell`;
/// each later sensor adds its leg time plus the dwell; the return time
/// adds the final leg to the end station and the landing `t0`.
pub fn route_duration(
    visit_order: &[u32],
    uav: &UavSpec,
    scenario: &Scenario,
    dm: &DistanceMatrix,
) -> Result<RouteTiming> {
    let n = scenario.n_sensors();
    for &id in visit_order {
        if id == 0 || id as usize > n {
            return Err(Error::validation(
                "visit_order",
                format!("unknown sensor id {id}"),
            ));
        }
    }
    let v = uav.ground_speed_mps;
    let t0 = scenario.takeoff_landing_s;
    let dwell = scenario.dwell_s;

    let mut arrival_times = Vec::with_capacity(visit_order.len());
    let mut clock = t0;
    let mut distance = 0.0;
    let mut here = Node::UavStart(uav.id);
    for &id in visit_order {
        let leg = dm.dist(here, Node::Sensor(id));
        distance += leg;
        clock += leg / v + dwell;
        arrival_times.push(clock);
        here = Node::Sensor(id);
    }
    let leg = dm.dist(here, Node::End);
    distance += leg;
    let return_time = clock + leg / v + t0;

    Ok(RouteTiming {
        arrival_times_s: arrival_times,
        return_time_s: return_time,
        total_distance_m: distance,
    })
}

/// Shrink a visit order until it fits the UAV's battery budget.
///
/// Repeatedly removes the lowest-priority sensor still in the order
/// (ties: the one whose removal saves the larger detour goes first)
/// until the return time fits the budget. Survivors keep their relative
/// order. Returns `(feasible_order, removed)` with removals listed in
/// removal order.
pub fn truncate_to_budget(
    visit_order: &[u32],
    uav: &UavSpec,
    scenario: &Scenario,
    dm: &DistanceMatrix,
) -> Result<(Vec<u32>, Vec<u32>)> {
    let budget = uav.time_budget_s();
    let mut kept = visit_order.to_vec();
    let mut removed = Vec::new();

    loop {
        let timing = route_duration(&kept, uav, scenario, dm)?;
        if timing.return_time_s <= budget {
            return Ok((kept, removed));
        }
        if kept.is_empty() {
            return Err(Error::Infeasible(format!(
                "UAV {}: direct start-to-end flight needs {:.1}s but the budget is {:.1}s",
                uav.id, timing.return_time_s, budget
            )));
        }
        let victim = select_victim(&kept, uav, scenario, dm);
        removed.push(kept.remove(victim));
    }
}

/// Index of the sensor to drop: minimal priority, then maximal detour,
/// then maximal id.
fn select_victim(kept: &[u32], uav: &UavSpec, scenario: &Scenario, dm: &DistanceMatrix) -> usize {
    let mut best = 0;
    let mut best_key = (f64::INFINITY, f64::NEG_INFINITY, 0u32);
    for (i, &id) in kept.iter().enumerate() {
        let prev = if i == 0 { Node::UavStart(uav.id) } else { Node::Sensor(kept[i - 1]) };
        let next = if i + 1 == kept.len() { Node::End } else { Node::Sensor(kept[i + 1]) };
        let detour =
            dm.dist(prev, Node::Sensor(id)) + dm.dist(Node::Sensor(id), next) - dm.dist(prev, next);
        let key = (scenario.sensor(id).priority, -detour, u32::MAX - id);
        if key.0 < best_key.0
            || (key.0 == best_key.0 && key.1 < best_key.1)
            || (key.0 == best_key.0 && key.1 == best_key.1 && key.2 < best_key.2)
        {
            best_key = key;
            best = i;
        }
    }
    best
}

/// Cost of one UAV flying `order` after budget truncation: duration,
/// the abandonment penalty of whatever truncation dropped, the (always
/// zero after truncation) violation term, and, in collaborative mode,
/// the unused-battery penalty. This is the per-route objective the
/// planner's DE minimizes.
pub fn truncated_route_cost(
    order: &[u32],
    uav: &UavSpec,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    weights: &CostWeights,
    mode: Mode,
) -> Result<f64> {
    let (kept, dropped) = truncate_to_budget(order, uav, scenario, dm)?;
    let timing = route_duration(&kept, uav, scenario, dm)?;
    let budget = uav.time_budget_s();
    let dropped_priority: f64 = dropped.iter().map(|&id| scenario.sensor(id).priority).sum();
    let mut cost = weights.time_per_s * timing.return_time_s
        + weights.abandon_per_priority * dropped_priority
        + weights.violation_per_s * (timing.return_time_s - budget).max(0.0);
    if mode == Mode::Collaborative {
        cost += weights.slack_per_s * (budget - timing.return_time_s).max(0.0);
    }
    Ok(cost)
}

/// Scalar mission cost with its term breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub total: f64,
    pub time_term: f64,
    pub abandonment_term: f64,
    pub violation_term: f64,
    /// Zero in non-collaborative mode.
    pub slack_term: f64,
}

/// Evaluate the fleet objective of a plan. Lower is better.
///
/// `total = w_t * sum(duration) + w_a * sum(priority of abandoned)
///        + w_v * sum(violation) [+ w_d * sum(positive slack) in
///        collaborative mode]`.
pub fn mission_cost(
    plan: &Plan,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    weights: &CostWeights,
) -> Result<CostBreakdown> {
    weights.validate()?;
    let mut time_term = 0.0;
    let mut violation_term = 0.0;
    let mut slack_term = 0.0;
    for route in &plan.routes {
        let uav = scenario.uav(route.uav_id);
        let timing = route_duration(&route.visit_order, uav, scenario, dm)?;
        let budget = uav.time_budget_s();
        time_term += weights.time_per_s * timing.return_time_s;
        violation_term += weights.violation_per_s * (timing.return_time_s - budget).max(0.0);
        if plan.mode == Mode::Collaborative {
            slack_term += weights.slack_per_s * (budget - timing.return_time_s).max(0.0);
        }
    }
    let abandonment_term: f64 = plan
        .abandoned
        .iter()
        .map(|&id| weights.abandon_per_priority * scenario.sensor(id).priority)
        .sum();
    Ok(CostBreakdown {
        total: time_term + abandonment_term + violation_term + slack_term,
        time_term,
        abandonment_term,
        violation_term,
        slack_term,
    })
}

/// Table-style metrics for one UAV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UavMetrics {
    pub uav_id: u32,
    /// This UAV's contribution to the fleet cost (duration, violation
    /// and slack terms, plus abandonment attributed to its cluster).
    pub cost: f64,
    pub duration_s: f64,
    /// Battery budget minus duration; negative only when violating.
    pub time_diff_s: f64,
    pub visited: usize,
    pub distance_m: f64,
    pub violation_s: f64,
}

/// Per-UAV rows plus the fleet totals row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteMetrics {
    pub per_uav: Vec<UavMetrics>,
    pub fleet: UavMetrics,
}

/// Fill every performance index for a plan: cost, duration, time
/// difference, visited count, distance, and violation, per UAV and
/// summed over the fleet. The fleet cost equals [`mission_cost`].
pub fn plan_metrics(
    plan: &Plan,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    weights: &CostWeights,
) -> Result<RouteMetrics> {
    weights.validate()?;
    let mut per_uav = Vec::with_capacity(plan.routes.len());
    for route in &plan.routes {
        let uav = scenario.uav(route.uav_id);
        let timing = route_duration(&route.visit_order, uav, scenario, dm)?;
        let budget = uav.time_budget_s();
        let duration = timing.return_time_s;
        let violation = (duration - budget).max(0.0);
        let abandoned_here: f64 = plan
            .abandoned
            .iter()
            .filter(|&&id| plan.owner_of[(id - 1) as usize] == route.uav_id)
            .map(|&id| scenario.sensor(id).priority)
            .sum();
        let mut cost = weights.time_per_s * duration
            + weights.abandon_per_priority * abandoned_here
            + weights.violation_per_s * violation;
        if plan.mode == Mode::Collaborative {
            cost += weights.slack_per_s * (budget - duration).max(0.0);
        }
        per_uav.push(UavMetrics {
            uav_id: route.uav_id,
            cost,
            duration_s: duration,
            time_diff_s: budget - duration,
            visited: route.visited_count(),
            distance_m: timing.total_distance_m,
            violation_s: violation,
        });
    }
    let fleet = UavMetrics {
        uav_id: 0,
        cost: per_uav.iter().map(|m| m.cost).sum(),
        duration_s: per_uav.iter().map(|m| m.duration_s).sum(),
        time_diff_s: per_uav.iter().map(|m| m.time_diff_s).sum(),
        visited: per_uav.iter().map(|m| m.visited).sum(),
        distance_m: per_uav.iter().map(|m| m.distance_m).sum(),
        violation_s: per_uav.iter().map(|m| m.violation_s).sum(),
    };
    Ok(RouteMetrics { per_uav, fleet })
}

/// Render metrics as CSV: one row per UAV plus a `fleet` row. Columns
/// mirror the performance-index table (cost, duration, time difference,
/// visited, distance, violation).
pub fn metrics_csv(metrics: &RouteMetrics) -> String {
    let mut out = String::from("uav,cost,duration_s,time_diff_s,visited,distance_m,violation_s\n");
    let row = |m: &UavMetrics, label: &str| {
        format!(
            "{},{:.4},{:.4},{:.4},{},{:.4},{:.4}\n",
            label, m.cost, m.duration_s, m.time_diff_s, m.visited, m.distance_m, m.violation_s
        )
    };
    for m in &metrics.per_uav {
        out.push_str(&row(m, &m.uav_id.to_string()));
    }
    out.push_str(&row(&metrics.fleet, "fleet"));
    out
}
