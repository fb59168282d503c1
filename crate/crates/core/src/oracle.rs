//! Brute-force reference solvers for desk-scale verification.
//!
//! These enumerate the full solution space of tiny instances and are
//! the ground truth the heuristic modules are tested against. Size
//! guards keep every call under a second; larger requests are refused.

use std::collections::BTreeSet;

use crate::clustering::{self, canonicalize_labels};
use crate::error::{Error, Result};
use crate::route_eval::{self, CostWeights, Mode, Plan, truncated_route_cost};
use crate::scenario::{DistanceMatrix, Scenario, UavSpec};

/// Outcome of an exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<W> {
    pub optimal_value: f64,
    pub witness: W,
    pub instances_examined: usize,
}

/// Largest sensor set [`brute_force_route`] will enumerate.
pub const MAX_ROUTE_SENSORS: usize = 9;
/// Largest sensor set [`brute_force_partition`] will enumerate.
pub const MAX_PARTITION_SENSORS: usize = 10;
/// Largest group count [`brute_force_partition`] will enumerate.
pub const MAX_PARTITION_GROUPS: usize = 3;

/// Exhaustively enumerate every visit-order permutation of `sensors`,
/// apply budget truncation and the route cost, and return the global
/// minimum. The witness is the best pre-truncation permutation;
/// equal-cost permutations resolve to the lexicographically smallest.
pub fn brute_force_route(
    sensors: &[u32],
    uav: &UavSpec,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    weights: &CostWeights,
    mode: Mode,
) -> Result<OracleResult<Vec<u32>>> {
    if sensors.len() > MAX_ROUTE_SENSORS {
        return Err(Error::OracleBound(format!(
            "route enumeration capped at {MAX_ROUTE_SENSORS} sensors, got {}",
            sensors.len()
        )));
    }
    let mut order: Vec<u32> = sensors.to_vec();
    order.sort_unstable();
    let mut best_value = f64::INFINITY;
    let mut best_witness: Option<Vec<u32>> = None;
    let mut examined = 0usize;
    // Lexicographic permutation walk keeps the tie-break deterministic.
    loop {
        let cost = truncated_route_cost(&order, uav, scenario, dm, weights, mode)?;
        examined += 1;
        if cost < best_value {
            best_value = cost;
            best_witness = Some(order.clone());
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(OracleResult {
        optimal_value: best_value,
        witness: best_witness.expect("at least one permutation"),
        instances_examined: examined,
    })
}

/// Advance `items` to the next lexicographic permutation; false once
/// the sequence wraps.
fn next_permutation<T: Ord>(items: &mut [T]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut i = items.len() - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = items.len() - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

/// Enumerate every partition of the scenario's sensors into exactly `k`
/// non-empty groups and return the minimal clustering objective. The
/// witness is the canonical label vector; ties resolve lexicographically.
pub fn brute_force_partition(
    scenario: &Scenario,
    dm: &DistanceMatrix,
    k: usize,
) -> Result<OracleResult<Vec<usize>>> {
    let n = scenario.n_sensors();
    if n > MAX_PARTITION_SENSORS {
        return Err(Error::OracleBound(format!(
            "partition enumeration capped at {MAX_PARTITION_SENSORS} sensors, got {n}"
        )));
    }
    if k > MAX_PARTITION_GROUPS {
        return Err(Error::OracleBound(format!(
            "partition enumeration capped at {MAX_PARTITION_GROUPS} groups, got {k}"
        )));
    }
    if k == 0 || n < k {
        return Err(Error::validation("k", "need 1 <= k <= n"));
    }

    // Restricted-growth strings enumerate set partitions without
    // relabeling duplicates; filter to exactly k groups.
    let mut rgs = vec![0usize; n];
    let mut best_value = f64::INFINITY;
    let mut best_witness: Option<Vec<usize>> = None;
    let mut examined = 0usize;
    loop {
        let groups_used = rgs.iter().copied().max().unwrap_or(0) + 1;
        if groups_used == k {
            let mut labels: Vec<usize> = rgs.iter().map(|&g| g + 1).collect();
            canonicalize_labels(&mut labels, k);
            let value = clustering::clustering_objective(&labels, k, scenario, dm)?;
            examined += 1;
            let better = value < best_value
                || (value == best_value
                    && best_witness.as_ref().is_some_and(|w| labels < *w));
            if better || best_witness.is_none() {
                best_value = value;
                best_witness = Some(labels);
            }
        }
        if !next_restricted_growth(&mut rgs) {
            break;
        }
    }
    Ok(OracleResult {
        optimal_value: best_value,
        witness: best_witness.expect("k <= n guarantees a k-group partition"),
        instances_examined: examined,
    })
}

/// Advance a restricted growth string; false once exhausted.
fn next_restricted_growth(rgs: &mut [usize]) -> bool {
    let n = rgs.len();
    for i in (1..n).rev() {
        let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
        if rgs[i] <= max_prefix {
            rgs[i] += 1;
            for slot in rgs[(i + 1)..n].iter_mut() {
                *slot = 0;
            }
            return true;
        }
    }
    false
}

/// The most abandoned sensors any insertion sequence can absorb into
/// the plan's routes without breaking a battery budget.
///
/// Searches over every order of (sensor, route, position) insertions.
/// The witness is one maximal set of absorbed sensor ids.
pub fn brute_force_insertion(
    plan: &Plan,
    scenario: &Scenario,
    dm: &DistanceMatrix,
) -> Result<OracleResult<BTreeSet<u32>>> {
    const MAX_ABANDONED: usize = 6;
    if plan.abandoned.len() > MAX_ABANDONED {
        return Err(Error::OracleBound(format!(
            "insertion enumeration capped at {MAX_ABANDONED} abandoned sensors, got {}",
            plan.abandoned.len()
        )));
    }

    struct Search<'a> {
        scenario: &'a Scenario,
        dm: &'a DistanceMatrix,
        examined: usize,
        best: BTreeSet<u32>,
    }

    impl Search<'_> {
        fn dfs(&mut self, orders: &mut Vec<Vec<u32>>, pool: &BTreeSet<u32>, absorbed: &BTreeSet<u32>) -> Result<()> {
            self.examined += 1;
            if absorbed.len() > self.best.len() {
                self.best = absorbed.clone();
            }
            if pool.is_empty() {
                return Ok(());
            }
            for &sensor in pool {
                for route_idx in 0..orders.len() {
                    let uav = self.scenario.uav((route_idx + 1) as u32);
                    let len = orders[route_idx].len();
                    for pos in 0..=len {
                        orders[route_idx].insert(pos, sensor);
                        let timing = route_eval::route_duration(
                            &orders[route_idx],
                            uav,
                            self.scenario,
                            self.dm,
                        )?;
                        if timing.return_time_s <= uav.time_budget_s() {
                            let mut next_pool = pool.clone();
                            next_pool.remove(&sensor);
                            let mut next_absorbed = absorbed.clone();
                            next_absorbed.insert(sensor);
                            self.dfs(orders, &next_pool, &next_absorbed)?;
                        }
                        orders[route_idx].remove(pos);
                    }
                }
            }
            Ok(())
        }
    }

    // Routes are keyed by UAV id rank; require the plan to cover UAVs
    // 1..q in order, which every planner-produced plan does.
    let mut orders: Vec<Vec<u32>> = Vec::with_capacity(plan.routes.len());
    for (i, route) in plan.routes.iter().enumerate() {
        if route.uav_id != (i + 1) as u32 {
            return Err(Error::validation(
                "plan.routes",
                "routes must be ordered by UAV id 1..q",
            ));
        }
        orders.push(route.visit_order.clone());
    }

    let mut search = Search {
        scenario,
        dm,
        examined: 0,
        best: BTreeSet::new(),
    };
    search.dfs(&mut orders, &plan.abandoned, &BTreeSet::new())?;
    Ok(OracleResult {
        optimal_value: search.best.len() as f64,
        witness: search.best,
        instances_examined: search.examined,
    })
}

/// True if at least one single abandoned sensor fits into at least one
/// route at some position without breaking that UAV's budget.
pub fn any_feasible_insertion(plan: &Plan, scenario: &Scenario, dm: &DistanceMatrix) -> Result<bool> {
    for &sensor in &plan.abandoned {
        for route in &plan.routes {
            let uav = scenario.uav(route.uav_id);
            for pos in 0..=route.visit_order.len() {
                let mut order = route.visit_order.clone();
                order.insert(pos, sensor);
                let timing = route_eval::route_duration(&order, uav, scenario, dm)?;
                if timing.return_time_s <= uav.time_budget_s() {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}
