//! Precedence-weighted sensor clustering.
//!
//! Sensors are partitioned into `k` groups (one per UAV) to minimize a
//! pairwise within-group objective in which distances are discounted by
//! the priority product of the pair:
//!
//! ```text
//! sum_i  1/(2|g_i|) * sum_{j != l in g_i} ( D_jl / (rho_j * rho_l) )^2
//! ```
//!
//! There is no exact centroid form for this objective, so Lloyd
//! iterations run in the feature space `y_j = x_j / rho_j` as a
//! candidate generator; every candidate partition is scored by the
//! exact objective above and then refined by steepest-descent
//! single-point moves under that same exact objective. Multi-restart
//! with k-means++-style seeding; the best restart wins, with ties
//! broken by the lexicographically smallest label vector.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::scenario::{DistanceMatrix, Scenario};
use crate::seeds;

/// A partition of the scenario's sensors into `k` groups.
///
/// Labels are 1-based group indices aligned with `scenario.sensors`,
/// canonicalized so groups are numbered by first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    pub objective_value: f64,
}

impl ClusterAssignment {
    /// Sensor ids per group, indexed by `label - 1`.
    pub fn groups(&self) -> Vec<Vec<u32>> {
        let mut groups = vec![Vec::new(); self.k];
        for (i, &label) in self.labels.iter().enumerate() {
            groups[label - 1].push((i + 1) as u32);
        }
        groups
    }

    /// CSV export: `sensor_id,label` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sensor_id,label\n");
        for (i, &label) in self.labels.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, label));
        }
        out
    }
}

/// Relabel groups in order of first appearance so that equal partitions
/// have equal label vectors.
pub(crate) fn canonicalize_labels(labels: &mut [usize], k: usize) {
    let mut remap = vec![0usize; k + 1];
    let mut next = 0usize;
    for label in labels.iter_mut() {
        if remap[*label] == 0 {
            next += 1;
            remap[*label] = next;
        }
        *label = remap[*label];
    }
}

/// The exact partition objective: priority-discounted squared distances
/// over ordered within-group pairs, each group normalized by
/// `1 / (2 |g_i|)`.
pub fn clustering_objective(
    labels: &[usize],
    k: usize,
    scenario: &Scenario,
    dm: &DistanceMatrix,
) -> Result<f64> {
    let n = scenario.n_sensors();
    if labels.len() != n {
        return Err(Error::validation(
            "labels",
            format!("length {} does not match sensor count {}", labels.len(), n),
        ));
    }
    if k == 0 {
        return Err(Error::validation("k", "group count must be at least 1"));
    }
    let mut sizes = vec![0usize; k];
    for &label in labels {
        if label == 0 || label > k {
            return Err(Error::validation(
                "labels",
                format!("label {label} outside 1..={k}"),
            ));
        }
        sizes[label - 1] += 1;
    }
    if n >= k && sizes.contains(&0) {
        return Err(Error::validation(
            "labels",
            "every group must be non-empty when n >= k",
        ));
    }

    let mut members = vec![Vec::new(); k];
    for (i, &label) in labels.iter().enumerate() {
        members[label - 1].push(i);
    }
    let mut total = 0.0;
    for group in &members {
        if group.len() < 2 {
            continue;
        }
        let mut pair_sum = 0.0;
        for (a, &i) in group.iter().enumerate() {
            for &j in group.iter().skip(a + 1) {
                let d = dm.between_sensors((i + 1) as u32, (j + 1) as u32);
                let scaled = d / (scenario.sensors[i].priority * scenario.sensors[j].priority);
                pair_sum += scaled * scaled;
            }
        }
        // Ordered pairs count twice; 1/(2|g|) * 2 * unordered sum.
        total += pair_sum / group.len() as f64;
    }
    Ok(total)
}

/// Partition the sensors into `k` priority-weighted groups.
///
/// Runs `restarts` independent seeded Lloyd searches in the feature
/// space `x / rho` and returns the candidate with the best exact
/// objective. Deterministic for a given seed, regardless of restart
/// execution order.
pub fn cluster_sensors(
    scenario: &Scenario,
    dm: &DistanceMatrix,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    let n = scenario.n_sensors();
    if k == 0 {
        return Err(Error::validation("k", "group count must be at least 1"));
    }
    if n < k {
        return Err(Error::validation(
            "k",
            format!("{n} sensors cannot form {k} non-empty groups; reduce k"),
        ));
    }
    if restarts == 0 {
        return Err(Error::validation("restarts", "must be at least 1"));
    }

    if k == 1 {
        let labels = vec![1usize; n];
        let objective_value = clustering_objective(&labels, 1, scenario, dm)?;
        return Ok(ClusterAssignment {
            labels,
            k: 1,
            objective_value,
        });
    }

    let features: Vec<Point> = scenario
        .sensors
        .iter()
        .map(|s| Point::new(s.position.x / s.priority, s.position.y / s.priority))
        .collect();
    let weights = PairWeights::build(scenario, dm);

    // Restarts are independent (each derives its own stream) and run
    // concurrently; the merge below is a total order, so the outcome
    // does not depend on scheduling.
    let candidates: Vec<(f64, Vec<usize>)> = (0..restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = seeds::stream(seed, &format!("kmeans/{restart}"));
            lloyd_restart(&features, k, scenario, dm, &weights, &mut rng)
        })
        .collect::<Result<_>>()?;
    let (objective_value, labels) = candidates
        .into_iter()
        .min_by(|(obj_a, lab_a), (obj_b, lab_b)| {
            obj_a.total_cmp(obj_b).then_with(|| lab_a.cmp(lab_b))
        })
        .expect("restarts >= 1");
    Ok(ClusterAssignment {
        labels,
        k,
        objective_value,
    })
}

/// Squared priority-discounted distances for every sensor pair.
struct PairWeights {
    n: usize,
    w: Vec<f64>,
}

impl PairWeights {
    fn build(scenario: &Scenario, dm: &DistanceMatrix) -> Self {
        let n = scenario.n_sensors();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dm.between_sensors((i + 1) as u32, (j + 1) as u32);
                let scaled = d / (scenario.sensors[i].priority * scenario.sensors[j].priority);
                let value = scaled * scaled;
                w[i * n + j] = value;
                w[j * n + i] = value;
            }
        }
        PairWeights { n, w }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }
}

/// One seeded k-means++ + Lloyd run followed by exact-objective
/// descent; returns the best labels seen, scored by the exact objective.
fn lloyd_restart(
    features: &[Point],
    k: usize,
    scenario: &Scenario,
    dm: &DistanceMatrix,
    weights: &PairWeights,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<usize>)> {
    let n = features.len();
    let mut centroids = kmeans_plus_plus(features, k, rng);
    let mut labels = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;

    for _iter in 0..100 {
        let mut next = vec![0usize; n];
        for (i, f) in features.iter().enumerate() {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = f.dist(centroid);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            next[i] = best_c + 1;
        }
        repair_empty_groups(&mut next, k, scenario, dm);
        canonicalize_labels(&mut next, k);

        let objective = clustering_objective(&next, k, scenario, dm)?;
        let improved = match &best {
            None => true,
            Some((obj, lab)) => objective < *obj || (objective == *obj && next < *lab),
        };
        if improved {
            best = Some((objective, next.clone()));
        }

        let converged = next == labels;
        labels = next;
        if converged {
            break;
        }

        // Recompute centroids as feature-space means.
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (i, f) in features.iter().enumerate() {
            let g = labels[i] - 1;
            sums[g].0 += f.x;
            sums[g].1 += f.y;
            sums[g].2 += 1;
        }
        for (c, (sx, sy, count)) in sums.into_iter().enumerate() {
            if count > 0 {
                centroids[c] = Point::new(sx / count as f64, sy / count as f64);
            }
        }
    }

    // Lloyd optimizes a feature-space proxy; finish with single-point
    // steepest descent under the exact objective.
    let (_, mut labels) = best.clone().expect("at least one iteration");
    exact_descent(&mut labels, k, weights);
    canonicalize_labels(&mut labels, k);
    let objective = clustering_objective(&labels, k, scenario, dm)?;
    let (best_obj, best_labels) = best.expect("at least one iteration");
    if objective < best_obj || (objective == best_obj && labels < best_labels) {
        Ok((objective, labels))
    } else {
        Ok((best_obj, best_labels))
    }
}

/// Greedy steepest descent on the exact objective: repeatedly apply the
/// single-sensor group move with the largest decrease until no move
/// improves. Group sums and per-sensor row sums are maintained
/// incrementally; moves that would empty a group are skipped.
fn exact_descent(labels: &mut [usize], k: usize, weights: &PairWeights) {
    let n = labels.len();
    let mut sizes = vec![0usize; k];
    for &label in labels.iter() {
        sizes[label - 1] += 1;
    }
    // row[i][g]: total pair weight between sensor i and group g.
    let mut row = vec![0.0; n * k];
    let mut group_sum = vec![0.0; k];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights.at(i, j);
            row[i * k + labels[j] - 1] += w;
            row[j * k + labels[i] - 1] += w;
            if labels[i] == labels[j] {
                group_sum[labels[i] - 1] += w;
            }
        }
    }

    let move_cap = 20 * n * k;
    for _ in 0..move_cap {
        let mut best_move: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            let from = labels[i] - 1;
            if sizes[from] <= 1 {
                continue;
            }
            let from_term_now = group_sum[from] / sizes[from] as f64;
            let from_term_next = if sizes[from] == 2 {
                0.0
            } else {
                (group_sum[from] - row[i * k + from]) / (sizes[from] - 1) as f64
            };
            for to in 0..k {
                if to == from {
                    continue;
                }
                let to_term_now = group_sum[to] / sizes[to] as f64;
                let to_term_next = (group_sum[to] + row[i * k + to]) / (sizes[to] + 1) as f64;
                let delta = from_term_next - from_term_now + to_term_next - to_term_now;
                let better = match best_move {
                    None => delta < 0.0,
                    Some((best_delta, best_i, best_to)) => {
                        delta < best_delta
                            || (delta == best_delta && (i, to) < (best_i, best_to))
                    }
                };
                if better {
                    best_move = Some((delta, i, to));
                }
            }
        }
        let Some((_, mover, to)) = best_move else {
            return;
        };
        let from = labels[mover] - 1;
        group_sum[from] -= row[mover * k + from];
        group_sum[to] += row[mover * k + to];
        sizes[from] -= 1;
        sizes[to] += 1;
        labels[mover] = to + 1;
        for j in 0..n {
            if j != mover {
                let w = weights.at(mover, j);
                row[j * k + from] -= w;
                row[j * k + to] += w;
            }
        }
    }
}

/// k-means++ seeding on the feature points: first center uniform, later
/// centers sampled proportionally to squared distance from the chosen
/// set.
fn kmeans_plus_plus(features: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let n = features.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(features[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = features
        .iter()
        .map(|f| {
            let d = f.dist(&centroids[0]);
            d * d
        })
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut pick = rng.random_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if pick < w {
                    chosen = i;
                    break;
                }
                pick -= w;
            }
            chosen
        } else {
            // All remaining mass at distance zero: fall back to uniform.
            rng.random_range(0..n)
        };
        centroids.push(features[next]);
        for (i, f) in features.iter().enumerate() {
            let d = f.dist(&centroids[centroids.len() - 1]);
            d2[i] = d2[i].min(d * d);
        }
    }
    centroids
}

/// Move the point with the largest objective contribution into each
/// empty group. Groups of size one are never robbed.
fn repair_empty_groups(labels: &mut [usize], k: usize, scenario: &Scenario, dm: &DistanceMatrix) {
    loop {
        let mut sizes = vec![0usize; k];
        for &label in labels.iter() {
            sizes[label - 1] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut worst: Option<(f64, usize)> = None;
        for (i, &label) in labels.iter().enumerate() {
            if sizes[label - 1] <= 1 {
                continue;
            }
            // This point's share of its group term: its row of scaled
            // squared distances over the group size.
            let mut share = 0.0;
            for (j, &other) in labels.iter().enumerate() {
                if other == label && j != i {
                    let d = dm.between_sensors((i + 1) as u32, (j + 1) as u32);
                    let scaled =
                        d / (scenario.sensors[i].priority * scenario.sensors[j].priority);
                    share += scaled * scaled;
                }
            }
            share /= sizes[label - 1] as f64;
            let better = match worst {
                None => true,
                Some((best_share, best_i)) => {
                    share > best_share || (share == best_share && i < best_i)
                }
            };
            if better {
                worst = Some((share, i));
            }
        }
        let (_, mover) = worst.expect("n >= k guarantees a donor group of size > 1");
        labels[mover] = empty + 1;
    }
}
