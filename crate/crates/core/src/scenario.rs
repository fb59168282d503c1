//! Problem instance model: sensors, UAVs, field, distance matrix, and
//! deterministic scenario synthesis and persistence.
//!
//! The on-disk format is versioned JSON:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "field": { "w": 3400.0, "h": 3400.0 },
//!   "t0": 10.0,
//!   "dwell": 20.0,
//!   "seed": 7,
//!   "sensors": [ { "id": 1, "x": 100.0, "y": 200.0, "rho": 55.3 }, ... ],
//!   "uavs": [ { "id": 1, "x": 1700.0, "y": 0.0, "battery_s": 3600.0,
//!               "speed_mps": 2.1, "energy_rate": 1.0 }, ... ],
//!   "end": { "x": 1700.0, "y": 1700.0 }
//! }
//! ```

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::seeds;

/// Version of the scenario JSON schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// A collection point: one sensor node with a planar position and a
/// collection priority in `[1, 100]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    /// 1-based index, contiguous within a scenario.
    pub id: u32,
    pub position: Point,
    pub priority: f64,
}

/// Static description of one vehicle in the fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct UavSpec {
    /// 1-based index, contiguous within a scenario.
    pub id: u32,
    pub start_position: Point,
    /// Battery lifetime budget in seconds.
    pub battery_budget_s: f64,
    /// Energy consumed per second of mission time (dimensionless rate).
    pub energy_rate: f64,
    /// Ground speed in meters per second.
    pub ground_speed_mps: f64,
}

impl UavSpec {
    /// Mission time the battery admits: budget divided by the burn rate.
    pub fn time_budget_s(&self) -> f64 {
        self.battery_budget_s / self.energy_rate
    }
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sensors: Vec<Sensor>,
    pub uavs: Vec<UavSpec>,
    /// Shared rendezvous / docking point all UAVs must reach.
    pub end_position: Point,
    /// Field bounds `(width, height)` in meters; positions live in
    /// `[0, w] x [0, h]`.
    pub field_bound: (f64, f64),
    /// Seconds charged once at takeoff and once at landing.
    pub takeoff_landing_s: f64,
    /// Seconds spent hovering at each visited sensor.
    pub dwell_s: f64,
    /// Seed the scenario was synthesized from (informational for loaded
    /// files, but part of the instance identity).
    pub rng_seed: u64,
}

impl Scenario {
    pub fn n_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn n_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// Sensor by 1-based id.
    pub fn sensor(&self, id: u32) -> &Sensor {
        &self.sensors[(id - 1) as usize]
    }

    /// UAV by 1-based id.
    pub fn uav(&self, id: u32) -> &UavSpec {
        &self.uavs[(id - 1) as usize]
    }

    /// Length of the field diagonal; an upper bound for any pairwise
    /// distance in the instance.
    pub fn field_diagonal(&self) -> f64 {
        self.field_bound.0.hypot(self.field_bound.1)
    }

    /// Check every domain invariant, naming the offending field on error.
    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.field_bound;
        if !w.is_finite() || !h.is_finite() || w <= 0.0 || h <= 0.0 {
            return Err(Error::validation("field", "dimensions must be positive"));
        }
        if self.sensors.is_empty() {
            return Err(Error::validation("sensors", "at least one sensor required"));
        }
        if self.uavs.is_empty() {
            return Err(Error::validation("uavs", "at least one UAV required"));
        }
        if self.takeoff_landing_s < 0.0 || !self.takeoff_landing_s.is_finite() {
            return Err(Error::validation("t0", "must be finite and non-negative"));
        }
        if self.dwell_s < 0.0 || !self.dwell_s.is_finite() {
            return Err(Error::validation("dwell", "must be finite and non-negative"));
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if s.id != (i + 1) as u32 {
                return Err(Error::validation(
                    "sensors.id",
                    format!("ids must be contiguous 1..n; found {} at rank {}", s.id, i + 1),
                ));
            }
            if !(1.0..=100.0).contains(&s.priority) {
                return Err(Error::validation(
                    "priority",
                    format!("sensor {}: priority {} outside [1, 100]", s.id, s.priority),
                ));
            }
            if !s.position.within(w, h) {
                return Err(Error::validation(
                    "sensors.position",
                    format!("sensor {} lies outside the field bounds", s.id),
                ));
            }
        }
        for (i, u) in self.uavs.iter().enumerate() {
            if u.id != (i + 1) as u32 {
                return Err(Error::validation(
                    "uavs.id",
                    format!("ids must be contiguous 1..q; found {} at rank {}", u.id, i + 1),
                ));
            }
            if !u.battery_budget_s.is_finite() || u.battery_budget_s <= 0.0 {
                return Err(Error::validation(
                    "battery_s",
                    format!("UAV {}: battery budget must be positive", u.id),
                ));
            }
            if !u.ground_speed_mps.is_finite() || u.ground_speed_mps <= 0.0 {
                return Err(Error::validation(
                    "speed_mps",
                    format!("UAV {}: ground speed must be positive", u.id),
                ));
            }
            if !u.energy_rate.is_finite() || u.energy_rate <= 0.0 {
                return Err(Error::validation(
                    "energy_rate",
                    format!("UAV {}: energy rate must be positive", u.id),
                ));
            }
            if !u.start_position.within(w, h) {
                return Err(Error::validation(
                    "uavs.start_position",
                    format!("UAV {} start lies outside the field bounds", u.id),
                ));
            }
        }
        if !self.end_position.within(w, h) {
            return Err(Error::validation("end", "end position lies outside the field bounds"));
        }
        Ok(())
    }
}

/// One node of the routing graph: a sensor, a UAV start station, or the
/// shared end station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Sensor(u32),
    UavStart(u32),
    End,
}

/// Pairwise Euclidean distances over all sensors, all UAV start
/// positions, and the end position: an `(n + q + 1)`-square symmetric
/// matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n_sensors: usize,
    n_uavs: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Build the matrix from a scenario. This is the only constructor.
    pub fn build(scenario: &Scenario) -> Self {
        let n = scenario.n_sensors();
        let q = scenario.n_uavs();
        let size = n + q + 1;
        let mut points = Vec::with_capacity(size);
        points.extend(scenario.sensors.iter().map(|s| s.position));
        points.extend(scenario.uavs.iter().map(|u| u.start_position));
        points.push(scenario.end_position);

        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            for j in (i + 1)..size {
                let d = points[i].dist(&points[j]);
                entries[i * size + j] = d;
                entries[j * size + i] = d;
            }
        }
        DistanceMatrix {
            n_sensors: n,
            n_uavs: q,
            entries,
        }
    }

    pub fn size(&self) -> usize {
        self.n_sensors + self.n_uavs + 1
    }

    fn index(&self, node: Node) -> usize {
        match node {
            Node::Sensor(id) => {
                debug_assert!(1 <= id && id as usize <= self.n_sensors, "sensor id {id}");
                (id - 1) as usize
            }
            Node::UavStart(id) => {
                debug_assert!(1 <= id && id as usize <= self.n_uavs, "uav id {id}");
                self.n_sensors + (id - 1) as usize
            }
            Node::End => self.n_sensors + self.n_uavs,
        }
    }

    /// Distance between two graph nodes, meters.
    pub fn dist(&self, a: Node, b: Node) -> f64 {
        self.entries[self.index(a) * self.size() + self.index(b)]
    }

    /// Distance between two sensors by id.
    pub fn between_sensors(&self, a: u32, b: u32) -> f64 {
        self.dist(Node::Sensor(a), Node::Sensor(b))
    }
}

/// Knobs for scenario synthesis beyond the `(n, q, field, seed)`
/// signature of [`generate_scenario`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    /// Battery lifetime per UAV, seconds.
    pub battery_s: f64,
    /// Ground speed per UAV, meters/second.
    pub speed_mps: f64,
    /// Energy consumed per second of flight (dimensionless).
    pub energy_rate: f64,
    /// Takeoff/landing time charged at each end of the mission, seconds.
    pub t0_s: f64,
    /// Hover time per visited sensor, seconds.
    pub dwell_s: f64,
    /// Number of Gaussian blobs in the non-uniform scattering mixture.
    pub blob_count: usize,
    /// Blob standard deviation as a fraction of the smaller field side.
    pub blob_sigma_frac: f64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            battery_s: 3600.0,
            speed_mps: 2.9,
            energy_rate: 1.0,
            t0_s: 10.0,
            dwell_s: 20.0,
            blob_count: 6,
            blob_sigma_frac: 1.0 / 12.0,
        }
    }
}

/// Synthesize a random scenario: `n` sensors scattered as a seeded
/// mixture of Gaussian blobs (clipped to the field), priorities i.i.d.
/// uniform on `[1, 100]`, `q` UAV starts evenly spaced on the field
/// boundary, and a shared end station at the field center.
///
/// The same arguments always produce a bit-identical scenario.
pub fn generate_scenario(
    n: usize,
    q: usize,
    field: (f64, f64),
    seed: u64,
    config: &GenerateConfig,
) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::validation("n", "sensor count must be at least 1"));
    }
    if q == 0 {
        return Err(Error::validation("q", "UAV count must be at least 1"));
    }
    let (w, h) = field;
    if !(w > 0.0 && w.is_finite()) || !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation("field", "dimensions must be positive and finite"));
    }
    if config.blob_count == 0 {
        return Err(Error::validation("blob_count", "must be at least 1"));
    }
    if !config.blob_sigma_frac.is_finite() || config.blob_sigma_frac <= 0.0 {
        return Err(Error::validation("blob_sigma_frac", "must be positive"));
    }

    let mut rng = seeds::stream(seed, "scenario");

    // Blob centers keep a margin from the edges so that most of each
    // blob's mass stays inside the field; weights are deliberately
    // uneven so that cluster workloads differ between UAVs.
    let mut centers = Vec::with_capacity(config.blob_count);
    let mut weights = Vec::with_capacity(config.blob_count);
    for _ in 0..config.blob_count {
        let cx = rng.random_range(0.15 * w..=0.85 * w);
        let cy = rng.random_range(0.15 * h..=0.85 * h);
        centers.push(Point::new(cx, cy));
        weights.push(rng.random_range(0.25..=1.75));
    }
    let total_weight: f64 = weights.iter().sum();

    let sigma = config.blob_sigma_frac * w.min(h);
    let normal = Normal::new(0.0, sigma).expect("sigma checked positive");

    let mut sensors = Vec::with_capacity(n);
    for i in 0..n {
        // Categorical draw over blob weights.
        let mut pick = rng.random_range(0.0..total_weight);
        let mut blob = 0;
        for (b, wt) in weights.iter().enumerate() {
            if pick < *wt {
                blob = b;
                break;
            }
            pick -= *wt;
        }
        let c = centers[blob];
        let x = (c.x + normal.sample(&mut rng)).clamp(0.0, w);
        let y = (c.y + normal.sample(&mut rng)).clamp(0.0, h);
        let priority = rng.random_range(1.0..=100.0);
        sensors.push(Sensor {
            id: (i + 1) as u32,
            position: Point::new(x, y),
            priority,
        });
    }

    let uavs = (0..q)
        .map(|i| UavSpec {
            id: (i + 1) as u32,
            start_position: boundary_point(w, h, (i as f64 + 0.5) / q as f64),
            battery_budget_s: config.battery_s,
            energy_rate: config.energy_rate,
            ground_speed_mps: config.speed_mps,
        })
        .collect();

    let scenario = Scenario {
        sensors,
        uavs,
        end_position: Point::new(w / 2.0, h / 2.0),
        field_bound: field,
        takeoff_landing_s: config.t0_s,
        dwell_s: config.dwell_s,
        rng_seed: seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Map a parameter `t` in `[0, 1)` to a point on the field boundary,
/// walking the perimeter counter-clockwise from the origin.
fn boundary_point(w: f64, h: f64, t: f64) -> Point {
    let perimeter = 2.0 * (w + h);
    let mut s = t * perimeter;
    if s < w {
        return Point::new(s, 0.0);
    }
    s -= w;
    if s < h {
        return Point::new(w, s);
    }
    s -= h;
    if s < w {
        return Point::new(w - s, h);
    }
    s -= w;
    Point::new(0.0, h - s)
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FieldFile {
    w: f64,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct SensorFile {
    id: u32,
    x: f64,
    y: f64,
    rho: f64,
}

#[derive(Serialize, Deserialize)]
struct UavFile {
    id: u32,
    x: f64,
    y: f64,
    battery_s: f64,
    speed_mps: f64,
    energy_rate: f64,
}

#[derive(Serialize, Deserialize)]
struct PointFile {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    schema_version: u32,
    field: FieldFile,
    t0: f64,
    dwell: f64,
    seed: u64,
    sensors: Vec<SensorFile>,
    uavs: Vec<UavFile>,
    end: PointFile,
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            field: FieldFile {
                w: s.field_bound.0,
                h: s.field_bound.1,
            },
            t0: s.takeoff_landing_s,
            dwell: s.dwell_s,
            seed: s.rng_seed,
            sensors: s
                .sensors
                .iter()
                .map(|x| SensorFile {
                    id: x.id,
                    x: x.position.x,
                    y: x.position.y,
                    rho: x.priority,
                })
                .collect(),
            uavs: s
                .uavs
                .iter()
                .map(|u| UavFile {
                    id: u.id,
                    x: u.start_position.x,
                    y: u.start_position.y,
                    battery_s: u.battery_budget_s,
                    speed_mps: u.ground_speed_mps,
                    energy_rate: u.energy_rate,
                })
                .collect(),
            end: PointFile {
                x: s.end_position.x,
                y: s.end_position.y,
            },
        }
    }
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(f: ScenarioFile) -> Result<Scenario> {
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: f.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let scenario = Scenario {
            sensors: f
                .sensors
                .into_iter()
                .map(|s| Sensor {
                    id: s.id,
                    position: Point::new(s.x, s.y),
                    priority: s.rho,
                })
                .collect(),
            uavs: f
                .uavs
                .into_iter()
                .map(|u| UavSpec {
                    id: u.id,
                    start_position: Point::new(u.x, u.y),
                    battery_budget_s: u.battery_s,
                    energy_rate: u.energy_rate,
                    ground_speed_mps: u.speed_mps,
                })
                .collect(),
            end_position: Point::new(f.end.x, f.end.y),
            field_bound: (f.field.w, f.field.h),
            takeoff_landing_s: f.t0,
            dwell_s: f.dwell,
            rng_seed: f.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Serialize a scenario to its canonical JSON text.
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let file = ScenarioFile::from(scenario);
    let mut text = serde_json::to_string_pretty(&file).expect("scenario file model serializes");
    text.push('\n');
    text
}

/// Parse and validate a scenario from JSON text. A file that fails
/// validation produces an error and no partial scenario.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Scenario::try_from(file)
}

/// Write a scenario to `path` as versioned JSON.
pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    scenario.validate()?;
    fs::write(path, scenario_to_json(scenario))?;
    Ok(())
}

/// Load and validate a scenario from `path`.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    scenario_from_json(&text)
}
