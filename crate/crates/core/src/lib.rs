//! Mission planning for multi-UAV data collection over a distributed
//! sensor network.
//!
//! The library models a fleet of battery-limited UAVs that must visit a
//! set of prioritized sensors scattered over a planar field, collect
//! their data, and reach a shared rendezvous point before running out of
//! energy. Planning proceeds in three stages:
//!
//! 1. [`clustering`] partitions the sensors into one group per UAV using
//!    priority-weighted k-means,
//! 2. [`de`] evolves a battery-feasible visiting order per UAV with
//!    differential evolution over a random-key encoding,
//! 3. [`planner`] assembles complete plans in non-collaborative and
//!    collaborative modes, where collaboration lets UAVs with spare
//!    battery absorb sensors abandoned by overloaded ones.
//!
//! [`oracle`] holds brute-force reference solvers used by the test and
//! acceptance suites at desk scale.

pub mod clustering;
pub mod de;
pub mod error;
pub mod geom;
pub mod oracle;
pub mod planner;
pub mod route_eval;
pub mod scenario;
pub mod seeds;

pub use error::{Error, Result};
pub use geom::Point;
pub use scenario::{DistanceMatrix, GenerateConfig, Scenario, Sensor, UavSpec};
