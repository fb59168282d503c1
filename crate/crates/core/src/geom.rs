//! Planar geometry primitives.

use serde::{Deserialize, Serialize};

/// A point in the local planar frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to another point.
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// True if the point lies inside the axis-aligned box `[0, w] x [0, h]`.
    pub fn within(&self, w: f64, h: f64) -> bool {
        self.x >= 0.0 && self.x <= w && self.y >= 0.0 && self.y <= h
    }
}
