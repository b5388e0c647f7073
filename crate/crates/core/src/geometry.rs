//! Node positions, true time-of-flight and ground-truth TDoA.

use thiserror::Error;

use crate::ratio::Ratio;
use crate::timebase::{TickDuration, FS_PER_SECOND};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;
const SPEED_OF_LIGHT_INT: i128 = 299_792_458;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("position coordinates must be finite")]
    NonFinitePosition,
    #[error("|tof_at - tof_bt| exceeds tof_ab: the three ToFs violate the triangle inequality")]
    TriangleViolation,
}

/// A node position in meters. `z` is zero for the default planar mode; the
/// scenario schema enables it for 3-D runs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y, z: 0.0 }
    }

    pub fn new_3d(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Distance over c, rounded once to the nearest tick.
pub fn tof_between(p: Position, q: Position) -> TickDuration {
    TickDuration::from_fs(tof_rational(p, q).round_to_i128())
}

/// Exact rational ToF (before tick rounding) of the double-precision
/// distance between two positions.
fn tof_rational(p: Position, q: Position) -> Ratio {
    let distance = p.distance_to(&q);
    let meters = Ratio::from_f64(distance).expect("position coordinates must be finite");
    meters * Ratio::new(FS_PER_SECOND, SPEED_OF_LIGHT_INT)
}

/// True flight times of one exchange geometry: the active pair `A`-`B` and
/// a listener `T`, plus the listener's ToF difference `td = tof_at - tof_bt`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    pub tof_ab: TickDuration,
    pub tof_at: TickDuration,
    pub tof_bt: TickDuration,
    /// Signed ToF difference. Computed from the exact (pre-rounding) ToFs
    /// with a single rounding, so `|td| <= tof_ab` holds for every
    /// geometry; it can differ from `tof_at - tof_bt` of the rounded
    /// fields by at most one tick.
    pub td: TickDuration,
}

impl GroundTruth {
    /// Ground truth from tick-exact flight times, e.g. from a scenario that
    /// states ToFs directly instead of positions.
    pub fn from_tofs(
        tof_ab: TickDuration,
        tof_at: TickDuration,
        tof_bt: TickDuration,
    ) -> Result<Self, GeometryError> {
        let td = tof_at - tof_bt;
        if td.abs() > tof_ab {
            return Err(GeometryError::TriangleViolation);
        }
        Ok(GroundTruth {
            tof_ab,
            tof_at,
            tof_bt,
            td,
        })
    }
}

/// Computes all three flight times and the listener's ToF difference.
pub fn ground_truth(a: Position, b: Position, t: Position) -> GroundTruth {
    let ab = tof_rational(a, b);
    let at = tof_rational(a, t);
    let bt = tof_rational(b, t);
    GroundTruth {
        tof_ab: TickDuration::from_fs(ab.round_to_i128()),
        tof_at: TickDuration::from_fs(at.round_to_i128()),
        tof_bt: TickDuration::from_fs(bt.round_to_i128()),
        td: TickDuration::from_fs((at - bt).round_to_i128()),
    }
}
