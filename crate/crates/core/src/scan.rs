//! Range scans, the two scan combination rules, and model-state assembly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const DEFAULT_RAYS: usize = 180;
pub const DEFAULT_MAX_RANGE: f64 = 3.5;

/// Fixed-length vector of range readings in meters, each in `(0, max_range]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScan")]
pub struct Scan {
    readings: Vec<f64>,
    max_range: f64,
}

#[derive(Deserialize)]
struct RawScan {
    readings: Vec<f64>,
    max_range: f64,
}

impl TryFrom<RawScan> for Scan {
    type Error = Error;

    fn try_from(raw: RawScan) -> Result<Self> {
        Scan::new(raw.readings, raw.max_range)
    }
}

impl Scan {
    pub fn new(readings: Vec<f64>, max_range: f64) -> Result<Self> {
        if !(max_range > 0.0 && max_range.is_finite()) {
            return Err(Error::invalid("max_range", format!("{max_range} is not a positive finite range")));
        }
        if readings.is_empty() {
            return Err(Error::invalid("scan", "no readings".to_string()));
        }
        if let Some((i, r)) = readings.iter().enumerate().find(|(_, &r)| !(r > 0.0 && r <= max_range)) {
            return Err(Error::invalid("scan", format!("reading {i} = {r} outside (0, {max_range}]")));
        }
        Ok(Self { readings, max_range })
    }

    /// Scan with no returns: every reading at `max_range`.
    pub fn empty(n: usize, max_range: f64) -> Self {
        Self { readings: vec![max_range; n], max_range }
    }

    pub(crate) fn from_raw(readings: Vec<f64>, max_range: f64) -> Self {
        debug_assert!(readings.iter().all(|&r| r > 0.0 && r <= max_range));
        Self { readings, max_range }
    }

    pub fn readings(&self) -> &[f64] {
        &self.readings
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn into_readings(self) -> Vec<f64> {
        self.readings
    }

    /// Angular spacing between consecutive rays.
    pub fn resolution(&self) -> f64 {
        std::f64::consts::TAU / self.len() as f64
    }

    fn check_compatible(&self, other: &Scan) -> Result<()> {
        Error::check_len(self.len(), other.len())?;
        if self.max_range != other.max_range {
            return Err(Error::RangeMismatch(self.max_range, other.max_range));
        }
        Ok(())
    }
}

/// Keeps the nearer reading on every ray.
pub fn combine_min_distance(base: &Scan, generated: &Scan) -> Result<Scan> {
    base.check_compatible(generated)?;
    let readings = base.readings.iter().zip(&generated.readings).map(|(&b, &c)| b.min(c)).collect();
    Ok(Scan::from_raw(readings, base.max_range))
}

/// Takes the generated reading wherever it registers a return, else the base.
pub fn combine_gen_priority(base: &Scan, generated: &Scan) -> Result<Scan> {
    base.check_compatible(generated)?;
    let max = base.max_range;
    let readings = base
        .readings
        .iter()
        .zip(&generated.readings)
        .map(|(&b, &c)| if c < max { c } else { b })
        .collect();
    Ok(Scan::from_raw(readings, max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    #[default]
    MinDistance,
    GenPriority,
}

impl Combination {
    pub fn apply(self, base: &Scan, generated: &Scan) -> Result<Scan> {
        match self {
            Combination::MinDistance => combine_min_distance(base, generated),
            Combination::GenPriority => combine_gen_priority(base, generated),
        }
    }
}

impl std::fmt::Display for Combination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Combination::MinDistance => "min_distance",
            Combination::GenPriority => "gen_priority",
        })
    }
}

/// Goal bearing (as cosine/sine) and distance, relative to the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGoal")]
pub struct GoalFeatures {
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub distance: f64,
}

#[derive(Deserialize)]
struct RawGoal {
    cos_theta: f64,
    sin_theta: f64,
    distance: f64,
}

impl TryFrom<RawGoal> for GoalFeatures {
    type Error = Error;

    fn try_from(g: RawGoal) -> Result<Self> {
        GoalFeatures::new(g.cos_theta, g.sin_theta, g.distance)
    }
}

impl GoalFeatures {
    pub fn new(cos_theta: f64, sin_theta: f64, distance: f64) -> Result<Self> {
        if !(cos_theta.is_finite() && sin_theta.is_finite()) || (cos_theta.hypot(sin_theta) - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(
                "goal bearing",
                format!("cos {cos_theta} / sin {sin_theta} is not a unit vector"),
            ));
        }
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(Error::invalid("goal distance", format!("{distance} must be non-negative")));
        }
        Ok(Self { cos_theta, sin_theta, distance })
    }

    pub fn from_bearing(bearing: f64, distance: f64) -> Result<Self> {
        Self::new(bearing.cos(), bearing.sin(), distance)
    }

    /// Sensor at `origin` facing +x.
    pub fn from_positions(origin: Point2, goal: Point2) -> Result<Self> {
        let (dx, dy) = (goal.x - origin.x, goal.y - origin.y);
        Self::from_bearing(dy.atan2(dx), dx.hypot(dy))
    }

    pub fn bearing(&self) -> f64 {
        self.sin_theta.atan2(self.cos_theta)
    }
}

/// Normalized model input: `n` range values, then cos, sin, goal distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelState(Vec<f64>);

impl ModelState {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid("model state", format!("element {i} = {v} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Range part, without the three goal features.
    pub fn lidar(&self) -> &[f64] {
        &self.0[..self.0.len().saturating_sub(3)]
    }

    pub fn goal_part(&self) -> &[f64] {
        &self.0[self.0.len().saturating_sub(3)..]
    }

    /// Maps back to range readings and goal features.
    pub fn denormalize(&self, max_range: f64, d_g_max: f64) -> (Vec<f64>, GoalFeatures) {
        let lidar = self.lidar().iter().map(|v| v * max_range).collect();
        let g = self.goal_part();
        let goal = GoalFeatures { cos_theta: 2.0 * g[0] - 1.0, sin_theta: 2.0 * g[1] - 1.0, distance: g[2] * d_g_max };
        (lidar, goal)
    }
}

/// Builds the normalized model input. Goal distances beyond `d_g_max` are
/// clamped to 1; callers that care check [`goal_exceeds`] once up front.
pub fn assemble_state(scan: &Scan, goal: &GoalFeatures, d_g_max: f64) -> ModelState {
    let inv = 1.0 / scan.max_range;
    let mut values = Vec::with_capacity(scan.len() + 3);
    values.extend(scan.readings.iter().map(|r| (r * inv).min(1.0)));
    values.push(((goal.cos_theta + 1.0) * 0.5).clamp(0.0, 1.0));
    values.push(((goal.sin_theta + 1.0) * 0.5).clamp(0.0, 1.0));
    values.push((goal.distance / d_g_max).clamp(0.0, 1.0));
    ModelState(values)
}

pub fn goal_exceeds(goal: &GoalFeatures, d_g_max: f64) -> bool {
    goal.distance > d_g_max
}

/// Mean absolute per-ray deviation, in units of `max_range`.
pub fn proximity_loss(combined: &Scan, base: &Scan) -> Result<f64> {
    combined.check_compatible(base)?;
    let total: f64 = combined.readings.iter().zip(&base.readings).map(|(d, b)| (d - b).abs()).sum();
    Ok(total / combined.max_range / combined.len() as f64)
}
