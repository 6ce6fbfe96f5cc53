//! Hand-written reactive controllers standing in for a trained agent.
//!
//! Both read the normalized state, recover ranges in meters and the goal
//! bearing, and produce `[linear, angular]` through `tanh`, so actions are
//! continuous in the state and strictly inside `(-1, 1)`.
//!
//! * `goal_seeker` drives toward the goal bearing; linear speed goes
//!   negative once the nearest return in the forward cone is closer than
//!   `stop_distance`.
//! * `left_preferrer` additionally swerves when something in the forward
//!   cone is nearer than `avoid_distance`: left by default, right when the
//!   left side (headings between the cone edge and π) has a return nearer
//!   than `side_distance`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{check_input, ActionVector, ModelError, PolicyModel};
use crate::error::{Error, Result};
use crate::scan::ModelState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedKind {
    GoalSeeker,
    LeftPreferrer,
}

impl std::str::FromStr for ScriptedKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "goal_seeker" => Ok(ScriptedKind::GoalSeeker),
            "left_preferrer" => Ok(ScriptedKind::LeftPreferrer),
            other => Err(format!("unknown scripted policy `{other}` (goal_seeker | left_preferrer)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScriptedParams {
    pub n_rays: usize,
    /// Used to turn normalized readings back into meters.
    pub max_range: f64,
    pub cone_half_angle: f64,
    pub stop_distance: f64,
    pub avoid_distance: f64,
    pub side_distance: f64,
    /// Width of the linear blend around `avoid_distance` and `side_distance`.
    pub ramp: f64,
    pub linear_gain: f64,
    pub angular_gain: f64,
    pub turn_gain: f64,
}

impl Default for ScriptedParams {
    fn default() -> Self {
        Self {
            n_rays: 180,
            max_range: 3.5,
            cone_half_angle: PI / 6.0,
            stop_distance: 0.6,
            avoid_distance: 3.0,
            side_distance: 0.8,
            ramp: 0.2,
            linear_gain: 2.0,
            angular_gain: 2.0,
            turn_gain: 2.0,
        }
    }
}

impl ScriptedParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("max_range", self.max_range),
            ("stop_distance", self.stop_distance),
            ("avoid_distance", self.avoid_distance),
            ("side_distance", self.side_distance),
            ("ramp", self.ramp),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("scripted policy parameter", format!("{name} = {v} must be positive")));
        }
        if self.n_rays < 4 {
            return Err(Error::invalid("scripted policy parameter", "n_rays must be at least 4".into()));
        }
        if !(self.cone_half_angle > 0.0 && self.cone_half_angle < PI / 2.0) {
            return Err(Error::invalid("scripted policy parameter", "cone_half_angle must lie in (0, π/2)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    kind: ScriptedKind,
    params: ScriptedParams,
    front: Vec<usize>,
    left: Vec<usize>,
}

pub fn scripted_policy(kind: ScriptedKind, params: ScriptedParams) -> Result<ScriptedPolicy> {
    params.validate()?;
    let n = params.n_rays;
    let heading = |i: usize| TAU * i as f64 / n as f64;
    // small slack so a ray sitting exactly on the cone edge is included
    let edge = params.cone_half_angle + 1e-9;
    let front = (0..n).filter(|&i| heading(i).min(TAU - heading(i)) <= edge).collect();
    let left = (0..n).filter(|&i| heading(i) > edge && heading(i) < PI).collect();
    Ok(ScriptedPolicy { kind, params, front, left })
}

impl ScriptedPolicy {
    pub fn kind(&self) -> ScriptedKind {
        self.kind
    }

    pub fn params(&self) -> &ScriptedParams {
        &self.params
    }

    fn min_range(&self, lidar: &[f64], indices: &[usize]) -> f64 {
        indices.iter().map(|&i| lidar[i]).fold(1.0, f64::min) * self.params.max_range
    }

    fn action(&self, state: &ModelState) -> [f64; 2] {
        let p = &self.params;
        let lidar = state.lidar();
        let g = state.goal_part();
        let bearing = (2.0 * g[1] - 1.0).atan2(2.0 * g[0] - 1.0);
        let front_min = self.min_range(lidar, &self.front);
        let linear = (p.linear_gain * (front_min - p.stop_distance)).tanh();
        let seek = p.angular_gain * bearing;
        let angular = match self.kind {
            ScriptedKind::GoalSeeker => seek.tanh(),
            ScriptedKind::LeftPreferrer => {
                let block = ((p.avoid_distance - front_min) / p.ramp).clamp(0.0, 1.0);
                let left_free = ((self.min_range(lidar, &self.left) - p.side_distance) / p.ramp).clamp(0.0, 1.0);
                let swerve = p.turn_gain * (2.0 * left_free - 1.0);
                ((1.0 - block) * seek + block * swerve).tanh()
            }
        };
        [linear, angular]
    }
}

impl PolicyModel for ScriptedPolicy {
    fn input_len(&self) -> usize {
        self.params.n_rays + 3
    }

    fn output_len(&self) -> usize {
        2
    }

    fn act(&self, state: &ModelState) -> std::result::Result<ActionVector, ModelError> {
        check_input(self.input_len(), state)?;
        ActionVector::new(self.action(state).to_vec())
    }

    fn describe(&self) -> String {
        match self.kind {
            ScriptedKind::GoalSeeker => "scripted:goal_seeker".into(),
            ScriptedKind::LeftPreferrer => "scripted:left_preferrer".into(),
        }
    }
}
