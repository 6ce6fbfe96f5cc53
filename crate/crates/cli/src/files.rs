//! Scenario, scan, and query files.
//!
//! Scenarios and queries are TOML; scans are JSON. Paths inside a query are
//! resolved relative to the query file.
//!
//! Scenario:
//!
//! ```toml
//! name = "corridor"
//! n_rays = 180            # default 180
//! max_range = 3.5         # default 3.5
//! origin = [0.0, 0.0]     # sensor position; it faces +x
//! goal = [2.0, 0.0]
//!
//! [[obstacles]]
//! kind = "rectangle"
//! center = [0.0, 1.0]
//! orientation = 0.0       # radians, default 0
//! half_extents = [2.0, 0.05]
//!
//! [[obstacles]]
//! kind = "circle"
//! center = [1.5, -0.5]
//! radius = 0.3
//! ```
//!
//! Query:
//!
//! ```toml
//! base = "scan.json"          # or: scenario = "room.toml"
//! bounds = [[-1.0, 0.0], [-0.2, 0.2]]
//! combination = "min_distance"  # or "gen_priority"
//! lambda_y = 1.0
//! lambda_p = 0.0
//! n_obstacles = 5
//! d_min = 0.2
//! world_bounds = 3.5          # default: the scan's max_range
//! size_limits = [0.05, 1.0]
//! n_cfes = 10
//! seed = 0
//! # d_g_max = 9.9             # default: taken from the scan
//!
//! [ga]                        # any GA parameter; the seed comes from `seed`
//! generations = 100
//! population = 100
//! ```

use std::path::{Path, PathBuf};

use lidar_cfe::cfe::{ActionBounds, CfeQuery, SizeLimits};
use lidar_cfe::ga::GaConfig;
use lidar_cfe::geometry::{raycast_scan, ObstacleShape, Point2};
use lidar_cfe::scan::{Combination, GoalFeatures, Scan, DEFAULT_MAX_RANGE, DEFAULT_RAYS};
use serde::{Deserialize, Serialize};

use crate::error::{read_text, relative_to, CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ShapeEntry {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Rectangle {
        center: [f64; 2],
        #[serde(default)]
        orientation: f64,
        half_extents: [f64; 2],
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default = "default_rays")]
    n_rays: usize,
    #[serde(default = "default_range")]
    max_range: f64,
    #[serde(default)]
    origin: [f64; 2],
    goal: [f64; 2],
    d_g_max: Option<f64>,
    #[serde(default)]
    obstacles: Vec<ShapeEntry>,
}

fn default_rays() -> usize {
    DEFAULT_RAYS
}

fn default_range() -> f64 {
    DEFAULT_MAX_RANGE
}

/// Default goal-distance normalizer: the diagonal of a square arena
/// `2·max_range` on a side.
pub fn default_d_g_max(max_range: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * max_range
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub n_rays: usize,
    pub max_range: f64,
    pub origin: Point2,
    pub goal: Point2,
    pub d_g_max: f64,
    pub obstacles: Vec<ObstacleShape>,
}

fn toml_error(path: &Path, e: toml::de::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

impl Scenario {
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| toml_error(path, e))?;
        let at = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
        let point = |p: [f64; 2]| Point2::new(p[0], p[1]);
        let obstacles = file
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let shape = match *o {
                    ShapeEntry::Circle { center, radius } => ObstacleShape::circle(point(center), radius),
                    ShapeEntry::Rectangle { center, orientation, half_extents } => {
                        ObstacleShape::rectangle(point(center), orientation, (half_extents[0], half_extents[1]))
                    }
                };
                shape.map_err(|e| at(format!("obstacles[{i}]: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        if file.n_rays == 0 {
            return Err(at("n_rays must be at least 1".into()));
        }
        if !(file.max_range > 0.0 && file.max_range.is_finite()) {
            return Err(at(format!("max_range {} must be positive", file.max_range)));
        }
        let goal = point(file.goal);
        if let Some(i) = obstacles.iter().position(|s| s.contains(goal)) {
            return Err(at(format!("goal lies inside obstacles[{i}]")));
        }
        let d_g_max = file.d_g_max.unwrap_or_else(|| default_d_g_max(file.max_range));
        if !(d_g_max > 0.0 && d_g_max.is_finite()) {
            return Err(at(format!("d_g_max {d_g_max} must be positive")));
        }
        Ok(Self {
            name: file.name,
            n_rays: file.n_rays,
            max_range: file.max_range,
            origin: point(file.origin),
            goal,
            d_g_max,
            obstacles,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_text(path)?, path)
    }

    pub fn goal_features(&self) -> CliResult<GoalFeatures> {
        Ok(GoalFeatures::from_positions(self.origin, self.goal)?)
    }

    pub fn scan(&self) -> CliResult<ScanFile> {
        let scan = raycast_scan(self.origin, &self.obstacles, self.n_rays, self.max_range)?;
        Ok(ScanFile { scenario: self.name.clone(), scan, goal: self.goal_features()?, d_g_max: self.d_g_max })
    }
}

/// Base scan plus the goal features and their normalizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFile {
    pub scenario: String,
    #[serde(flatten)]
    pub scan: Scan,
    pub goal: GoalFeatures,
    pub d_g_max: f64,
}

impl ScanFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan file serializes") + "\n"
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryFile {
    base: Option<PathBuf>,
    scenario: Option<PathBuf>,
    bounds: Vec<[f64; 2]>,
    #[serde(default)]
    combination: Combination,
    #[serde(default = "one")]
    lambda_y: f64,
    #[serde(default)]
    lambda_p: f64,
    #[serde(default = "five")]
    n_obstacles: usize,
    #[serde(default = "default_d_min")]
    d_min: f64,
    world_bounds: Option<f64>,
    #[serde(default = "default_sizes")]
    size_limits: [f64; 2],
    #[serde(default = "ten")]
    n_cfes: usize,
    #[serde(default)]
    seed: u64,
    d_g_max: Option<f64>,
    #[serde(default)]
    ga: GaConfig,
}

fn one() -> f64 {
    1.0
}

fn five() -> usize {
    5
}

fn ten() -> usize {
    10
}

fn default_d_min() -> f64 {
    0.2
}

fn default_sizes() -> [f64; 2] {
    [0.05, 1.0]
}

/// A query file resolved into a runnable query.
#[derive(Debug, Clone)]
pub struct LoadedQuery {
    pub query: CfeQuery,
    pub ga: GaConfig,
    /// Where the base scan came from.
    pub source: PathBuf,
    pub scenario: Option<Scenario>,
}

/// Applies `key=value` overrides to a parsed TOML document. Dotted keys
/// reach into tables (`ga.generations=50`); values are TOML literals, and a
/// value that does not parse as one is taken as a string.
pub fn apply_overrides(doc: &mut toml::Table, overrides: &[String]) -> CliResult<()> {
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("override `{o}` is not of the form key=value")))?;
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let mut parts: Vec<&str> = key.trim().split('.').collect();
        let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| CliError::Input(format!("empty key in `{o}`")))?;
        let mut table = &mut *doc;
        for p in parts {
            let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Input(format!("override `{o}`: `{p}` is not a table")))?;
        }
        table.insert(last.to_string(), value);
    }
    Ok(())
}

impl LoadedQuery {
    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let mut doc: toml::Table = read_text(path)?.parse().map_err(|e| toml_error(path, e))?;
        apply_overrides(&mut doc, overrides)?;
        let file: QueryFile = doc.try_into().map_err(|e| toml_error(path, e))?;
        let at = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));

        let (source, base, scenario) = match (&file.base, &file.scenario) {
            (Some(b), None) => {
                let p = relative_to(path, b);
                (p.clone(), ScanFile::load(&p)?, None)
            }
            (None, Some(s)) => {
                let p = relative_to(path, s);
                let scenario = Scenario::load(&p)?;
                (p, scenario.scan()?, Some(scenario))
            }
            _ => return Err(at("exactly one of `base` and `scenario` must be set".into())),
        };

        let bounds = ActionBounds::new(file.bounds).map_err(|e| at(e.to_string()))?;
        let max_range = base.scan.max_range();
        let query = CfeQuery {
            base_scan: base.scan,
            goal: base.goal,
            bounds,
            combination: file.combination,
            lambda_y: file.lambda_y,
            lambda_p: file.lambda_p,
            n_obstacles: file.n_obstacles,
            d_min: file.d_min,
            world_bounds: file.world_bounds.unwrap_or(max_range),
            size_limits: SizeLimits { min: file.size_limits[0], max: file.size_limits[1] },
            d_g_max: file.d_g_max.unwrap_or(base.d_g_max),
            n_cfes: file.n_cfes,
            rng_seed: file.seed,
        };
        query.validate().map_err(|e| at(e.to_string()))?;
        let ga = GaConfig { rng_seed: file.seed, ..file.ga };
        ga.validate().map_err(|e| at(format!("[ga] {e}")))?;
        Ok(Self { query, ga, source, scenario })
    }
}
