//! Counterfactual search: genome decoding, the fitness function, and the
//! multi-run driver that packages results.
//!
//! A genome carries six genes per obstacle, `[type, x, y, θ, s1, s2]`:
//! type < 0.5 is a circle, otherwise a rectangle; the center maps affinely
//! onto `[-world_bounds, world_bounds]²` around the sensor; θ·π is the
//! rectangle orientation; `s1`/`s2` map onto the size limits (half extents
//! for rectangles, `s1` alone as the radius for circles).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{self, FitnessFn, GaConfig, Genome, Termination};
use crate::geometry::{raycast_scan, shape_overlaps_disk, ObstacleShape, Point2};
use crate::model::{ActionVector, PolicyModel};
use crate::par;
use crate::scan::{assemble_state, goal_exceeds, proximity_loss, Combination, GoalFeatures, ModelState, Scan};

pub const GENES_PER_OBSTACLE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeLimits {
    pub min: f64,
    pub max: f64,
}

impl Default for SizeLimits {
    fn default() -> Self {
        Self { min: 0.05, max: 1.0 }
    }
}

impl SizeLimits {
    pub fn map(&self, gene: f64) -> f64 {
        self.min + gene * (self.max - self.min)
    }
}

/// Decodes a genome into obstacles in the sensor frame.
pub fn decode_genome(
    genes: &[f64],
    n_obstacles: usize,
    world_bounds: f64,
    sizes: SizeLimits,
) -> Result<Vec<ObstacleShape>> {
    Error::check_len(n_obstacles * GENES_PER_OBSTACLE, genes.len())?;
    genes
        .chunks_exact(GENES_PER_OBSTACLE)
        .map(|g| {
            let center = Point2::new((2.0 * g[1] - 1.0) * world_bounds, (2.0 * g[2] - 1.0) * world_bounds);
            if g[0] < 0.5 {
                ObstacleShape::circle(center, sizes.map(g[4]))
            } else {
                ObstacleShape::rectangle(center, g[3] * std::f64::consts::PI, (sizes.map(g[4]), sizes.map(g[5])))
            }
        })
        .collect()
}

/// Inclusive per-dimension `[lower, upper]` target for the model output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<[f64; 2]>", try_from = "Vec<[f64; 2]>")]
pub struct ActionBounds(Vec<[f64; 2]>);

impl TryFrom<Vec<[f64; 2]>> for ActionBounds {
    type Error = Error;

    fn try_from(bounds: Vec<[f64; 2]>) -> Result<Self> {
        ActionBounds::new(bounds)
    }
}

impl From<ActionBounds> for Vec<[f64; 2]> {
    fn from(b: ActionBounds) -> Self {
        b.0
    }
}

impl ActionBounds {
    pub fn new(bounds: Vec<[f64; 2]>) -> Result<Self> {
        for (i, &[lo, hi]) in bounds.iter().enumerate() {
            if !(lo <= hi && (-1.0..=1.0).contains(&lo) && (-1.0..=1.0).contains(&hi)) {
                return Err(Error::invalid("action bounds", format!("dimension {i}: [{lo}, {hi}] is not an interval in [-1, 1]")));
            }
        }
        Ok(Self(bounds))
    }

    pub fn dims(&self) -> &[[f64; 2]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, action: &[f64]) -> bool {
        action.len() == self.0.len() && action.iter().zip(&self.0).all(|(y, [lo, hi])| lo <= y && y <= hi)
    }
}

/// Sum over dimensions of the distance from the output to the nearest bound,
/// zero inside the (inclusive) bounds.
pub fn hinge_loss(action: &[f64], bounds: &ActionBounds) -> Result<f64> {
    Error::check_len(bounds.len(), action.len())?;
    Ok(action
        .iter()
        .zip(bounds.dims())
        .map(|(&y, &[lo, hi])| if lo <= y && y <= hi { 0.0 } else { (y - lo).abs().min((y - hi).abs()) })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfeQuery {
    pub base_scan: Scan,
    pub goal: GoalFeatures,
    pub bounds: ActionBounds,
    pub combination: Combination,
    pub lambda_y: f64,
    pub lambda_p: f64,
    pub n_obstacles: usize,
    pub d_min: f64,
    pub world_bounds: f64,
    pub size_limits: SizeLimits,
    pub d_g_max: f64,
    pub n_cfes: usize,
    pub rng_seed: u64,
}

impl CfeQuery {
    /// Query with the default weights (λ_y 1, λ_p 0), five obstacles,
    /// `d_min` 0.2 m, and decoding extent equal to the scan range.
    pub fn new(base_scan: Scan, goal: GoalFeatures, bounds: ActionBounds) -> Self {
        let range = base_scan.max_range();
        Self {
            base_scan,
            goal,
            bounds,
            combination: Combination::MinDistance,
            lambda_y: 1.0,
            lambda_p: 0.0,
            n_obstacles: 5,
            d_min: 0.2,
            world_bounds: range,
            size_limits: SizeLimits::default(),
            d_g_max: 2.0 * std::f64::consts::SQRT_2 * range,
            n_cfes: 10,
            rng_seed: 0,
        }
    }

    pub fn genome_length(&self) -> usize {
        self.n_obstacles * GENES_PER_OBSTACLE
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &'static str, reason: String| Err(Error::invalid(what, reason));
        if self.n_obstacles == 0 {
            return bad("n_obstacles", "must be at least 1".into());
        }
        if !(self.d_min >= 0.0 && self.d_min.is_finite()) {
            return bad("d_min", format!("{} must be non-negative", self.d_min));
        }
        for (what, v) in [("lambda_y", self.lambda_y), ("lambda_p", self.lambda_p)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(what, format!("{v} must be non-negative"));
            }
        }
        if !(self.world_bounds > 0.0 && self.world_bounds.is_finite()) {
            return bad("world_bounds", format!("{} must be positive", self.world_bounds));
        }
        let SizeLimits { min, max } = self.size_limits;
        if !(min > 0.0 && min <= max && max.is_finite()) {
            return bad("size_limits", format!("[{min}, {max}] must satisfy 0 < min <= max"));
        }
        if !(self.d_g_max > 0.0 && self.d_g_max.is_finite()) {
            return bad("d_g_max", format!("{} must be positive", self.d_g_max));
        }
        Ok(())
    }
}

/// Everything the fitness function computes for one genome.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub obstacles: Vec<ObstacleShape>,
    pub combined: Scan,
    pub state: ModelState,
    pub action: ActionVector,
    pub hinge: f64,
    pub proximity: f64,
    /// False when an obstacle overlaps the `d_min` disk around the sensor.
    pub feasible: bool,
    pub fitness: f64,
}

/// Fitness of a genome under a query: `-∞` when any obstacle overlaps the
/// `d_min` disk, otherwise `-λ_y·hinge - λ_p·proximity`.
pub struct QueryFitness<'a, P: PolicyModel + ?Sized> {
    query: &'a CfeQuery,
    model: &'a P,
}

pub fn fitness_for_query<'a, P: PolicyModel + ?Sized>(query: &'a CfeQuery, model: &'a P) -> Result<QueryFitness<'a, P>> {
    query.validate()?;
    Error::check_len(query.base_scan.len() + 3, model.input_len())?;
    Error::check_len(query.bounds.len(), model.output_len())?;
    Ok(QueryFitness { query, model })
}

impl<P: PolicyModel + ?Sized> QueryFitness<'_, P> {
    fn decode(&self, genes: &[f64]) -> Result<Vec<ObstacleShape>> {
        let q = self.query;
        decode_genome(genes, q.n_obstacles, q.world_bounds, q.size_limits)
    }

    fn feasible(&self, obstacles: &[ObstacleShape]) -> bool {
        !obstacles.iter().any(|s| shape_overlaps_disk(s, Point2::ORIGIN, self.query.d_min))
    }

    /// Scan, state, action and loss terms for a set of obstacles.
    pub fn evaluate_obstacles(&self, obstacles: Vec<ObstacleShape>) -> Result<Evaluation> {
        let q = self.query;
        let base = &q.base_scan;
        let generated = raycast_scan(Point2::ORIGIN, &obstacles, base.len(), base.max_range())?;
        let combined = q.combination.apply(base, &generated)?;
        let state = assemble_state(&combined, &q.goal, q.d_g_max);
        let action = self.model.act(&state)?;
        let hinge = hinge_loss(action.values(), &q.bounds)?;
        let proximity = proximity_loss(&combined, base)?;
        let feasible = self.feasible(&obstacles);
        let fitness = if feasible { -q.lambda_y * hinge - q.lambda_p * proximity } else { f64::NEG_INFINITY };
        Ok(Evaluation { obstacles, combined, state, action, hinge, proximity, feasible, fitness })
    }

    pub fn evaluate_detailed(&self, genes: &[f64]) -> Result<Evaluation> {
        self.evaluate_obstacles(self.decode(genes)?)
    }
}

impl<P: PolicyModel + ?Sized> FitnessFn for QueryFitness<'_, P> {
    fn evaluate(&self, genes: &[f64]) -> Result<f64> {
        let obstacles = self.decode(genes)?;
        if !self.feasible(&obstacles) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.evaluate_obstacles(obstacles)?.fitness)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfeResult {
    pub run_index: usize,
    pub seed: u64,
    pub obstacles: Vec<ObstacleShape>,
    pub combined_scan: Scan,
    pub achieved_action: ActionVector,
    #[serde(with = "fitness_value")]
    pub fitness: f64,
    pub hinge_component: f64,
    pub proximity_component: f64,
    /// Achieved action lies inside the bounds (hinge component is zero).
    pub satisfied: bool,
    pub feasible: bool,
    pub genome: Genome,
    pub generations: usize,
    pub termination: Termination,
    /// Best fitness per generation.
    #[serde(with = "fitness_value::seq")]
    pub trace: Vec<f64>,
}

/// Fitness values as JSON-safe data: finite values stay numbers, the
/// infeasibility sentinel becomes the string `"-inf"`.
pub mod fitness_value {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Tag(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Number(v)
        } else if v == f64::NEG_INFINITY {
            Repr::Tag("-inf".into())
        } else if v == f64::INFINITY {
            Repr::Tag("inf".into())
        } else {
            Repr::Tag("nan".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Number(v) => Ok(v),
            Repr::Tag(t) => match t.as_str() {
                "-inf" => Ok(f64::NEG_INFINITY),
                "inf" => Ok(f64::INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("`{other}` is not a fitness value"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod seq {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|&x| to_repr(x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr::<D::Error>).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfeBatch {
    /// Sorted by fitness, best first.
    pub results: Vec<CfeResult>,
    pub warning: Option<String>,
}

impl CfeBatch {
    pub fn satisfied(&self) -> usize {
        self.results.iter().filter(|r| r.satisfied).count()
    }
}

/// One GA run per requested counterfactual, seeded `rng_seed + run_index`.
pub fn generate_cfes<P: PolicyModel + ?Sized>(query: &CfeQuery, model: &P, ga_config: &GaConfig) -> Result<CfeBatch> {
    let fitness = fitness_for_query(query, model)?;
    ga_config.validate()?;
    if goal_exceeds(&query.goal, query.d_g_max) {
        log::warn!("goal distance {} exceeds d_g_max {}; clamping", query.goal.distance, query.d_g_max);
    }
    let runs = par::map_range(query.n_cfes, ga_config.parallel, |run_index| -> Result<CfeResult> {
        let seed = query.rng_seed.wrapping_add(run_index as u64);
        let config = GaConfig { rng_seed: seed, ..ga_config.clone() };
        let run = ga::run_ga(&config, query.genome_length(), &fitness)?;
        let eval = fitness.evaluate_detailed(run.best.genes())?;
        Ok(CfeResult {
            run_index,
            seed,
            obstacles: eval.obstacles,
            combined_scan: eval.combined,
            satisfied: query.bounds.contains(eval.action.values()),
            achieved_action: eval.action,
            fitness: eval.fitness,
            hinge_component: eval.hinge,
            proximity_component: eval.proximity,
            feasible: eval.feasible,
            genome: run.best,
            generations: run.trace.len(),
            termination: run.termination,
            trace: run.trace,
        })
    });
    let mut results = runs.into_iter().collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| b.fitness.total_cmp(&a.fitness).then(a.run_index.cmp(&b.run_index)));
    let batch_warning = (query.n_cfes > 0 && !results.iter().any(|r| r.satisfied))
        .then(|| format!("none of the {} counterfactuals satisfies the action bounds", query.n_cfes));
    if let Some(w) = &batch_warning {
        log::warn!("{w}");
    }
    Ok(CfeBatch { results, warning: batch_warning })
}

/// A mismatch found while re-checking a stored result.
#[derive(Debug, Clone, PartialEq)]
pub enum Discrepancy {
    CombinedScan,
    Action { stored: Vec<f64>, recomputed: Vec<f64> },
    SatisfiedFlag,
}

/// Recomputes a result from its obstacles and reports every field that does
/// not reproduce exactly.
pub fn verify_result<P: PolicyModel + ?Sized>(query: &CfeQuery, model: &P, result: &CfeResult) -> Result<Vec<Discrepancy>> {
    let fitness = fitness_for_query(query, model)?;
    let eval = fitness.evaluate_obstacles(result.obstacles.clone())?;
    let mut found = Vec::new();
    if eval.combined != result.combined_scan {
        found.push(Discrepancy::CombinedScan);
    }
    // re-run the model on the stored combined scan, not the recomputed one
    let stored_state = assemble_state(&result.combined_scan, &query.goal, query.d_g_max);
    let action = model.act(&stored_state)?;
    if action != result.achieved_action {
        found.push(Discrepancy::Action {
            stored: result.achieved_action.values().to_vec(),
            recomputed: action.values().to_vec(),
        });
    }
    let inside = query.bounds.contains(result.achieved_action.values());
    if inside != result.satisfied || inside != (result.hinge_component == 0.0) {
        found.push(Discrepancy::SatisfiedFlag);
    }
    Ok(found)
}
