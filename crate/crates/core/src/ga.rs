//! Real-coded genetic algorithm over genomes in `[0, 1]^L`.
//!
//! One generation: tournament-select `parents_mating` parents, pair them
//! cyclically for single-point crossover, mutate each child by resampling a
//! fixed fraction of its genes, and carry `keep_parents` individuals over
//! unchanged. The initial population counts as generation 1.
//!
//! All randomness comes from one seeded ChaCha stream consumed on the calling
//! thread. Fitness evaluation may fan out across threads, but results are
//! collected in index order, so a run is reproducible bit for bit.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

pub type GaRng = ChaCha8Rng;

/// Gene vector with every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Genome(Vec<f64>);

impl TryFrom<Vec<f64>> for Genome {
    type Error = Error;

    fn try_from(genes: Vec<f64>) -> Result<Self> {
        Genome::new(genes)
    }
}

impl From<Genome> for Vec<f64> {
    fn from(g: Genome) -> Self {
        g.0
    }
}

impl Genome {
    pub fn new(genes: Vec<f64>) -> Result<Self> {
        if let Some((i, g)) = genes.iter().enumerate().find(|(_, g)| !(0.0..=1.0).contains(*g)) {
            return Err(Error::invalid("genome", format!("gene {i} = {g} outside [0, 1]")));
        }
        Ok(Self(genes))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random::<f64>()).collect())
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_genes(self) -> Vec<f64> {
        self.0
    }
}

/// Objective to maximize. May return `-∞` for infeasible genomes; `NaN` is
/// treated as `-∞`. Errors abort the run.
pub trait FitnessFn: Sync {
    fn evaluate(&self, genes: &[f64]) -> Result<f64>;
}

impl<F> FitnessFn for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, genes: &[f64]) -> Result<f64> {
        Ok(self(genes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeepMode {
    /// The `keep_parents` fittest individuals of the whole population survive.
    #[default]
    Elitism,
    /// The `keep_parents` fittest of this generation's selected parents survive.
    SelectedParents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopCriteria {
    /// Stop after this many generations without best-fitness improvement;
    /// `None` or 0 disables the check.
    pub saturate: Option<usize>,
    /// Stop once the best fitness reaches 0.
    pub reach_zero: bool,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self { saturate: Some(10), reach_zero: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub generations: usize,
    pub population: usize,
    pub parents_mating: usize,
    pub keep_parents: usize,
    pub keep_mode: KeepMode,
    pub tournament_size: usize,
    pub mutation_fraction: f64,
    pub stop: StopCriteria,
    pub rng_seed: u64,
    /// Evaluate fitness in parallel (only effective with the `parallel` feature).
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            generations: 100,
            population: 100,
            parents_mating: 10,
            keep_parents: 10,
            keep_mode: KeepMode::Elitism,
            tournament_size: 3,
            mutation_fraction: 0.2,
            stop: StopCriteria::default(),
            rng_seed: 0,
            parallel: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::invalid("ga config", reason.to_string()));
        if self.generations == 0 {
            return bad("generations must be at least 1");
        }
        if self.parents_mating == 0 || self.parents_mating > self.population {
            return bad("need 1 <= parents_mating <= population");
        }
        if self.keep_parents > self.parents_mating {
            return bad("keep_parents must not exceed parents_mating");
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be at least 1");
        }
        if !(self.mutation_fraction > 0.0 && self.mutation_fraction <= 1.0) {
            return bad("mutation_fraction must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachZero,
    Saturate,
    MaxGenerations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaRun {
    pub population: Vec<Genome>,
    pub fitness: Vec<f64>,
    pub best: Genome,
    pub best_fitness: f64,
    /// Best fitness after each evaluated generation.
    pub trace: Vec<f64>,
    pub termination: Termination,
}

impl GaRun {
    pub fn generations(&self) -> usize {
        self.trace.len()
    }
}

/// Argmax with ties going to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Fittest of `k` distinct uniformly sampled indices; ties go to the lowest index.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[f64], k: usize, rng: &mut R) -> usize {
    let n = fitness.len();
    let k = k.clamp(1, n);
    let mut winner = usize::MAX;
    for i in index::sample(rng, n, k) {
        if winner == usize::MAX || fitness[i] > fitness[winner] || (fitness[i] == fitness[winner] && i < winner) {
            winner = i;
        }
    }
    winner
}

/// Children `a[..cut] ++ b[cut..]` and `b[..cut] ++ a[cut..]`.
pub fn crossover_at(a: &Genome, b: &Genome, cut: usize) -> (Genome, Genome) {
    let c1 = a.0[..cut].iter().chain(&b.0[cut..]).copied().collect();
    let c2 = b.0[..cut].iter().chain(&a.0[cut..]).copied().collect();
    (Genome(c1), Genome(c2))
}

/// Single-point crossover with the cut uniform in `[1, L-1]`. Genomes of
/// length 1 are copied through.
pub fn single_point_crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<(Genome, Genome)> {
    Error::check_len(a.len(), b.len())?;
    if a.len() < 2 {
        return Ok((a.clone(), b.clone()));
    }
    let cut = rng.random_range(1..a.len());
    Ok(crossover_at(a, b, cut))
}

/// Number of genes resampled per mutation: `round(fraction · L)`, at least
/// one whenever `fraction > 0`.
pub fn mutation_count(fraction: f64, len: usize) -> usize {
    if fraction <= 0.0 || len == 0 {
        return 0;
    }
    ((fraction * len as f64).round() as usize).clamp(1, len)
}

/// Resamples `mutation_count(fraction, L)` distinct genes uniformly in `[0, 1]`.
pub fn mutate<R: Rng + ?Sized>(g: &Genome, fraction: f64, rng: &mut R) -> Genome {
    let mut out = g.clone();
    let count = mutation_count(fraction, g.len());
    for i in index::sample(rng, g.len(), count) {
        out.0[i] = rng.random::<f64>();
    }
    out
}

fn evaluate_all<F: FitnessFn + ?Sized>(genomes: &[Genome], fitness: &F, parallel: bool) -> Result<Vec<f64>> {
    par::map(genomes, parallel, |g| fitness.evaluate(g.genes()))
        .into_iter()
        .map(|r| {
            r.map(|v| {
                if v.is_nan() {
                    log::warn!("fitness returned NaN; treating it as -inf");
                    f64::NEG_INFINITY
                } else {
                    v
                }
            })
        })
        .collect()
}

/// Indices sorted by descending fitness, ties by index.
fn ranked(fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    order
}

/// Runs the GA from a uniform random population.
pub fn run_ga<F: FitnessFn + ?Sized>(config: &GaConfig, genome_length: usize, fitness: &F) -> Result<GaRun> {
    config.validate()?;
    if genome_length == 0 {
        return Err(Error::invalid("genome_length", "must be at least 1".into()));
    }
    let mut rng = GaRng::seed_from_u64(config.rng_seed);
    let population = (0..config.population).map(|_| Genome::random(genome_length, &mut rng)).collect();
    evolve(config, population, fitness, rng)
}

/// Runs the GA from a caller-supplied initial population.
pub fn run_ga_from<F: FitnessFn + ?Sized>(config: &GaConfig, initial: Vec<Genome>, fitness: &F) -> Result<GaRun> {
    config.validate()?;
    Error::check_len(config.population, initial.len())?;
    let len = initial.first().map_or(0, Genome::len);
    if len == 0 {
        return Err(Error::invalid("genome_length", "must be at least 1".into()));
    }
    for g in &initial {
        Error::check_len(len, g.len())?;
    }
    evolve(config, initial, fitness, GaRng::seed_from_u64(config.rng_seed))
}

fn evolve<F: FitnessFn + ?Sized>(
    config: &GaConfig,
    mut population: Vec<Genome>,
    fitness_fn: &F,
    mut rng: GaRng,
) -> Result<GaRun> {
    let mut fitness = evaluate_all(&population, fitness_fn, config.parallel)?;
    let mut trace = vec![fitness[argmax(&fitness)]];

    let termination = loop {
        let best = *trace.last().expect("non-empty trace");
        if config.stop.reach_zero && best >= 0.0 {
            break Termination::ReachZero;
        }
        if let Some(k) = config.stop.saturate.filter(|&k| k > 0) {
            if trace.len() > k && trace[trace.len() - 1 - k] == best {
                break Termination::Saturate;
            }
        }
        if trace.len() >= config.generations {
            break Termination::MaxGenerations;
        }

        let parents: Vec<usize> = (0..config.parents_mating)
            .map(|_| tournament_select(&fitness, config.tournament_size, &mut rng))
            .collect();
        let kept: Vec<usize> = match config.keep_mode {
            KeepMode::Elitism => ranked(&fitness).into_iter().take(config.keep_parents).collect(),
            KeepMode::SelectedParents => {
                let mut sel = parents.clone();
                sel.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
                sel.into_iter().take(config.keep_parents).collect()
            }
        };

        let n_offspring = config.population - kept.len();
        let mut offspring = Vec::with_capacity(n_offspring + 1);
        let mut pair = 0;
        while offspring.len() < n_offspring {
            let a = &population[parents[pair % parents.len()]];
            let b = &population[parents[(pair + 1) % parents.len()]];
            let (c1, c2) = single_point_crossover(a, b, &mut rng)?;
            offspring.push(mutate(&c1, config.mutation_fraction, &mut rng));
            if offspring.len() < n_offspring {
                offspring.push(mutate(&c2, config.mutation_fraction, &mut rng));
            }
            pair += 1;
        }
        let offspring_fitness = evaluate_all(&offspring, fitness_fn, config.parallel)?;

        let mut next = Vec::with_capacity(config.population);
        let mut next_fitness = Vec::with_capacity(config.population);
        for &i in &kept {
            next.push(population[i].clone());
            next_fitness.push(fitness[i]);
        }
        next.extend(offspring);
        next_fitness.extend(offspring_fitness);
        population = next;
        fitness = next_fitness;
        trace.push(fitness[argmax(&fitness)]);
    };

    let best_index = argmax(&fitness);
    Ok(GaRun {
        best: population[best_index].clone(),
        best_fitness: fitness[best_index],
        population,
        fitness,
        trace,
        termination,
    })
}
