//! Genetic algorithm over complete, feasible layouts.
//!
//! Every individual is a full placement of the instance that breaks no
//! stacking rule. The operators keep it that way: the initial population is
//! built from [`feasible_positions`](crate::constraints::feasible_positions)
//! choices, crossover copies a corner region of one parent and repairs the
//! rest, and mutation only keeps swaps that stay feasible.
//!
//! A generation draws `N` offspring (roulette selection of two parents,
//! crossover, mutation), merges them with the `N` parents, and keeps the best
//! `N`. The run stops once the best fitness has not strictly improved for
//! `stall_window` generations.
//!
//! Each offspring trial of a generation owns a ChaCha stream derived from the
//! master generator and its trial index, so trials run in parallel and the
//! result does not depend on thread scheduling.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::constraints::{feasible_clean, fits_clean, is_clean, validate_layout};
use crate::fitness::{layout_fitness, FitnessError, FitnessMode, FitnessValue};
use crate::yard::{Container, ContainerId, ContainerType, Coord, Instance, Layout};

pub const MAX_RESTARTS: u32 = 1_000;
pub const MAX_SWAP_ATTEMPTS: u32 = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct GaConfig {
    pub pop_size: usize,
    pub stall_window: u32,
    /// Hard cap on generations; `None` means `10 × stall_window × pop_size`.
    pub max_generations: Option<u32>,
    pub p_cross: f64,
    pub p_mut: f64,
    pub seed: u64,
    pub mode: FitnessMode,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pop_size: 30,
            stall_window: 20,
            max_generations: None,
            p_cross: 0.70,
            p_mut: 0.20,
            seed: 0,
            mode: FitnessMode::Blocking,
        }
    }
}

impl GaConfig {
    pub fn with_pop_size(mut self, n: usize) -> Self {
        self.pop_size = n;
        self
    }

    pub fn with_stall_window(mut self, n: u32) -> Self {
        self.stall_window = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: FitnessMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn max_generations(&self) -> u32 {
        self.max_generations
            .unwrap_or_else(|| 10u32.saturating_mul(self.stall_window).saturating_mul(self.pop_size as u32))
    }

    pub fn validate(&self) -> Result<(), GaError> {
        if self.pop_size < 2 {
            return Err(GaError::InvalidConfig(format!("population size must be >= 2, got {}", self.pop_size)));
        }
        if self.stall_window < 1 {
            return Err(GaError::InvalidConfig("stall window must be >= 1".into()));
        }
        if self.max_generations == Some(0) {
            return Err(GaError::InvalidConfig("max generations must be >= 1".into()));
        }
        for (name, p) in [("crossover", self.p_cross), ("mutation", self.p_mut)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GaError::InvalidConfig(format!("{name} probability {p} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("could not build a feasible layout after {restarts} restarts; the instance is probably unsatisfiable")]
    GenerationFailed { restarts: u32 },
    #[error("seed layout rejected: {0}")]
    InvalidSeed(String),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
}

/// A complete feasible layout with its cached fitness.
#[derive(Clone, Debug)]
pub struct Individual {
    layout: Layout,
    fitness: FitnessValue,
    // Generation of birth and index within it; tie-breakers for replacement.
    born: u32,
    serial: u32,
}

impl Individual {
    pub fn new(layout: Layout, instance: &Instance, mode: FitnessMode) -> Result<Self, FitnessError> {
        let fitness = layout_fitness(&layout, instance, mode)?;
        Ok(Individual {
            layout,
            fitness,
            born: 0,
            serial: 0,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn fitness(&self) -> FitnessValue {
        self.fitness
    }

    pub fn into_layout(self) -> Layout {
        self.layout
    }

    fn stamped(mut self, born: u32, serial: u32) -> Self {
        self.born = born;
        self.serial = serial;
        self
    }

    fn rank(&self, other: &Self) -> Ordering {
        self.fitness
            .total_cmp(&other.fitness)
            .then(self.born.cmp(&other.born))
            .then(self.serial.cmp(&other.serial))
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub best: Individual,
    pub generations_run: u32,
    /// Best fitness of the initial population followed by the best after
    /// each generation.
    pub history: Vec<f64>,
    pub elapsed: Duration,
}

impl RunResult {
    pub fn initial_fitness(&self) -> f64 {
        self.history[0]
    }

    pub fn final_fitness(&self) -> f64 {
        self.best.fitness.value()
    }
}

/// Independent generator for trial `index` under `key`.
pub fn substream(key: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

fn pick<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.gen_range(0..n as u64) as usize
}

/// Placement priority: the most constrained types go first.
fn difficulty(t: ContainerType) -> u8 {
    match t {
        ContainerType::Reefer => 0,
        ContainerType::OpenSide => 1,
        ContainerType::Tank => 2,
        ContainerType::OpenTop => 3,
        ContainerType::Empty => 4,
        ContainerType::Dry => 5,
    }
}

fn hardest_first<R: Rng + ?Sized>(containers: &mut [Container], rng: &mut R) {
    containers.shuffle(rng);
    containers.sort_by_key(|c| difficulty(c.ctype));
}

/// Places `containers` one by one on uniformly chosen feasible cells.
/// Returns `false` as soon as one has nowhere to go.
fn complete_randomly<R: Rng + ?Sized>(layout: &mut Layout, containers: &[Container], rng: &mut R) -> bool {
    for c in containers {
        let options = feasible_clean(layout, c.ctype);
        if options.is_empty() {
            return false;
        }
        let at = options[pick(rng, options.len())];
        layout.place(*c, at).expect("feasible cell is empty");
    }
    true
}

/// A complete layout with no violations, built by placing containers in
/// hardest-first order on uniformly random feasible cells. A dead end
/// restarts the construction from scratch.
pub fn random_feasible_layout<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Result<Layout, GaError> {
    let empty = Layout::new(*instance.config()).map_err(|e| GaError::InvalidConfig(e.to_string()))?;
    let mut order = instance.containers().to_vec();
    for _ in 0..=MAX_RESTARTS {
        hardest_first(&mut order, rng);
        let mut layout = empty.clone();
        if complete_randomly(&mut layout, &order, rng) {
            return Ok(layout);
        }
    }
    Err(GaError::GenerationFailed { restarts: MAX_RESTARTS })
}

/// Fitness-proportional selection with weight `1 / (1 + fitness)`.
///
/// # Panics
///
/// If `population` is empty.
pub fn roulette_select<'a, R: Rng + ?Sized>(population: &'a [Individual], rng: &mut R) -> &'a Individual {
    assert!(!population.is_empty(), "roulette selection over an empty population");
    let weight = |i: &Individual| 1.0 / (1.0 + i.fitness.value());
    let total: f64 = population.iter().map(weight).sum();
    let mut ticket = rng.gen::<f64>() * total;
    for ind in population {
        ticket -= weight(ind);
        if ticket < 0.0 {
            return ind;
        }
    }
    // Rounding can leave a sliver past the last weight.
    population.last().expect("non-empty")
}

/// Crossover at a random corner point `(px, py, pz)`.
///
/// The child keeps `parent1`'s containers in the region `x <= px, y <= py,
/// z <= pz` of every block, then takes `parent2`'s cell for each remaining
/// container where that cell is outside the region, free and legal. Whatever
/// is left is placed on random feasible cells, hardest first. If that repair
/// dead-ends, the fitter parent is returned instead. Without a crossover
/// (probability `1 - p_cross`) the result is a copy of `parent1`.
pub fn crossover<R: Rng + ?Sized>(
    parent1: &Individual,
    parent2: &Individual,
    instance: &Instance,
    config: &GaConfig,
    rng: &mut R,
) -> Individual {
    if !rng.gen_bool(config.p_cross) {
        return parent1.clone();
    }
    let cfg = *instance.config();
    let px = rng.gen_range(1..=cfg.n1);
    let py = rng.gen_range(1..=cfg.n2);
    let pz = rng.gen_range(1..=cfg.n3);
    let in_region = |p: Coord| p.x <= px && p.y <= py && p.z <= pz;

    let mut child = Layout::new(cfg).expect("instance config is valid");
    for (p, c) in parent1.layout.occupied() {
        if in_region(p) {
            child.place(*c, p).expect("parent cells are distinct");
        }
    }
    debug_assert!(is_clean(&child), "a corner region of a feasible layout is feasible");

    for (p, c) in parent2.layout.occupied() {
        if !in_region(p) && child.position_of(c.id).is_none() && fits_clean(&child, c.ctype, p) {
            child.place(*c, p).expect("checked free");
        }
    }

    let mut rest: Vec<Container> = instance
        .containers()
        .iter()
        .filter(|c| child.position_of(c.id).is_none())
        .copied()
        .collect();
    hardest_first(&mut rest, rng);
    if !complete_randomly(&mut child, &rest, rng) {
        let fitter = if parent2.fitness.total_cmp(&parent1.fitness) == Ordering::Less {
            parent2
        } else {
            parent1
        };
        return fitter.clone();
    }
    Individual::new(child, instance, config.mode).expect("child places every container")
}

/// Swap mutation: with probability `p_mut`, exchange two distinct random
/// containers, keeping the first swap that leaves the layout feasible (at
/// most [`MAX_SWAP_ATTEMPTS`] tries).
pub fn mutate<R: Rng + ?Sized>(individual: Individual, instance: &Instance, config: &GaConfig, rng: &mut R) -> Individual {
    if !rng.gen_bool(config.p_mut) {
        return individual;
    }
    let ids: Vec<ContainerId> = individual.layout.placements().map(|(id, _)| id).collect();
    if ids.len() < 2 {
        return individual;
    }
    let mut layout = individual.layout.clone();
    for _ in 0..MAX_SWAP_ATTEMPTS {
        let a = pick(rng, ids.len());
        let mut b = pick(rng, ids.len() - 1);
        if b >= a {
            b += 1;
        }
        layout.swap(ids[a], ids[b]).expect("both placed");
        if is_clean(&layout) {
            return Individual::new(layout, instance, config.mode).expect("swap keeps the layout complete");
        }
        layout.swap(ids[a], ids[b]).expect("both placed");
    }
    individual
}

fn sort_population(population: &mut [Individual]) {
    population.sort_by(Individual::rank);
}

/// One generation of `N` offspring followed by elitist `2N → N` truncation.
/// Ties in fitness keep the older individual, then the earlier-built one.
pub fn evolve_generation<R: Rng + ?Sized>(
    population: Vec<Individual>,
    instance: &Instance,
    config: &GaConfig,
    generation: u32,
    rng: &mut R,
) -> Vec<Individual> {
    let n = population.len();
    let key: u64 = rng.gen();
    let offspring: Vec<Individual> = (0..n)
        .into_par_iter()
        .map(|t| {
            let mut trial = substream(key, t as u64);
            let p1 = roulette_select(&population, &mut trial);
            let p2 = roulette_select(&population, &mut trial);
            let child = crossover(p1, p2, instance, config, &mut trial);
            mutate(child, instance, config, &mut trial).stamped(generation, t as u32)
        })
        .collect();
    let mut merged = population;
    merged.extend(offspring);
    sort_population(&mut merged);
    merged.truncate(n);
    merged
}

fn check_population(population: &[Individual], instance: &Instance) -> bool {
    population.iter().all(|i| {
        i.layout.len() == instance.len()
            && validate_layout(&i.layout, instance).map(|v| v.is_empty()).unwrap_or(false)
    })
}

/// Runs the GA from a random initial population.
pub fn run(instance: &Instance, config: &GaConfig) -> Result<RunResult, GaError> {
    run_with_initial(instance, config, Vec::new())
}

/// Runs the GA with `seeds` as the first members of the initial population;
/// the rest is generated randomly. Seeds must be complete and feasible.
pub fn run_with_initial(instance: &Instance, config: &GaConfig, seeds: Vec<Layout>) -> Result<RunResult, GaError> {
    config.validate()?;
    if seeds.len() > config.pop_size {
        return Err(GaError::InvalidSeed(format!(
            "{} seed layouts for a population of {}",
            seeds.len(),
            config.pop_size
        )));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut population = Vec::with_capacity(config.pop_size);
    for (i, layout) in seeds.into_iter().enumerate() {
        let violations = validate_layout(&layout, instance).map_err(|e| GaError::InvalidSeed(e.to_string()))?;
        if let Some(v) = violations.first() {
            return Err(GaError::InvalidSeed(v.to_string()));
        }
        population.push(Individual::new(layout, instance, config.mode)?.stamped(0, i as u32));
    }
    let key: u64 = rng.gen();
    let filled = population.len();
    let fresh: Vec<Individual> = (filled..config.pop_size)
        .into_par_iter()
        .map(|i| {
            let mut stream = substream(key, i as u64);
            let layout = random_feasible_layout(instance, &mut stream)?;
            Ok(Individual::new(layout, instance, config.mode)?.stamped(0, i as u32))
        })
        .collect::<Result<_, GaError>>()?;
    population.extend(fresh);
    sort_population(&mut population);

    let mut best = population[0].fitness;
    let mut history = vec![best.value()];
    let mut stalled = 0;
    let mut generations = 0;
    let cap = config.max_generations();
    while stalled < config.stall_window && generations < cap {
        generations += 1;
        population = evolve_generation(population, instance, config, generations, &mut rng);
        debug_assert!(check_population(&population, instance), "infeasible individual in generation {generations}");
        let leader = population[0].fitness;
        if leader.total_cmp(&best) == Ordering::Less {
            best = leader;
            stalled = 0;
        } else {
            stalled += 1;
        }
        history.push(leader.value());
    }

    Ok(RunResult {
        best: population.swap_remove(0),
        generations_run: generations,
        history,
        elapsed: start.elapsed(),
    })
}
