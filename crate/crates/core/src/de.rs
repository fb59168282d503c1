//! Differential evolution over fixed-length real vectors in `[0, 1]^n`.
//!
//! The engine is generic over the fitness function (minimization). A
//! genome is a vector of random keys; routing callers recover a visiting
//! order by sorting the keys. Operators:
//!
//! * mutation: `base + F_M * (x_r1 - x_r2)` where the base is either the
//!   third random member (`base-r3`) or a lambda-weighted average of all
//!   three (`weighted-donor`),
//! * crossover: a binomial mask with one forced index picks mutant
//!   genes, each picked gene `j` is then blended `alpha_j * mutant +
//!   (1 - alpha_j) * parent + e_j` with optional Gaussian noise `e_j`,
//! * selection: greedy one-to-one survival, ties keep the parent.
//!
//! All random draws for a generation come from one deterministic stream
//! before fitness evaluations are dispatched, so concurrent evaluation
//! never changes the outcome.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A candidate solution: one key per decision position, clamped to
/// `[0, 1]` after every operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub keys: Vec<f64>,
}

impl Genome {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    fn clamp(&mut self) {
        for k in &mut self.keys {
            *k = k.clamp(0.0, 1.0);
        }
    }
}

/// Base-vector choice for mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DonorMode {
    /// The base is the third random member.
    BaseR3,
    /// The base is a lambda-weighted average of the three members.
    WeightedDonor,
}

/// Engine parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// Amplification of the difference vector, in `[0, 1.2]`.
    pub mutation_factor: f64,
    /// Per-gene probability of taking the mutant gene, in `[0, 1]`.
    pub crossover_factor: f64,
    /// Standard deviation of the blend noise; zero disables it.
    pub blend_noise_sigma: f64,
    pub donor_mode: DonorMode,
    /// Record the best genome every this many generations (0 = never).
    pub snapshot_interval: usize,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            population_size: 60,
            max_generations: 300,
            mutation_factor: 0.7,
            crossover_factor: 0.9,
            blend_noise_sigma: 0.0,
            donor_mode: DonorMode::BaseR3,
            snapshot_interval: 50,
            seed: 0,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 {
            return Err(Error::validation(
                "population_size",
                "mutation needs three members distinct from the target; use at least 4",
            ));
        }
        if !(0.0..=1.2).contains(&self.mutation_factor) {
            return Err(Error::validation("mutation_factor", "must lie in [0, 1.2]"));
        }
        if !(0.0..=1.0).contains(&self.crossover_factor) {
            return Err(Error::validation("crossover_factor", "must lie in [0, 1]"));
        }
        if !self.blend_noise_sigma.is_finite() || self.blend_noise_sigma < 0.0 {
            return Err(Error::validation(
                "blend_noise_sigma",
                "must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

/// Fitness trace of one evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub best_cost: f64,
    pub mean_cost: f64,
}

/// Convergence record: per-generation population stats (index 0 is the
/// initial population), periodic best-genome snapshots, and the final
/// best solution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub generations: Vec<GenerationStats>,
    pub snapshot_interval: usize,
    pub snapshots: Vec<(usize, Genome)>,
    pub best_cost: f64,
    pub best: Genome,
}

/// Draw an initial population of `population_size` genomes with keys
/// i.i.d. uniform on `[0, 1]`, seeded by the config.
pub fn init_population(config: &DeConfig, dim: usize) -> Result<Vec<Genome>> {
    config.validate()?;
    if dim == 0 {
        return Err(Error::validation("dim", "genome length must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok(init_with_rng(config, dim, &mut rng))
}

fn init_with_rng(config: &DeConfig, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Genome> {
    (0..config.population_size)
        .map(|_| Genome {
            keys: (0..dim).map(|_| rng.random::<f64>()).collect(),
        })
        .collect()
}

/// Componentwise `base + factor * (a - b)`, clamped to `[0, 1]`.
pub fn mutant_from(base: &[f64], a: &[f64], b: &[f64], factor: f64) -> Genome {
    let keys = base
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&base_k, (&a_k, &b_k))| (base_k + factor * (a_k - b_k)).clamp(0.0, 1.0))
        .collect();
    Genome { keys }
}

/// Produce a mutant for population slot `target`: three distinct other
/// members are drawn, the donor base is formed per the config, and the
/// scaled difference of the first two is added.
pub fn mutate(population: &[Genome], target: usize, config: &DeConfig, rng: &mut ChaCha8Rng) -> Genome {
    debug_assert!(population.len() >= 4);
    let mut picked = [target; 3];
    for slot in 0..3 {
        loop {
            let candidate = rng.random_range(0..population.len());
            if candidate != target && !picked[..slot].contains(&candidate) {
                picked[slot] = candidate;
                break;
            }
        }
    }
    let [r1, r2, r3] = picked;
    match config.donor_mode {
        DonorMode::BaseR3 => mutant_from(
            &population[r3].keys,
            &population[r1].keys,
            &population[r2].keys,
            config.mutation_factor,
        ),
        DonorMode::WeightedDonor => {
            let lambda: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let total: f64 = lambda.iter().sum();
            let dim = population[target].len();
            let mut base = vec![0.0; dim];
            for (weight, &member) in lambda.iter().zip(&picked) {
                let share = if total > 0.0 { weight / total } else { 1.0 / 3.0 };
                for (acc, &k) in base.iter_mut().zip(&population[member].keys) {
                    *acc += share * k;
                }
            }
            mutant_from(
                &base,
                &population[r1].keys,
                &population[r2].keys,
                config.mutation_factor,
            )
        }
    }
}

/// The deterministic core of crossover: genes where `mask` is set take
/// the blend `alpha_j * mutant + (1 - alpha_j) * parent + noise_j`,
/// clamped; all other genes keep the parent value bit-exactly.
pub fn crossover_blend(
    parent: &[f64],
    mutant: &[f64],
    mask: &[bool],
    alpha: &[f64],
    noise: &[f64],
) -> Genome {
    let keys = parent
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            if mask[j] {
                (alpha[j] * mutant[j] + (1.0 - alpha[j]) * p + noise[j]).clamp(0.0, 1.0)
            } else {
                p
            }
        })
        .collect();
    Genome { keys }
}

/// Binomial crossover with one forced index, followed by the arithmetic
/// blend toward the mutant on the selected genes.
pub fn crossover(
    parent: &Genome,
    mutant: &Genome,
    config: &DeConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Genome> {
    let dim = parent.len();
    if mutant.len() != dim {
        return Err(Error::validation(
            "mutant",
            format!("length {} does not match parent length {}", mutant.len(), dim),
        ));
    }
    let forced = rng.random_range(0..dim);
    let mask: Vec<bool> = (0..dim)
        .map(|j| {
            let u: f64 = rng.random();
            j == forced || u < config.crossover_factor
        })
        .collect();
    let alpha: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
    let noise = if config.blend_noise_sigma > 0.0 {
        let normal = Normal::new(0.0, config.blend_noise_sigma).expect("sigma validated");
        (0..dim).map(|_| normal.sample(rng)).collect()
    } else {
        vec![0.0; dim]
    };
    Ok(crossover_blend(&parent.keys, &mutant.keys, &mask, &alpha, &noise))
}

fn sanitize(cost: f64) -> f64 {
    if cost.is_finite() { cost } else { f64::INFINITY }
}

/// Greedy one-to-one survival: the genome with the lower fitness wins,
/// ties keep the parent, non-finite fitness always loses.
pub fn select<F>(parent: Genome, trial: Genome, fitness: F) -> Result<Genome>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let parent_cost = sanitize(fitness(&parent.keys)?);
    let trial_cost = sanitize(fitness(&trial.keys)?);
    Ok(if trial_cost < parent_cost { trial } else { parent })
}

/// Run the full evolution loop. See [`optimize_seeded`].
pub fn optimize<F>(fitness: F, config: &DeConfig, dim: usize) -> Result<(Genome, EvolutionTrace)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    optimize_seeded(fitness, config, dim, &[], |_, _, _, _| {})
}

/// Run the evolution loop with optional injected genomes and a
/// per-generation observer.
///
/// `injected` genomes replace the first members of the random initial
/// population (clamped), which lets callers warm-start from a known
/// solution; elitist selection then never loses it. The observer is
/// invoked once per recorded generation with `(generation, best genome,
/// best cost, mean cost)`.
///
/// Population fitness is evaluated in parallel; all stochastic draws
/// happen on one stream before evaluations are dispatched, so the
/// result is a pure function of `(config, injected, fitness)`.
pub fn optimize_seeded<F, O>(
    fitness: F,
    config: &DeConfig,
    dim: usize,
    injected: &[Genome],
    mut observer: O,
) -> Result<(Genome, EvolutionTrace)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    O: FnMut(usize, &Genome, f64, f64),
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::validation("dim", "genome length must be at least 1"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population = init_with_rng(config, dim, &mut rng);
    for (slot, genome) in population.iter_mut().zip(injected) {
        if genome.len() != dim {
            return Err(Error::validation(
                "injected",
                format!("injected genome length {} does not match dim {}", genome.len(), dim),
            ));
        }
        let mut g = genome.clone();
        g.clamp();
        *slot = g;
    }

    let mut costs = evaluate_all(&fitness, &population, 0)?;
    let mut trace = EvolutionTrace {
        generations: Vec::with_capacity(config.max_generations + 1),
        snapshot_interval: config.snapshot_interval,
        snapshots: Vec::new(),
        best_cost: f64::INFINITY,
        best: population[0].clone(),
    };
    record_generation(&mut trace, config, 0, &population, &costs, &mut observer);

    for generation in 1..=config.max_generations {
        let mut trials = Vec::with_capacity(population.len());
        for target in 0..population.len() {
            let mutant = mutate(&population, target, config, &mut rng);
            let trial = crossover(&population[target], &mutant, config, &mut rng)?;
            trials.push(trial);
        }
        let trial_costs = evaluate_all(&fitness, &trials, generation)?;
        for (target, trial) in trials.into_iter().enumerate() {
            if trial_costs[target] < costs[target] {
                population[target] = trial;
                costs[target] = trial_costs[target];
            }
        }
        record_generation(&mut trace, config, generation, &population, &costs, &mut observer);
    }

    let best_index = argmin(&costs);
    trace.best_cost = costs[best_index];
    trace.best = population[best_index].clone();
    Ok((population[best_index].clone(), trace))
}

fn evaluate_all<F>(fitness: &F, genomes: &[Genome], generation: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let raw: Vec<Result<f64>> = genomes.par_iter().map(|g| fitness(&g.keys)).collect();
    let mut costs = Vec::with_capacity(raw.len());
    for (individual, outcome) in raw.into_iter().enumerate() {
        match outcome {
            Ok(cost) => costs.push(sanitize(cost)),
            Err(e) => {
                return Err(Error::Fitness {
                    generation,
                    individual,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(costs)
}

fn argmin(costs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = i;
        }
    }
    best
}

fn record_generation<O>(
    trace: &mut EvolutionTrace,
    config: &DeConfig,
    generation: usize,
    population: &[Genome],
    costs: &[f64],
    observer: &mut O,
) where
    O: FnMut(usize, &Genome, f64, f64),
{
    let best_index = argmin(costs);
    let best_cost = costs[best_index];
    let mean_cost = costs.iter().sum::<f64>() / costs.len() as f64;
    trace.generations.push(GenerationStats { best_cost, mean_cost });
    if config.snapshot_interval > 0
        && (generation.is_multiple_of(config.snapshot_interval) || generation == config.max_generations)
    {
        trace.snapshots.push((generation, population[best_index].clone()));
    }
    observer(generation, &population[best_index], best_cost, mean_cost);
}
