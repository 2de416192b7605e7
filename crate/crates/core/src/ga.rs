//! Real-coded genetic algorithm over angle vectors in `[0, 2 pi)^n`.

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logq::random_angle;
use crate::rng::substream;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossoverType {
    /// Each gene is swapped between the two parents with probability 1/2.
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    /// Number of generations; there is no early stopping.
    pub max_iterations: usize,
    pub population_size: usize,
    pub mutation_probability: f64,
    pub elite_ratio: f64,
    pub crossover_probability: f64,
    pub parents_portion: f64,
    pub crossover_type: CrossoverType,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            max_iterations: 50,
            population_size: 20,
            mutation_probability: 0.1,
            elite_ratio: 0.05,
            crossover_probability: 0.5,
            parents_portion: 0.3,
            crossover_type: CrossoverType::Uniform,
            seed: 0,
        }
    }
}

impl GaParams {
    /// Settings used for instances of `n_tours` tours: 50 generations of 20
    /// up to 32 tours, 100 generations of 40 beyond.
    pub fn for_instance_size(n_tours: usize) -> Self {
        if n_tours <= 32 {
            GaParams::default()
        } else {
            GaParams {
                max_iterations: 100,
                population_size: 40,
                ..GaParams::default()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("mutation_probability", self.mutation_probability),
            ("elite_ratio", self.elite_ratio),
            ("crossover_probability", self.crossover_probability),
            ("parents_portion", self.parents_portion),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.population_size < 2 {
            return Err(Error::Parameter("population_size must be at least 2".into()));
        }
        Ok(())
    }

    /// `ceil(elite_ratio * population)`, at least one when the ratio is
    /// positive.
    pub fn elite_count(&self) -> usize {
        if self.elite_ratio <= 0.0 {
            return 0;
        }
        ((self.elite_ratio * self.population_size as f64).ceil() as usize)
            .clamp(1, self.population_size)
    }

    /// Size of the top slice parents are drawn from.
    pub fn parent_pool(&self) -> usize {
        ((self.parents_portion * self.population_size as f64).ceil() as usize)
            .clamp(2, self.population_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub genes: Vec<T>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome<T> {
    pub best_theta: Vec<T>,
    pub best_value: T,
    /// Best value after initialization and after every generation.
    pub history: Vec<T>,
    pub evaluations: usize,
}

fn by_value<T: Real>(a: &Individual<T>, b: &Individual<T>) -> Ordering {
    a.value.partial_cmp(&b.value).unwrap_or(Ordering::Equal)
}

fn evaluate<T: Real, F>(objective: &mut F, genes: &[T], generation: usize) -> Result<T>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let v = objective(genes).map_err(|e| Error::Objective {
        generation,
        source: Box::new(e),
    })?;
    Ok(if v.is_nan() { T::infinity() } else { v })
}

/// Linear rank weights over the parent pool: the best of `pool` gets weight
/// `pool`, the worst weight 1.
fn select_parent(pool: usize, rng: &mut impl Rng) -> usize {
    let total = pool * (pool + 1) / 2;
    let mut ticket = rng.random_range(0..total);
    for rank in 0..pool {
        let weight = pool - rank;
        if ticket < weight {
            return rank;
        }
        ticket -= weight;
    }
    pool - 1
}

/// Produces the next generation from a population sorted best-first. The
/// result is sorted best-first as well; elites keep their recorded values.
pub fn evolve_generation<T: Real, F>(
    population: &[Individual<T>],
    params: &GaParams,
    objective: &mut F,
    rng: &mut ChaCha8Rng,
    generation: usize,
) -> Result<Vec<Individual<T>>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let size = params.population_size;
    let pool = params.parent_pool().min(population.len());
    let mut next: Vec<Individual<T>> = population[..params.elite_count().min(population.len())].to_vec();

    let mut children: Vec<Vec<T>> = Vec::with_capacity(size);
    while next.len() + children.len() < size {
        let a = &population[select_parent(pool, rng)].genes;
        let b = &population[select_parent(pool, rng)].genes;
        let (mut c1, mut c2) = (a.clone(), b.clone());
        if rng.random_bool(params.crossover_probability) {
            match params.crossover_type {
                CrossoverType::Uniform => {
                    for (g1, g2) in c1.iter_mut().zip(c2.iter_mut()) {
                        if rng.random_bool(0.5) {
                            std::mem::swap(g1, g2);
                        }
                    }
                }
            }
        }
        for child in [&mut c1, &mut c2] {
            for gene in child.iter_mut() {
                if rng.random_bool(params.mutation_probability) {
                    *gene = random_angle(rng);
                }
            }
        }
        children.push(c1);
        if next.len() + children.len() < size {
            children.push(c2);
        }
    }
    for genes in children {
        let value = evaluate(objective, &genes, generation)?;
        next.push(Individual { genes, value });
    }
    next.sort_by(by_value);
    Ok(next)
}

/// Minimizes `objective` over `[0, 2 pi)^n_vars`.
pub fn run_ga<T: Real, F>(mut objective: F, n_vars: usize, params: &GaParams) -> Result<GaOutcome<T>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    params.validate()?;
    if n_vars == 0 {
        return Err(Error::Parameter("n_vars must be at least 1".into()));
    }
    let mut rng = substream(params.seed, "ga", &[]);
    let mut population = Vec::with_capacity(params.population_size);
    for _ in 0..params.population_size {
        let genes: Vec<T> = (0..n_vars).map(|_| random_angle(&mut rng)).collect();
        let value = evaluate(&mut objective, &genes, 0)?;
        population.push(Individual { genes, value });
    }
    population.sort_by(by_value);
    let mut evaluations = params.population_size;
    let mut history = vec![population[0].value];
    let per_generation = params.population_size - params.elite_count();
    for generation in 1..=params.max_iterations {
        population = evolve_generation(&population, params, &mut objective, &mut rng, generation)?;
        evaluations += per_generation;
        history.push(population[0].value);
    }
    let best = population.swap_remove(0);
    Ok(GaOutcome {
        best_theta: best.genes,
        best_value: best.value,
        history,
        evaluations,
    })
}
