//! Generational loop with genealogy recording and diversity-shaped selection.
//!
//! One generation:
//!
//! 1. each current member is mutated with probability `mutation_prob`
//!    (genome mutation plus one trash-bit flip);
//! 2. each current member recombines with probability `crossover_prob`
//!    with a partner picked by tournament on `f'` among the other members
//!    (genome and trash uniform crossover);
//! 3. `immigrants_per_gen` random individuals are created;
//! 4. `f'` is evaluated over the pool of current members and all newcomers;
//! 5. the `population_size` best by `f'` survive, ties going to the older node.
//!
//! All randomness of a run comes from one ChaCha8 stream seeded by the run
//! seed and is consumed in exactly the order above. Per-generation statistics
//! draw their probe sample from a second, independent stream so observing a run
//! never changes it.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diversity::{DistanceContext, DiversityConfig, DiversityMetric};
use crate::error::{Error, Result};
use crate::genealogy::{AncestryCache, GenealogyGraph, NodeId, OpKind};
use crate::trash::{TrashVector, DEFAULT_TAU};

/// An optimization problem: genome representation, variation operators and fitness.
pub trait Problem {
    type Genome: Clone + PartialEq + core::fmt::Debug;

    fn random_genome<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Genome;

    fn mutate<R: Rng + ?Sized>(&self, genome: &Self::Genome, rng: &mut R) -> Self::Genome;

    fn crossover<R: Rng + ?Sized>(
        &self,
        a: &Self::Genome,
        b: &Self::Genome,
        rng: &mut R,
    ) -> Self::Genome;

    /// Raw fitness, higher is better. Must be deterministic.
    fn fitness(&self, genome: &Self::Genome) -> f64;

    /// Problem-specific genome distance.
    fn distance(&self, a: &Self::Genome, b: &Self::Genome) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual<G> {
    pub node: NodeId,
    pub genome: G,
    pub trash: TrashVector,
    /// Computed once at birth.
    pub raw_fitness: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub population_size: usize,
    pub generations: u32,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub tournament_size: usize,
    pub immigrants_per_gen: usize,
    pub tau: usize,
    pub diversity: DiversityConfig,
    /// Members drawn each generation to measure population diversity.
    pub probe_size: usize,
    /// Metric for the diversity statistic. Independent of the selection metric
    /// so that traces of different variants are directly comparable.
    pub probe_metric: DiversityMetric,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            population_size: 20,
            generations: 1000,
            mutation_prob: 0.2,
            crossover_prob: 0.3,
            tournament_size: 2,
            immigrants_per_gen: 2,
            tau: DEFAULT_TAU,
            diversity: DiversityConfig::default(),
            probe_size: 5,
            probe_metric: DiversityMetric::TrashBits,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::invalid(
                "engine.population_size",
                "must be at least 1",
            ));
        }
        if self.population_size <= self.immigrants_per_gen {
            return Err(Error::invalid(
                "engine.immigrants_per_gen",
                "must be smaller than the population size",
            ));
        }
        for (name, p) in [
            ("engine.mutation_prob", self.mutation_prob),
            ("engine.crossover_prob", self.crossover_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(name, "must be a probability in [0, 1]"));
            }
        }
        if self.tournament_size == 0 {
            return Err(Error::invalid(
                "engine.tournament_size",
                "must be at least 1",
            ));
        }
        if self.tau == 0 {
            return Err(Error::invalid("engine.tau", "must be at least 1"));
        }
        self.diversity.validate()
    }
}

/// Statistics of one generation, computed on raw fitness only.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats<G> {
    pub generation: u32,
    pub mean_raw_fitness: f64,
    pub best_raw_fitness: f64,
    /// Mean pairwise probe-metric distance within a random probe sample.
    pub mean_probe_diversity: f64,
    pub best_genome: G,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTrace<G> {
    pub rows: Vec<GenerationStats<G>>,
}

impl<G> EvolutionTrace<G> {
    pub fn final_row(&self) -> Option<&GenerationStats<G>> {
        self.rows.last()
    }
}

/// Draws `size` distinct members of `pool` (fewer if the pool is smaller) and
/// returns the one with the highest score, ties going to the smaller node id.
pub fn tournament_select<'a, T, R: Rng + ?Sized>(
    pool: &'a [T],
    size: usize,
    score: impl Fn(&T) -> (f64, NodeId),
    rng: &mut R,
) -> Result<&'a T> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let k = size.clamp(1, pool.len());
    rand::seq::index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| &pool[i])
        .min_by(|a, b| rank(score(a), score(b)))
        .ok_or(Error::EmptyPool)
}

/// Ordering that puts higher fitness first and breaks ties by older node.
fn rank((fa, na): (f64, NodeId), (fb, nb): (f64, NodeId)) -> Ordering {
    fb.total_cmp(&fa).then(na.cmp(&nb))
}

pub struct Engine<P: Problem> {
    config: EngineConfig,
    problem: P,
    graph: GenealogyGraph,
    ancestry: AncestryCache,
    population: Vec<Individual<P::Genome>>,
    /// `f'` of each member, aligned with `population`.
    shaped: Vec<f64>,
    generation: u32,
    rng: ChaCha8Rng,
    probe_rng: ChaCha8Rng,
}

impl<P: Problem> Engine<P> {
    /// Creates the initial population of genesis individuals and evaluates it.
    pub fn new(config: EngineConfig, problem: P, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probe_rng = ChaCha8Rng::seed_from_u64(seed);
        probe_rng.set_stream(1);

        let mut graph = GenealogyGraph::new();
        let mut population = Vec::with_capacity(config.population_size);
        for _ in 0..config.population_size {
            population.push(spawn(&problem, &mut graph, config.tau, 0, &mut rng)?);
        }

        let mut engine = Engine {
            config,
            problem,
            graph,
            ancestry: AncestryCache::new(),
            population,
            shaped: Vec::new(),
            generation: 0,
            rng,
            probe_rng,
        };
        engine.shaped = engine.evaluate(&engine.population.clone())?;
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn problem(&self) -> &P {
        &self.problem
    }

    pub fn graph(&self) -> &GenealogyGraph {
        &self.graph
    }

    pub fn into_graph(self) -> GenealogyGraph {
        self.graph
    }

    pub fn population(&self) -> &[Individual<P::Genome>] {
        &self.population
    }

    /// `f'` values from the last evaluation, aligned with [`Self::population`].
    pub fn shaped_fitness(&self) -> &[f64] {
        &self.shaped
    }

    /// Number of completed generations.
    pub fn generation(&self) -> u32 {
        self.generation
    }

    /// Advances one generation.
    pub fn step(&mut self) -> Result<()> {
        let generation = self.generation + 1;
        let n = self.population.len();
        let cfg = &self.config;
        let mut newcomers = Vec::new();

        for parent in &self.population {
            if self.rng.random_bool(cfg.mutation_prob) {
                let genome = self.problem.mutate(&parent.genome, &mut self.rng);
                let trash = parent.trash.flip_one_bit(&mut self.rng);
                let node = self
                    .graph
                    .record_birth(&[parent.node], OpKind::Mutation, generation)?;
                let raw_fitness = self.problem.fitness(&genome);
                newcomers.push(Individual {
                    node,
                    genome,
                    trash,
                    raw_fitness,
                });
            }
        }

        let mut others = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            if n < 2 || !self.rng.random_bool(cfg.crossover_prob) {
                continue;
            }
            others.clear();
            others.extend((0..n).filter(|&j| j != i));
            let shaped = &self.shaped;
            let population = &self.population;
            let &j = tournament_select(
                &others,
                cfg.tournament_size,
                |&j| (shaped[j], population[j].node),
                &mut self.rng,
            )?;
            let (a, b) = (&self.population[i], &self.population[j]);
            let genome = self.problem.crossover(&a.genome, &b.genome, &mut self.rng);
            let trash = a.trash.uniform_cross(&b.trash, &mut self.rng)?;
            let node =
                self.graph
                    .record_birth(&[a.node, b.node], OpKind::Recombination, generation)?;
            let raw_fitness = self.problem.fitness(&genome);
            newcomers.push(Individual {
                node,
                genome,
                trash,
                raw_fitness,
            });
        }

        for _ in 0..cfg.immigrants_per_gen {
            let immigrant = spawn(
                &self.problem,
                &mut self.graph,
                cfg.tau,
                generation,
                &mut self.rng,
            )?;
            newcomers.push(immigrant);
        }

        let mut pool = core::mem::take(&mut self.population);
        pool.extend(newcomers);
        let shaped = self.evaluate(&pool)?;

        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&a, &b| rank((shaped[a], pool[a].node), (shaped[b], pool[b].node)));
        order.truncate(self.config.population_size);

        let mut slots: Vec<Option<Individual<P::Genome>>> = pool.into_iter().map(Some).collect();
        self.population = order
            .iter()
            .map(|&i| slots[i].take().expect("indices are distinct"))
            .collect();
        self.shaped = order.iter().map(|&i| shaped[i]).collect();

        let alive: Vec<NodeId> = self.population.iter().map(|m| m.node).collect();
        self.ancestry.retain(|id| alive.contains(&id));
        self.generation = generation;
        Ok(())
    }

    fn evaluate(&mut self, pool: &[Individual<P::Genome>]) -> Result<Vec<f64>> {
        let diversity = self.config.diversity;
        let mut ctx = DistanceContext::new(&self.problem, &self.graph, &mut self.ancestry);
        pool.iter()
            .map(|x| ctx.augmented_fitness(x, pool, x.raw_fitness, &diversity, &mut self.rng))
            .collect()
    }

    /// Raw-fitness statistics of the current population plus the probe diversity.
    pub fn stats(&mut self) -> Result<GenerationStats<P::Genome>> {
        let n = self.population.len();
        let mean_raw_fitness =
            self.population.iter().map(|m| m.raw_fitness).sum::<f64>() / n as f64;
        let best = self
            .population
            .iter()
            .min_by(|a, b| rank((a.raw_fitness, a.node), (b.raw_fitness, b.node)))
            .expect("population is never empty");

        let k = self.config.probe_size.min(n);
        let probe: Vec<usize> = rand::seq::index::sample(&mut self.probe_rng, n, k).into_vec();
        let mut ctx = DistanceContext::new(&self.problem, &self.graph, &mut self.ancestry);
        let (mut total, mut pairs) = (0.0, 0u32);
        for (a, &i) in probe.iter().enumerate() {
            for &j in &probe[a + 1..] {
                total += ctx.distance(
                    self.config.probe_metric,
                    &self.population[i],
                    &self.population[j],
                )?;
                pairs += 1;
            }
        }

        Ok(GenerationStats {
            generation: self.generation,
            mean_raw_fitness,
            best_raw_fitness: best.raw_fitness,
            mean_probe_diversity: if pairs == 0 {
                0.0
            } else {
                total / pairs as f64
            },
            best_genome: best.genome.clone(),
        })
    }

    /// Runs the configured number of generations, recording one row after each.
    pub fn run(&mut self) -> Result<EvolutionTrace<P::Genome>> {
        let mut rows = Vec::with_capacity(self.config.generations as usize);
        for _ in 0..self.config.generations {
            self.step()?;
            rows.push(self.stats()?);
        }
        Ok(EvolutionTrace { rows })
    }
}

fn spawn<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    graph: &mut GenealogyGraph,
    tau: usize,
    generation: u32,
    rng: &mut R,
) -> Result<Individual<P::Genome>> {
    let genome = problem.random_genome(rng);
    let trash = TrashVector::random(tau, rng)?;
    let node = graph.record_birth(&[], OpKind::Genesis, generation)?;
    let raw_fitness = problem.fitness(&genome);
    Ok(Individual {
        node,
        genome,
        trash,
        raw_fitness,
    })
}

/// Runs a full evolution from `seed` and returns its trace.
pub fn evolve<P: Problem>(
    config: &EngineConfig,
    problem: P,
    seed: u64,
) -> Result<EvolutionTrace<P::Genome>> {
    Engine::new(config.clone(), problem, seed)?.run()
}
