//! Diversity-shaped fitness.
//!
//! Selection ranks individuals by `f'(x, P) = f(x) + lambda * d(x, P)` where
//! `d` is the mean distance from `x` to a small random sample of other members
//! of the population. Reported statistics always use the raw `f`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::engine::{Individual, Problem};
use crate::error::{Error, Result};
use crate::genealogy::{AncestryCache, GenealogyGraph};

/// Default number of population members an individual is compared against.
pub const DEFAULT_SAMPLE_SIZE: usize = 5;

/// Pairwise distance between individuals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DiversityMetric {
    /// No diversity term; every distance is zero.
    #[default]
    None,
    /// Problem-specific genome distance (unnormalized).
    Domain,
    /// `gdist` on the ancestry graph, in `[0, 1]`.
    GenealogicalTree,
    /// `tdist` on the trash vectors, in `[0, 1]`.
    TrashBits,
}

impl DiversityMetric {
    pub const ALL: [DiversityMetric; 4] = [
        DiversityMetric::None,
        DiversityMetric::Domain,
        DiversityMetric::GenealogicalTree,
        DiversityMetric::TrashBits,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            DiversityMetric::None => "none",
            DiversityMetric::Domain => "domain",
            DiversityMetric::GenealogicalTree => "genealogical_tree",
            DiversityMetric::TrashBits => "trash_bits",
        }
    }

    /// Whether distances are confined to `[0, 1]`.
    pub const fn is_normalized(self) -> bool {
        !matches!(self, DiversityMetric::Domain)
    }
}

impl fmt::Display for DiversityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DiversityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DiversityMetric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "metric",
                    alloc::format!(
                        "unknown metric `{s}` (none, domain, genealogical_tree, trash_bits)"
                    ),
                )
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiversityConfig {
    pub metric: DiversityMetric,
    /// Weight of the diversity term.
    pub lambda: f64,
    /// Members sampled per evaluation; clamped to the available population.
    pub sample_size: usize,
}

impl Default for DiversityConfig {
    fn default() -> Self {
        DiversityConfig {
            metric: DiversityMetric::None,
            lambda: 0.0,
            sample_size: DEFAULT_SAMPLE_SIZE,
        }
    }
}

impl DiversityConfig {
    pub fn new(metric: DiversityMetric, lambda: f64) -> Self {
        DiversityConfig {
            metric,
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid(
                "diversity.lambda",
                "must be finite and non-negative",
            ));
        }
        if self.sample_size == 0 {
            return Err(Error::invalid(
                "diversity.sample_size",
                "must be at least 1",
            ));
        }
        Ok(())
    }

    /// False when the diversity term cannot change `f'`; no sampling happens then.
    pub fn is_active(&self) -> bool {
        self.metric != DiversityMetric::None && self.lambda != 0.0
    }
}

/// Everything needed to measure the distance between two individuals.
pub struct DistanceContext<'a, P> {
    pub problem: &'a P,
    pub graph: &'a GenealogyGraph,
    pub ancestry: &'a mut AncestryCache,
}

impl<'a, P: Problem> DistanceContext<'a, P> {
    pub fn new(problem: &'a P, graph: &'a GenealogyGraph, ancestry: &'a mut AncestryCache) -> Self {
        DistanceContext {
            problem,
            graph,
            ancestry,
        }
    }

    pub fn distance(
        &mut self,
        metric: DiversityMetric,
        a: &Individual<P::Genome>,
        b: &Individual<P::Genome>,
    ) -> Result<f64> {
        match metric {
            DiversityMetric::None => Ok(0.0),
            DiversityMetric::Domain => Ok(self.problem.distance(&a.genome, &b.genome)),
            DiversityMetric::GenealogicalTree => self.ancestry.gdist(self.graph, a.node, b.node),
            DiversityMetric::TrashBits => a.trash.tdist(&b.trash),
        }
    }

    /// Mean distance from `x` to each member of `sample`.
    pub fn average_distance(
        &mut self,
        metric: DiversityMetric,
        x: &Individual<P::Genome>,
        sample: &[&Individual<P::Genome>],
    ) -> Result<f64> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut total = 0.0;
        for other in sample {
            total += self.distance(metric, x, other)?;
        }
        Ok(total / sample.len() as f64)
    }

    /// `raw_fitness + lambda * d(x, population)` with `d` averaged over a fresh
    /// sample of distinct members other than `x`.
    ///
    /// Inactive configurations (metric `none` or `lambda == 0`) return
    /// `raw_fitness` without touching `rng`, as does a population with no
    /// member besides `x`.
    pub fn augmented_fitness<R: Rng + ?Sized>(
        &mut self,
        x: &Individual<P::Genome>,
        population: &[Individual<P::Genome>],
        raw_fitness: f64,
        config: &DiversityConfig,
        rng: &mut R,
    ) -> Result<f64> {
        if !config.is_active() {
            return Ok(raw_fitness);
        }
        let others: Vec<&Individual<P::Genome>> =
            population.iter().filter(|o| o.node != x.node).collect();
        let k = config.sample_size.min(others.len());
        if k == 0 {
            return Ok(raw_fitness);
        }
        let sample: Vec<&Individual<P::Genome>> = rand::seq::index::sample(rng, others.len(), k)
            .into_iter()
            .map(|i| others[i])
            .collect();
        let d = self.average_distance(config.metric, x, &sample)?;
        Ok(raw_fitness + config.lambda * d)
    }
}
