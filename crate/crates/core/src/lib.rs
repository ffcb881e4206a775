//! Genealogical diversity for evolutionary algorithms.
//!
//! Two ways of estimating how related two individuals are, without looking at
//! what their genomes encode:
//!
//! - [`genealogy`]: an append-only ancestry graph of every individual ever born,
//!   with ancestral distance, latest common ancestor, earliest ancestor and the
//!   normalized genealogical distance `gdist`.
//! - [`trash`]: a fixed-length bit vector carried alongside each genome that is
//!   randomized at birth, bit-flipped on mutation and uniformly crossed on
//!   recombination. Its normalized Hamming distance `tdist` tracks relatedness
//!   at constant cost.
//!
//! [`diversity`] turns either metric (or a domain distance) into a fitness bonus,
//! [`engine`] runs the generational loop, and [`routing`] provides the
//! obstacle-avoidance benchmark used to compare the variants.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diversity;
pub mod engine;
mod error;
pub mod genealogy;
pub mod routing;
pub mod trash;

pub use diversity::{DistanceContext, DiversityConfig, DiversityMetric};
pub use engine::{
    evolve, Engine, EngineConfig, EvolutionTrace, GenerationStats, Individual, Problem,
};
pub use error::{Error, Result};
pub use genealogy::{Ancestry, AncestryCache, GenealogyGraph, NodeId, OpKind};
pub use routing::{ActionSequence, Arena, Point, Rect, RoutingProblem, SimulationResult, StepNorm};
pub use trash::TrashVector;
