//! Obstacle-avoidance routing benchmark.
//!
//! A robot starts at a fixed point and executes ten planar actions, one per
//! time step. Each action is a displacement whose size is capped (L1 norm 0.5
//! by default). A step whose straight segment would touch the obstacle or
//! leave the arena is rejected and the robot stays put for that step. After
//! every step the robot earns +1 if it sits inside the goal rectangle, so raw
//! fitness ranges over `0..=10`. The obstacle blocks the direct route, so a
//! good plan has to detour around it.

use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::engine::Problem;
use crate::error::{Error, Result};

/// Number of actions in a genome.
pub const GENOME_LEN: usize = 10;
/// Largest displacement a single action may cause.
pub const DEFAULT_MAX_STEP: f64 = 0.5;
/// Standard deviation of the per-component Gaussian mutation noise.
pub const DEFAULT_SIGMA: f64 = 0.1;

pub type Action = (f64, f64);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Rect {
            min: Point::new(min_x, min_y),
            max: Point::new(max_x, max_y),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }

    /// True if `p` lies in the open interior.
    pub fn contains_strictly(&self, p: Point) -> bool {
        self.min.x < p.x && p.x < self.max.x && self.min.y < p.y && p.y < self.max.y
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    /// Whether the closed segment `from`-`to` touches this rectangle.
    pub fn intersects_segment(&self, from: Point, to: Point) -> bool {
        // Liang-Barsky clipping of the parameter range [0, 1].
        let mut t_lo = 0.0f64;
        let mut t_hi = 1.0f64;
        for (p0, d, lo, hi) in [
            (from.x, to.x - from.x, self.min.x, self.max.x),
            (from.y, to.y - from.y, self.min.y, self.max.y),
        ] {
            if d == 0.0 {
                if p0 < lo || p0 > hi {
                    return false;
                }
                continue;
            }
            let (a, b) = ((lo - p0) / d, (hi - p0) / d);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t_lo = t_lo.max(a);
            t_hi = t_hi.min(b);
            if t_lo > t_hi {
                return false;
            }
        }
        true
    }

    fn is_well_formed(&self) -> bool {
        [self.min.x, self.min.y, self.max.x, self.max.y]
            .iter()
            .all(|v| v.is_finite())
            && self.min.x <= self.max.x
            && self.min.y <= self.max.y
    }
}

/// Norm used to cap the length of one action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StepNorm {
    /// Manhattan length `|dx| + |dy|`.
    #[default]
    L1,
    /// Chebyshev length `max(|dx|, |dy|)`.
    LInf,
}

impl StepNorm {
    pub fn length(self, (dx, dy): Action) -> f64 {
        match self {
            StepNorm::L1 => dx.abs() + dy.abs(),
            StepNorm::LInf => dx.abs().max(dy.abs()),
        }
    }

    /// Scales `a` down onto the ball of radius `bound` if it lies outside.
    pub fn clamp(self, a: Action, bound: f64) -> Result<Action> {
        if !(a.0.is_finite() && a.1.is_finite()) {
            return Err(Error::NonFinite("action"));
        }
        Ok(self.clamp_finite(a, bound))
    }

    fn clamp_finite(self, (dx, dy): Action, bound: f64) -> Action {
        let len = self.length((dx, dy));
        if len <= bound {
            (dx, dy)
        } else {
            let s = bound / len;
            (dx * s, dy * s)
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StepNorm::L1 => "l1",
            StepNorm::LInf => "linf",
        }
    }
}

impl core::str::FromStr for StepNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(StepNorm::L1),
            "linf" => Ok(StepNorm::LInf),
            _ => Err(Error::invalid(
                "step_norm",
                alloc::format!("expected l1 or linf, got `{s}`"),
            )),
        }
    }
}

/// Caps an action at L1 length 0.5.
pub fn clamp_action(a: Action) -> Result<Action> {
    StepNorm::L1.clamp(a, DEFAULT_MAX_STEP)
}

/// A genome: exactly [`GENOME_LEN`] finite actions.
#[derive(Clone, Copy, PartialEq)]
pub struct ActionSequence([Action; GENOME_LEN]);

impl ActionSequence {
    pub fn new(actions: [Action; GENOME_LEN]) -> Result<Self> {
        if actions
            .iter()
            .any(|(x, y)| !(x.is_finite() && y.is_finite()))
        {
            return Err(Error::NonFinite("action sequence"));
        }
        Ok(Self(actions))
    }

    pub fn zeros() -> Self {
        Self([(0.0, 0.0); GENOME_LEN])
    }

    pub fn actions(&self) -> &[Action; GENOME_LEN] {
        &self.0
    }

    /// Each component uniform in `[-0.5, 0.5]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut actions = [(0.0, 0.0); GENOME_LEN];
        for a in &mut actions {
            *a = (rng.random_range(-0.5..=0.5), rng.random_range(-0.5..=0.5));
        }
        Self(actions)
    }

    /// Perturbs both components of one uniformly chosen action with N(0, sigma²) noise.
    pub fn mutate<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("sigma", "must be positive and finite"));
        }
        let noise = Normal::new(0.0, sigma)
            .map_err(|_| Error::invalid("sigma", "must be positive and finite"))?;
        let mut out = *self;
        let i = rng.random_range(0..GENOME_LEN);
        out.0[i].0 += noise.sample(rng);
        out.0[i].1 += noise.sample(rng);
        Ok(out)
    }

    /// Takes every action slot whole from either parent with probability 1/2.
    pub fn crossover<R: Rng + ?Sized>(&self, other: &Self, rng: &mut R) -> Self {
        let mut out = *self;
        for (slot, theirs) in out.0.iter_mut().zip(&other.0) {
            if rng.random_bool(0.5) {
                *slot = *theirs;
            }
        }
        out
    }

    /// Sum over positions of the L1 difference between corresponding actions.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a.0 - b.0).abs() + (a.1 - b.1).abs())
            .sum()
    }
}

impl fmt::Debug for ActionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Arena geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arena {
    pub bounds: Rect,
    pub start: Point,
    pub goal: Rect,
    pub obstacle: Rect,
}

impl Default for Arena {
    /// Unit square with a wall in the middle that leaves a gap only at the top.
    fn default() -> Self {
        Arena {
            bounds: Rect::new(0.0, 0.0, 1.0, 1.0),
            start: Point::new(0.1, 0.5),
            goal: Rect::new(0.75, 0.3, 0.95, 0.7),
            obstacle: Rect::new(0.4, 0.0, 0.6, 0.8),
        }
    }
}

impl Arena {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("arena.bounds", &self.bounds),
            ("arena.goal", &self.goal),
            ("arena.obstacle", &self.obstacle),
        ] {
            if !r.is_well_formed() {
                return Err(Error::invalid(
                    name,
                    "rectangle must be finite with min <= max",
                ));
            }
        }
        if !(self.start.x.is_finite() && self.start.y.is_finite()) {
            return Err(Error::NonFinite("arena.start"));
        }
        if !self.bounds.contains(self.start) {
            return Err(Error::invalid("arena.start", "must lie inside the bounds"));
        }
        if self.obstacle.contains(self.start) {
            return Err(Error::invalid(
                "arena.start",
                "must not lie in the obstacle",
            ));
        }
        if !self.bounds.contains_rect(&self.goal) {
            return Err(Error::invalid("arena.goal", "must lie inside the bounds"));
        }
        if !self.bounds.contains_rect(&self.obstacle) {
            return Err(Error::invalid(
                "arena.obstacle",
                "must lie inside the bounds",
            ));
        }
        if self.goal.intersects(&self.obstacle) {
            return Err(Error::invalid(
                "arena.goal",
                "must not overlap the obstacle",
            ));
        }
        Ok(())
    }
}

/// Outcome of executing one genome.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    /// Start position followed by the position after each step.
    pub trajectory: [Point; GENOME_LEN + 1],
    /// Number of steps after which the robot was inside the goal.
    pub raw_fitness: u32,
}

/// The routing task as an optimization problem.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingProblem {
    pub arena: Arena,
    pub sigma: f64,
    pub step_norm: StepNorm,
    pub max_step: f64,
}

impl Default for RoutingProblem {
    fn default() -> Self {
        RoutingProblem {
            arena: Arena::default(),
            sigma: DEFAULT_SIGMA,
            step_norm: StepNorm::L1,
            max_step: DEFAULT_MAX_STEP,
        }
    }
}

impl RoutingProblem {
    pub fn new(arena: Arena) -> Result<Self> {
        let p = RoutingProblem {
            arena,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.arena.validate()?;
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(
                "mutation.sigma",
                "must be positive and finite",
            ));
        }
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(Error::invalid(
                "arena.max_step",
                "must be positive and finite",
            ));
        }
        Ok(())
    }

    pub fn simulate(&self, genome: &ActionSequence) -> SimulationResult {
        let arena = &self.arena;
        let mut pos = arena.start;
        let mut trajectory = [pos; GENOME_LEN + 1];
        let mut raw_fitness = 0;
        for (t, &action) in genome.actions().iter().enumerate() {
            let (dx, dy) = self.step_norm.clamp_finite(action, self.max_step);
            let next = Point::new(pos.x + dx, pos.y + dy);
            if arena.bounds.contains(next) && !arena.obstacle.intersects_segment(pos, next) {
                pos = next;
            }
            trajectory[t + 1] = pos;
            if arena.goal.contains(pos) {
                raw_fitness += 1;
            }
        }
        SimulationResult {
            trajectory,
            raw_fitness,
        }
    }
}

impl Problem for RoutingProblem {
    type Genome = ActionSequence;

    fn random_genome<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionSequence {
        ActionSequence::random(rng)
    }

    fn mutate<R: Rng + ?Sized>(&self, genome: &ActionSequence, rng: &mut R) -> ActionSequence {
        genome
            .mutate(self.sigma, rng)
            .expect("sigma is validated when the problem is built")
    }

    fn crossover<R: Rng + ?Sized>(
        &self,
        a: &ActionSequence,
        b: &ActionSequence,
        rng: &mut R,
    ) -> ActionSequence {
        a.crossover(b, rng)
    }

    fn fitness(&self, genome: &ActionSequence) -> f64 {
        self.simulate(genome).raw_fitness as f64
    }

    fn distance(&self, a: &ActionSequence, b: &ActionSequence) -> f64 {
        a.distance(b)
    }
}
