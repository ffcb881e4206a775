//! Run configuration: a flat `key = value` file with dotted keys.
//!
//! ```text
//! # comments and blank lines are ignored
//! seed.base = 0
//! engine.generations = 1000
//! arena.obstacle = 0.4, 0.0, 0.6, 0.8
//! variant.trash_bits = trash_bits, 1.0
//! ```
//!
//! Precedence, lowest first: built-in defaults, the config file, environment
//! variables, command-line flags. Any key can be overridden from the
//! environment as `GENDIV_` followed by the key in upper case with every `.`
//! written as `__`, e.g. `GENDIV_ENGINE__GENERATIONS=50` or
//! `GENDIV_VARIANT__TRASH_BITS="trash_bits, 2.0"`.
//!
//! See `KEYS` for the full list.

use std::fmt;
use std::str::FromStr;

use gendiv_core::routing::{Point, Rect, RoutingProblem, StepNorm};
use gendiv_core::{DiversityConfig, DiversityMetric, EngineConfig};

pub const ENV_PREFIX: &str = "GENDIV_";

/// Every scalar key the config understands. `variant.<name>` keys come on top.
pub const KEYS: &[&str] = &[
    "seed.base",
    "seed.count",
    "engine.population_size",
    "engine.generations",
    "engine.mutation_prob",
    "engine.crossover_prob",
    "engine.tournament_size",
    "engine.immigrants_per_gen",
    "engine.tau",
    "diversity.sample_size",
    "probe.size",
    "probe.metric",
    "mutation.sigma",
    "arena.bounds",
    "arena.start",
    "arena.goal",
    "arena.obstacle",
    "arena.step_norm",
    "arena.max_step",
    "grid.lambdas",
];

const VARIANT_PREFIX: &str = "variant.";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

impl From<gendiv_core::Error> for ConfigError {
    fn from(e: gendiv_core::Error) -> Self {
        match e {
            gendiv_core::Error::InvalidParameter { name, reason } => ConfigError::new(name, reason),
            other => ConfigError::new("<config>", other),
        }
    }
}

/// One algorithm variant: a named diversity metric with its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub metric: DiversityMetric,
    pub lambda: f64,
}

impl Variant {
    pub fn new(name: &str, metric: DiversityMetric, lambda: f64) -> Self {
        Variant {
            name: name.to_string(),
            metric,
            lambda,
        }
    }
}

/// The λ values picked by grid search on the default arena (see README).
pub fn default_variants() -> Vec<Variant> {
    vec![
        Variant::new("baseline", DiversityMetric::None, 0.0),
        Variant::new("domain", DiversityMetric::Domain, 0.5),
        Variant::new("genealogical_tree", DiversityMetric::GenealogicalTree, 4.0),
        Variant::new("trash_bits", DiversityMetric::TrashBits, 4.0),
    ]
}

/// Default λ grid for a metric.
pub fn default_lambda_grid(metric: DiversityMetric) -> Vec<f64> {
    if metric.is_normalized() {
        vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0]
    } else {
        vec![0.01, 0.05, 0.1, 0.5, 1.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Engine settings; `engine.diversity.metric` and `lambda` are set per variant.
    pub engine: EngineConfig,
    pub problem: RoutingProblem,
    pub base_seed: u64,
    pub seed_count: u64,
    pub variants: Vec<Variant>,
    pub grid_lambdas: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: EngineConfig::default(),
            problem: RoutingProblem::default(),
            base_seed: 0,
            seed_count: 10,
            variants: default_variants(),
            grid_lambdas: None,
        }
    }
}

impl RunConfig {
    pub fn seeds(&self) -> impl Iterator<Item = u64> + Clone {
        let base = self.base_seed;
        (0..self.seed_count).map(move |i| base.wrapping_add(i))
    }

    /// Engine config with the given diversity metric and weight.
    pub fn engine_for(&self, metric: DiversityMetric, lambda: f64) -> EngineConfig {
        EngineConfig {
            diversity: DiversityConfig {
                metric,
                lambda,
                ..self.engine.diversity
            },
            ..self.engine.clone()
        }
    }

    pub fn lambda_grid(&self, metric: DiversityMetric) -> Vec<f64> {
        self.grid_lambdas
            .clone()
            .unwrap_or_else(|| default_lambda_grid(metric))
    }

    /// Builds a config from the file text (if any) overlaid with `env` pairs.
    pub fn load(
        file_text: Option<&str>,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut entries = match file_text {
            Some(text) => parse_entries(text)?,
            None => Vec::new(),
        };
        for (name, value) in env {
            if let Some(key) = env_key(&name) {
                set(&mut entries, key, value);
            }
        }
        Self::from_entries(&entries)
    }

    pub fn from_entries(entries: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut variants = Vec::new();
        for (key, value) in entries {
            if let Some(name) = key.strip_prefix(VARIANT_PREFIX) {
                variants.push(parse_variant(key, name, value)?);
                continue;
            }
            let e = &mut cfg.engine;
            match key.as_str() {
                "seed.base" => cfg.base_seed = num(key, value)?,
                "seed.count" => cfg.seed_count = num(key, value)?,
                "engine.population_size" => e.population_size = num(key, value)?,
                "engine.generations" => e.generations = num(key, value)?,
                "engine.mutation_prob" => e.mutation_prob = num(key, value)?,
                "engine.crossover_prob" => e.crossover_prob = num(key, value)?,
                "engine.tournament_size" => e.tournament_size = num(key, value)?,
                "engine.immigrants_per_gen" => e.immigrants_per_gen = num(key, value)?,
                "engine.tau" => e.tau = num(key, value)?,
                "diversity.sample_size" => e.diversity.sample_size = num(key, value)?,
                "probe.size" => e.probe_size = num(key, value)?,
                "probe.metric" => e.probe_metric = parse_with(key, value)?,
                "mutation.sigma" => cfg.problem.sigma = num(key, value)?,
                "arena.bounds" => cfg.problem.arena.bounds = rect(key, value)?,
                "arena.start" => cfg.problem.arena.start = point(key, value)?,
                "arena.goal" => cfg.problem.arena.goal = rect(key, value)?,
                "arena.obstacle" => cfg.problem.arena.obstacle = rect(key, value)?,
                "arena.step_norm" => cfg.problem.step_norm = parse_with::<StepNorm>(key, value)?,
                "arena.max_step" => cfg.problem.max_step = num(key, value)?,
                "grid.lambdas" => cfg.grid_lambdas = Some(reals(key, value)?),
                _ => return Err(ConfigError::new(key, "unknown key")),
            }
        }
        if !variants.is_empty() {
            cfg.variants = variants;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.engine.validate()?;
        self.problem.validate()?;
        if self.seed_count == 0 {
            return Err(ConfigError::new("seed.count", "must be at least 1"));
        }
        if self.variants.is_empty() {
            return Err(ConfigError::new(
                "variant",
                "at least one variant is required",
            ));
        }
        for (i, v) in self.variants.iter().enumerate() {
            let key = format!("{VARIANT_PREFIX}{}", v.name);
            if self.variants[..i].iter().any(|o| o.name == v.name) {
                return Err(ConfigError::new(key, "duplicate variant name"));
            }
            if !(v.lambda.is_finite() && v.lambda >= 0.0) {
                return Err(ConfigError::new(
                    key,
                    "lambda must be finite and non-negative",
                ));
            }
        }
        if let Some(grid) = &self.grid_lambdas {
            check_grid(grid).map_err(|m| ConfigError::new("grid.lambdas", m))?;
        }
        Ok(())
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<(), &'static str> {
    if grid.is_empty() {
        return Err("must list at least one value");
    }
    if grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err("values must be finite and non-negative");
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err("values must be sorted ascending");
    }
    Ok(())
}

/// Parses `key = value` lines, keeping first-appearance order. A repeated key
/// overrides the earlier value in place.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::new(format!("line {}", lineno + 1), "expected `key = value`")
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::new(
                format!("line {}", lineno + 1),
                "empty key",
            ));
        }
        set(&mut entries, key.to_string(), value.trim().to_string());
    }
    Ok(entries)
}

/// Config key addressed by an environment variable name, if it has the prefix.
pub fn env_key(var: &str) -> Option<String> {
    let rest = var.strip_prefix(ENV_PREFIX)?;
    Some(rest.to_ascii_lowercase().replace("__", "."))
}

/// Environment variable name that overrides `key`.
pub fn env_var_for(key: &str) -> String {
    format!(
        "{ENV_PREFIX}{}",
        key.to_ascii_uppercase().replace('.', "__")
    )
}

fn set(entries: &mut Vec<(String, String)>, key: String, value: String) {
    match entries.iter_mut().find(|(k, _)| *k == key) {
        Some(slot) => slot.1 = value,
        None => entries.push((key, value)),
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| ConfigError::new(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_with<T: FromStr<Err = gendiv_core::Error>>(
    key: &str,
    value: &str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|e: gendiv_core::Error| match e {
        gendiv_core::Error::InvalidParameter { reason, .. } => ConfigError::new(key, reason),
        other => ConfigError::new(key, other),
    })
}

fn reals(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|part| {
            let v: f64 = num(key, part.trim())?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ConfigError::new(key, "values must be finite"))
            }
        })
        .collect()
}

fn point(key: &str, value: &str) -> Result<Point, ConfigError> {
    match reals(key, value)?[..] {
        [x, y] => Ok(Point::new(x, y)),
        _ => Err(ConfigError::new(key, "expected `x, y`")),
    }
}

fn rect(key: &str, value: &str) -> Result<Rect, ConfigError> {
    match reals(key, value)?[..] {
        [a, b, c, d] => Ok(Rect::new(a, b, c, d)),
        _ => Err(ConfigError::new(
            key,
            "expected `min_x, min_y, max_x, max_y`",
        )),
    }
}

fn parse_variant(key: &str, name: &str, value: &str) -> Result<Variant, ConfigError> {
    if name.is_empty() {
        return Err(ConfigError::new(key, "variant name is empty"));
    }
    let (metric, lambda) = value
        .split_once(',')
        .ok_or_else(|| ConfigError::new(key, "expected `<metric>, <lambda>`"))?;
    Ok(Variant {
        name: name.to_string(),
        metric: parse_with(key, metric.trim())?,
        lambda: num(key, lambda.trim())?,
    })
}
