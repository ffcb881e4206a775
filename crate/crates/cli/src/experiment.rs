//! Seeded experiment runs, λ grid search and CSV output.
//!
//! Runs are independent, so seeds and variants execute in parallel. Results
//! are collected in job order and written by one thread, which keeps the
//! output byte-identical from one invocation to the next.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use gendiv_core::routing::ActionSequence;
use gendiv_core::{DiversityMetric, Engine, EvolutionTrace};
use rayon::prelude::*;

use crate::config::{check_grid, ConfigError, RunConfig, Variant};
use crate::genealogy_log;

pub const RAW_HEADER: [&str; 6] = [
    "variant",
    "seed",
    "generation",
    "mean_raw_fitness",
    "best_raw_fitness",
    "mean_probe_diversity",
];
pub const AGGREGATE_HEADER: [&str; 4] = [
    "variant",
    "generation",
    "mean_raw_fitness",
    "std_raw_fitness",
];
pub const GRID_HEADER: [&str; 3] = ["lambda", "mean_final_fitness", "std_final_fitness"];

pub type Trace = EvolutionTrace<ActionSequence>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io { .. } => 2,
        }
    }

    fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<gendiv_core::Error> for CliError {
    fn from(e: gendiv_core::Error) -> Self {
        CliError::Config(e.into())
    }
}

/// Formats a real the way every CSV column does.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.6}")
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Traces of one variant, one per seed, in seed order.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantRuns {
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub traces: Vec<Trace>,
}

impl VariantRuns {
    /// Per-seed population-mean raw fitness after the last generation.
    pub fn final_fitness(&self) -> Vec<f64> {
        self.traces
            .iter()
            .map(|t| t.final_row().map_or(0.0, |r| r.mean_raw_fitness))
            .collect()
    }

    pub fn mean_final_fitness(&self) -> f64 {
        mean_std(&self.final_fitness()).0
    }
}

pub fn run_single(
    config: &RunConfig,
    metric: DiversityMetric,
    lambda: f64,
    seed: u64,
) -> Result<Trace, CliError> {
    let engine = config.engine_for(metric, lambda);
    Ok(Engine::new(engine, config.problem.clone(), seed)?.run()?)
}

/// Runs every variant over every seed.
pub fn run_variants(
    config: &RunConfig,
    variants: &[Variant],
) -> Result<Vec<VariantRuns>, CliError> {
    config.validate()?;
    let seeds: Vec<u64> = config.seeds().collect();
    let jobs: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|&(v, seed)| run_single(config, variants[v].metric, variants[v].lambda, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut traces = traces.into_iter();
    Ok(variants
        .iter()
        .map(|variant| VariantRuns {
            variant: variant.clone(),
            seeds: seeds.clone(),
            traces: traces.by_ref().take(seeds.len()).collect(),
        })
        .collect())
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub raw: Vec<PathBuf>,
    pub aggregate: PathBuf,
    pub runs: Vec<VariantRuns>,
}

/// Runs all configured variants and writes `raw_<variant>.csv` per variant
/// plus `aggregate.csv` into `out_dir`.
pub fn run_experiment(config: &RunConfig, out_dir: &Path) -> Result<ExperimentOutput, CliError> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let runs = run_variants(config, &config.variants)?;

    let mut raw = Vec::new();
    for r in &runs {
        let path = out_dir.join(format!("raw_{}.csv", r.variant.name));
        write_csv(&path, |w| write_raw(w, r))?;
        raw.push(path);
    }
    let aggregate = out_dir.join("aggregate.csv");
    write_csv(&aggregate, |w| write_aggregate(w, &runs))?;
    Ok(ExperimentOutput {
        raw,
        aggregate,
        runs,
    })
}

pub fn write_raw<W: Write>(w: &mut csv::Writer<W>, runs: &VariantRuns) -> csv::Result<()> {
    w.write_record(RAW_HEADER)?;
    for (seed, trace) in runs.seeds.iter().zip(&runs.traces) {
        for row in &trace.rows {
            w.write_record([
                runs.variant.name.clone(),
                seed.to_string(),
                row.generation.to_string(),
                fmt_real(row.mean_raw_fitness),
                fmt_real(row.best_raw_fitness),
                fmt_real(row.mean_probe_diversity),
            ])?;
        }
    }
    Ok(())
}

pub fn write_aggregate<W: Write>(w: &mut csv::Writer<W>, runs: &[VariantRuns]) -> csv::Result<()> {
    w.write_record(AGGREGATE_HEADER)?;
    for r in runs {
        let generations = r.traces.first().map_or(0, |t| t.rows.len());
        for g in 0..generations {
            let values: Vec<f64> = r
                .traces
                .iter()
                .map(|t| t.rows[g].mean_raw_fitness)
                .collect();
            let (mean, std) = mean_std(&values);
            w.write_record([
                r.variant.name.clone(),
                r.traces[0].rows[g].generation.to_string(),
                fmt_real(mean),
                fmt_real(std),
            ])?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub lambda: f64,
    pub mean_final_fitness: f64,
    pub std_final_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub metric: DiversityMetric,
    pub rows: Vec<GridRow>,
    pub best_lambda: f64,
}

/// Runs every seed for each λ and picks the λ with the best mean final
/// fitness; ties go to the smaller λ.
pub fn grid_search(
    config: &RunConfig,
    metric: DiversityMetric,
    lambdas: &[f64],
) -> Result<GridReport, CliError> {
    check_grid(lambdas).map_err(|m| ConfigError {
        key: "grid.lambdas".into(),
        message: m.into(),
    })?;
    let variants: Vec<Variant> = lambdas
        .iter()
        .map(|&l| Variant::new(&format!("{metric}@{l}"), metric, l))
        .collect();
    let runs = run_variants(config, &variants)?;
    let rows: Vec<GridRow> = runs
        .iter()
        .map(|r| {
            let (mean, std) = mean_std(&r.final_fitness());
            GridRow {
                lambda: r.variant.lambda,
                mean_final_fitness: mean,
                std_final_fitness: std,
            }
        })
        .collect();
    Ok(GridReport {
        metric,
        best_lambda: best_lambda(&rows),
        rows,
    })
}

/// λ of the row with the highest mean; the earliest (smallest) λ wins ties.
pub fn best_lambda(rows: &[GridRow]) -> f64 {
    let mut best = &rows[0];
    for row in &rows[1..] {
        if row.mean_final_fitness > best.mean_final_fitness {
            best = row;
        }
    }
    best.lambda
}

pub fn write_grid<W: Write>(w: &mut csv::Writer<W>, report: &GridReport) -> csv::Result<()> {
    w.write_record(GRID_HEADER)?;
    for row in &report.rows {
        w.write_record([
            fmt_real(row.lambda),
            fmt_real(row.mean_final_fitness),
            fmt_real(row.std_final_fitness),
        ])?;
    }
    Ok(())
}

/// Runs one variant with one seed and writes its genealogy log to `path`.
pub fn dump_genealogy(
    config: &RunConfig,
    variant: &Variant,
    seed: u64,
    path: &Path,
) -> Result<usize, CliError> {
    config.validate()?;
    let mut engine = Engine::new(
        config.engine_for(variant.metric, variant.lambda),
        config.problem.clone(),
        seed,
    )?;
    engine.run()?;
    let graph = engine.into_graph();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let file = File::create(path).map_err(CliError::io(path))?;
    genealogy_log::write_log(&graph, BufWriter::new(file)).map_err(CliError::io(path))?;
    Ok(graph.len())
}

/// CSV writer with `\n` terminators.
pub fn csv_writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(inner)
}

pub fn write_csv(
    path: &Path,
    body: impl FnOnce(&mut csv::Writer<BufWriter<File>>) -> csv::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = csv_writer(BufWriter::new(file));
    body(&mut w)
        .and_then(|_| w.flush().map_err(csv::Error::from))
        .map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: io::Error::other(e),
        })
}
