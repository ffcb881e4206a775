use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gendiv::config::{ConfigError, RunConfig};
use gendiv::experiment::{self, CliError};
use gendiv_core::DiversityMetric;

#[derive(Parser)]
#[command(
    name = "gendiv",
    version,
    about = "Diversity-aware GA experiments on the routing benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured variant over all seeds and write CSV traces.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search λ for one diversity metric.
    Grid {
        #[arg(long)]
        config: Option<PathBuf>,
        /// none, domain, genealogical_tree or trash_bits
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one seed and write its genealogy log.
    DumpGenealogy {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Variant to run; defaults to the first configured one.
        #[arg(long)]
        variant: Option<String>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })?),
        None => None,
    };
    Ok(RunConfig::load(text.as_deref(), std::env::vars())?)
}

fn flag_error(flag: &str, message: impl Into<String>) -> CliError {
    CliError::Config(ConfigError {
        key: format!("--{flag}"),
        message: message.into(),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(config.as_deref())?;
            let output = experiment::run_experiment(&cfg, &out)?;
            for r in &output.runs {
                println!(
                    "{:<20} mean final fitness {:.3}",
                    r.variant.name,
                    r.mean_final_fitness()
                );
            }
            println!("wrote {}", output.aggregate.display());
        }
        Command::Grid {
            config,
            metric,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let metric: DiversityMetric = metric
                .parse()
                .map_err(|e: gendiv_core::Error| flag_error("metric", e.to_string()))?;
            let lambdas = cfg.lambda_grid(metric);
            let report = experiment::grid_search(&cfg, metric, &lambdas)?;
            std::fs::create_dir_all(&out).map_err(|source| CliError::Io {
                path: out.clone(),
                source,
            })?;
            let path = out.join(format!("grid_{metric}.csv"));
            experiment::write_csv(&path, |w| experiment::write_grid(w, &report))?;
            for row in &report.rows {
                println!(
                    "lambda {:>8.4}  mean final {:.3}  std {:.3}",
                    row.lambda, row.mean_final_fitness, row.std_final_fitness
                );
            }
            println!("best lambda for {metric}: {}", report.best_lambda);
            println!("wrote {}", path.display());
        }
        Command::DumpGenealogy {
            config,
            seed,
            out,
            variant,
        } => {
            let cfg = load_config(config.as_deref())?;
            let chosen = match &variant {
                None => &cfg.variants[0],
                Some(name) => cfg
                    .variants
                    .iter()
                    .find(|v| &v.name == name)
                    .ok_or_else(|| flag_error("variant", format!("no variant named `{name}`")))?,
            };
            let nodes = experiment::dump_genealogy(&cfg, chosen, seed, &out)?;
            println!("wrote {nodes} nodes to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
