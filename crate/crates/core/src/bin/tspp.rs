//! Command-line front end for seeded bandit experiments.
//!
//! Exit codes: 0 success, 1 configuration problems, 2 runtime failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tspp::harness::{run_experiment, run_ope, run_sweep, ExperimentConfig, OpeConfig, SweepAxis};
use tspp::ope::ingest_logged;
use tspp::Error;

#[derive(Parser)]
#[command(
    name = "tspp",
    version,
    about = "Thompson-sampling path-planning bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a closed-loop experiment from a JSON config.
    Run {
        /// Experiment config file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for metrics.csv, metrics_avg.csv, manifest.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for replications (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Sweep one axis of an experiment config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis to vary: alpha2, N, or D.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; fractions like 1/6 are accepted.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate policies offline against a logged dataset.
    Ope {
        /// OPE config file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Logged dataset CSV (dim_1,...,dim_D,reward).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Parse "0.5", "1/6", etc.
fn parse_value(s: &str) -> Result<f64, Error> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad value `{s}`")))?;
        let den: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad value `{s}`")))?;
        if den == 0.0 {
            return Err(Error::config(format!("zero denominator in `{s}`")));
        }
        Ok(num / den)
    } else {
        s.parse()
            .map_err(|_| Error::config(format!("bad value `{s}`")))
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn configure_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Config-shaped errors get exit code 1, everything else 2.
fn is_config_error(err: &Error) -> bool {
    matches!(
        err,
        Error::Config(_) | Error::Spec(_) | Error::Json(_) | Error::Parse { .. }
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            configure_threads(threads)?;
            let mut config: ExperimentConfig = load_json(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let results = run_experiment(&config, out.as_deref())?;
            for policy in &results.policies {
                println!(
                    "{}: avg_regret={:.6} (se {:.6})",
                    policy.name,
                    policy.mean_realized_regret(),
                    policy.realized_regret_std_err()
                );
            }
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            values,
            out,
            seed,
            threads,
        } => {
            configure_threads(threads)?;
            let mut config: ExperimentConfig = load_json(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let axis = SweepAxis::parse(&axis)?;
            let values = values
                .split(',')
                .map(parse_value)
                .collect::<Result<Vec<_>, _>>()?;
            let results = run_sweep(&config, axis, &values, out.as_deref())?;
            print!("{}", results.sweep_csv);
            Ok(())
        }
        Command::Ope {
            config,
            data,
            out,
            seed,
        } => {
            let mut config: OpeConfig = load_json(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let spec = tspp::DimensionSpec::uniform(config.dims, config.choices)?;
            let dataset = ingest_logged(&data, &spec)?;
            let (_, csv) = run_ope(&config, &dataset, out.as_deref())?;
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if is_config_error(&err) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
