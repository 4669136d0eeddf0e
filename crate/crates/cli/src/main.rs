use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use structcodes_cli::config::{parse_assignment, ExperimentConfig, Format, ModeArg};
use structcodes_cli::netcmd::{cmd_code, cmd_maxflow, cmd_transform, cmd_validate, CodeOptions};
use structcodes_cli::netfile::NetworkFile;
use structcodes_cli::simulate::cmd_simulate;
use structcodes_cli::sweep::{cmd_rates, preset, SweepSpec};
use structcodes_cli::{emit, render, CliError};
use structcodes_core::network::{Strategy, DEFAULT_MAX_ATTEMPTS};

/// Structured codes for computation over multiple-access networks.
///
/// Exit status: 0 on success, 2 on a configuration or parse error, 3 when a
/// library guard rejects the parameters or a network fails validation.
/// STRUCTCODES_THREADS caps the number of worker threads.
#[derive(Parser)]
#[command(name = "structcodes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for tables.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep closed-form rate and distortion formulas.
    Rates {
        /// Built-in sweep, e.g. figure4.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// JSON sweep description.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a fixed parameter, key=value.
        #[arg(long = "param", value_parser = parse_assignment)]
        params: Vec<(String, f64)>,
    },
    /// Run a seeded Monte Carlo experiment.
    Simulate {
        /// korner-marton, mac-compute, gaussian-sum, relay-sum-diff,
        /// butterfly-binary or butterfly-gaussian; overrides the config.
        experiment: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Override a parameter, key=value.
        #[arg(long = "param", value_parser = parse_assignment)]
        params: Vec<(String, f64)>,
    },
    /// Inspect and transform network description files.
    Network {
        #[command(subcommand)]
        action: NetworkAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    FlowGuided,
    Global,
}

#[derive(Subcommand)]
enum NetworkAction {
    /// List structural violations.
    Validate { file: PathBuf },
    /// Print the equivalent point-to-point network.
    Transform { file: PathBuf },
    /// Per-receiver max-flow of the equivalent network.
    Maxflow {
        file: PathBuf,
        /// Capacity quantum (default 1/1024).
        #[arg(long)]
        quantum: Option<f64>,
    },
    /// Build a random linear network code.
    Code {
        file: PathBuf,
        /// Field size (prime).
        #[arg(long, default_value_t = 3)]
        q: u32,
        /// Source symbols per use; defaults to the multicast bound.
        #[arg(long)]
        rate: Option<usize>,
        /// Capacity of one unit pipe.
        #[arg(long, default_value_t = 1.0)]
        unit: f64,
        #[arg(long, value_enum, default_value = "flow-guided")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
        max_attempts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = cli.output.out.as_deref();
    match cli.command {
        Command::Rates { preset: name, config, params } => {
            let mut spec = match (name, config) {
                (Some(n), _) => preset(&n)?,
                (None, Some(path)) => SweepSpec::from_json(&read(&path)?)?,
                (None, None) => return Err(CliError::Config("rates needs --preset or --config".into())),
            };
            spec.params.extend(params);
            let format = cli.output.format.or(spec.output.as_ref().and_then(|o| o.format)).unwrap_or(Format::Csv);
            let path = out.map(PathBuf::from).or_else(|| spec.output.as_ref().and_then(|o| o.path.clone()).map(PathBuf::from));
            let table = cmd_rates(&spec)?;
            emit(&render(&table, format), path.as_deref())
        }
        Command::Simulate { experiment, config, seed, trials, mode, params } => {
            let mut cfg = match (&config, &experiment) {
                (Some(path), _) => ExperimentConfig::load(path)?,
                (None, Some(e)) => ExperimentConfig::named(e),
                (None, None) => return Err(CliError::Config("simulate needs an experiment name or --config".into())),
            };
            if let Some(e) = experiment {
                cfg.experiment = e;
            }
            cfg.seed = seed.or(cfg.seed);
            cfg.trials = trials.or(cfg.trials);
            cfg.mode = mode.or(cfg.mode);
            cfg.params.extend(params);
            let format = cli.output.format.or(cfg.output.as_ref().and_then(|o| o.format)).unwrap_or(Format::Csv);
            let path = out.map(PathBuf::from).or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()).map(PathBuf::from));
            let table = cmd_simulate(&cfg)?;
            emit(&render(&table, format), path.as_deref())
        }
        Command::Network { action } => {
            let format = cli.output.format.unwrap_or(Format::Csv);
            match action {
                NetworkAction::Validate { file } => {
                    let table = cmd_validate(&NetworkFile::load(&file)?)?;
                    emit(&render(&table, format), out)?;
                    if table.is_empty() {
                        Ok(())
                    } else {
                        Err(CliError::Validation(format!("{} violation(s) in {}", table.len(), file.display())))
                    }
                }
                NetworkAction::Transform { file } => emit(&cmd_transform(&NetworkFile::load(&file)?)?.to_json(), out),
                NetworkAction::Maxflow { file, quantum } => {
                    let table = cmd_maxflow(&NetworkFile::load(&file)?, quantum)?;
                    emit(&render(&table, format), out)
                }
                NetworkAction::Code { file, q, rate, unit, strategy, max_attempts, seed } => {
                    let strategy = match strategy {
                        StrategyArg::FlowGuided => Strategy::FlowGuided,
                        StrategyArg::Global => Strategy::Global,
                    };
                    let opts = CodeOptions { q, rate, unit, strategy, max_attempts, seed };
                    let report = cmd_code(&NetworkFile::load(&file)?, &opts)?;
                    let mut text = serde_json::to_string_pretty(&report).expect("serializable");
                    text.push('\n');
                    emit(&text, out)
                }
            }
        }
    }
}

fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("structcodes: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
