//! `sicr` binary: a thin argument layer over the pipeline stages.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sicr_cli::config::{RunConfig, Seed};
use sicr_cli::{pipeline, read_input, CliError};

#[derive(Parser)]
#[command(
    name = "sicr",
    version,
    about = "Compare SICR definitions on a synthetic mortgage portfolio",
    after_help = "Artifacts are written to (and stepwise inputs read back from) the output \
                  directory. Exit codes: 0 success, 1 internal error, 2 missing input file, \
                  3 model/panel schema mismatch."
)]
struct Cli {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the config's root seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override the config's output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for run-grid; defaults to one per CPU.
    #[arg(long, global = true, value_name = "N")]
    parallel: Option<usize>,

    /// Operate on these definition labels only (comma-separated).
    #[arg(long, global = true, value_name = "LABELS", value_delimiter = ',')]
    definitions: Option<Vec<String>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic portfolio and macro scenario.
    Simulate,
    /// Build one labelled panel per grid definition.
    Label,
    /// Subsample and split each panel into train/validation parts.
    Sample,
    /// Fit the penalised logit on each training panel.
    Fit,
    /// Evaluate each definition and write the report artifacts.
    Evaluate,
    /// Attribute each model's scores over its validation panel.
    Attribute,
    /// The whole experiment in one run: simulate, then label, sample, fit
    /// and evaluate every grid definition, then the comparison artifacts.
    RunGrid {
        /// Ingest this portfolio CSV instead of simulating (needs --macro).
        #[arg(long, value_name = "PATH")]
        portfolio: Option<PathBuf>,
        /// Ingest this macro-scenario CSV instead of simulating (needs --portfolio).
        #[arg(long = "macro", value_name = "PATH")]
        macro_scenario: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_toml(&read_input(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = Seed(seed);
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.out_dir.0));
    let defs = cli.definitions.as_deref();

    match &cli.command {
        Command::Simulate => pipeline::cmd_simulate(&config, &out),
        Command::Label => pipeline::cmd_label(&config, &out, defs),
        Command::Sample => pipeline::cmd_sample(&config, &out, defs),
        Command::Fit => pipeline::cmd_fit(&config, &out, defs),
        Command::Evaluate => pipeline::cmd_evaluate(&config, &out, defs),
        Command::Attribute => pipeline::cmd_attribute(&config, &out, defs),
        Command::RunGrid { portfolio, macro_scenario } => {
            let outcome = pipeline::run_grid(
                &config,
                &out,
                cli.parallel,
                defs,
                portfolio.as_deref(),
                macro_scenario.as_deref(),
            )?;
            for (_, diagnostic) in &outcome.failures {
                eprintln!("{diagnostic}");
            }
            println!(
                "{} definitions evaluated, {} failed, artifacts in {}",
                outcome.reports.len(),
                outcome.failures.len(),
                out.display()
            );
            if outcome.failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failure(format!(
                    "{} of {} definitions failed",
                    outcome.failures.len(),
                    outcome.failures.len() + outcome.reports.len()
                )))
            }
        }
    }
}
