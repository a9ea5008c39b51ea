//! Experiment runner: configuration, the five subcommands and their outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "motionskill", version, about = "Motion time-series skill assessment experiments")]
pub struct Cli {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,

    /// Output root; overrides the config and $MOTIONSKILL_OUT.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, short, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one motion codebook per K from expert trials.
    Codebook,
    /// Extract per-trial feature vectors.
    Featurize,
    /// Cross-validate selection + 1-NN per OSATS criterion.
    Evaluate {
        /// Select features once on all samples (overrides the config).
        #[arg(long)]
        paper_protocol: bool,
    },
    /// Write the SNR and phase response curves of the entropy measures.
    Synth {
        /// Exit with status 4 if a trend check fails.
        #[arg(long)]
        check: bool,
    },
    /// Print the evaluation table.
    Report,
}

pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Command::Evaluate { paper_protocol: true } = cli.command {
        cfg.paper_protocol = true;
    }
    cfg.resolve_output(cli.out.clone());
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    match cli.command {
        Command::Codebook => {
            let index = commands::codebook::run(&cfg)?;
            println!(
                "trained {} codebooks on {} descriptors from {} expert trials",
                index.codebooks.len(),
                index.descriptors,
                index.expert_trials.len()
            );
        }
        Command::Featurize => {
            let stores = commands::featurize::run(&cfg)?;
            let n = stores.first().map_or(0, |s| s.records.len());
            println!("featurized {n} trials into {} store(s)", stores.len());
        }
        Command::Evaluate { .. } => {
            let eval = commands::evaluate::run(&cfg)?;
            for r in &eval.results {
                println!("{}: average accuracy {:.4}", r.scheme, r.table.average_accuracy);
            }
        }
        Command::Synth { check } => {
            commands::synth::run(&cfg, check)?;
        }
        Command::Report => {
            commands::report::run(&cfg)?;
        }
    }
    Ok(())
}
