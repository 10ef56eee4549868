use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sixgan::classify::Method;
use sixgan::pipeline::{self, Overrides, PipelineError, RunConfig};

#[derive(Parser)]
#[command(name = "sixgan", version, about = "Pattern-aware IPv6 target generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; SIXGAN_* environment variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Total candidate budget across patterns.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<Method>,
    /// Class count for the clustering methods.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Per-pattern generation rates for budget allocation, e.g. 11,3,3,1,19,10.
    #[arg(long, global = true, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Synthetic universe spec.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed address file.
    #[arg(long, global = true)]
    seeds: Option<PathBuf>,
    /// Aliased prefix file.
    #[arg(long, global = true)]
    aliases: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Label seeds by addressing pattern.
    Classify,
    /// Train one generator per pattern and the discriminator.
    Train,
    /// Sample candidates from the trained generators.
    Generate,
    /// Score candidate files against a synthetic universe.
    Evaluate {
        /// Candidate file; defaults to the files written by `generate`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Classify addresses with the trained discriminator.
    Discriminate {
        /// Address list, or a labels file for a confusion matrix.
        #[arg(long)]
        input: PathBuf,
    },
    /// Write seeds and aliased prefixes sampled from a universe spec.
    Synth,
    /// Split a candidate file by aliased-prefix membership.
    AliasCheck {
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn run(cli: Cli) -> Result<pipeline::CommandOutput, PipelineError> {
    let flags = Overrides {
        seed: cli.seed,
        budget: cli.budget,
        method: cli.method,
        k: cli.k,
        rates: cli.rates,
        spec: cli.spec,
        out: cli.out,
        seeds: cli.seeds,
        aliases: cli.aliases,
    };
    let cfg = RunConfig::resolve(cli.config.as_deref(), std::env::vars(), &flags)?;
    match cli.command {
        Command::Classify => pipeline::cmd_classify(&cfg),
        Command::Train => pipeline::cmd_train(&cfg),
        Command::Generate => pipeline::cmd_generate(&cfg),
        Command::Evaluate { input } => pipeline::cmd_evaluate(&cfg, input.as_deref()),
        Command::Discriminate { input } => pipeline::cmd_discriminate(&cfg, &input),
        Command::Synth => pipeline::cmd_synth(&cfg),
        Command::AliasCheck { input } => pipeline::cmd_alias_check(&cfg, &input),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(out) => {
            out.summary.iter().for_each(|l| println!("{l}"));
            println!("manifest: {}", out.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
