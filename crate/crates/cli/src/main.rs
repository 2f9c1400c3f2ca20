// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hvdc_cba_core::Execution;

use commands::{cost, freq, market, plan, synth};
use config::StudyConfig;
use error::CliError;
use output::Outputs;

/// Interconnector loss-factor market studies and frequency-security remedial
/// action cost-benefit analysis.
#[derive(Debug, Parser)]
#[command(name = "hvdc-cba", version, propagate_version = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Study configuration (TOML). Flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses every core, 1 runs sequentially [default: 0]
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every stochastic step
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Network definition (network.json)
    #[arg(long, global = true, value_name = "FILE")]
    network: Option<PathBuf>,
    /// Hourly bids (bids.csv)
    #[arg(long, global = true, value_name = "FILE")]
    bids: Option<PathBuf>,
    /// Hourly kinetic energy in GWs (ek.csv)
    #[arg(long = "ek-series", global = true, value_name = "FILE")]
    ek_series: Option<PathBuf>,
    /// Price parameters (prices.json)
    #[arg(long, global = true, value_name = "FILE")]
    prices: Option<PathBuf>,
    /// Frequency study (model.json) [default: built-in model]
    #[arg(long, global = true, value_name = "FILE")]
    model: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Zonal market clearing with interconnector loss factors
    Market {
        #[command(subcommand)]
        command: market::MarketCommand,
    },
    /// Frequency response simulation and remedial-action sizing
    Freq {
        #[command(subcommand)]
        command: freq::FreqCommand,
    },
    /// Remedial plans from a kinetic-energy series
    Plan {
        #[command(subcommand)]
        command: plan::PlanCommand,
    },
    /// Cost-benefit comparison of remedial strategies
    Cost {
        #[command(subcommand)]
        command: cost::CostCommand,
    },
    /// Generate a seeded synthetic dataset
    Synth(synth::SynthArgs),
}

/// Resolved configuration shared by every command.
pub struct Context {
    pub config: StudyConfig,
    pub exec: Execution,
}

fn context(global: &Global) -> Result<(Context, usize), CliError> {
    let mut config = match &global.config {
        Some(path) => StudyConfig::load(path)?,
        None => StudyConfig::default(),
    };
    let i = &mut config.inputs;
    for (slot, flag) in [
        (&mut i.network, &global.network),
        (&mut i.bids, &global.bids),
        (&mut i.ek, &global.ek_series),
        (&mut i.prices, &global.prices),
        (&mut i.model, &global.model),
    ] {
        if flag.is_some() {
            *slot = flag.clone();
        }
    }
    if global.out.is_some() {
        config.out_dir = global.out.clone();
    }
    if global.seed.is_some() {
        config.seed = global.seed;
    }
    if global.workers.is_some() {
        config.workers = global.workers;
    }
    let workers = config.workers.unwrap_or(0);
    let exec = Execution::from_workers(workers);
    Ok((Context { config, exec }, workers))
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    let (mut ctx, workers) = context(&cli.global)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {workers} workers: {e}")))?;
    let mut outputs = Outputs::default();
    let (name, summary) = pool.install(|| -> Result<_, CliError> {
        Ok(match &cli.command {
            Command::Market { command } => market::run(&mut ctx, command, &mut outputs)?,
            Command::Freq { command } => freq::run(&mut ctx, command, &mut outputs)?,
            Command::Plan { command } => plan::run(&mut ctx, command, &mut outputs)?,
            Command::Cost { command } => cost::run(&mut ctx, command, &mut outputs)?,
            Command::Synth(args) => synth::run(&mut ctx, args, &mut outputs)?,
        })
    })?;
    let dir = ctx.config.out_dir();
    outputs.commit(&dir)?;
    Ok(serde_json::json!({
        "command": name,
        "out_dir": dir,
        "outputs": outputs.names(),
        "summary": summary,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            // A closed pipe (e.g. `| head`) is not an error of the run.
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
