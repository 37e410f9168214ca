//! `blocklab`: solve knapsack instances, run and verify auctions, simulate
//! block production eras, train bidders, and trace the base fee.
//!
//! Exit codes: 0 success, 1 property violation, 2 input error, 3 resource
//! limit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod failure;
mod output;

use commands::{auction, feemarket, simulate, solve, tournament, Context};

#[derive(Parser, Debug)]
#[command(name = "blocklab", version, about = "Block-building laboratory")]
struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Run directory for the manifest and CSV files. Without it the main
    /// table goes to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scenario file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pack a knapsack instance with one or more solvers.
    Solve(solve::Args),
    /// Run an auction on a bid profile, or verify a rule's properties.
    Auction(auction::Args),
    /// Simulate the eras of a scenario slot by slot.
    Simulate(simulate::Args),
    /// Train bidders under each pricing rule over many seeds.
    Tournament(tournament::Args),
    /// Base-fee trajectory under constant demand, or the burn threshold.
    Feemarket(feemarket::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let ctx = Context {
        seed: cli.seed,
        out: cli.out,
        config: cli.config,
        args: std::env::args().collect(),
    };
    let result = match cli.command {
        Command::Solve(a) => solve::run(&ctx, a),
        Command::Auction(a) => auction::run(&ctx, a),
        Command::Simulate(a) => simulate::run(&ctx, a),
        Command::Tournament(a) => tournament::run(&ctx, a),
        Command::Feemarket(a) => feemarket::run(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("blocklab: {f}");
            f.exit_code()
        }
    }
}
