use std::path::PathBuf;

use blocklab_core::formats::parse_mempool;
use blocklab_core::pipeline::{
    compare_eras, run_epochs_fixed, write_comparison_csv, write_events_csv, write_ledger_csv, write_slot_csv,
    EraSummary,
};
use blocklab_core::RunReport;

use super::Context;
use crate::failure::Failure;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Scenario file (same as `--config`).
    scenario: Option<PathBuf>,
    /// Overrides `[era] epochs`.
    #[arg(long)]
    epochs: Option<u64>,
    /// Replays this mempool every slot instead of generating one. Its
    /// capacity becomes the block gas limit, with half of it as target.
    #[arg(long, value_name = "FILE")]
    mempool: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: Args) -> Result<(), Failure> {
    let mut run = ctx.load(args.scenario.as_deref())?;
    let eras = run.scenario.era.configs()?;
    let epochs = args.epochs.unwrap_or(run.scenario.era.epochs);
    if epochs == 0 {
        return Err(Failure::input("--epochs must be at least 1"));
    }
    let mut sim = run.scenario.sim();
    let fixed = match &args.mempool {
        Some(p) => {
            let text = run.read(p)?;
            let (cap, txs) = parse_mempool(&text).map_err(|e| Failure::from(e).context(p.display()))?;
            sim.feemarket.max_gas = cap;
            sim.feemarket.target_gas = (cap / 2).max(1);
            Some(txs)
        }
        None => None,
    };
    sim.validate()?;
    let out = ctx.begin("simulate", &run)?;

    let reports: Vec<RunReport> = match &fixed {
        Some(txs) => eras
            .iter()
            .map(|era| run_epochs_fixed(era, &sim, epochs, ctx.seed, txs))
            .collect::<Result<_, _>>()?,
        None => compare_eras(&eras, &sim, epochs, ctx.seed)?,
    };

    let mut slots = Vec::new();
    write_slot_csv(&mut slots, &reports)?;
    out.primary("slots.csv", &slots)?;
    let mut ledger = Vec::new();
    write_ledger_csv(&mut ledger, &reports)?;
    out.secondary("ledger.csv", &ledger)?;
    for r in &reports {
        let mut events = Vec::new();
        write_events_csv(&mut events, r)?;
        out.secondary(&format!("events_{}.csv", r.era.era), &events)?;
    }
    if reports.len() > 1 {
        let rows: Vec<EraSummary> = reports.iter().map(EraSummary::of).collect();
        let mut table = Vec::new();
        write_comparison_csv(&mut table, &rows)?;
        out.secondary("comparison.csv", &table)?;
    }
    Ok(())
}
