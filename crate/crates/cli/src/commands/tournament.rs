use std::fmt::Write as _;
use std::path::PathBuf;

use blocklab_core::agents::{tournament, train, RuleResult};
use blocklab_core::{PricingRule, StrategyKind};

use super::{fixed, Context};
use crate::failure::Failure;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Scenario file (same as `--config`); bidders come from `[agents]`.
    scenario: Option<PathBuf>,
    /// Number of seeds, starting at `--seed`.
    #[arg(long, default_value_t = 30)]
    seeds: u64,
    /// Overrides `[agents] kind`: truthful, shade or qlearn.
    #[arg(long)]
    agents: Option<StrategyKind>,
    /// Rules in their expected revenue order; repeatable.
    #[arg(long = "rule", default_values_t = PricingRule::SEALED)]
    rules: Vec<PricingRule>,
}

const HEADER: &str =
    "scope,seed,rule,revenue,efficiency,bid_value_ratio,revenue_ordered,efficiency_ordered,both_ordered";

fn row(csv: &mut String, scope: &str, seed: &str, r: &RuleResult, flags: [f64; 3]) {
    let _ = writeln!(
        csv,
        "{scope},{seed},{},{},{},{},{},{},{}",
        r.rule,
        fixed(r.revenue),
        fixed(r.efficiency),
        fixed(r.bid_value_ratio),
        fixed(flags[0]),
        fixed(flags[1]),
        fixed(flags[2]),
    );
}

pub fn run(ctx: &Context, args: Args) -> Result<(), Failure> {
    let run = ctx.load(args.scenario.as_deref())?;
    let mut config = run.scenario.agents.bidders.clone();
    if let Some(kind) = args.agents {
        config.kind = kind;
    }
    config.validate()?;
    if args.seeds == 0 {
        return Err(Failure::input("--seeds must be at least 1"));
    }
    let seeds: Vec<u64> = (0..args.seeds).map(|i| ctx.seed.wrapping_add(i)).collect();
    let out = ctx.begin("tournament", &run)?;

    let t = tournament(&args.rules, &config, &seeds)?;
    let mut csv = format!("{HEADER}\n");
    for s in &t.seeds {
        let flags = [s.revenue_ordered, s.efficiency_ordered, s.both_ordered()].map(|b| f64::from(u8::from(b)));
        for r in &s.rules {
            row(&mut csv, "seed", &s.seed.to_string(), r, flags);
        }
    }
    for r in &t.aggregate {
        row(
            &mut csv,
            "aggregate",
            "",
            r,
            [t.revenue_fraction, t.efficiency_fraction, t.both_fraction],
        );
    }
    log::info!(
        "both orderings hold in {} of {} seeds",
        fixed(t.both_fraction),
        seeds.len()
    );
    out.primary("ranking.csv", csv.as_bytes())?;

    if out.has_dir() {
        let mut training = String::from("rule,episode,phase,revenue,surplus,efficiency\n");
        for &rule in &args.rules {
            let report = train(rule, &config, ctx.seed)?;
            for e in &report.episodes {
                let phase = if e.episode < report.eval_start { "train" } else { "eval" };
                let _ = writeln!(
                    training,
                    "{rule},{},{phase},{},{},{}",
                    e.episode,
                    e.revenue,
                    e.surplus,
                    fixed(e.efficiency)
                );
            }
        }
        out.secondary("training.csv", training.as_bytes())?;
    }
    Ok(())
}
