use std::fmt::Write as _;
use std::path::PathBuf;

use blocklab_core::auctions::{
    allocate_greedy, allocate_lowest_density_first, run_mechanism, verify_monotonicity, verify_truthfulness_suite,
    MonotonicityConfig, TruthfulnessConfig,
};
use blocklab_core::formats::{parse_profile, write_outcome, ProfileFile, OUTCOME_HEADER};
use blocklab_core::knapsack::solve_exact;
use blocklab_core::suites::ProfileSuite;
use blocklab_core::{AgentId, BidProfile, PricingRule};
use clap::ValueEnum;

use super::Context;
use crate::failure::Failure;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    /// No agent gains by misreporting its value.
    Truthful,
    /// Winners keep winning when they raise their bids.
    Monotone,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Profile file: `K=<capacity>` then `agent_id,size,bid[,true_value]`
    /// lines. Verification draws a seeded suite when omitted.
    file: Option<PathBuf>,
    /// dp, gsp, up, critical, vcg-exact or vcg-greedy; repeatable.
    #[arg(long = "rule", required = true)]
    rules: Vec<PricingRule>,
    /// Check a property instead of printing the outcome.
    #[arg(long, value_enum)]
    verify: Option<Property>,
    /// A witness is the expected result; finding none is the violation.
    #[arg(long, requires = "verify")]
    expect_witness: bool,
    /// Suite size for verification without a file [default: 200 for
    /// truthful, 500 for monotone].
    #[arg(long, value_name = "N")]
    suite: Option<usize>,
    /// Verify monotonicity of the lowest-density-first allocation instead.
    #[arg(long, requires = "verify")]
    control: bool,
    /// Bid grid step.
    #[arg(long, default_value_t = 1)]
    step: u64,
    /// Largest bid tried [default: twice the largest value in each profile].
    #[arg(long)]
    max_bid: Option<u64>,
}

/// Winners of the allocation `rule` prices.
fn allocation(rule: PricingRule, profile: &BidProfile) -> Vec<AgentId> {
    match rule {
        PricingRule::VcgExact => profile
            .to_instance()
            .and_then(|inst| solve_exact(&inst).ok())
            .map(|r| r.selected.iter().map(|id| AgentId(id.0)).collect())
            .unwrap_or_default(),
        _ => allocate_greedy(profile),
    }
}

fn check(found: bool, expect: bool, what: &str) -> Result<(), Failure> {
    match (found, expect) {
        (true, false) => Err(Failure::Violation(format!("{what}: witness found"))),
        (false, true) => Err(Failure::Violation(format!("{what}: no witness found"))),
        _ => Ok(()),
    }
}

fn truthful(args: &Args, profiles: &[BidProfile]) -> Result<(String, Vec<(bool, String)>), Failure> {
    let cfg = TruthfulnessConfig {
        step: args.step,
        max_bid: args.max_bid,
    };
    let mut csv = String::from(
        "rule,instances,violating,evaluations,instance,agent_id,value,truthful_payoff,deviation_bid,deviation_payoff\n",
    );
    let mut results = Vec::new();
    for &rule in &args.rules {
        let r = verify_truthfulness_suite(rule, profiles, &cfg)?;
        let _ = write!(
            csv,
            "{rule},{},{},{},",
            r.instances,
            r.violating_instances.len(),
            r.evaluations
        );
        match &r.first_witness {
            Some((i, w)) => {
                let _ = writeln!(
                    csv,
                    "{i},{},{},{},{},{}",
                    w.agent.0, w.value, w.truthful_payoff, w.deviation_bid, w.deviation_payoff
                );
            }
            None => csv.push_str(",,,,,\n"),
        }
        log::info!(
            "{rule}: {} of {} profiles manipulable",
            r.violating_instances.len(),
            r.instances
        );
        results.push((!r.truthful(), format!("{rule} truthfulness")));
    }
    Ok((csv, results))
}

fn monotone(args: &Args, profiles: &[BidProfile]) -> Result<(String, Vec<(bool, String)>), Failure> {
    let cfg = MonotonicityConfig {
        step: args.step,
        max_bid: args.max_bid,
    };
    let mut csv = String::from("allocation,instances,perturbations,passed,instance,agent_id,original_bid,raised_bid\n");
    let mut results = Vec::new();
    let targets: Vec<(String, Option<PricingRule>)> = if args.control {
        vec![("LOWEST_DENSITY_FIRST".into(), None)]
    } else {
        args.rules.iter().map(|r| (r.to_string(), Some(*r))).collect()
    };
    for (name, rule) in targets {
        let r = match rule {
            Some(rule) => verify_monotonicity(|p: &BidProfile| allocation(rule, p), profiles, &cfg)?,
            None => verify_monotonicity(allocate_lowest_density_first, profiles, &cfg)?,
        };
        let _ = write!(
            csv,
            "{name},{},{},{},",
            r.instances,
            r.perturbations,
            u8::from(r.passed)
        );
        match &r.counterexample {
            Some(w) => {
                let _ = writeln!(csv, "{},{},{},{}", w.instance, w.agent.0, w.original_bid, w.raised_bid);
            }
            None => csv.push_str(",,,\n"),
        }
        results.push((!r.passed, format!("{name} monotonicity")));
    }
    Ok((csv, results))
}

pub fn run(ctx: &Context, args: Args) -> Result<(), Failure> {
    let mut run = ctx.load(None)?;
    let file: Option<ProfileFile> = match &args.file {
        Some(p) => {
            let text = run.read(p)?;
            Some(parse_profile(&text).map_err(|e| Failure::from(e).context(p.display()))?)
        }
        None => None,
    };

    let Some(property) = args.verify else {
        let file = file.ok_or_else(|| Failure::input("a profile file is needed unless --verify is given"))?;
        let out = ctx.begin("auction", &run)?;
        let mut csv = format!("{OUTCOME_HEADER}\n").into_bytes();
        for &rule in &args.rules {
            let outcome = run_mechanism(rule, &file.profile)?;
            write_outcome(&mut csv, &file.profile, &outcome)?;
        }
        return out.primary("outcome.csv", &csv);
    };

    let profiles = match file {
        // The deviation search starts from the true values.
        Some(f) => vec![BidProfile::new(f.values(), f.profile.capacity())?],
        None => {
            let (suite, default) = match property {
                Property::Truthful => (ProfileSuite::TRUTHFULNESS, 200),
                Property::Monotone => (ProfileSuite::MONOTONICITY, 500),
            };
            suite.generate(ctx.seed, args.suite.unwrap_or(default))
        }
    };
    let out = ctx.begin("auction", &run)?;
    let (csv, results) = match property {
        Property::Truthful => truthful(&args, &profiles)?,
        Property::Monotone => monotone(&args, &profiles)?,
    };
    out.primary("verify.csv", csv.as_bytes())?;
    for (found, what) in results {
        check(found, args.expect_witness, &what)?;
    }
    Ok(())
}
