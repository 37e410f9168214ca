use std::path::PathBuf;

use blocklab_core::feemarket::{find_contraction_threshold, simulate_base_fee, DemandUser, LinearBurn, Threshold};
use blocklab_core::pipeline::generate_mempool;
use blocklab_core::rng::derive;

use super::Context;
use crate::failure::Failure;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Scenario file (same as `--config`); demand comes from `[mempool]`.
    scenario: Option<PathBuf>,
    /// Blocks in the trajectory.
    #[arg(long, default_value_t = 100)]
    blocks: u64,
    /// Print the smallest volume whose burn exceeds issuance instead.
    #[arg(long)]
    threshold: bool,
    /// Issuance per block for `--threshold` [default: `[era] block_reward`].
    #[arg(long)]
    issuance: Option<u64>,
    /// Burn per block is `burn_numer * N / burn_denom` for volume `N`.
    #[arg(long, default_value_t = 2)]
    burn_numer: u64,
    #[arg(long, default_value_t = 1000)]
    burn_denom: u64,
    /// Largest volume searched.
    #[arg(long, default_value_t = 1_000_000_000)]
    max_volume: u64,
}

pub fn run(ctx: &Context, args: Args) -> Result<(), Failure> {
    let run = ctx.load(args.scenario.as_deref())?;
    let out = ctx.begin("feemarket", &run)?;

    if args.threshold {
        if args.burn_denom == 0 {
            return Err(Failure::input("--burn-denom must be positive"));
        }
        let issuance = args.issuance.unwrap_or(run.scenario.era.block_reward);
        let schedule = LinearBurn {
            numer: args.burn_numer,
            denom: args.burn_denom,
        };
        let n = match find_contraction_threshold(issuance, &schedule, args.max_volume)? {
            Threshold::At(n) => n.to_string(),
            Threshold::Never => "never".into(),
        };
        let csv = format!(
            "issuance,burn_numer,burn_denom,max_volume,threshold\n{issuance},{},{},{},{n}\n",
            args.burn_numer, args.burn_denom, args.max_volume
        );
        return out.primary("threshold.csv", csv.as_bytes());
    }

    let pool = generate_mempool(derive(ctx.seed, 0), &run.scenario.mempool)?;
    let demand: Vec<DemandUser> = pool
        .iter()
        .map(|t| DemandUser {
            id: t.tx_id.0,
            value_per_gas: t.bid / t.size,
            gas: t.size,
        })
        .collect();
    let blocks = simulate_base_fee(&run.scenario.feemarket, &demand, args.blocks)?;
    let mut csv = String::from("block,base_fee,gas_used,burn,tips\n");
    for b in blocks {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            b.block, b.base_fee, b.gas_used, b.burn, b.tips
        ));
    }
    out.primary("feemarket.csv", csv.as_bytes())
}
