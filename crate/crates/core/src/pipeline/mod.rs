//! Slot-by-slot block production across five market designs, with an exact
//! flow-of-funds ledger per block.
//!
//! | era | who orders | MEV competition | fees |
//! |---|---|---|---|
//! | `BASELINE` | miner | none | fee auction |
//! | `PGA_ERA` | miner | open priority gas auctions | fee auction |
//! | `RELAY_ERA` | miner | sealed bundles through a relay | fee auction |
//! | `EIP1559_ERA` | miner | sealed bundles | base fee burned, tips auctioned |
//! | `PBS_ERA` | competing builders, proposer picks the highest bribe | sealed bundles | as above |

mod block;
mod ledger;
mod mempool;
mod report;
mod scenario;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auctions::{AuctionError, PricingRule};
use crate::feemarket::{BaseFeeState, FeeMarketConfig, FeeMarketError};
use crate::mev::{MempoolTx, MevError, MevEvent, TxId};

pub use block::{run_block, select_header, SealedHeader, SlotDraws};
pub use ledger::{ConservationError, FlowLedger, Payoffs};
pub use mempool::{generate_mempool, KindMix, MempoolParams};
pub use report::{write_comparison_csv, write_events_csv, write_ledger_csv, write_slot_csv, EraSummary};
pub use scenario::{AgentsSection, EraSection, Scenario};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("ledger imbalance in slot {slot}: {detail}")]
    Imbalance { slot: u64, detail: String },
    #[error(transparent)]
    Auction(#[from] AuctionError),
    #[error(transparent)]
    FeeMarket(#[from] FeeMarketError),
    #[error(transparent)]
    Mev(#[from] MevError),
    #[error(transparent)]
    Knapsack(#[from] crate::knapsack::KnapsackError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Era {
    #[serde(rename = "BASELINE")]
    Baseline,
    #[serde(rename = "PGA_ERA")]
    Pga,
    #[serde(rename = "RELAY_ERA")]
    Relay,
    #[serde(rename = "EIP1559_ERA")]
    Eip1559,
    #[serde(rename = "PBS_ERA")]
    Pbs,
}

impl Era {
    pub const ALL: [Era; 5] = [Era::Baseline, Era::Pga, Era::Relay, Era::Eip1559, Era::Pbs];

    pub fn name(self) -> &'static str {
        match self {
            Era::Baseline => "BASELINE",
            Era::Pga => "PGA_ERA",
            Era::Relay => "RELAY_ERA",
            Era::Eip1559 => "EIP1559_ERA",
            Era::Pbs => "PBS_ERA",
        }
    }

    pub fn has_relays(self) -> bool {
        matches!(self, Era::Relay | Era::Eip1559 | Era::Pbs)
    }

    pub fn burns(self) -> bool {
        matches!(self, Era::Eip1559 | Era::Pbs)
    }

    pub fn separates_proposer(self) -> bool {
        self == Era::Pbs
    }
}

impl fmt::Display for Era {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Era {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.to_ascii_uppercase().replace('-', "_");
        Era::ALL
            .into_iter()
            .find(|e| e.name() == up || e.name().trim_end_matches("_ERA") == up)
            .ok_or_else(|| format!("unknown era `{s}`"))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EraConfig {
    pub era: Era,
    pub auction_rule: PricingRule,
    pub block_reward: u64,
    pub relay_count: u32,
    pub builder_count: u32,
    pub slot_seconds: u64,
    pub slots_per_epoch: u64,
}

impl EraConfig {
    pub fn new(era: Era) -> Self {
        Self {
            era,
            auction_rule: PricingRule::Dp,
            block_reward: 2_000_000_000,
            relay_count: u32::from(era.has_relays()),
            builder_count: if era == Era::Pbs { 3 } else { 1 },
            slot_seconds: 12,
            slots_per_epoch: 32,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !matches!(
            self.auction_rule,
            PricingRule::Dp | PricingRule::Gsp | PricingRule::Up | PricingRule::Critical
        ) {
            return bad(format!("{} cannot price block space", self.auction_rule));
        }
        if !self.era.has_relays() && self.relay_count > 0 {
            return bad(format!(
                "{} has no relays, got relay_count {}",
                self.era, self.relay_count
            ));
        }
        if self.era.has_relays() && self.relay_count == 0 {
            return bad(format!("{} needs at least one relay", self.era));
        }
        if self.era == Era::Pbs && self.builder_count == 0 {
            return bad("PBS_ERA needs at least one builder".into());
        }
        if self.slots_per_epoch == 0 || self.slot_seconds == 0 {
            return bad("slot_seconds and slots_per_epoch must be positive".into());
        }
        Ok(())
    }
}

/// Searcher and builder behaviour inside the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketParams {
    pub searchers: usize,
    /// Gas used by one searcher transaction.
    pub searcher_gas: u64,
    pub pga_increment: u64,
    /// Cost of each priority-gas-auction bid, in value units.
    pub pga_gas_cost: u64,
    /// Sealed searcher bids are drawn as a fraction of the opportunity
    /// between these bounds.
    pub searcher_bid_min: f64,
    pub searcher_bid_max: f64,
    /// Chance that a given builder receives a given searcher's bundle.
    pub bundle_share: f64,
    /// Fraction of tips plus own MEV a builder offers the proposer.
    pub builder_bribe: f64,
    pub builder_mev: u64,
    pub proposer_mev: u64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            searchers: 3,
            searcher_gas: 150_000,
            pga_increment: 100_000,
            pga_gas_cost: 50_000,
            searcher_bid_min: 0.4,
            searcher_bid_max: 0.8,
            bundle_share: 0.7,
            builder_bribe: 0.9,
            builder_mev: 0,
            proposer_mev: 0,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(format!("[agents] {m}")));
        if self.searchers < 2 {
            return bad("at least 2 searchers are needed");
        }
        if self.searcher_gas == 0 || self.pga_increment == 0 {
            return bad("searcher_gas and pga_increment must be positive");
        }
        for (n, f) in [
            ("searcher_bid_min", self.searcher_bid_min),
            ("searcher_bid_max", self.searcher_bid_max),
            ("bundle_share", self.bundle_share),
            ("builder_bribe", self.builder_bribe),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad(&format!("{n} must lie in [0, 1]"));
            }
        }
        if self.searcher_bid_min > self.searcher_bid_max {
            return bad("searcher_bid_min exceeds searcher_bid_max");
        }
        Ok(())
    }
}

/// Everything except the era.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mempool: MempoolParams,
    pub feemarket: FeeMarketConfig,
    pub market: MarketParams,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.mempool.validate()?;
        self.market.validate()?;
        self.feemarket.state()?;
        Ok(())
    }
}

/// State carried from slot to slot.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    pub fees: BaseFeeState,
}

impl ChainState {
    pub fn new(config: &FeeMarketConfig) -> Result<Self, PipelineError> {
        Ok(Self { fees: config.state()? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub slot: u64,
    pub era: Era,
    pub ledger: FlowLedger,
    pub payoffs: Payoffs,
    pub gas_used: u64,
    /// Base fee in force for this block (0 outside burn eras).
    pub base_fee: u64,
    /// True value of included user transactions.
    pub realized_value: u64,
    /// Best achievable true value for the slot's mempool.
    pub optimal_value: u64,
    pub events: Vec<MevEvent>,
    pub order: Vec<TxId>,
    pub builder: Option<u32>,
    pub relay: Option<u32>,
    pub header: Option<String>,
}

impl BlockRecord {
    pub fn efficiency_ratio(&self) -> f64 {
        if self.optimal_value == 0 {
            1.0
        } else {
            self.realized_value as f64 / self.optimal_value as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub era: EraConfig,
    pub seed: u64,
    pub blocks: Vec<BlockRecord>,
    pub totals: FlowLedger,
}

impl RunReport {
    pub fn payoffs(&self) -> Payoffs {
        let mut p = Payoffs {
            pi_u: 0,
            pi_s: 0,
            pi_b: 0,
            pi_p: 0,
        };
        for b in &self.blocks {
            p.pi_u += b.payoffs.pi_u;
            p.pi_s += b.payoffs.pi_s;
            p.pi_b += b.payoffs.pi_b;
            p.pi_p += b.payoffs.pi_p;
        }
        p
    }

    pub fn mean_efficiency(&self) -> f64 {
        if self.blocks.is_empty() {
            return 1.0;
        }
        self.blocks.iter().map(BlockRecord::efficiency_ratio).sum::<f64>() / self.blocks.len() as f64
    }

    pub fn diverted(&self) -> u64 {
        self.mev_total(crate::mev::Classification::Diverting)
    }

    pub fn created(&self) -> u64 {
        self.mev_total(crate::mev::Classification::Creating)
    }

    fn mev_total(&self, class: crate::mev::Classification) -> u64 {
        self.blocks
            .iter()
            .flat_map(|b| &b.events)
            .filter(|e| e.classification == class)
            .map(|e| e.captured_value)
            .sum()
    }

    pub fn base_fees(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.base_fee).collect()
    }
}

/// Runs `epochs * slots_per_epoch` slots. Each slot draws a fresh mempool
/// from the seed and the slot number only, so different eras see the same
/// transactions and searcher draws.
pub fn run_epochs(era: &EraConfig, sim: &SimConfig, epochs: u64, seed: u64) -> Result<RunReport, PipelineError> {
    run_slots(era, sim, epochs, seed, |slot| {
        generate_mempool(crate::rng::derive(seed, slot), &sim.mempool)
    })
}

/// Like [`run_epochs`] but every slot sees the same given mempool.
pub fn run_epochs_fixed(
    era: &EraConfig,
    sim: &SimConfig,
    epochs: u64,
    seed: u64,
    mempool: &[MempoolTx],
) -> Result<RunReport, PipelineError> {
    for tx in mempool {
        tx.validate()?;
    }
    run_slots(era, sim, epochs, seed, |_| Ok(mempool.to_vec()))
}

fn run_slots(
    era: &EraConfig,
    sim: &SimConfig,
    epochs: u64,
    seed: u64,
    mut mempool_for: impl FnMut(u64) -> Result<Vec<MempoolTx>, PipelineError>,
) -> Result<RunReport, PipelineError> {
    if epochs == 0 {
        return Err(PipelineError::Config("epochs must be at least 1".into()));
    }
    era.validate()?;
    sim.validate()?;
    let mut state = ChainState::new(&sim.feemarket)?;
    let mut blocks = Vec::new();
    let mut totals = FlowLedger::default();
    for slot in 0..epochs * era.slots_per_epoch {
        let mempool = mempool_for(slot)?;
        let draws = SlotDraws::draw(seed, slot, mempool.len(), sim, era);
        let (record, next) = run_block(era, sim, slot, &mempool, &draws, &state)?;
        totals.add(&record.ledger);
        blocks.push(record);
        state = next;
    }
    Ok(RunReport {
        era: *era,
        seed,
        blocks,
        totals,
    })
}

/// One run per era over the same seed; eras run in parallel.
pub fn compare_eras(
    eras: &[EraConfig],
    sim: &SimConfig,
    epochs: u64,
    seed: u64,
) -> Result<Vec<RunReport>, PipelineError> {
    use rayon::prelude::*;
    eras.par_iter().map(|e| run_epochs(e, sim, epochs, seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn era_names() {
        for e in Era::ALL {
            assert_eq!(e.name().parse::<Era>().unwrap(), e);
        }
        assert_eq!("pbs".parse::<Era>().unwrap(), Era::Pbs);
    }

    #[test]
    fn era_validation() {
        let mut base = EraConfig::new(Era::Baseline);
        assert!(base.validate().is_ok());
        base.relay_count = 2;
        assert!(matches!(base.validate(), Err(PipelineError::Config(_))));
        let mut pbs = EraConfig::new(Era::Pbs);
        pbs.builder_count = 0;
        assert!(pbs.validate().is_err());
        let mut vcg = EraConfig::new(Era::Relay);
        vcg.auction_rule = PricingRule::VcgExact;
        assert!(vcg.validate().is_err());
    }
}
