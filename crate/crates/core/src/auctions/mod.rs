//! Sealed-bid knapsack auctions.
//!
//! Allocation is the 0-1 greedy with the best-single-item comparison
//! ([`allocate_greedy`]); payments come from one of the pricing rules in
//! [`PricingRule`]. For bidders of unequal size the second-price and uniform
//! rules work on bid per unit of size and charge `per_unit * own_size`.

mod pricing;
mod vcg;
mod verify;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knapsack::{greedy_01_with_priority, Item, ItemId, KnapsackError, KnapsackInstance};

pub use pricing::{critical_payments, price_dp, price_gsp, price_up};
pub use vcg::{vcg_payments, VcgAllocation};
pub use verify::{
    allocate_lowest_density_first, payoff, verify_monotonicity, verify_truthfulness, verify_truthfulness_suite,
    DeviationWitness, MonotonicityConfig, MonotonicityReport, MonotonicityWitness, SuiteTruthfulness,
    TruthfulnessConfig, TruthfulnessReport, MAX_MONOTONICITY_AGENTS, MAX_TRUTHFULNESS_AGENTS,
    MAX_VERIFICATION_EVALUATIONS,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct AgentId(pub u64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bid {
    pub agent_id: AgentId,
    pub amount: u64,
    pub size: u64,
}

impl Bid {
    pub fn new(agent_id: u64, amount: u64, size: u64) -> Self {
        Self {
            agent_id: AgentId(agent_id),
            amount,
            size,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuctionError {
    #[error("capacity must be positive")]
    ZeroCapacity,
    #[error("bid of agent {0} has zero size")]
    ZeroSize(AgentId),
    #[error("duplicate agent id {0}")]
    DuplicateAgent(AgentId),
    #[error("contract violation: winner {0} is not in the bid profile")]
    UnknownWinner(AgentId),
    #[error("contract violation: winners exceed capacity ({used} > {capacity})")]
    OverCapacity { used: u64, capacity: u64 },
    #[error("verification limited to {limit} agents, profile has {agents}")]
    TooManyAgents { agents: usize, limit: usize },
    #[error("bid grid too large: {evaluations} evaluations exceeds {limit}")]
    GridTooLarge { evaluations: u128, limit: u64 },
    #[error("bid grid step must be positive")]
    ZeroStep,
    #[error(transparent)]
    Knapsack(#[from] KnapsackError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidProfile {
    bids: Vec<Bid>,
    capacity: u64,
}

impl BidProfile {
    pub fn new(bids: Vec<Bid>, capacity: u64) -> Result<Self, AuctionError> {
        if capacity == 0 {
            return Err(AuctionError::ZeroCapacity);
        }
        let mut seen = HashSet::with_capacity(bids.len());
        for b in &bids {
            if b.size == 0 {
                return Err(AuctionError::ZeroSize(b.agent_id));
            }
            if !seen.insert(b.agent_id) {
                return Err(AuctionError::DuplicateAgent(b.agent_id));
            }
        }
        Ok(Self { bids, capacity })
    }

    pub fn bids(&self) -> &[Bid] {
        &self.bids
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn bid(&self, agent: AgentId) -> Option<&Bid> {
        self.bids.iter().find(|b| b.agent_id == agent)
    }

    /// Copy of the profile with `agent`'s bid replaced by `amount`.
    pub fn with_bid(&self, agent: AgentId, amount: u64) -> Self {
        let mut out = self.clone();
        if let Some(b) = out.bids.iter_mut().find(|b| b.agent_id == agent) {
            b.amount = amount;
        }
        out
    }

    /// Copy of the profile without `agent`.
    pub fn without(&self, agent: AgentId) -> Self {
        Self {
            bids: self.bids.iter().filter(|b| b.agent_id != agent).copied().collect(),
            capacity: self.capacity,
        }
    }

    /// The profile as a knapsack instance with `value = bid`, or `None` when
    /// there are no bids.
    pub fn to_instance(&self) -> Option<KnapsackInstance> {
        if self.bids.is_empty() {
            return None;
        }
        let items = self
            .bids
            .iter()
            .map(|b| Item {
                id: ItemId(b.agent_id.0),
                size: b.size,
                value: b.amount,
            })
            .collect();
        Some(KnapsackInstance::new(items, self.capacity).expect("validated profile"))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PricingRule {
    /// Discriminatory price: pay your bid.
    Dp,
    /// Generalized second price on the per-unit ladder.
    Gsp,
    /// Uniform price: highest losing per-unit bid.
    Up,
    /// Threshold bid under the greedy allocation.
    Critical,
    VcgExact,
    VcgGreedy,
}

impl PricingRule {
    pub const SEALED: [PricingRule; 3] = [PricingRule::Dp, PricingRule::Gsp, PricingRule::Up];

    pub fn name(self) -> &'static str {
        match self {
            PricingRule::Dp => "DP",
            PricingRule::Gsp => "GSP",
            PricingRule::Up => "UP",
            PricingRule::Critical => "CRITICAL",
            PricingRule::VcgExact => "VCG_EXACT",
            PricingRule::VcgGreedy => "VCG_GREEDY",
        }
    }

    /// Rules whose payments never exceed the bid.
    pub fn is_bid_bounded(self) -> bool {
        !matches!(self, PricingRule::VcgExact | PricingRule::VcgGreedy)
    }
}

impl fmt::Display for PricingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PricingRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "DP" => Ok(PricingRule::Dp),
            "GSP" => Ok(PricingRule::Gsp),
            "UP" => Ok(PricingRule::Up),
            "CRITICAL" => Ok(PricingRule::Critical),
            "VCG_EXACT" | "VCG" => Ok(PricingRule::VcgExact),
            "VCG_GREEDY" => Ok(PricingRule::VcgGreedy),
            other => Err(format!("unknown pricing rule `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    /// Winners in allocation order.
    pub winners: Vec<AgentId>,
    /// Payments of winners only. VCG under greedy allocation can go negative.
    pub payments: BTreeMap<AgentId, i64>,
    pub revenue: i64,
    /// Sum of winning bids.
    pub allocated_value: u64,
    pub rule: PricingRule,
    /// Winners whose ladder price exceeded their own bid and was capped at it.
    pub capped: Vec<AgentId>,
}

impl AuctionOutcome {
    pub fn payment(&self, agent: AgentId) -> i64 {
        self.payments.get(&agent).copied().unwrap_or(0)
    }

    pub fn won(&self, agent: AgentId) -> bool {
        self.payments.contains_key(&agent)
    }
}

/// Greedy allocation (density order, skip-and-continue, best-single-item
/// comparison) with ties broken toward lower agent ids.
pub fn allocate_greedy(profile: &BidProfile) -> Vec<AgentId> {
    allocate_greedy_with_priority(profile, None)
}

/// [`allocate_greedy`] with `priority` winning ties against other agents.
pub fn allocate_greedy_with_priority(profile: &BidProfile, priority: Option<AgentId>) -> Vec<AgentId> {
    match profile.to_instance() {
        None => Vec::new(),
        Some(inst) => greedy_01_with_priority(&inst, true, priority.map(|a| ItemId(a.0)))
            .selected
            .into_iter()
            .map(|id| AgentId(id.0))
            .collect(),
    }
}

/// Runs the full mechanism: greedy allocation followed by `rule`'s prices
/// (VCG rules use their own allocation).
pub fn run_mechanism(rule: PricingRule, profile: &BidProfile) -> Result<AuctionOutcome, AuctionError> {
    match rule {
        PricingRule::Dp => price_dp(profile, &allocate_greedy(profile)),
        PricingRule::Gsp => price_gsp(profile, &allocate_greedy(profile)),
        PricingRule::Up => price_up(profile, &allocate_greedy(profile)),
        PricingRule::Critical => Ok(critical_payments(profile)),
        PricingRule::VcgExact => vcg_payments(profile, VcgAllocation::Exact),
        PricingRule::VcgGreedy => vcg_payments(profile, VcgAllocation::Greedy),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_validation() {
        assert_eq!(BidProfile::new(vec![], 0), Err(AuctionError::ZeroCapacity));
        assert_eq!(
            BidProfile::new(vec![Bid::new(1, 3, 0)], 2),
            Err(AuctionError::ZeroSize(AgentId(1)))
        );
        assert_eq!(
            BidProfile::new(vec![Bid::new(1, 3, 1), Bid::new(1, 4, 1)], 2),
            Err(AuctionError::DuplicateAgent(AgentId(1)))
        );
        assert!(BidProfile::new(vec![], 5).unwrap().to_instance().is_none());
    }

    #[test]
    fn greedy_allocation_examples() {
        let unit = BidProfile::new(vec![Bid::new(1, 5, 1), Bid::new(2, 3, 1), Bid::new(3, 2, 1)], 2).unwrap();
        assert_eq!(allocate_greedy(&unit), vec![AgentId(1), AgentId(2)]);

        // per-unit 5, 3, 3: agent 2 beats agent 3 on id, agent 3 no longer fits
        let mixed = BidProfile::new(vec![Bid::new(1, 10, 2), Bid::new(2, 6, 2), Bid::new(3, 3, 1)], 4).unwrap();
        assert_eq!(allocate_greedy(&mixed), vec![AgentId(1), AgentId(2)]);

        let trap = BidProfile::new(vec![Bid::new(1, 1, 1), Bid::new(2, 9, 10)], 10).unwrap();
        assert_eq!(allocate_greedy(&trap), vec![AgentId(2)]);
    }

    #[test]
    fn rule_names_round_trip() {
        for rule in [
            PricingRule::Dp,
            PricingRule::Gsp,
            PricingRule::Up,
            PricingRule::Critical,
            PricingRule::VcgExact,
            PricingRule::VcgGreedy,
        ] {
            assert_eq!(rule.name().parse::<PricingRule>().unwrap(), rule);
        }
        assert_eq!("vcg-greedy".parse::<PricingRule>().unwrap(), PricingRule::VcgGreedy);
        assert!("second".parse::<PricingRule>().is_err());
    }
}
