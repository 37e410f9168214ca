use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::pricing::winner_bids;
use super::{allocate_greedy, AgentId, AuctionError, AuctionOutcome, BidProfile, PricingRule};
use crate::knapsack::{solve_exact, KnapsackError, BRUTE_FORCE_MAX_ITEMS};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VcgAllocation {
    Exact,
    Greedy,
}

/// Clarke-pivot payments: `p_i = W(others | i absent) - W(others | chosen
/// allocation)`, both welfare terms computed with `allocation`.
///
/// Under `Greedy` the mechanism is not truthful and payments can be
/// negative.
pub fn vcg_payments(profile: &BidProfile, allocation: VcgAllocation) -> Result<AuctionOutcome, AuctionError> {
    if allocation == VcgAllocation::Exact && profile.len() > BRUTE_FORCE_MAX_ITEMS {
        return Err(KnapsackError::OracleLimit {
            items: profile.len(),
            limit: BRUTE_FORCE_MAX_ITEMS,
        }
        .into());
    }
    let winners = allocate(profile, allocation)?;
    let bids = winner_bids(profile, &winners)?;
    let total: u64 = bids.iter().map(|b| b.amount).sum();

    let mut payments = BTreeMap::new();
    for b in &bids {
        let without = profile.without(b.agent_id);
        let alt = allocate(&without, allocation)?;
        let alt_welfare: u64 = alt
            .iter()
            .map(|a| without.bid(*a).expect("winner from profile").amount)
            .sum();
        let others_here = total - b.amount;
        payments.insert(b.agent_id, alt_welfare as i64 - others_here as i64);
    }

    let rule = match allocation {
        VcgAllocation::Exact => PricingRule::VcgExact,
        VcgAllocation::Greedy => PricingRule::VcgGreedy,
    };
    Ok(AuctionOutcome {
        winners,
        revenue: payments.values().sum(),
        payments,
        allocated_value: total,
        rule,
        capped: Vec::new(),
    })
}

fn allocate(profile: &BidProfile, allocation: VcgAllocation) -> Result<Vec<AgentId>, AuctionError> {
    match allocation {
        VcgAllocation::Greedy => Ok(allocate_greedy(profile)),
        VcgAllocation::Exact => match profile.to_instance() {
            None => Ok(Vec::new()),
            Some(inst) => Ok(solve_exact(&inst)?
                .selected
                .into_iter()
                .map(|id| AgentId(id.0))
                .collect()),
        },
    }
}
