use serde::{Deserialize, Serialize};

use super::MevError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PgaResult {
    /// Index of the winning searcher; `None` when nobody bid.
    pub winner: Option<usize>,
    pub winning_fee: u64,
    /// Every bid in the order it was placed: (searcher, fee).
    pub bids: Vec<(usize, u64)>,
    /// Gas each searcher spent, paid whether or not it won.
    pub sunk_costs: Vec<u64>,
    /// Winning fee plus all gas spent.
    pub miner_revenue: u64,
}

impl PgaResult {
    /// Opportunity minus what the searcher paid (fee if it won, plus gas).
    pub fn payoff(&self, searcher: usize, opportunity_value: u64) -> i64 {
        let gas = self.sunk_costs[searcher] as i64;
        if self.winner == Some(searcher) {
            opportunity_value as i64 - self.winning_fee as i64 - gas
        } else {
            -gas
        }
    }
}

/// Open ascending fee escalation between searchers racing for one
/// opportunity.
///
/// Searchers take turns in index order; the searcher not currently leading
/// raises the fee by `increment` if, after paying that fee and all of its
/// gas so far plus this bid's, it would not lose money. Escalation stops
/// when a full round passes without a bid. Every bid costs its sender
/// `per_bid_gas_cost`, win or lose.
pub fn run_pga(
    opportunity_value: u64,
    searchers: usize,
    increment: u64,
    per_bid_gas_cost: u64,
) -> Result<PgaResult, MevError> {
    if searchers < 2 {
        return Err(MevError::TooFewSearchers(searchers));
    }
    if increment == 0 {
        return Err(MevError::ZeroIncrement);
    }
    let mut sunk = vec![0u64; searchers];
    let mut bids = Vec::new();
    let mut leader: Option<usize> = None;
    let mut fee = 0u64;
    let mut idle = 0;
    let mut turn = 0;
    while idle < searchers {
        let s = turn % searchers;
        turn += 1;
        if leader == Some(s) {
            idle += 1;
            continue;
        }
        let next = fee.saturating_add(increment);
        let cost = u128::from(next) + u128::from(sunk[s]) + u128::from(per_bid_gas_cost);
        if cost <= u128::from(opportunity_value) {
            fee = next;
            sunk[s] += per_bid_gas_cost;
            bids.push((s, fee));
            leader = Some(s);
            idle = 0;
        } else {
            idle += 1;
        }
    }
    let gas: u64 = sunk.iter().sum();
    let winning_fee = if leader.is_some() { fee } else { 0 };
    Ok(PgaResult {
        winner: leader,
        winning_fee,
        bids,
        sunk_costs: sunk,
        miner_revenue: winning_fee + gas,
    })
}
