use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use super::{
    allocate_greedy, allocate_greedy_with_priority, AgentId, AuctionError, AuctionOutcome, Bid, BidProfile, PricingRule,
};

/// Discriminatory pricing: each winner pays its bid.
pub fn price_dp(profile: &BidProfile, winners: &[AgentId]) -> Result<AuctionOutcome, AuctionError> {
    let bids = winner_bids(profile, winners)?;
    let payments = bids.iter().map(|b| (b.agent_id, b.amount)).collect();
    Ok(outcome(PricingRule::Dp, winners, &bids, payments, Vec::new()))
}

/// Generalized second price on the per-unit ladder. The winner at rank `j`
/// pays the per-unit bid of rank `j + 1` times its own size; the last winner
/// pays the highest losing per-unit bid times its own size.
pub fn price_gsp(profile: &BidProfile, winners: &[AgentId]) -> Result<AuctionOutcome, AuctionError> {
    let bids = winner_bids(profile, winners)?;
    let mut ranked = bids.clone();
    ranked.sort_by(by_density);
    let top_loser = highest_loser(profile, winners);

    let mut payments = BTreeMap::new();
    let mut capped = Vec::new();
    for (j, b) in ranked.iter().enumerate() {
        let reference = ranked.get(j + 1).or(top_loser);
        let price = ladder_price(b, reference, &mut capped);
        payments.insert(b.agent_id, price);
    }
    Ok(outcome(PricingRule::Gsp, winners, &bids, payments, capped))
}

/// Uniform pricing: every winner pays the highest losing per-unit bid times
/// its own size (nothing when there is no loser).
pub fn price_up(profile: &BidProfile, winners: &[AgentId]) -> Result<AuctionOutcome, AuctionError> {
    let bids = winner_bids(profile, winners)?;
    let top_loser = highest_loser(profile, winners);
    let mut payments = BTreeMap::new();
    let mut capped = Vec::new();
    for b in &bids {
        payments.insert(b.agent_id, ladder_price(b, top_loser, &mut capped));
    }
    Ok(outcome(PricingRule::Up, winners, &bids, payments, capped))
}

/// Threshold payments under [`allocate_greedy`]: each winner pays the
/// smallest integer bid at which it still wins, others fixed. A bidder tied
/// at its threshold is given the tie, so the search runs the allocation with
/// that bidder as tie priority.
pub fn critical_payments(profile: &BidProfile) -> AuctionOutcome {
    let winners = allocate_greedy(profile);
    let bids = winner_bids(profile, &winners).expect("winners come from the profile");
    let mut payments = BTreeMap::new();
    for b in &bids {
        payments.insert(b.agent_id, critical_bid(profile, b));
    }
    outcome(PricingRule::Critical, &winners, &bids, payments, Vec::new())
}

fn critical_bid(profile: &BidProfile, bid: &Bid) -> u64 {
    let agent = bid.agent_id;
    let wins =
        |amount: u64| allocate_greedy_with_priority(&profile.with_bid(agent, amount), Some(agent)).contains(&agent);
    if wins(0) {
        return 0;
    }
    if !wins(bid.amount) {
        log::warn!("agent {agent} wins only without tie priority; charging its bid");
        return bid.amount;
    }
    // invariant: loses at lo, wins at hi
    let (mut lo, mut hi) = (0u64, bid.amount);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if wins(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub(super) fn winner_bids(profile: &BidProfile, winners: &[AgentId]) -> Result<Vec<Bid>, AuctionError> {
    let mut seen = HashSet::with_capacity(winners.len());
    let mut used = 0u64;
    let mut out = Vec::with_capacity(winners.len());
    for &w in winners {
        let b = profile.bid(w).ok_or(AuctionError::UnknownWinner(w))?;
        if !seen.insert(w) {
            return Err(AuctionError::DuplicateAgent(w));
        }
        used = used.saturating_add(b.size);
        out.push(*b);
    }
    if used > profile.capacity() {
        return Err(AuctionError::OverCapacity {
            used,
            capacity: profile.capacity(),
        });
    }
    Ok(out)
}

pub(super) fn outcome(
    rule: PricingRule,
    winners: &[AgentId],
    bids: &[Bid],
    payments: BTreeMap<AgentId, u64>,
    capped: Vec<AgentId>,
) -> AuctionOutcome {
    let payments: BTreeMap<AgentId, i64> = payments
        .into_iter()
        .map(|(a, p)| (a, i64::try_from(p).expect("payment fits in i64")))
        .collect();
    AuctionOutcome {
        winners: winners.to_vec(),
        revenue: payments.values().sum(),
        payments,
        allocated_value: bids.iter().map(|b| b.amount).sum(),
        rule,
        capped,
    }
}

/// Decreasing bid per unit of size, lower id first.
fn by_density(a: &Bid, b: &Bid) -> Ordering {
    let lhs = u128::from(a.amount) * u128::from(b.size);
    let rhs = u128::from(b.amount) * u128::from(a.size);
    rhs.cmp(&lhs).then(a.agent_id.cmp(&b.agent_id))
}

fn highest_loser<'a>(profile: &'a BidProfile, winners: &[AgentId]) -> Option<&'a Bid> {
    profile
        .bids()
        .iter()
        .filter(|b| !winners.contains(&b.agent_id))
        .min_by(|a, b| by_density(a, b))
}

/// `floor(reference per-unit bid * own size)`, capped at the own bid.
fn ladder_price(own: &Bid, reference: Option<&Bid>, capped: &mut Vec<AgentId>) -> u64 {
    let Some(r) = reference else { return 0 };
    let raw = u128::from(r.amount) * u128::from(own.size) / u128::from(r.size);
    if raw > u128::from(own.amount) {
        log::debug!(
            "per-unit price {raw} for agent {} exceeds its bid {}; capped",
            own.agent_id,
            own.amount
        );
        capped.push(own.agent_id);
        return own.amount;
    }
    raw as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(bids: &[(u64, u64)], cap: u64) -> BidProfile {
        // (amount, size), ids from 1
        let bids = bids
            .iter()
            .enumerate()
            .map(|(i, &(a, k))| Bid::new(i as u64 + 1, a, k))
            .collect();
        BidProfile::new(bids, cap).unwrap()
    }

    fn pays(o: &AuctionOutcome) -> Vec<i64> {
        o.winners.iter().map(|w| o.payment(*w)).collect()
    }

    #[test]
    fn unit_ladder_payments() {
        let p = profile(&[(5, 1), (3, 1), (2, 1)], 2);
        let w = allocate_greedy(&p);
        let dp = price_dp(&p, &w).unwrap();
        assert_eq!((pays(&dp), dp.revenue), (vec![5, 3], 8));
        let gsp = price_gsp(&p, &w).unwrap();
        assert_eq!((pays(&gsp), gsp.revenue), (vec![3, 2], 5));
        let up = price_up(&p, &w).unwrap();
        assert_eq!((pays(&up), up.revenue), (vec![2, 2], 4));
        let crit = critical_payments(&p);
        assert_eq!(pays(&crit), vec![2, 2]);
        assert_eq!(dp.allocated_value, 8);
    }

    #[test]
    fn per_unit_ladder_with_sizes() {
        let p = profile(&[(10, 2), (6, 2), (3, 1)], 4);
        let w = allocate_greedy(&p);
        assert_eq!(pays(&price_gsp(&p, &w).unwrap()), vec![6, 6]);
        assert_eq!(pays(&price_up(&p, &w).unwrap()), vec![6, 6]);
    }

    #[test]
    fn sole_bidder_and_no_losers() {
        let solo = profile(&[(7, 1)], 3);
        let w = allocate_greedy(&solo);
        assert_eq!(pays(&price_dp(&solo, &w).unwrap()), vec![7]);
        assert_eq!(pays(&price_gsp(&solo, &w).unwrap()), vec![0]);
        assert_eq!(pays(&critical_payments(&solo)), vec![0]);

        let all_fit = profile(&[(4, 1), (9, 2)], 5);
        let w = allocate_greedy(&all_fit);
        let up = price_up(&all_fit, &w).unwrap();
        assert_eq!(up.revenue, 0);
        assert_eq!(up.winners.len(), 2);

        let zero = profile(&[(0, 1)], 1);
        assert_eq!(pays(&price_dp(&zero, &allocate_greedy(&zero)).unwrap()), vec![0]);
    }

    #[test]
    fn critical_bid_through_step3() {
        let p = profile(&[(1, 1), (9, 10)], 10);
        let crit = critical_payments(&p);
        assert_eq!(crit.winners, vec![AgentId(2)]);
        assert_eq!(crit.payment(AgentId(2)), 2);
    }

    #[test]
    fn contract_violations() {
        let p = profile(&[(5, 1), (3, 1)], 1);
        assert_eq!(
            price_dp(&p, &[AgentId(9)]),
            Err(AuctionError::UnknownWinner(AgentId(9)))
        );
        assert!(matches!(
            price_up(&p, &[AgentId(1), AgentId(2)]),
            Err(AuctionError::OverCapacity { .. })
        ));
    }

    #[test]
    fn capped_ladder_price_is_recorded() {
        // step 3 puts the large low-density bid in; the loser's per-unit bid
        // times its size exceeds what it bid
        let p = profile(&[(1, 1), (9, 10)], 10);
        let w = allocate_greedy(&p);
        let up = price_up(&p, &w).unwrap();
        assert_eq!(up.payment(AgentId(2)), 9);
        assert_eq!(up.capped, vec![AgentId(2)]);
    }
}
