use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_mechanism, AgentId, AuctionError, AuctionOutcome, Bid, BidProfile, PricingRule};

pub const MAX_TRUTHFULNESS_AGENTS: usize = 5;
pub const MAX_MONOTONICITY_AGENTS: usize = 6;
pub const MAX_VERIFICATION_EVALUATIONS: u64 = 10_000_000;

/// Bid grid `0, step, 2*step, ..., <= max_bid`. Without `max_bid` the grid
/// runs to twice the largest value in the profile.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthfulnessConfig {
    pub step: u64,
    pub max_bid: Option<u64>,
}

impl Default for TruthfulnessConfig {
    fn default() -> Self {
        Self { step: 1, max_bid: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationWitness {
    pub agent: AgentId,
    pub value: u64,
    pub truthful_payoff: i64,
    pub deviation_bid: u64,
    pub deviation_payoff: i64,
}

/// Result of the unilateral-deviation search at one profile of true values.
///
/// `truthful` means no agent gains by deviating while the others bid their
/// values; it is not a dominant-strategy certificate over all opponent bids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthfulnessReport {
    pub rule: PricingRule,
    pub truthful: bool,
    /// Most profitable deviation per agent that has one.
    pub witnesses: Vec<DeviationWitness>,
    pub evaluations: u64,
}

/// Searches each agent's bid grid for a profitable deviation from bidding its
/// value (`profile` holds the true values as bid amounts).
pub fn verify_truthfulness(
    rule: PricingRule,
    values: &BidProfile,
    config: &TruthfulnessConfig,
) -> Result<TruthfulnessReport, AuctionError> {
    let n = values.len();
    if n > MAX_TRUTHFULNESS_AGENTS {
        return Err(AuctionError::TooManyAgents {
            agents: n,
            limit: MAX_TRUTHFULNESS_AGENTS,
        });
    }
    if config.step == 0 {
        return Err(AuctionError::ZeroStep);
    }
    let top = values.bids().iter().map(|b| b.amount).max().unwrap_or(0);
    let max_bid = config.max_bid.unwrap_or((2 * top).max(config.step));
    let grid_len = u128::from(max_bid / config.step) + 1;
    let evaluations = grid_len * n as u128;
    if evaluations > u128::from(MAX_VERIFICATION_EVALUATIONS) {
        return Err(AuctionError::GridTooLarge {
            evaluations,
            limit: MAX_VERIFICATION_EVALUATIONS,
        });
    }

    let truthful = run_mechanism(rule, values)?;
    let mut witnesses = Vec::new();
    for b in values.bids() {
        let base = payoff(&truthful, b);
        let mut best: Option<DeviationWitness> = None;
        for k in 0..grid_len as u64 {
            let dev = k * config.step;
            if dev == b.amount {
                continue;
            }
            let out = run_mechanism(rule, &values.with_bid(b.agent_id, dev))?;
            let u = payoff(&out, b);
            if u > base && best.as_ref().is_none_or(|w| u > w.deviation_payoff) {
                best = Some(DeviationWitness {
                    agent: b.agent_id,
                    value: b.amount,
                    truthful_payoff: base,
                    deviation_bid: dev,
                    deviation_payoff: u,
                });
            }
        }
        witnesses.extend(best);
    }
    Ok(TruthfulnessReport {
        rule,
        truthful: witnesses.is_empty(),
        witnesses,
        evaluations: evaluations as u64,
    })
}

/// Quasi-linear payoff of the agent whose true value is `truth.amount`.
pub fn payoff(outcome: &AuctionOutcome, truth: &Bid) -> i64 {
    if outcome.won(truth.agent_id) {
        truth.amount as i64 - outcome.payment(truth.agent_id)
    } else {
        0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteTruthfulness {
    pub rule: PricingRule,
    pub instances: usize,
    pub violating_instances: Vec<usize>,
    /// First violation in instance order.
    pub first_witness: Option<(usize, DeviationWitness)>,
    pub evaluations: u64,
}

impl SuiteTruthfulness {
    pub fn truthful(&self) -> bool {
        self.violating_instances.is_empty()
    }
}

/// [`verify_truthfulness`] over many instances in parallel.
pub fn verify_truthfulness_suite(
    rule: PricingRule,
    instances: &[BidProfile],
    config: &TruthfulnessConfig,
) -> Result<SuiteTruthfulness, AuctionError> {
    let reports = instances
        .par_iter()
        .map(|p| verify_truthfulness(rule, p, config))
        .collect::<Result<Vec<_>, _>>()?;
    let violating_instances: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.truthful)
        .map(|(i, _)| i)
        .collect();
    let first_witness = violating_instances
        .first()
        .map(|&i| (i, reports[i].witnesses[0].clone()));
    Ok(SuiteTruthfulness {
        rule,
        instances: instances.len(),
        violating_instances,
        first_witness,
        evaluations: reports.iter().map(|r| r.evaluations).sum(),
    })
}

/// Upward perturbations are tried on `current + step, ... <= max_bid`; the
/// default ceiling is twice the largest bid in the instance plus one step.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityConfig {
    pub step: u64,
    pub max_bid: Option<u64>,
}

impl Default for MonotonicityConfig {
    fn default() -> Self {
        Self { step: 1, max_bid: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityWitness {
    pub instance: usize,
    pub agent: AgentId,
    pub original_bid: u64,
    pub raised_bid: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub passed: bool,
    pub instances: usize,
    pub perturbations: u64,
    pub counterexample: Option<MonotonicityWitness>,
}

/// Checks that a winner stays a winner after any upward change of its own
/// bid, for every instance and every winning agent.
pub fn verify_monotonicity<F>(
    allocation: F,
    instances: &[BidProfile],
    config: &MonotonicityConfig,
) -> Result<MonotonicityReport, AuctionError>
where
    F: Fn(&BidProfile) -> Vec<AgentId> + Sync,
{
    if config.step == 0 {
        return Err(AuctionError::ZeroStep);
    }
    if let Some(p) = instances.iter().find(|p| p.len() > MAX_MONOTONICITY_AGENTS) {
        return Err(AuctionError::TooManyAgents {
            agents: p.len(),
            limit: MAX_MONOTONICITY_AGENTS,
        });
    }
    let per_instance: Vec<(u64, Option<MonotonicityWitness>)> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, p)| check_instance(&allocation, idx, p, config))
        .collect();
    let counterexample = per_instance.iter().find_map(|(_, w)| w.clone());
    Ok(MonotonicityReport {
        passed: counterexample.is_none(),
        instances: instances.len(),
        perturbations: per_instance.iter().map(|(n, _)| n).sum(),
        counterexample,
    })
}

fn check_instance<F>(
    allocation: &F,
    idx: usize,
    profile: &BidProfile,
    config: &MonotonicityConfig,
) -> (u64, Option<MonotonicityWitness>)
where
    F: Fn(&BidProfile) -> Vec<AgentId>,
{
    let top = profile.bids().iter().map(|b| b.amount).max().unwrap_or(0);
    let max_bid = config.max_bid.unwrap_or(2 * top + config.step);
    let winners = allocation(profile);
    let mut tried = 0;
    for w in &winners {
        let bid = profile.bid(*w).expect("winner in profile").amount;
        let mut raised = bid + config.step;
        while raised <= max_bid {
            tried += 1;
            if !allocation(&profile.with_bid(*w, raised)).contains(w) {
                return (
                    tried,
                    Some(MonotonicityWitness {
                        instance: idx,
                        agent: *w,
                        original_bid: bid,
                        raised_bid: raised,
                    }),
                );
            }
            raised += config.step;
        }
    }
    (tried, None)
}

/// Packs the lowest bid per unit first, skipping bids that do not fit. Not
/// monotone; kept as a control for [`verify_monotonicity`].
pub fn allocate_lowest_density_first(profile: &BidProfile) -> Vec<AgentId> {
    let mut bids: Vec<&Bid> = profile.bids().iter().collect();
    bids.sort_by(|a, b| {
        let lhs = u128::from(a.amount) * u128::from(b.size);
        let rhs = u128::from(b.amount) * u128::from(a.size);
        lhs.cmp(&rhs).then(a.agent_id.cmp(&b.agent_id))
    });
    let mut used = 0;
    let mut out = Vec::new();
    for b in bids {
        if used + b.size <= profile.capacity() {
            used += b.size;
            out.push(b.agent_id);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auctions::allocate_greedy;

    fn unit(values: &[u64], cap: u64) -> BidProfile {
        let bids = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Bid::new(i as u64 + 1, v, 1))
            .collect();
        BidProfile::new(bids, cap).unwrap()
    }

    #[test]
    fn pay_as_bid_is_manipulable() {
        let values = unit(&[5, 3, 2], 2);
        let report = verify_truthfulness(PricingRule::Dp, &values, &Default::default()).unwrap();
        assert!(!report.truthful);
        let w = report.witnesses.iter().find(|w| w.agent == AgentId(1)).unwrap();
        assert!(w.deviation_payoff > w.truthful_payoff);
        // shading to 4 keeps first rank and pays less
        let shaded = run_mechanism(PricingRule::Dp, &values.with_bid(AgentId(1), 4)).unwrap();
        assert_eq!(payoff(&shaded, &values.bids()[0]), 1);
    }

    #[test]
    fn critical_and_up_hold_at_simple_profiles() {
        for values in [unit(&[5, 3, 2], 2), unit(&[7], 1), unit(&[4, 4, 1], 1)] {
            for rule in [PricingRule::Critical, PricingRule::Up, PricingRule::VcgExact] {
                let r = verify_truthfulness(rule, &values, &Default::default()).unwrap();
                assert!(r.truthful, "{rule} {values:?} {:?}", r.witnesses);
            }
        }
    }

    #[test]
    fn limits() {
        let six = unit(&[1; 6], 2);
        assert!(matches!(
            verify_truthfulness(PricingRule::Dp, &six, &Default::default()),
            Err(AuctionError::TooManyAgents { .. })
        ));
        let cfg = TruthfulnessConfig {
            step: 1,
            max_bid: Some(5_000_000),
        };
        assert!(matches!(
            verify_truthfulness(PricingRule::Dp, &unit(&[1, 2, 3], 1), &cfg),
            Err(AuctionError::GridTooLarge { .. })
        ));
        let seven = unit(&[1; 7], 2);
        assert!(verify_monotonicity(allocate_greedy, &[seven], &Default::default()).is_err());
    }

    #[test]
    fn monotonicity_control() {
        let profiles = vec![unit(&[3, 3, 3], 2), unit(&[5, 1, 2], 2)];
        let ok = verify_monotonicity(allocate_greedy, &profiles, &Default::default()).unwrap();
        assert!(ok.passed);
        let bad = verify_monotonicity(allocate_lowest_density_first, &profiles, &Default::default()).unwrap();
        assert!(!bad.passed);
        assert!(bad.counterexample.is_some());
    }
}
