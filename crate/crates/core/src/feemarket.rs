//! EIP-1559 base fee controller, demand admission, burn accounting, and the
//! burn-versus-issuance threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auctions::{allocate_greedy, Bid, BidProfile};
use crate::knapsack::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeeMarketError {
    #[error("target gas must be positive and at most max gas (target {target}, max {max})")]
    BadTarget { target: u64, max: u64 },
    #[error("adjustment denominator must be positive")]
    ZeroDenominator,
    #[error("base fee {base_fee} below the minimum {min_base_fee}")]
    BelowMinimum { base_fee: u64, min_base_fee: u64 },
    #[error("contract violation: gas used {used} exceeds max gas {max}")]
    OverFull { used: u64, max: u64 },
    #[error("burn schedule decreases between {from} and {to} gas")]
    NonMonotone { from: u64, to: u64 },
    #[error("arithmetic overflow in fee accounting")]
    Overflow,
}

/// Controller parameters, as they appear in scenario files.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeeMarketConfig {
    pub target_gas: u64,
    pub max_gas: u64,
    pub adjustment_denominator: u64,
    pub min_base_fee: u64,
    pub initial_base_fee: u64,
    pub min_tip: u64,
}

impl Default for FeeMarketConfig {
    fn default() -> Self {
        Self {
            target_gas: 15_000_000,
            max_gas: 30_000_000,
            adjustment_denominator: 8,
            min_base_fee: 1,
            initial_base_fee: 100,
            min_tip: 1,
        }
    }
}

impl FeeMarketConfig {
    pub fn state(&self) -> Result<BaseFeeState, FeeMarketError> {
        BaseFeeState::new(
            self.initial_base_fee,
            self.target_gas,
            self.max_gas,
            self.adjustment_denominator,
            self.min_base_fee,
        )
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseFeeState {
    pub base_fee: u64,
    pub target_gas: u64,
    pub max_gas: u64,
    pub adjustment_denominator: u64,
    pub cumulative_burn: u64,
    pub min_base_fee: u64,
}

impl BaseFeeState {
    pub fn new(
        base_fee: u64,
        target_gas: u64,
        max_gas: u64,
        adjustment_denominator: u64,
        min_base_fee: u64,
    ) -> Result<Self, FeeMarketError> {
        if target_gas == 0 || target_gas > max_gas {
            return Err(FeeMarketError::BadTarget {
                target: target_gas,
                max: max_gas,
            });
        }
        if adjustment_denominator == 0 {
            return Err(FeeMarketError::ZeroDenominator);
        }
        if base_fee < min_base_fee {
            return Err(FeeMarketError::BelowMinimum { base_fee, min_base_fee });
        }
        Ok(Self {
            base_fee,
            target_gas,
            max_gas,
            adjustment_denominator,
            cumulative_burn: 0,
            min_base_fee,
        })
    }
}

/// `max(min, floor(base * (1 + (used - target) / (target * d))))`, computed
/// exactly as `floor(base * (target * (d - 1) + used) / (target * d))`.
pub fn update_base_fee(state: &BaseFeeState, gas_used_prev: u64) -> Result<BaseFeeState, FeeMarketError> {
    if gas_used_prev > state.max_gas {
        return Err(FeeMarketError::OverFull {
            used: gas_used_prev,
            max: state.max_gas,
        });
    }
    let t = u128::from(state.target_gas);
    let d = u128::from(state.adjustment_denominator);
    let num = u128::from(state.base_fee) * (t * (d - 1) + u128::from(gas_used_prev));
    let next = u64::try_from(num / (t * d)).map_err(|_| FeeMarketError::Overflow)?;
    Ok(BaseFeeState {
        base_fee: next.max(state.min_base_fee),
        ..*state
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandUser {
    pub id: u64,
    pub value_per_gas: u64,
    pub gas: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admission {
    /// Admitted user ids; input order when everyone fits, auction order
    /// otherwise.
    pub admitted: Vec<u64>,
    pub gas: u64,
    pub oversubscribed: bool,
}

/// Users willing to pay `base_fee + min_tip` per gas enter. When their gas
/// exceeds `max_gas`, the greedy knapsack auction on offered tips
/// (`(value_per_gas - base_fee) * gas`) picks who gets in.
pub fn admit_demand(users: &[DemandUser], state: &BaseFeeState, min_tip: u64) -> Admission {
    let floor = state.base_fee.saturating_add(min_tip);
    let eligible: Vec<&DemandUser> = users.iter().filter(|u| u.gas > 0 && u.value_per_gas >= floor).collect();
    let total: u64 = eligible.iter().map(|u| u.gas).sum();
    if total <= state.max_gas {
        return Admission {
            admitted: eligible.iter().map(|u| u.id).collect(),
            gas: total,
            oversubscribed: false,
        };
    }
    let bids = eligible
        .iter()
        .map(|u| Bid::new(u.id, (u.value_per_gas - state.base_fee) * u.gas, u.gas))
        .collect();
    let profile = BidProfile::new(bids, state.max_gas).expect("user ids are unique");
    let admitted: Vec<u64> = allocate_greedy(&profile).into_iter().map(|a| a.0).collect();
    let gas = admitted
        .iter()
        .map(|id| eligible.iter().find(|u| u.id == *id).expect("admitted user").gas)
        .sum();
    Admission {
        admitted,
        gas,
        oversubscribed: true,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargedTx {
    pub tx_id: u64,
    pub gas: u64,
    pub tip: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeQuote {
    pub tx_id: u64,
    /// `base_fee * gas`, burned.
    pub base_component: u64,
    /// Priority fee plus direct transfers, paid to the block producer.
    pub tip_component: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockFees {
    pub burn: u64,
    pub tips: u64,
    pub quotes: Vec<FeeQuote>,
}

/// Splits each included transaction's fee into burn and tip and adds the
/// burn to the running total.
pub fn burn_and_split(txs: &[ChargedTx], state: &BaseFeeState) -> Result<(BlockFees, BaseFeeState), FeeMarketError> {
    let mut quotes = Vec::with_capacity(txs.len());
    let (mut burn, mut tips) = (0u64, 0u64);
    for tx in txs {
        let base = state.base_fee.checked_mul(tx.gas).ok_or(FeeMarketError::Overflow)?;
        burn = burn.checked_add(base).ok_or(FeeMarketError::Overflow)?;
        tips = tips.checked_add(tx.tip).ok_or(FeeMarketError::Overflow)?;
        quotes.push(FeeQuote {
            tx_id: tx.tx_id,
            base_component: base,
            tip_component: tx.tip,
        });
    }
    let next = BaseFeeState {
        cumulative_burn: state
            .cumulative_burn
            .checked_add(burn)
            .ok_or(FeeMarketError::Overflow)?,
        ..*state
    };
    Ok((BlockFees { burn, tips, quotes }, next))
}

/// Burn per block as an exact function of gas volume.
pub trait BurnSchedule {
    fn burn(&self, gas: u64) -> Rational;
}

/// `B(N) = numer * N / denom`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct LinearBurn {
    pub numer: u64,
    pub denom: u64,
}

impl BurnSchedule for LinearBurn {
    fn burn(&self, gas: u64) -> Rational {
        Rational::new(u128::from(self.numer) * u128::from(gas), u128::from(self.denom))
    }
}

/// Piecewise constant: the burn of the last step whose start is `<= N`, or 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepBurn {
    pub steps: Vec<(u64, u64)>,
}

impl BurnSchedule for StepBurn {
    fn burn(&self, gas: u64) -> Rational {
        let b = self
            .steps
            .iter()
            .filter(|(from, _)| *from <= gas)
            .max_by_key(|(from, _)| *from)
            .map_or(0, |(_, b)| *b);
        Rational::from_integer(u128::from(b))
    }
}

impl<F: Fn(u64) -> Rational> BurnSchedule for F {
    fn burn(&self, gas: u64) -> Rational {
        self(gas)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Threshold {
    /// Smallest volume whose burn exceeds issuance.
    At(u64),
    Never,
}

const MONOTONICITY_SAMPLES: u64 = 1024;

/// Smallest `N` in `0..=max_volume` with `B(N) > R`, by binary search.
///
/// The schedule is sampled on an even grid first and every point probed by
/// the search is checked against its neighbours' order; a decrease anywhere
/// observed is an error because the search would be meaningless.
pub fn find_contraction_threshold<S: BurnSchedule + ?Sized>(
    issuance: u64,
    schedule: &S,
    max_volume: u64,
) -> Result<Threshold, FeeMarketError> {
    let r = Rational::from_integer(u128::from(issuance));
    let mut prev = (0u64, schedule.burn(0));
    for i in 1..=MONOTONICITY_SAMPLES {
        let g = (u128::from(max_volume) * u128::from(i) / u128::from(MONOTONICITY_SAMPLES)) as u64;
        let b = schedule.burn(g);
        if b < prev.1 {
            return Err(FeeMarketError::NonMonotone { from: prev.0, to: g });
        }
        prev = (g, b);
    }
    if schedule.burn(max_volume) <= r {
        return Ok(Threshold::Never);
    }
    if schedule.burn(0) > r {
        return Ok(Threshold::At(0));
    }
    // burn(lo) <= R < burn(hi)
    let (mut lo, mut hi) = (0u64, max_volume);
    let (mut b_lo, mut b_hi) = (schedule.burn(lo), schedule.burn(hi));
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let b = schedule.burn(mid);
        if b < b_lo || b > b_hi {
            return Err(FeeMarketError::NonMonotone { from: lo, to: hi });
        }
        if b > r {
            hi = mid;
            b_hi = b;
        } else {
            lo = mid;
            b_lo = b;
        }
    }
    Ok(Threshold::At(hi))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeBlock {
    pub block: u64,
    pub base_fee: u64,
    pub gas_used: u64,
    pub burn: u64,
    pub tips: u64,
}

/// Runs the controller against the same demand every block. Admitted users
/// tip `min_tip` per gas.
pub fn simulate_base_fee(
    config: &FeeMarketConfig,
    demand: &[DemandUser],
    blocks: u64,
) -> Result<Vec<FeeBlock>, FeeMarketError> {
    let mut state = config.state()?;
    let mut out = Vec::with_capacity(blocks as usize);
    for block in 0..blocks {
        let adm = admit_demand(demand, &state, config.min_tip);
        let charged: Vec<ChargedTx> = adm
            .admitted
            .iter()
            .map(|id| {
                let u = demand.iter().find(|u| u.id == *id).expect("admitted user");
                ChargedTx {
                    tx_id: u.id,
                    gas: u.gas,
                    tip: config.min_tip * u.gas,
                }
            })
            .collect();
        let (fees, next) = burn_and_split(&charged, &state)?;
        out.push(FeeBlock {
            block,
            base_fee: state.base_fee,
            gas_used: adm.gas,
            burn: fees.burn,
            tips: fees.tips,
        });
        state = update_base_fee(&next, adm.gas)?;
    }
    Ok(out)
}
