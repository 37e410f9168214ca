use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::mev::{MempoolTx, TxId, TxKind};
use crate::rng::{stream, MEMPOOL};

/// Relative weight of each transaction kind.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "SCREAMING_SNAKE_CASE")]
pub struct KindMix {
    pub plain: f64,
    pub arbitrage_capture: f64,
    pub anomaly_creator: f64,
    pub vulnerable_funds: f64,
}

impl Default for KindMix {
    fn default() -> Self {
        Self {
            plain: 0.8,
            arbitrage_capture: 0.07,
            anomaly_creator: 0.08,
            vulnerable_funds: 0.05,
        }
    }
}

impl KindMix {
    pub fn only_plain() -> Self {
        Self {
            plain: 1.0,
            arbitrage_capture: 0.0,
            anomaly_creator: 0.0,
            vulnerable_funds: 0.0,
        }
    }

    fn weights(&self) -> [f64; 4] {
        [
            self.plain,
            self.arbitrage_capture,
            self.anomaly_creator,
            self.vulnerable_funds,
        ]
    }

    pub fn has_mev(&self) -> bool {
        self.weights()[1..].iter().any(|w| *w > 0.0)
    }
}

/// Shape of each slot's mempool. Bounds are inclusive.
///
/// Opportunities are `price_gap * quantity` (a price difference between two
/// venues times the traded amount); value-diverting ones are capped at the
/// transaction's value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MempoolParams {
    pub tx_count: usize,
    pub size_min: u64,
    pub size_max: u64,
    pub size_granularity: u64,
    pub value_per_gas_min: u64,
    pub value_per_gas_max: u64,
    /// Users bid this fraction of their value.
    pub bid_fraction: f64,
    pub mix: KindMix,
    pub price_gap_min: u64,
    pub price_gap_max: u64,
    pub quantity_min: u64,
    pub quantity_max: u64,
    /// Chance that an MEV-bearing transaction is sent through a relay when
    /// the era has one.
    pub private_fraction: f64,
}

impl Default for MempoolParams {
    fn default() -> Self {
        Self {
            tx_count: 150,
            size_min: 21_000,
            size_max: 500_000,
            size_granularity: 1_000,
            value_per_gas_min: 20,
            value_per_gas_max: 500,
            bid_fraction: 0.6,
            mix: KindMix::default(),
            price_gap_min: 1,
            price_gap_max: 100,
            quantity_min: 10_000,
            quantity_max: 500_000,
            private_fraction: 0.0,
        }
    }
}

impl MempoolParams {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: &str| Err(PipelineError::Config(format!("[mempool] {msg}")));
        if self.size_granularity == 0 || self.size_min == 0 {
            return bad("sizes and size_granularity must be positive");
        }
        if self.size_min.div_ceil(self.size_granularity) > self.size_max / self.size_granularity {
            return bad("no multiple of size_granularity lies in [size_min, size_max]");
        }
        if self.value_per_gas_min > self.value_per_gas_max
            || self.price_gap_min > self.price_gap_max
            || self.quantity_min > self.quantity_max
        {
            return bad("a lower bound exceeds its upper bound");
        }
        for (name, f) in [
            ("bid_fraction", self.bid_fraction),
            ("private_fraction", self.private_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        let w = self.mix.weights();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return bad("mix weights must be finite and non-negative");
        }
        if self.tx_count == 0 && self.mix.has_mev() {
            return bad("tx_count is 0 but the mix asks for MEV transactions");
        }
        if self.tx_count > 0 && w.iter().sum::<f64>() <= 0.0 {
            return bad("mix weights sum to zero");
        }
        Ok(())
    }

    pub fn bid_ppm(&self) -> u64 {
        fraction_ppm(self.bid_fraction)
    }
}

pub(crate) fn fraction_ppm(f: f64) -> u64 {
    (f * 1e6).round() as u64
}

/// Draws one mempool. Transaction ids run from 1 in generation order and
/// every transaction consumes the same number of draws regardless of kind.
pub fn generate_mempool(seed: u64, params: &MempoolParams) -> Result<Vec<MempoolTx>, PipelineError> {
    params.validate()?;
    let mut rng = stream(seed, MEMPOOL);
    let g = params.size_granularity;
    let units = params.size_min.div_ceil(g)..=params.size_max / g;
    let kinds = if params.tx_count > 0 {
        Some(WeightedIndex::new(params.mix.weights()).map_err(|e| PipelineError::Config(e.to_string()))?)
    } else {
        None
    };
    let bid_ppm = u128::from(params.bid_ppm());

    let mut out = Vec::with_capacity(params.tx_count);
    for i in 0..params.tx_count {
        let size = rng.random_range(units.clone()) * g;
        let vpg = rng.random_range(params.value_per_gas_min..=params.value_per_gas_max);
        let kind = TxKind::ALL[kinds.as_ref().expect("tx_count > 0").sample(&mut rng)];
        let gap = rng.random_range(params.price_gap_min..=params.price_gap_max);
        let qty = rng.random_range(params.quantity_min..=params.quantity_max);
        let private = rng.random_bool(params.private_fraction);

        let true_value = vpg * size;
        let raw = gap.saturating_mul(qty);
        let opportunity = match kind.action() {
            Some(crate::mev::Action::FrontRun) => raw.min(true_value),
            _ => raw,
        };
        let id = i as u64 + 1;
        out.push(MempoolTx {
            tx_id: TxId(id),
            sender_id: id,
            size,
            true_value,
            bid: (u128::from(true_value) * bid_ppm / 1_000_000) as u64,
            kind,
            visible: !(private && kind != TxKind::Plain),
            embedded_opportunity: (kind != TxKind::Plain).then_some(opportunity),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let p = MempoolParams {
            tx_count: 100,
            ..Default::default()
        };
        let a = generate_mempool(42, &p).unwrap();
        assert_eq!(a, generate_mempool(42, &p).unwrap());
        assert_ne!(a, generate_mempool(43, &p).unwrap());
        assert_eq!(a.len(), 100);
        for tx in &a {
            assert!((21_000..=500_000).contains(&tx.size));
            assert_eq!(tx.size % 1_000, 0);
            assert!(tx.validate().is_ok());
            assert!(tx.bid <= tx.true_value);
        }
    }

    #[test]
    fn plain_mix_has_no_opportunities() {
        let p = MempoolParams {
            mix: KindMix::only_plain(),
            ..Default::default()
        };
        let pool = generate_mempool(1, &p).unwrap();
        assert!(crate::mev::scan_mempool(&pool).is_empty());
    }

    #[test]
    fn infeasible_params() {
        let zero = MempoolParams {
            tx_count: 0,
            ..Default::default()
        };
        assert!(matches!(generate_mempool(1, &zero), Err(PipelineError::Config(_))));
        let empty_ok = MempoolParams {
            tx_count: 0,
            mix: KindMix::only_plain(),
            ..Default::default()
        };
        assert!(generate_mempool(1, &empty_ok).unwrap().is_empty());
        let narrow = MempoolParams {
            size_min: 1_500,
            size_max: 1_900,
            ..Default::default()
        };
        assert!(generate_mempool(1, &narrow).is_err());
    }
}
