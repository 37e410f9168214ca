use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Era, EraConfig, MarketParams, MempoolParams, PipelineError, SimConfig};
use crate::agents::AgentConfig;
use crate::auctions::PricingRule;
use crate::feemarket::FeeMarketConfig;

/// `[era]`: one era (`era`) or several for a comparison (`eras`).
/// `relay_count` and `builder_count` apply to every listed era when set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EraSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub era: Option<Era>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eras: Vec<Era>,
    pub auction_rule: PricingRule,
    pub block_reward: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relay_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builder_count: Option<u32>,
    pub slot_seconds: u64,
    pub slots_per_epoch: u64,
    pub epochs: u64,
}

impl Default for EraSection {
    fn default() -> Self {
        let d = EraConfig::new(Era::Baseline);
        Self {
            era: None,
            eras: Vec::new(),
            auction_rule: d.auction_rule,
            block_reward: d.block_reward,
            relay_count: None,
            builder_count: None,
            slot_seconds: d.slot_seconds,
            slots_per_epoch: d.slots_per_epoch,
            epochs: 1,
        }
    }
}

impl EraSection {
    pub fn era_list(&self) -> Result<Vec<Era>, PipelineError> {
        match (self.era, self.eras.is_empty()) {
            (Some(_), false) => Err(PipelineError::Config("[era] sets both `era` and `eras`".into())),
            (Some(e), true) => Ok(vec![e]),
            (None, false) => Ok(self.eras.clone()),
            (None, true) => Ok(vec![Era::Baseline]),
        }
    }

    pub fn configs(&self) -> Result<Vec<EraConfig>, PipelineError> {
        let list = self.era_list()?;
        list.into_iter()
            .map(|era| {
                let mut c = EraConfig::new(era);
                c.auction_rule = self.auction_rule;
                c.block_reward = self.block_reward;
                c.slot_seconds = self.slot_seconds;
                c.slots_per_epoch = self.slots_per_epoch;
                if let Some(r) = self.relay_count {
                    c.relay_count = r;
                }
                if let Some(b) = self.builder_count {
                    c.builder_count = b;
                }
                c.validate()?;
                Ok(c)
            })
            .collect()
    }
}

/// `[agents]`: auction bidders at the top level, searchers and builders in
/// `[agents.market]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AgentsSection {
    pub bidders: AgentConfig,
    pub market: MarketParams,
}

impl Serialize for AgentsSection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::Error;
        let mut table = toml::Table::try_from(&self.bidders).map_err(S::Error::custom)?;
        let market = toml::Table::try_from(&self.market).map_err(S::Error::custom)?;
        table.insert("market".into(), toml::Value::Table(market));
        table.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AgentsSection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let mut table = toml::Table::deserialize(d)?;
        let market = match table.remove("market") {
            Some(v) => v.try_into().map_err(D::Error::custom)?,
            None => MarketParams::default(),
        };
        let bidders = toml::Value::Table(table).try_into().map_err(D::Error::custom)?;
        Ok(Self { bidders, market })
    }
}

/// A scenario file. Every section and key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub era: EraSection,
    pub mempool: MempoolParams,
    pub feemarket: FeeMarketConfig,
    pub agents: AgentsSection,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let s: Scenario = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.era.configs()?;
        self.sim().validate()?;
        if self.era.epochs == 0 {
            return Err(PipelineError::Config("[era] epochs must be at least 1".into()));
        }
        self.agents
            .bidders
            .validate()
            .map_err(|e| PipelineError::Config(format!("[agents] {e}")))
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig {
            mempool: self.mempool.clone(),
            feemarket: self.feemarket,
            market: self.agents.market.clone(),
        }
    }

    /// Canonical TOML rendering of the parsed scenario, with every default
    /// filled in.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Hex SHA-256 of [`Scenario::canonical`]: equal for files that parse to
    /// the same scenario.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let s = Scenario::from_toml("").unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(s.era.configs().unwrap()[0].era, Era::Baseline);
    }

    #[test]
    fn sections_parse() {
        let s = Scenario::from_toml(
            r#"
[era]
eras = ["PGA_ERA", "PBS_ERA"]
auction_rule = "GSP"
epochs = 2

[mempool]
tx_count = 40
[mempool.mix]
PLAIN = 1.0
ARBITRAGE_CAPTURE = 0.0
ANOMALY_CREATOR = 0.0
VULNERABLE_FUNDS = 0.0

[feemarket]
initial_base_fee = 50

[agents]
kind = "truthful"
count = 3
[agents.market]
searchers = 4
"#,
        )
        .unwrap();
        let eras = s.era.configs().unwrap();
        assert_eq!(eras.len(), 2);
        assert_eq!(eras[1].builder_count, 3);
        assert_eq!(eras[0].auction_rule, PricingRule::Gsp);
        assert_eq!(s.agents.market.searchers, 4);
        assert_eq!(s.agents.bidders.count, 3);
        assert!(!s.mempool.mix.has_mev());
    }

    #[test]
    fn hash_is_stable_under_reserialization() {
        let s = Scenario::from_toml("[era]\nera = \"PBS_ERA\"\n[agents.market]\nsearchers = 5\n").unwrap();
        let again = Scenario::from_toml(&s.canonical()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.config_hash(), again.config_hash());
        assert_ne!(s.config_hash(), Scenario::default().config_hash());
    }

    #[test]
    fn rejects_bad_input() {
        let relays_in_baseline = "[era]\nera = \"BASELINE\"\nrelay_count = 1\n";
        assert!(matches!(
            Scenario::from_toml(relays_in_baseline),
            Err(PipelineError::Config(_))
        ));
        assert!(Scenario::from_toml("[era]\nbogus = 1\n").is_err());
        assert!(Scenario::from_toml("[agents]\nbogus = 1\n").is_err());
        assert!(Scenario::from_toml("[agents.market]\nbogus = 1\n").is_err());
        assert!(Scenario::from_toml("[era]\nera = \"PBS_ERA\"\neras = [\"PGA_ERA\"]\n").is_err());
    }
}
