//! Searchers: opportunity scanning, ordering-based extraction, priority gas
//! auctions, and private order flow.

mod pga;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auctions::{AuctionError, Bid, BidProfile};

pub use pga::{run_pga, PgaResult};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct TxId(pub u64);

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct SearcherId(pub u32);

impl fmt::Display for SearcherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TxKind {
    Plain,
    /// The user's own arbitrage; a copy placed ahead of it takes the profit.
    ArbitrageCapture,
    /// Moves a price and leaves an arbitrage behind it.
    AnomalyCreator,
    /// Funds sent where anyone who gets there first can claim them.
    VulnerableFunds,
}

impl TxKind {
    pub const ALL: [TxKind; 4] = [
        TxKind::Plain,
        TxKind::ArbitrageCapture,
        TxKind::AnomalyCreator,
        TxKind::VulnerableFunds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TxKind::Plain => "PLAIN",
            TxKind::ArbitrageCapture => "ARBITRAGE_CAPTURE",
            TxKind::AnomalyCreator => "ANOMALY_CREATOR",
            TxKind::VulnerableFunds => "VULNERABLE_FUNDS",
        }
    }

    /// Action a searcher needs to extract from this kind.
    pub fn action(self) -> Option<Action> {
        match self {
            TxKind::Plain => None,
            TxKind::ArbitrageCapture | TxKind::VulnerableFunds => Some(Action::FrontRun),
            TxKind::AnomalyCreator => Some(Action::BackRun),
        }
    }

    pub fn classification(self) -> Option<Classification> {
        self.action().map(Action::classification)
    }
}

impl fmt::Display for TxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TxKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TxKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown transaction kind `{s}`"))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    FrontRun,
    BackRun,
}

impl Action {
    pub fn classification(self) -> Classification {
        match self {
            Action::FrontRun => Classification::Diverting,
            Action::BackRun => Classification::Creating,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Diverting,
    Creating,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Diverting => "DIVERTING",
            Classification::Creating => "CREATING",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MevError {
    #[error("transaction {0} has zero size")]
    ZeroSize(TxId),
    #[error("transaction {0}: opportunity must be present exactly when the kind is not PLAIN")]
    OpportunityMismatch(TxId),
    #[error("a priority gas auction needs at least 2 searchers, got {0}")]
    TooFewSearchers(usize),
    #[error("bid increment must be at least 1")]
    ZeroIncrement,
    #[error("private routing requires a relay, and this era has none")]
    NoRelay,
    #[error("bundle {0} is empty")]
    EmptyBundle(u64),
    #[error(transparent)]
    Auction(#[from] AuctionError),
}

/// A user transaction. `bid` is the total fee the user offers for inclusion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MempoolTx {
    pub tx_id: TxId,
    pub sender_id: u64,
    pub size: u64,
    pub true_value: u64,
    pub bid: u64,
    pub kind: TxKind,
    pub visible: bool,
    pub embedded_opportunity: Option<u64>,
}

impl MempoolTx {
    pub fn plain(tx_id: u64, size: u64, true_value: u64, bid: u64) -> Self {
        Self {
            tx_id: TxId(tx_id),
            sender_id: tx_id,
            size,
            true_value,
            bid,
            kind: TxKind::Plain,
            visible: true,
            embedded_opportunity: None,
        }
    }

    pub fn with_opportunity(mut self, kind: TxKind, opportunity: u64) -> Self {
        self.kind = kind;
        self.embedded_opportunity = (kind != TxKind::Plain).then_some(opportunity);
        self
    }

    pub fn validate(&self) -> Result<(), MevError> {
        if self.size == 0 {
            return Err(MevError::ZeroSize(self.tx_id));
        }
        if self.embedded_opportunity.is_some() != (self.kind != TxKind::Plain) {
            return Err(MevError::OpportunityMismatch(self.tx_id));
        }
        Ok(())
    }

    pub fn opportunity(&self) -> u64 {
        self.embedded_opportunity.unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opportunity {
    pub source: TxId,
    pub value: u64,
    pub action: Action,
}

/// Every extractable opportunity among visible transactions.
pub fn scan_mempool(mempool: &[MempoolTx]) -> Vec<Opportunity> {
    mempool
        .iter()
        .filter(|tx| tx.visible)
        .filter_map(|tx| {
            tx.kind.action().map(|action| Opportunity {
                source: tx.tx_id,
                value: tx.opportunity(),
                action,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearcherTx {
    pub tx_id: TxId,
    pub searcher: SearcherId,
    pub target: TxId,
    pub action: Action,
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockTx {
    User(MempoolTx),
    Searcher(SearcherTx),
}

impl BlockTx {
    pub fn tx_id(&self) -> TxId {
        match self {
            BlockTx::User(t) => t.tx_id,
            BlockTx::Searcher(s) => s.tx_id,
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            BlockTx::User(t) => t.size,
            BlockTx::Searcher(s) => s.size,
        }
    }
}

/// Transactions executed together, in order, or not at all.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub bundle_id: u64,
    pub searcher: SearcherId,
    pub txs: Vec<BlockTx>,
    pub bid: u64,
}

impl Bundle {
    pub fn size(&self) -> u64 {
        self.txs.iter().map(BlockTx::size).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MevEvent {
    pub searcher: SearcherId,
    pub source_tx: TxId,
    pub captured_value: u64,
    pub classification: Classification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub events: Vec<MevEvent>,
    /// Realized value of every user transaction in the block.
    pub user_values: BTreeMap<TxId, u64>,
    /// Total captured per searcher.
    pub captured: BTreeMap<SearcherId, u64>,
}

impl Extraction {
    pub fn diverted(&self) -> u64 {
        self.total(Classification::Diverting)
    }

    pub fn created(&self) -> u64 {
        self.total(Classification::Creating)
    }

    fn total(&self, class: Classification) -> u64 {
        self.events
            .iter()
            .filter(|e| e.classification == class)
            .map(|e| e.captured_value)
            .sum()
    }
}

/// Settles searcher transactions against a fixed block order.
///
/// A front-run succeeds when it precedes its source and the source's kind is
/// value diverting; the user's realized value drops by the captured amount.
/// A back-run succeeds when it follows a value-creating source and leaves the
/// user untouched. Only the first successful searcher per source captures
/// anything; searcher transactions whose source is absent realize nothing.
pub fn apply_extraction(block_order: &[BlockTx]) -> Extraction {
    let mut position = HashMap::new();
    let mut user_values = BTreeMap::new();
    let mut sources = HashMap::new();
    for (pos, tx) in block_order.iter().enumerate() {
        if let BlockTx::User(u) = tx {
            position.insert(u.tx_id, pos);
            user_values.insert(u.tx_id, u.true_value);
            sources.insert(u.tx_id, u);
        }
    }

    let mut out = Extraction {
        user_values,
        ..Extraction::default()
    };
    let mut taken = HashSet::new();
    for (pos, tx) in block_order.iter().enumerate() {
        let BlockTx::Searcher(s) = tx else { continue };
        let (Some(&src_pos), Some(src)) = (position.get(&s.target), sources.get(&s.target)) else {
            continue;
        };
        if src.kind.action() != Some(s.action) || taken.contains(&s.target) {
            continue;
        }
        let captured = match s.action {
            Action::FrontRun if pos < src_pos => {
                let realized = out.user_values.get_mut(&s.target).expect("user in block");
                let c = src.opportunity().min(*realized);
                *realized -= c;
                c
            }
            Action::BackRun if pos > src_pos => src.opportunity(),
            _ => continue,
        };
        if captured == 0 {
            continue;
        }
        taken.insert(s.target);
        *out.captured.entry(s.searcher).or_default() += captured;
        out.events.push(MevEvent {
            searcher: s.searcher,
            source_tx: s.target,
            captured_value: captured,
            classification: s.action.classification(),
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrivateOrder {
    Tx(MempoolTx),
    Bundle(Bundle),
}

impl PrivateOrder {
    pub fn id(&self) -> u64 {
        match self {
            PrivateOrder::Tx(t) => t.tx_id.0,
            PrivateOrder::Bundle(b) => b.bundle_id,
        }
    }
}

/// Sends orders through a relay: user transactions become invisible to
/// searchers and every order becomes one sealed bid (a bundle bids its
/// `bid` for the summed size of its members).
pub fn route_private(orders: &mut [PrivateOrder], relay: Option<u32>, capacity: u64) -> Result<BidProfile, MevError> {
    if relay.is_none() {
        return Err(MevError::NoRelay);
    }
    let mut bids = Vec::with_capacity(orders.len());
    for order in orders.iter_mut() {
        match order {
            PrivateOrder::Tx(t) => {
                t.validate()?;
                t.visible = false;
                bids.push(Bid::new(t.tx_id.0, t.bid, t.size));
            }
            PrivateOrder::Bundle(b) => {
                if b.txs.is_empty() {
                    return Err(MevError::EmptyBundle(b.bundle_id));
                }
                for tx in &mut b.txs {
                    if let BlockTx::User(u) = tx {
                        u.visible = false;
                    }
                }
                bids.push(Bid::new(b.bundle_id, b.bid, b.size()));
            }
        }
    }
    Ok(BidProfile::new(bids, capacity)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arb(id: u64, opp: u64) -> MempoolTx {
        MempoolTx::plain(id, 100, opp, 5).with_opportunity(TxKind::ArbitrageCapture, opp)
    }

    fn searcher(id: u64, target: u64, action: Action) -> BlockTx {
        BlockTx::Searcher(SearcherTx {
            tx_id: TxId(id),
            searcher: SearcherId(7),
            target: TxId(target),
            action,
            size: 50,
        })
    }

    #[test]
    fn scan_maps_kinds_to_actions() {
        let pool = vec![MempoolTx::plain(1, 10, 5, 1), arb(2, 50)];
        let ops = scan_mempool(&pool);
        assert_eq!(
            ops,
            vec![Opportunity {
                source: TxId(2),
                value: 50,
                action: Action::FrontRun
            }]
        );
        assert!(scan_mempool(&[MempoolTx::plain(1, 10, 5, 1)]).is_empty());
        let mut hidden = MempoolTx::plain(3, 10, 5, 1).with_opportunity(TxKind::AnomalyCreator, 30);
        hidden.visible = false;
        assert!(scan_mempool(&[hidden]).is_empty());
    }

    #[test]
    fn front_run_depends_on_order() {
        let user = BlockTx::User(arb(1, 50));
        let ahead = apply_extraction(&[searcher(9, 1, Action::FrontRun), user.clone()]);
        assert_eq!(ahead.events.len(), 1);
        assert_eq!(ahead.events[0].classification, Classification::Diverting);
        assert_eq!(ahead.user_values[&TxId(1)], 0);
        assert_eq!(ahead.captured[&SearcherId(7)], 50);

        let behind = apply_extraction(&[user, searcher(9, 1, Action::FrontRun)]);
        assert!(behind.events.is_empty());
        assert_eq!(behind.user_values[&TxId(1)], 50);
    }

    #[test]
    fn back_run_creates_value() {
        let creator = MempoolTx::plain(1, 100, 40, 5).with_opportunity(TxKind::AnomalyCreator, 30);
        let ex = apply_extraction(&[BlockTx::User(creator), searcher(9, 1, Action::BackRun)]);
        assert_eq!(ex.created(), 30);
        assert_eq!(ex.user_values[&TxId(1)], 40);
    }

    #[test]
    fn only_first_capture_counts_and_absent_source_realizes_nothing() {
        let ex = apply_extraction(&[
            searcher(8, 1, Action::FrontRun),
            searcher(9, 1, Action::FrontRun),
            BlockTx::User(arb(1, 50)),
            searcher(10, 2, Action::FrontRun),
        ]);
        assert_eq!(ex.events.len(), 1);
        assert_eq!(ex.diverted(), 50);
    }

    #[test]
    fn routing_builds_sealed_bids() {
        let user = arb(1, 50);
        let bundle = Bundle {
            bundle_id: 100,
            searcher: SearcherId(1),
            txs: vec![
                searcher(2, 3, Action::BackRun),
                BlockTx::User(MempoolTx::plain(3, 70, 9, 1)),
            ],
            bid: 40,
        };
        let mut orders = vec![PrivateOrder::Tx(user), PrivateOrder::Bundle(bundle)];
        let profile = route_private(&mut orders, Some(0), 1_000).unwrap();
        assert_eq!(profile.bids()[1], Bid::new(100, 40, 120));
        let PrivateOrder::Tx(t) = &orders[0] else {
            unreachable!()
        };
        assert!(scan_mempool(std::slice::from_ref(t)).is_empty());

        assert_eq!(route_private(&mut [], Some(0), 10).unwrap().len(), 0);
        assert_eq!(route_private(&mut [], None, 10), Err(MevError::NoRelay));
    }

    #[test]
    fn opportunity_invariant() {
        let mut bad = MempoolTx::plain(1, 10, 5, 1);
        bad.embedded_opportunity = Some(3);
        assert_eq!(bad.validate(), Err(MevError::OpportunityMismatch(TxId(1))));
        assert!(arb(2, 4).validate().is_ok());
    }
}
