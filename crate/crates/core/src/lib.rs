//! Block-building laboratory: knapsack solvers, sealed-bid knapsack
//! auctions, MEV extraction, EIP-1559 fee dynamics, and an era-by-era
//! block production simulator with exact flow-of-funds accounting.

pub mod agents;
pub mod auctions;
pub mod feemarket;
pub mod formats;
pub mod knapsack;
pub mod mev;
pub mod pipeline;
pub mod rng;
pub mod suites;

pub use agents::{AgentConfig, Strategy, StrategyKind, TrainingReport};
pub use auctions::{AgentId, AuctionOutcome, Bid, BidProfile, PricingRule};
pub use feemarket::{BaseFeeState, FeeMarketConfig};
pub use knapsack::{Item, ItemId, KnapsackError, KnapsackInstance, PackingResult, Rational};
pub use mev::{MempoolTx, MevEvent, TxId, TxKind};
pub use pipeline::{Era, EraConfig, FlowLedger, Payoffs, RunReport, Scenario, SimConfig};
