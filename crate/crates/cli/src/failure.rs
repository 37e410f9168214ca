//! Exit-code classification.

use std::fmt;
use std::process::ExitCode;

use blocklab_core::agents::AgentError;
use blocklab_core::auctions::AuctionError;
use blocklab_core::feemarket::FeeMarketError;
use blocklab_core::formats::ParseError;
use blocklab_core::knapsack::KnapsackError;
use blocklab_core::pipeline::PipelineError;

/// A failed run. The variant fixes the exit code.
#[derive(Debug)]
pub enum Failure {
    /// A checked property does not hold (exit 1).
    Violation(String),
    /// Bad input, configuration or I/O (exit 2).
    Input(String),
    /// A solver or verifier refused an instance over its size limit (exit 3).
    Limit(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Input(_) => 2,
            Failure::Limit(_) => 3,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        Failure::Input(msg.to_string())
    }

    /// Prefixes the message, keeping the class.
    pub fn context(self, what: impl fmt::Display) -> Self {
        match self {
            Failure::Violation(m) => Failure::Violation(format!("{what}: {m}")),
            Failure::Input(m) => Failure::Input(format!("{what}: {m}")),
            Failure::Limit(m) => Failure::Limit(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Violation(m) => write!(f, "violation: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Limit(m) => write!(f, "resource limit: {m}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<KnapsackError> for Failure {
    fn from(e: KnapsackError) -> Self {
        match e {
            KnapsackError::InstanceTooLarge { .. }
            | KnapsackError::OracleLimit { .. }
            | KnapsackError::ExactSearchLimit { .. } => Failure::Limit(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<AuctionError> for Failure {
    fn from(e: AuctionError) -> Self {
        match e {
            AuctionError::Knapsack(k) => k.into(),
            AuctionError::TooManyAgents { .. } | AuctionError::GridTooLarge { .. } => Failure::Limit(e.to_string()),
            AuctionError::UnknownWinner(_) | AuctionError::OverCapacity { .. } => Failure::Violation(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<FeeMarketError> for Failure {
    fn from(e: FeeMarketError) -> Self {
        match e {
            FeeMarketError::OverFull { .. } | FeeMarketError::Overflow => Failure::Violation(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Imbalance { .. } => Failure::Violation(e.to_string()),
            PipelineError::Config(_) => Failure::Input(e.to_string()),
            PipelineError::Auction(a) => a.into(),
            PipelineError::FeeMarket(f) => f.into(),
            PipelineError::Knapsack(k) => k.into(),
            PipelineError::Mev(_) => Failure::Input(e.to_string()),
        }
    }
}

impl From<AgentError> for Failure {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::Config(_) => Failure::Input(e.to_string()),
            AgentError::Auction(a) => a.into(),
            AgentError::Knapsack(k) => k.into(),
        }
    }
}
