//! Line-oriented input files and CSV outputs.
//!
//! Input files start with `K=<capacity>` and then hold one comma-separated
//! record per line. Blank lines and lines starting with `#` are ignored.
//!
//! | file | record |
//! |---|---|
//! | instance | `id,size,value` |
//! | profile | `agent_id,size,bid[,true_value]` |
//! | mempool | `id,size,value,kind,opportunity[,bid]` |

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::auctions::{AgentId, AuctionOutcome, Bid, BidProfile};
use crate::knapsack::{format_rational, Item, KnapsackInstance, PackingResult};
use crate::mev::{MempoolTx, TxKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 when the problem is not tied to one line.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// A record's line number and its fields.
type Record<'a> = (usize, Vec<&'a str>);

/// Capacity and the numbered records that follow it.
fn records(text: &str) -> Result<(u64, Vec<Record<'_>>), ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let Some((n, header)) = lines.next() else {
        return err(0, "empty file, expected `K=<int>`");
    };
    let Some(k) = header.strip_prefix("K=") else {
        return err(n, format!("expected `K=<int>`, found `{header}`"));
    };
    let capacity = k
        .parse::<u64>()
        .or_else(|e| err(n, format!("bad capacity `{k}`: {e}")))?;
    Ok((capacity, lines.map(|(n, l)| (n, l.split(',').collect())).collect()))
}

fn int(line: usize, name: &str, field: &str) -> Result<u64, ParseError> {
    field
        .parse()
        .or_else(|e| err(line, format!("bad {name} `{field}`: {e}")))
}

fn arity(line: usize, fields: &[&str], allowed: &[usize], shape: &str) -> Result<(), ParseError> {
    if allowed.contains(&fields.len()) {
        Ok(())
    } else {
        err(line, format!("expected `{shape}`, found {} fields", fields.len()))
    }
}

pub fn parse_instance(text: &str) -> Result<KnapsackInstance, ParseError> {
    let (capacity, rows) = records(text)?;
    let mut items = Vec::with_capacity(rows.len());
    for (n, f) in rows {
        arity(n, &f, &[3], "id,size,value")?;
        items.push(Item::new(
            int(n, "id", f[0])?,
            int(n, "size", f[1])?,
            int(n, "value", f[2])?,
        ));
    }
    KnapsackInstance::new(items, capacity).or_else(|e| err(0, e.to_string()))
}

pub fn write_instance<W: Write>(mut w: W, instance: &KnapsackInstance) -> io::Result<()> {
    writeln!(w, "K={}", instance.capacity())?;
    for it in instance.items() {
        writeln!(w, "{},{},{}", it.id.0, it.size, it.value)?;
    }
    Ok(())
}

/// A profile file: bids plus the true values given on some lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileFile {
    pub profile: BidProfile,
    pub true_values: BTreeMap<AgentId, u64>,
}

impl ProfileFile {
    /// Truthful profile: each agent's true value, or its bid when none is
    /// given.
    pub fn values(&self) -> Vec<Bid> {
        self.profile
            .bids()
            .iter()
            .map(|b| Bid {
                amount: self.true_values.get(&b.agent_id).copied().unwrap_or(b.amount),
                ..*b
            })
            .collect()
    }
}

pub fn parse_profile(text: &str) -> Result<ProfileFile, ParseError> {
    let (capacity, rows) = records(text)?;
    let mut bids = Vec::with_capacity(rows.len());
    let mut true_values = BTreeMap::new();
    for (n, f) in rows {
        arity(n, &f, &[3, 4], "agent_id,size,bid[,true_value]")?;
        let id = int(n, "agent_id", f[0])?;
        bids.push(Bid::new(id, int(n, "bid", f[2])?, int(n, "size", f[1])?));
        if let Some(v) = f.get(3) {
            true_values.insert(AgentId(id), int(n, "true_value", v)?);
        }
    }
    let profile = BidProfile::new(bids, capacity).or_else(|e| err(0, e.to_string()))?;
    Ok(ProfileFile { profile, true_values })
}

/// Mempool file. A missing `bid` column means the user bids its value; the
/// opportunity column must be 0 for `PLAIN` rows.
pub fn parse_mempool(text: &str) -> Result<(u64, Vec<MempoolTx>), ParseError> {
    let (capacity, rows) = records(text)?;
    let mut txs = Vec::with_capacity(rows.len());
    let mut seen = std::collections::HashSet::new();
    for (n, f) in rows {
        arity(n, &f, &[5, 6], "id,size,value,kind,opportunity[,bid]")?;
        let id = int(n, "id", f[0])?;
        if !seen.insert(id) {
            return err(n, format!("duplicate id {id}"));
        }
        let size = int(n, "size", f[1])?;
        let value = int(n, "value", f[2])?;
        let kind: TxKind = f[3].parse().or_else(|e: String| err(n, e))?;
        let opp = int(n, "opportunity", f[4])?;
        let bid = match f.get(5) {
            Some(b) => int(n, "bid", b)?,
            None => value,
        };
        if kind == TxKind::Plain && opp != 0 {
            return err(n, "PLAIN transactions carry no opportunity");
        }
        let tx = MempoolTx::plain(id, size, value, bid).with_opportunity(kind, opp);
        tx.validate().or_else(|e| err(n, e.to_string()))?;
        txs.push(tx);
    }
    Ok((capacity, txs))
}

pub fn write_mempool<W: Write>(mut w: W, capacity: u64, txs: &[MempoolTx]) -> io::Result<()> {
    writeln!(w, "K={capacity}")?;
    for t in txs {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            t.tx_id.0,
            t.size,
            t.true_value,
            t.kind,
            t.opportunity(),
            t.bid
        )?;
    }
    Ok(())
}

pub const PACKING_HEADER: &str = "solver,selected_ids,total_size,total_value";

/// One result row; ids are sorted and `;`-joined, fractional values print
/// as `num/den`.
pub fn packing_row(solver: &str, result: &PackingResult) -> String {
    let ids: Vec<String> = result.id_set().iter().map(|i| i.0.to_string()).collect();
    format!(
        "{solver},{},{},{}",
        ids.join(";"),
        result.total_size,
        format_rational(&result.total_value)
    )
}

pub const OUTCOME_HEADER: &str = "rule,agent_id,won,payment,bid,size";

/// One row per bidder, in profile order.
pub fn write_outcome<W: Write>(mut w: W, profile: &BidProfile, outcome: &AuctionOutcome) -> io::Result<()> {
    for b in profile.bids() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            outcome.rule,
            b.agent_id.0,
            u8::from(outcome.won(b.agent_id)),
            outcome.payment(b.agent_id),
            b.amount,
            b.size
        )?;
    }
    Ok(())
}
