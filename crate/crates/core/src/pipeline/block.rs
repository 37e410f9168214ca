use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mempool::fraction_ppm;
use super::{BlockRecord, ChainState, Era, EraConfig, FlowLedger, PipelineError, SimConfig};
use crate::auctions::{run_mechanism, Bid, BidProfile};
use crate::feemarket::{burn_and_split, update_base_fee, ChargedTx};
use crate::knapsack::{solve_exact, Item, KnapsackInstance};
use crate::mev::{
    apply_extraction, route_private, run_pga, scan_mempool, Action, BlockTx, Bundle, MempoolTx, PrivateOrder,
    SearcherId, SearcherTx, TxId,
};
use crate::rng::{substream, AGENTS, BUILDERS};

const SEARCHER_TX_BASE: u64 = 1_000_000_000;
const BUNDLE_BASE: u64 = 2_000_000_000;
const PPM: u128 = 1_000_000;

/// Per-slot random draws for searchers and builders, independent of the era
/// so that every era faces the same competition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotDraws {
    /// `searcher_ppm[j][s]`: searcher `s`'s sealed bid for the opportunity in
    /// mempool position `j`, in millionths of the opportunity.
    pub searcher_ppm: Vec<Vec<u64>>,
    /// `delivered[j][s][b]`: builder `b` receives that bundle.
    pub delivered: Vec<Vec<Vec<bool>>>,
}

impl SlotDraws {
    pub fn draw(seed: u64, slot: u64, txs: usize, sim: &SimConfig, era: &EraConfig) -> Self {
        let m = &sim.market;
        let (lo, hi) = (fraction_ppm(m.searcher_bid_min), fraction_ppm(m.searcher_bid_max));
        let mut bids = substream(seed, AGENTS, slot);
        let searcher_ppm = (0..txs)
            .map(|_| (0..m.searchers).map(|_| bids.random_range(lo..=hi)).collect())
            .collect();
        let mut flow = substream(seed, BUILDERS, slot);
        let builders = era.builder_count as usize;
        let delivered = (0..txs)
            .map(|_| {
                (0..m.searchers)
                    .map(|_| (0..builders).map(|_| flow.random_bool(m.bundle_share)).collect())
                    .collect()
            })
            .collect();
        Self {
            searcher_ppm,
            delivered,
        }
    }
}

/// What a relay shows the proposer: no block contents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealedHeader {
    pub relay: u32,
    pub builder: u32,
    pub header: String,
    pub bribe: u64,
}

/// Highest bribe wins; ties go to the lower relay id, then the lower
/// builder id.
pub fn select_header(headers: &[SealedHeader]) -> Option<&SealedHeader> {
    headers.iter().min_by(|a, b| {
        b.bribe
            .cmp(&a.bribe)
            .then(a.relay.cmp(&b.relay))
            .then(a.builder.cmp(&b.builder))
    })
}

#[derive(Copy, Clone, Debug)]
struct Fee {
    burn: u64,
    tip: u64,
}

#[derive(Clone, Debug, Default)]
struct Built {
    order: Vec<BlockTx>,
    gas_used: u64,
    user_fees: BTreeMap<TxId, Fee>,
    searcher_fees: BTreeMap<SearcherId, (u64, u64)>,
    /// Fee revenue of the block producer as reported by the auctions.
    revenue: u64,
    pga_sunk: u64,
}

struct SealedBid {
    searcher: SearcherId,
    amount: u64,
}

/// Executes one slot of `era`.
pub fn run_block(
    era: &EraConfig,
    sim: &SimConfig,
    slot: u64,
    mempool: &[MempoolTx],
    draws: &SlotDraws,
    state: &ChainState,
) -> Result<(BlockRecord, ChainState), PipelineError> {
    let capacity = sim.feemarket.max_gas;
    let view: Vec<MempoolTx> = mempool
        .iter()
        .map(|tx| {
            let mut t = tx.clone();
            // no private channel exists before relays
            t.visible |= !era.era.has_relays();
            t
        })
        .collect();
    let position: HashMap<TxId, usize> = view.iter().enumerate().map(|(j, t)| (t.tx_id, j)).collect();
    let base = if era.era.burns() { state.fees.base_fee } else { 0 };
    let min_tip = if era.era.burns() { sim.feemarket.min_tip } else { 0 };

    let (built, bribe, builder, relay, header) = match era.era {
        Era::Baseline => (user_auction(era, &view, capacity)?, 0, None, None, None),
        Era::Pga => (pga_block(era, sim, &view, capacity)?, 0, None, None, None),
        Era::Relay | Era::Eip1559 => {
            let bundles = sealed_bundles(sim, &view, &position, draws, base, min_tip, None);
            let built = sealed_block(era, sim, &view, &bundles, capacity, base, min_tip)?;
            (built, 0, None, Some(0), None)
        }
        Era::Pbs => {
            let (built, sealed) = pbs_block(era, sim, slot, &view, &position, draws, base, min_tip)?;
            (
                built,
                sealed.bribe,
                Some(sealed.builder),
                Some(sealed.relay),
                Some(sealed.header),
            )
        }
    };

    let imbalance = |detail: String| PipelineError::Imbalance { slot, detail };
    if built.gas_used > capacity {
        return Err(imbalance(format!("gas used {} over capacity", built.gas_used)));
    }

    let extraction = apply_extraction(&built.order);
    let included: Vec<&MempoolTx> = built
        .order
        .iter()
        .filter_map(|t| match t {
            BlockTx::User(u) => Some(u),
            BlockTx::Searcher(_) => None,
        })
        .collect();
    let realized_value: u64 = included.iter().map(|u| u.true_value).sum();
    let v_u: u64 = included.iter().map(|u| extraction.user_values[&u.tx_id]).sum();
    if realized_value - v_u != extraction.diverted() {
        return Err(imbalance("diverted value differs from user losses".into()));
    }

    let mut ledger = FlowLedger {
        v_u,
        m_s: extraction.captured.values().sum(),
        m_b: sim.market.builder_mev,
        m_p: if era.era.separates_proposer() {
            sim.market.proposer_mev
        } else {
            0
        },
        r: era.block_reward,
        f_b: bribe,
        separate_proposer: era.era.separates_proposer(),
        pga_sunk: built.pga_sunk,
        ..FlowLedger::default()
    };
    for f in built.user_fees.values() {
        ledger.b_u += f.burn;
        ledger.t_u += f.tip;
        ledger.f_u += f.burn + f.tip;
    }
    for (burn, tip) in built.searcher_fees.values() {
        ledger.b_s += burn;
        ledger.t_s += tip;
        ledger.f_s += burn + tip;
    }
    if ledger.tips() != built.revenue {
        return Err(imbalance(format!(
            "tips {} differ from auction revenue {}",
            ledger.tips(),
            built.revenue
        )));
    }

    let mut next = *state;
    if era.era.burns() {
        let charged: Vec<ChargedTx> = built
            .order
            .iter()
            .map(|t| ChargedTx {
                tx_id: t.tx_id().0,
                gas: t.size(),
                tip: 0,
            })
            .collect();
        let (fees, after) = burn_and_split(&charged, &state.fees)?;
        if fees.burn != ledger.burn() {
            return Err(imbalance("burn differs from base fee times gas".into()));
        }
        next.fees = update_base_fee(&after, built.gas_used)?;
    }
    ledger.check().map_err(|e| imbalance(e.detail))?;

    let record = BlockRecord {
        slot,
        era: era.era,
        payoffs: ledger.payoffs(),
        ledger,
        gas_used: built.gas_used,
        base_fee: base,
        realized_value,
        optimal_value: optimal_value(&view, capacity)?,
        events: extraction.events,
        order: built.order.iter().map(BlockTx::tx_id).collect(),
        builder,
        relay,
        header,
    };
    Ok((record, next))
}

fn optimal_value(view: &[MempoolTx], capacity: u64) -> Result<u64, PipelineError> {
    if view.is_empty() {
        return Ok(0);
    }
    let items = view
        .iter()
        .map(|t| Item::new(t.tx_id.0, t.size, t.true_value))
        .collect();
    let inst = KnapsackInstance::new(items, capacity)?;
    Ok(solve_exact(&inst)?.value_units())
}

/// Fee auction over user bids only.
fn user_auction(era: &EraConfig, view: &[MempoolTx], capacity: u64) -> Result<Built, PipelineError> {
    let mut built = Built::default();
    if view.is_empty() {
        return Ok(built);
    }
    let bids = view.iter().map(|t| Bid::new(t.tx_id.0, t.bid, t.size)).collect();
    let outcome = run_mechanism(era.auction_rule, &BidProfile::new(bids, capacity)?)?;
    let by_id: HashMap<u64, &MempoolTx> = view.iter().map(|t| (t.tx_id.0, t)).collect();
    for w in &outcome.winners {
        let tx = by_id[&w.0];
        let paid = outcome.payment(*w) as u64;
        built.user_fees.insert(tx.tx_id, Fee { burn: 0, tip: paid });
        built.order.push(BlockTx::User(tx.clone()));
        built.gas_used += tx.size;
    }
    built.revenue = outcome.revenue as u64;
    Ok(built)
}

/// Searchers fight over each visible opportunity in a priority gas auction;
/// winners' transactions get reserved space next to their source, and the
/// rest of the block is sold by the fee auction.
fn pga_block(era: &EraConfig, sim: &SimConfig, view: &[MempoolTx], capacity: u64) -> Result<Built, PipelineError> {
    let m = &sim.market;
    let mut reserved = 0u64;
    let mut pga_revenue = 0u64;
    let mut sunk = 0u64;
    let mut spend: BTreeMap<SearcherId, u64> = BTreeMap::new();
    let mut searcher_txs: HashMap<TxId, SearcherTx> = HashMap::new();
    for (k, op) in scan_mempool(view).into_iter().enumerate() {
        if reserved + m.searcher_gas > capacity {
            break;
        }
        let res = run_pga(op.value, m.searchers, m.pga_increment, m.pga_gas_cost)?;
        // rotate who moves first from one opportunity to the next
        let who = |i: usize| SearcherId(((i + k) % m.searchers) as u32);
        for (i, gas) in res.sunk_costs.iter().enumerate() {
            if *gas > 0 {
                *spend.entry(who(i)).or_default() += gas;
            }
        }
        sunk += res.sunk_costs.iter().sum::<u64>();
        pga_revenue += res.miner_revenue;
        if let Some(w) = res.winner {
            *spend.entry(who(w)).or_default() += res.winning_fee;
            reserved += m.searcher_gas;
            searcher_txs.insert(
                op.source,
                SearcherTx {
                    tx_id: TxId(SEARCHER_TX_BASE + op.source.0),
                    searcher: who(w),
                    target: op.source,
                    action: op.action,
                    size: m.searcher_gas,
                },
            );
        }
    }

    let users = user_auction(era, view, capacity - reserved)?;
    let mut built = Built {
        gas_used: users.gas_used + reserved,
        user_fees: users.user_fees,
        revenue: users.revenue + pga_revenue,
        pga_sunk: sunk,
        searcher_fees: spend.into_iter().map(|(s, v)| (s, (0, v))).collect(),
        order: Vec::new(),
    };
    // searcher transactions whose source did not make it run first and
    // realize nothing
    let included: std::collections::HashSet<TxId> = users.order.iter().map(BlockTx::tx_id).collect();
    let mut orphans: Vec<&SearcherTx> = searcher_txs
        .values()
        .filter(|s| !included.contains(&s.target))
        .collect();
    orphans.sort_by_key(|s| s.tx_id);
    built.order.extend(orphans.into_iter().cloned().map(BlockTx::Searcher));
    for tx in users.order {
        let searcher = searcher_txs.get(&tx.tx_id()).cloned();
        built.order.extend(place(tx, searcher));
    }
    Ok(built)
}

/// A user transaction with an optional searcher transaction placed right
/// before (front-run) or right after (back-run) it.
fn place(user: BlockTx, searcher: Option<SearcherTx>) -> Vec<BlockTx> {
    match searcher {
        None => vec![user],
        Some(s) if s.action == Action::FrontRun => vec![BlockTx::Searcher(s), user],
        Some(s) => vec![user, BlockTx::Searcher(s)],
    }
}

/// Best sealed bid per visible opportunity among the searchers that reach
/// `builder` (all searchers when `None`). Bids that cannot cover the base
/// fee and minimum tip on the searcher's gas are dropped.
fn sealed_bundles(
    sim: &SimConfig,
    view: &[MempoolTx],
    position: &HashMap<TxId, usize>,
    draws: &SlotDraws,
    base: u64,
    min_tip: u64,
    builder: Option<usize>,
) -> HashMap<TxId, SealedBid> {
    let m = &sim.market;
    let floor = u128::from(base + min_tip) * u128::from(m.searcher_gas);
    let mut out = HashMap::new();
    for op in scan_mempool(view) {
        let j = position[&op.source];
        let mut best: Option<SealedBid> = None;
        for s in 0..m.searchers {
            if let Some(b) = builder {
                if !draws.delivered[j][s][b] {
                    continue;
                }
            }
            let amount = (u128::from(op.value) * u128::from(draws.searcher_ppm[j][s]) / PPM) as u64;
            if amount == 0 || u128::from(amount) < floor {
                continue;
            }
            if best.as_ref().is_none_or(|x| amount > x.amount) {
                best = Some(SealedBid {
                    searcher: SearcherId(s as u32),
                    amount,
                });
            }
        }
        if let Some(b) = best {
            out.insert(op.source, b);
        }
    }
    out
}

enum Entry<'a> {
    User {
        tx: &'a MempoolTx,
        tip: u64,
    },
    Bundle {
        tx: &'a MempoolTx,
        user_tip: u64,
        searcher: SearcherTx,
        searcher_tip: u64,
    },
}

/// Block built from sealed bids: public transactions, privately routed
/// transactions, and searcher bundles, all priced by the era's auction on
/// the tip each offers above the base fee.
fn sealed_block(
    era: &EraConfig,
    sim: &SimConfig,
    view: &[MempoolTx],
    bundles: &HashMap<TxId, SealedBid>,
    capacity: u64,
    base: u64,
    min_tip: u64,
) -> Result<Built, PipelineError> {
    let sg = sim.market.searcher_gas;
    let mut entries: HashMap<u64, Entry> = HashMap::new();
    let mut public = Vec::new();
    let mut private = Vec::new();
    for tx in view {
        let floor = u128::from(base + min_tip) * u128::from(tx.size);
        if u128::from(tx.bid) < floor {
            continue;
        }
        let user_tip = tx.bid - base * tx.size;
        match bundles.get(&tx.tx_id) {
            Some(sb) => {
                let searcher = SearcherTx {
                    tx_id: TxId(SEARCHER_TX_BASE + tx.tx_id.0),
                    searcher: sb.searcher,
                    target: tx.tx_id,
                    action: tx.kind.action().expect("bundled source carries MEV"),
                    size: sg,
                };
                let searcher_tip = sb.amount - base * sg;
                let id = BUNDLE_BASE + tx.tx_id.0;
                private.push(PrivateOrder::Bundle(Bundle {
                    bundle_id: id,
                    searcher: sb.searcher,
                    txs: place(BlockTx::User(tx.clone()), Some(searcher.clone())),
                    bid: user_tip + searcher_tip,
                }));
                entries.insert(
                    id,
                    Entry::Bundle {
                        tx,
                        user_tip,
                        searcher,
                        searcher_tip,
                    },
                );
            }
            None if !tx.visible => {
                let mut sealed = tx.clone();
                sealed.bid = user_tip;
                private.push(PrivateOrder::Tx(sealed));
                entries.insert(tx.tx_id.0, Entry::User { tx, tip: user_tip });
            }
            None => {
                public.push(Bid::new(tx.tx_id.0, user_tip, tx.size));
                entries.insert(tx.tx_id.0, Entry::User { tx, tip: user_tip });
            }
        }
    }

    let mut built = Built::default();
    if entries.is_empty() {
        return Ok(built);
    }
    let relay = era.era.has_relays().then_some(0);
    let sealed = route_private(&mut private, relay, capacity)?;
    public.extend_from_slice(sealed.bids());
    let outcome = run_mechanism(era.auction_rule, &BidProfile::new(public, capacity)?)?;

    for w in &outcome.winners {
        let paid = outcome.payment(*w) as u64;
        match &entries[&w.0] {
            Entry::User { tx, tip } => {
                debug_assert!(paid <= *tip);
                built.user_fees.insert(
                    tx.tx_id,
                    Fee {
                        burn: base * tx.size,
                        tip: paid,
                    },
                );
                built.order.push(BlockTx::User((*tx).clone()));
                built.gas_used += tx.size;
            }
            Entry::Bundle {
                tx,
                user_tip,
                searcher,
                searcher_tip,
            } => {
                let offered = u128::from(user_tip + searcher_tip);
                let s_share = (u128::from(paid) * u128::from(*searcher_tip))
                    .checked_div(offered)
                    .map_or(0, |x| x as u64);
                built.user_fees.insert(
                    tx.tx_id,
                    Fee {
                        burn: base * tx.size,
                        tip: paid - s_share,
                    },
                );
                let e = built.searcher_fees.entry(searcher.searcher).or_default();
                e.0 += base * searcher.size;
                e.1 += s_share;
                built
                    .order
                    .extend(place(BlockTx::User((*tx).clone()), Some(searcher.clone())));
                built.gas_used += tx.size + searcher.size;
            }
        }
    }
    built.revenue = outcome.revenue as u64;
    Ok(built)
}

struct Candidate {
    built: Built,
    sealed: SealedHeader,
}

/// Every builder assembles a block from the public mempool, private flow,
/// and the bundles that reach it; relays forward only header and bribe; the
/// proposer signs the best header and the winning relay reveals the body.
#[allow(clippy::too_many_arguments)]
fn pbs_block(
    era: &EraConfig,
    sim: &SimConfig,
    slot: u64,
    view: &[MempoolTx],
    position: &HashMap<TxId, usize>,
    draws: &SlotDraws,
    base: u64,
    min_tip: u64,
) -> Result<(Built, SealedHeader), PipelineError> {
    let bribe_ppm = u128::from(fraction_ppm(sim.market.builder_bribe));
    let candidates: Vec<Candidate> = (0..era.builder_count as usize)
        .into_par_iter()
        .map(|b| {
            let bundles = sealed_bundles(sim, view, position, draws, base, min_tip, Some(b));
            let built = sealed_block(era, sim, view, &bundles, sim.feemarket.max_gas, base, min_tip)?;
            let revenue = u128::from(built.revenue) + u128::from(sim.market.builder_mev);
            let bribe = (revenue * bribe_ppm / PPM) as u64;
            let header = header_hash(slot, b as u32, &built.order, built.gas_used, bribe);
            Ok(Candidate {
                sealed: SealedHeader {
                    relay: b as u32 % era.relay_count,
                    builder: b as u32,
                    header,
                    bribe,
                },
                built,
            })
        })
        .collect::<Result<_, PipelineError>>()?;

    let headers: Vec<SealedHeader> = candidates.iter().map(|c| c.sealed.clone()).collect();
    let chosen = select_header(&headers).expect("at least one builder").clone();
    let body = candidates
        .into_iter()
        .find(|c| c.sealed.header == chosen.header && c.sealed.builder == chosen.builder)
        .expect("relay holds the signed block");
    let revealed = header_hash(
        slot,
        chosen.builder,
        &body.built.order,
        body.built.gas_used,
        chosen.bribe,
    );
    if revealed != chosen.header {
        return Err(PipelineError::Imbalance {
            slot,
            detail: "revealed block does not match the signed header".into(),
        });
    }
    Ok((body.built, chosen))
}

fn header_hash(slot: u64, builder: u32, order: &[BlockTx], gas_used: u64, bribe: u64) -> String {
    let mut h = Sha256::new();
    h.update(slot.to_le_bytes());
    h.update(builder.to_le_bytes());
    for tx in order {
        h.update(tx.tx_id().0.to_le_bytes());
    }
    h.update(gas_used.to_le_bytes());
    h.update(bribe.to_le_bytes());
    hex::encode(h.finalize())
}
