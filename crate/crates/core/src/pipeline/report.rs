use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{Era, RunReport};

/// Per-era totals for a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EraSummary {
    pub era: Era,
    pub slots: usize,
    pub pi_u: i64,
    pub pi_s: i64,
    pub pi_b: i64,
    pub pi_p: i64,
    pub total: i64,
    pub v_hat: u64,
    pub reward: u64,
    pub burn: u64,
    pub bribes: u64,
    pub diverted: u64,
    pub created: u64,
    pub pga_sunk: u64,
    pub mean_efficiency: f64,
}

impl EraSummary {
    pub fn of(report: &RunReport) -> Self {
        let p = report.payoffs();
        let t = &report.totals;
        Self {
            era: report.era.era,
            slots: report.blocks.len(),
            pi_u: p.pi_u,
            pi_s: p.pi_s,
            pi_b: p.pi_b,
            pi_p: p.pi_p,
            total: p.total(),
            v_hat: t.v_hat(),
            reward: t.r,
            burn: t.burn(),
            bribes: t.f_b,
            diverted: report.diverted(),
            created: report.created(),
            pga_sunk: t.pga_sunk,
            mean_efficiency: report.mean_efficiency(),
        }
    }
}

/// `slot,era,pi_u,pi_s,pi_b,pi_p,Pi,V_hat,R,B,F_b,efficiency_ratio`
pub fn write_slot_csv<W: Write>(mut w: W, reports: &[RunReport]) -> io::Result<()> {
    writeln!(w, "slot,era,pi_u,pi_s,pi_b,pi_p,Pi,V_hat,R,B,F_b,efficiency_ratio")?;
    for r in reports {
        for b in &r.blocks {
            let p = &b.payoffs;
            let l = &b.ledger;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{:.6}",
                b.slot,
                b.era,
                p.pi_u,
                p.pi_s,
                p.pi_b,
                p.pi_p,
                p.total(),
                l.v_hat(),
                l.r,
                l.burn(),
                l.f_b,
                b.efficiency_ratio()
            )?;
        }
    }
    Ok(())
}

/// Every primitive flow of every block, plus block metadata.
pub fn write_ledger_csv<W: Write>(mut w: W, reports: &[RunReport]) -> io::Result<()> {
    writeln!(
        w,
        "slot,era,V_u,M_s,M_b,M_p,F_u,F_s,F_b,T_u,T_s,B_u,B_s,R,pga_sunk,gas_used,base_fee,realized_value,optimal_value,builder,relay,header"
    )?;
    let opt = |x: Option<u32>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in reports {
        for b in &r.blocks {
            let l = &b.ledger;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                b.slot,
                b.era,
                l.v_u,
                l.m_s,
                l.m_b,
                l.m_p,
                l.f_u,
                l.f_s,
                l.f_b,
                l.t_u,
                l.t_s,
                l.b_u,
                l.b_s,
                l.r,
                l.pga_sunk,
                b.gas_used,
                b.base_fee,
                b.realized_value,
                b.optimal_value,
                opt(b.builder),
                opt(b.relay),
                b.header.as_deref().unwrap_or("")
            )?;
        }
    }
    Ok(())
}

/// `block,searcher_id,source_tx,classification,captured_value` for one run.
pub fn write_events_csv<W: Write>(mut w: W, report: &RunReport) -> io::Result<()> {
    writeln!(w, "block,searcher_id,source_tx,classification,captured_value")?;
    for b in &report.blocks {
        for e in &b.events {
            writeln!(
                w,
                "{},{},{},{},{}",
                b.slot, e.searcher.0, e.source_tx.0, e.classification, e.captured_value
            )?;
        }
    }
    Ok(())
}

pub fn write_comparison_csv<W: Write>(mut w: W, rows: &[EraSummary]) -> io::Result<()> {
    writeln!(
        w,
        "era,slots,pi_u,pi_s,pi_b,pi_p,Pi,V_hat,R,B,F_b,mev_diverted,mev_created,pga_sunk,mean_efficiency"
    )?;
    for s in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            s.era,
            s.slots,
            s.pi_u,
            s.pi_s,
            s.pi_b,
            s.pi_p,
            s.total,
            s.v_hat,
            s.reward,
            s.burn,
            s.bribes,
            s.diverted,
            s.created,
            s.pga_sunk,
            s.mean_efficiency
        )?;
    }
    Ok(())
}
