use serde::{Deserialize, Serialize};

/// Flows of one block, all non-negative integers in value units.
///
/// `separate_proposer` selects who receives the block reward: the block
/// producer (`b`) before proposer-builder separation, the proposer (`p`)
/// after it.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowLedger {
    pub v_u: u64,
    pub m_s: u64,
    pub m_b: u64,
    pub m_p: u64,
    pub f_u: u64,
    pub f_s: u64,
    pub f_b: u64,
    pub t_u: u64,
    pub t_s: u64,
    pub b_u: u64,
    pub b_s: u64,
    pub r: u64,
    pub separate_proposer: bool,
    /// Gas spent in priority gas auctions, already contained in `f_s`.
    pub pga_sunk: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payoffs {
    pub pi_u: i64,
    pub pi_s: i64,
    pub pi_b: i64,
    pub pi_p: i64,
}

impl Payoffs {
    pub fn total(&self) -> i64 {
        self.pi_u + self.pi_s + self.pi_b + self.pi_p
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConservationError {
    pub payoff_sum: i128,
    pub expected: i128,
    pub detail: String,
}

impl FlowLedger {
    pub fn burn(&self) -> u64 {
        self.b_u + self.b_s
    }

    pub fn tips(&self) -> u64 {
        self.t_u + self.t_s
    }

    /// Total value created by the block: users, searchers, and any
    /// self-extraction by the builder or proposer.
    pub fn v_hat(&self) -> u64 {
        self.v_u + self.m_s + self.m_b + self.m_p
    }

    pub fn payoffs(&self) -> Payoffs {
        let i = |x: u64| x as i64;
        let pi_u = i(self.v_u) - i(self.f_u);
        let pi_s = i(self.m_s) - i(self.f_s);
        if self.separate_proposer {
            Payoffs {
                pi_u,
                pi_s,
                pi_b: i(self.t_u) + i(self.t_s) + i(self.m_b) - i(self.f_b),
                pi_p: i(self.f_b) + i(self.r) + i(self.m_p),
            }
        } else {
            Payoffs {
                pi_u,
                pi_s,
                pi_b: i(self.t_u) + i(self.t_s) + i(self.m_b) + i(self.r),
                pi_p: i(self.m_p),
            }
        }
    }

    /// Fee splits, bribe bound, and `sum of payoffs = V_hat + R - B` as exact
    /// integers.
    pub fn check(&self) -> Result<(), ConservationError> {
        let fail = |detail: String| {
            Err(ConservationError {
                payoff_sum: i128::from(self.payoffs().total()),
                expected: self.expected_surplus(),
                detail,
            })
        };
        if self.f_u != self.b_u + self.t_u {
            return fail(format!("F_u {} != B_u {} + T_u {}", self.f_u, self.b_u, self.t_u));
        }
        if self.f_s != self.b_s + self.t_s {
            return fail(format!("F_s {} != B_s {} + T_s {}", self.f_s, self.b_s, self.t_s));
        }
        if !self.separate_proposer && self.f_b != 0 {
            return fail("bribe without a separate proposer".into());
        }
        if self.f_b > self.tips() + self.m_b {
            return fail(format!("bribe {} exceeds builder revenue", self.f_b));
        }
        let sum = i128::from(self.payoffs().total());
        if sum != self.expected_surplus() {
            return fail("payoffs do not add up to V_hat + R - B".into());
        }
        Ok(())
    }

    pub fn expected_surplus(&self) -> i128 {
        i128::from(self.v_hat()) + i128::from(self.r) - i128::from(self.burn())
    }

    pub fn add(&mut self, other: &FlowLedger) {
        self.v_u += other.v_u;
        self.m_s += other.m_s;
        self.m_b += other.m_b;
        self.m_p += other.m_p;
        self.f_u += other.f_u;
        self.f_s += other.f_s;
        self.f_b += other.f_b;
        self.t_u += other.t_u;
        self.t_s += other.t_s;
        self.b_u += other.b_u;
        self.b_s += other.b_s;
        self.r += other.r;
        self.pga_sunk += other.pga_sunk;
        self.separate_proposer |= other.separate_proposer;
    }
}
