//! Bidders for repeated knapsack auctions: truthful, fixed shading, and
//! tabular Q-learning over bid multipliers.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auctions::{run_mechanism, AuctionError, AuctionOutcome, Bid, BidProfile, PricingRule};
use crate::knapsack::{solve_exact, Item, KnapsackError, KnapsackInstance};
use crate::rng::{substream, Rng, AGENTS, DEMAND, EVALUATION};

const PPM: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent config: {0}")]
    Config(String),
    #[error(transparent)]
    Auction(#[from] AuctionError),
    #[error(transparent)]
    Knapsack(#[from] KnapsackError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Truthful,
    Shade,
    Qlearn,
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "truthful" => Ok(Self::Truthful),
            "shade" => Ok(Self::Shade),
            "qlearn" | "q-learn" | "q" => Ok(Self::Qlearn),
            other => Err(format!("unknown agent kind `{other}`")),
        }
    }
}

/// Bidder population and learning environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub kind: StrategyKind,
    pub count: usize,
    /// Bid fraction for `shade`.
    pub shade: f64,
    /// Q-learning actions, as multiples of the true value.
    pub multipliers: Vec<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_decay: f64,
    /// Number of price buckets in the learner's state.
    pub buckets: usize,
    /// Number of own-value buckets in the learner's state.
    pub value_buckets: usize,
    /// Starting value of every Q-table entry.
    pub initial_q: f64,
    pub episodes: usize,
    /// Greedy (no exploration) episodes used for the reported figures.
    pub eval_episodes: usize,
    pub value_min: u64,
    pub value_max: u64,
    pub size_min: u64,
    pub size_max: u64,
    pub capacity: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Qlearn,
            count: 5,
            shade: 0.8,
            multipliers: (5..=12).map(|m| m as f64 / 10.0).collect(),
            alpha: 0.1,
            gamma: 0.9,
            epsilon: 0.2,
            epsilon_decay: 0.999,
            buckets: 10,
            value_buckets: 10,
            initial_q: 300.0,
            episodes: 10_000,
            eval_episodes: 2_000,
            value_min: 1,
            value_max: 100,
            size_min: 1,
            size_max: 3,
            capacity: 5,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.to_string()));
        if self.count == 0 {
            return bad("count must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.shade) {
            return bad("shade must lie in [0, 1]");
        }
        if self.multipliers.is_empty() || self.multipliers.iter().any(|m| !m.is_finite() || *m <= 0.0) {
            return bad("multipliers must be positive");
        }
        if !(0.0..=1.0).contains(&self.epsilon) || !(0.0..=1.0).contains(&self.epsilon_decay) {
            return bad("epsilon and epsilon_decay must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.gamma) {
            return bad("alpha and gamma must lie in [0, 1]");
        }
        if self.buckets == 0 || self.value_buckets == 0 || self.episodes == 0 {
            return bad("buckets, value_buckets and episodes must be positive");
        }
        if self.value_min > self.value_max || self.size_min == 0 || self.size_min > self.size_max {
            return bad("value and size bounds are inconsistent");
        }
        if self.capacity == 0 {
            return bad("capacity must be positive");
        }
        Ok(())
    }

    /// Per-unit prices from 0 to twice the top value, in equal buckets.
    fn price_bucket(&self, per_unit: u64) -> usize {
        let top = u128::from(self.value_max.max(1)) * 2;
        ((u128::from(per_unit) * self.buckets as u128 / top) as usize).min(self.buckets - 1)
    }

    fn value_bucket(&self, value: u64) -> usize {
        let span = u128::from(self.value_max - self.value_min) + 1;
        (u128::from(value - self.value_min) * self.value_buckets as u128 / span) as usize
    }

    /// Learner state: last price bucket, then own value bucket.
    pub fn state(&self, price_bucket: usize, value: u64) -> usize {
        price_bucket * self.value_buckets + self.value_bucket(value)
    }

    fn strategy(&self) -> Strategy {
        match self.kind {
            StrategyKind::Truthful => Strategy::Truthful,
            StrategyKind::Shade => Strategy::Shade {
                ppm: (self.shade * 1e6).round() as u64,
            },
            StrategyKind::Qlearn => Strategy::QLearn(QLearner::new(self)),
        }
    }
}

/// Tabular Q-learner choosing a bid multiplier given a price bucket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QLearner {
    pub multipliers_ppm: Vec<u64>,
    /// `q[state][action]`
    pub q: Vec<Vec<f64>>,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_decay: f64,
}

impl QLearner {
    pub fn new(c: &AgentConfig) -> Self {
        Self {
            multipliers_ppm: c.multipliers.iter().map(|m| (m * 1e6).round() as u64).collect(),
            q: vec![vec![c.initial_q; c.multipliers.len()]; c.buckets * c.value_buckets],
            alpha: c.alpha,
            gamma: c.gamma,
            epsilon: c.epsilon,
            epsilon_decay: c.epsilon_decay,
        }
    }

    /// Highest-valued action, lowest index on ties.
    pub fn greedy(&self, state: usize) -> usize {
        let row = &self.q[state];
        let mut best = 0;
        for (a, v) in row.iter().enumerate() {
            if *v > row[best] {
                best = a;
            }
        }
        best
    }

    /// One exploration draw is consumed whatever the outcome, so learners
    /// stay in lockstep with the random stream.
    pub fn choose(&self, state: usize, rng: &mut Rng) -> usize {
        let explore = rng.random::<f64>() < self.epsilon;
        let pick = rng.random_range(0..self.multipliers_ppm.len());
        if explore {
            pick
        } else {
            self.greedy(state)
        }
    }

    pub fn update(&mut self, state: usize, action: usize, reward: f64, next: usize) {
        let best_next = self.q[next].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q = &mut self.q[state][action];
        *q += self.alpha * (reward + self.gamma * best_next - *q);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Truthful,
    /// Bid `floor(ppm * v / 10^6)`.
    Shade {
        ppm: u64,
    },
    QLearn(QLearner),
}

impl Strategy {
    /// Bid for a true value. Returns the chosen action for learners.
    pub fn bid(&self, value: u64, state: usize, rng: &mut Rng) -> (u64, Option<usize>) {
        match self {
            Strategy::Truthful => (value, None),
            Strategy::Shade { ppm } => (scale(value, *ppm), None),
            Strategy::QLearn(l) => {
                let a = l.choose(state, rng);
                (scale(value, l.multipliers_ppm[a]), Some(a))
            }
        }
    }
}

fn scale(value: u64, ppm: u64) -> u64 {
    (u128::from(value) * u128::from(ppm) / PPM) as u64
}

/// One auction round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub episode: usize,
    pub rule: PricingRule,
    pub revenue: i64,
    /// Sum of winners' true values.
    pub surplus: u64,
    pub efficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub rule: PricingRule,
    pub seed: u64,
    /// Training episodes followed by evaluation episodes.
    pub episodes: Vec<EpisodeStats>,
    pub eval_start: usize,
    /// Per agent, total bid over total value during evaluation.
    pub bid_value_ratio: Vec<f64>,
    pub strategies: Vec<Strategy>,
}

impl TrainingReport {
    fn eval(&self) -> &[EpisodeStats] {
        &self.episodes[self.eval_start..]
    }

    pub fn mean_revenue(&self) -> f64 {
        mean(self.eval().iter().map(|e| e.revenue as f64))
    }

    pub fn mean_efficiency(&self) -> f64 {
        mean(self.eval().iter().map(|e| e.efficiency))
    }

    pub fn mean_bid_value_ratio(&self) -> f64 {
        mean(self.bid_value_ratio.iter().copied())
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Values and sizes of episode `t`, identical for every rule.
fn draw_types(c: &AgentConfig, seed: u64, stream: u64, t: usize) -> Vec<(u64, u64)> {
    let mut rng = substream(seed, stream, t as u64);
    (0..c.count)
        .map(|_| {
            let v = rng.random_range(c.value_min..=c.value_max);
            let k = rng.random_range(c.size_min..=c.size_max);
            (v, k)
        })
        .collect()
}

/// Price signal seen by learners in the next round: the uniform clearing
/// price per unit under UP, the lowest winning per-unit bid otherwise.
fn price_signal(rule: PricingRule, profile: &BidProfile, outcome: &AuctionOutcome) -> u64 {
    let per_unit = |b: &Bid| b.amount / b.size;
    match rule {
        PricingRule::Up => outcome
            .winners
            .iter()
            .map(|w| {
                let b = profile.bid(*w).expect("winner bids");
                outcome.payment(*w).max(0) as u64 / b.size
            })
            .min()
            .unwrap_or(0),
        _ => outcome
            .winners
            .iter()
            .map(|w| per_unit(profile.bid(*w).expect("winner bids")))
            .min()
            .unwrap_or(0),
    }
}

fn optimum(types: &[(u64, u64)], capacity: u64) -> Result<u64, AgentError> {
    let items = types
        .iter()
        .enumerate()
        .map(|(i, (v, k))| Item::new(i as u64 + 1, *k, *v))
        .collect();
    Ok(solve_exact(&KnapsackInstance::new(items, capacity)?)?.value_units())
}

/// Repeated auctions under `rule`: `episodes` learning rounds, then
/// `eval_episodes` rounds without exploration on fresh draws.
pub fn train(rule: PricingRule, config: &AgentConfig, seed: u64) -> Result<TrainingReport, AgentError> {
    config.validate()?;
    let mut strategies: Vec<Strategy> = (0..config.count).map(|_| config.strategy()).collect();
    let mut explore = substream(seed, AGENTS, 0);
    let mut price = 0usize;
    let mut pending: Vec<Option<(usize, usize, f64)>> = vec![None; config.count];
    let mut episodes = Vec::with_capacity(config.episodes + config.eval_episodes);
    let mut bid_sum = vec![0u64; config.count];
    let mut value_sum = vec![0u64; config.count];

    let total = config.episodes + config.eval_episodes;
    for t in 0..total {
        let evaluating = t >= config.episodes;
        let types = if evaluating {
            draw_types(config, seed, EVALUATION, t - config.episodes)
        } else {
            draw_types(config, seed, DEMAND, t)
        };
        let mut bids = Vec::with_capacity(config.count);
        let mut actions = Vec::with_capacity(config.count);
        for (i, s) in strategies.iter_mut().enumerate() {
            let (v, k) = types[i];
            let state = config.state(price, v);
            if let (Strategy::QLearn(l), Some((prev, a, r))) = (&mut *s, pending[i].take()) {
                l.update(prev, a, r, state);
            }
            let (amount, action) = match &*s {
                Strategy::QLearn(l) if evaluating => {
                    let a = l.greedy(state);
                    (scale(v, l.multipliers_ppm[a]), Some(a))
                }
                _ => s.bid(v, state, &mut explore),
            };
            bids.push(Bid::new(i as u64 + 1, amount, k));
            actions.push(action.map(|a| (state, a)));
            if evaluating {
                bid_sum[i] += amount;
                value_sum[i] += v;
            }
        }
        let profile = BidProfile::new(bids, config.capacity)?;
        let outcome = run_mechanism(rule, &profile)?;
        price = config.price_bucket(price_signal(rule, &profile, &outcome));

        let mut surplus = 0;
        for (i, (v, k)) in types.iter().enumerate() {
            let truth = Bid::new(i as u64 + 1, *v, *k);
            let reward = crate::auctions::payoff(&outcome, &truth);
            if outcome.won(truth.agent_id) {
                surplus += v;
            }
            if let (Some((state, a)), false) = (actions[i], evaluating) {
                pending[i] = Some((state, a, reward as f64));
            }
        }
        if !evaluating {
            for s in &mut strategies {
                if let Strategy::QLearn(l) = s {
                    l.epsilon *= l.epsilon_decay;
                }
            }
        }
        let best = optimum(&types, config.capacity)?;
        episodes.push(EpisodeStats {
            episode: t,
            rule,
            revenue: outcome.revenue,
            surplus,
            efficiency: if best == 0 { 1.0 } else { surplus as f64 / best as f64 },
        });
    }

    let bid_value_ratio = bid_sum
        .iter()
        .zip(&value_sum)
        .map(|(b, v)| if *v == 0 { 1.0 } else { *b as f64 / *v as f64 })
        .collect();
    Ok(TrainingReport {
        rule,
        seed,
        episodes,
        eval_start: config.episodes,
        bid_value_ratio,
        strategies,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleResult {
    pub rule: PricingRule,
    pub revenue: f64,
    pub efficiency: f64,
    pub bid_value_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    /// In the order the rules were given.
    pub rules: Vec<RuleResult>,
    /// Revenue weakly decreasing along the given rule order.
    pub revenue_ordered: bool,
    /// Efficiency weakly increasing along the given rule order.
    pub efficiency_ordered: bool,
}

impl SeedResult {
    pub fn both_ordered(&self) -> bool {
        self.revenue_ordered && self.efficiency_ordered
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tournament {
    pub seeds: Vec<SeedResult>,
    /// Mean over seeds, per rule.
    pub aggregate: Vec<RuleResult>,
    pub revenue_fraction: f64,
    pub efficiency_fraction: f64,
    pub both_fraction: f64,
}

/// Trains a fresh population under each rule for each seed. Every rule sees
/// the same value and size draws for a given seed. Orderings are checked
/// along `rules` as given (DP, GSP, UP for the usual comparison).
pub fn tournament(rules: &[PricingRule], config: &AgentConfig, seeds: &[u64]) -> Result<Tournament, AgentError> {
    config.validate()?;
    if rules.is_empty() || seeds.is_empty() {
        return Err(AgentError::Config("need at least one rule and one seed".into()));
    }
    let seed_results: Vec<SeedResult> = seeds
        .par_iter()
        .map(|&seed| {
            let rules = rules
                .iter()
                .map(|&rule| {
                    let r = train(rule, config, seed)?;
                    Ok(RuleResult {
                        rule,
                        revenue: r.mean_revenue(),
                        efficiency: r.mean_efficiency(),
                        bid_value_ratio: r.mean_bid_value_ratio(),
                    })
                })
                .collect::<Result<Vec<_>, AgentError>>()?;
            let revenue_ordered = rules.windows(2).all(|w| w[0].revenue >= w[1].revenue);
            let efficiency_ordered = rules.windows(2).all(|w| w[0].efficiency <= w[1].efficiency);
            Ok(SeedResult {
                seed,
                rules,
                revenue_ordered,
                efficiency_ordered,
            })
        })
        .collect::<Result<_, AgentError>>()?;

    let n = seed_results.len() as f64;
    let aggregate = rules
        .iter()
        .enumerate()
        .map(|(i, &rule)| RuleResult {
            rule,
            revenue: mean(seed_results.iter().map(|s| s.rules[i].revenue)),
            efficiency: mean(seed_results.iter().map(|s| s.rules[i].efficiency)),
            bid_value_ratio: mean(seed_results.iter().map(|s| s.rules[i].bid_value_ratio)),
        })
        .collect();
    let frac = |f: &dyn Fn(&SeedResult) -> bool| seed_results.iter().filter(|s| f(s)).count() as f64 / n;
    Ok(Tournament {
        aggregate,
        revenue_fraction: frac(&|s| s.revenue_ordered),
        efficiency_fraction: frac(&|s| s.efficiency_ordered),
        both_fraction: frac(&|s| s.both_ordered()),
        seeds: seed_results,
    })
}
