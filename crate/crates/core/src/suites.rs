//! Seeded instance suites shared by tests, the CLI, and the benches.

use rand::Rng as _;

use crate::auctions::{Bid, BidProfile};
use crate::knapsack::{Item, KnapsackInstance};
use crate::rng::{substream, SUITE};

/// Shape of a random knapsack instance; bounds are inclusive.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct KnapsackSuite {
    pub items: (usize, usize),
    pub sizes: (u64, u64),
    pub values: (u64, u64),
}

impl KnapsackSuite {
    /// Small instances within reach of the exhaustive oracle.
    pub const ORACLE: KnapsackSuite = KnapsackSuite {
        items: (1, 20),
        sizes: (1, 30),
        values: (0, 100),
    };

    /// Capacity is drawn uniformly between the smallest size and the total.
    pub fn generate(&self, seed: u64, count: usize) -> Vec<KnapsackInstance> {
        (0..count)
            .map(|i| {
                let mut rng = substream(seed, SUITE, i as u64);
                let n = rng.random_range(self.items.0..=self.items.1);
                let items: Vec<Item> = (0..n)
                    .map(|j| {
                        Item::new(
                            j as u64 + 1,
                            rng.random_range(self.sizes.0..=self.sizes.1),
                            rng.random_range(self.values.0..=self.values.1),
                        )
                    })
                    .collect();
                let total: u64 = items.iter().map(|it| it.size).sum();
                let smallest = items.iter().map(|it| it.size).min().unwrap_or(1);
                let cap = rng.random_range(smallest..=total.max(smallest));
                KnapsackInstance::new(items, cap).expect("generated instance is valid")
            })
            .collect()
    }
}

/// Shape of a random bid profile; bounds are inclusive.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ProfileSuite {
    pub agents: (usize, usize),
    pub values: (u64, u64),
    pub sizes: (u64, u64),
    /// Draw one size for the whole profile.
    pub equal_sizes: bool,
}

impl ProfileSuite {
    pub const TRUTHFULNESS: ProfileSuite = ProfileSuite {
        agents: (1, 4),
        values: (0, 20),
        sizes: (1, 4),
        equal_sizes: false,
    };
    pub const MONOTONICITY: ProfileSuite = ProfileSuite {
        agents: (1, 6),
        values: (0, 20),
        sizes: (1, 5),
        equal_sizes: false,
    };
    pub const EQUAL_SIZE: ProfileSuite = ProfileSuite {
        agents: (2, 8),
        values: (0, 50),
        sizes: (1, 3),
        equal_sizes: true,
    };

    /// Agent ids run from 1; capacity is drawn between the smallest size and
    /// the total size.
    pub fn generate(&self, seed: u64, count: usize) -> Vec<BidProfile> {
        (0..count)
            .map(|i| {
                let mut rng = substream(seed, SUITE, i as u64);
                let n = rng.random_range(self.agents.0..=self.agents.1);
                let shared = rng.random_range(self.sizes.0..=self.sizes.1);
                let bids: Vec<Bid> = (0..n)
                    .map(|j| {
                        let size = if self.equal_sizes {
                            shared
                        } else {
                            rng.random_range(self.sizes.0..=self.sizes.1)
                        };
                        let value = rng.random_range(self.values.0..=self.values.1);
                        Bid::new(j as u64 + 1, value, size)
                    })
                    .collect();
                let total: u64 = bids.iter().map(|b| b.size).sum();
                let smallest = bids.iter().map(|b| b.size).min().unwrap_or(1);
                let cap = rng.random_range(smallest..=total.max(smallest));
                BidProfile::new(bids, cap).expect("generated profile is valid")
            })
            .collect()
    }
}
