//! Fractional, 0-1, subset-sum and position-dependent knapsack solvers.
//!
//! Sizes are positive integer gas units and values are non-negative integer
//! value units. Every 0-1 solver breaks ties between optimal subsets toward
//! the lexicographically smallest sorted id list, so the exact solver and the
//! brute-force oracle return the same selection, not merely the same value.

mod brute;
mod exact;
mod greedy;
mod position;

use std::collections::HashSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use brute::{solve_brute_force, BRUTE_FORCE_MAX_ITEMS};
pub use exact::{solve_exact, solve_exact_with, subset_sum_pack, subset_sum_pack_with};
pub use greedy::{density_order, greedy_01, greedy_01_with_priority, greedy_fractional};
pub use position::{
    position_dependent_pack, Monotonicity, PositionWeight, POSITION_EXACT_MAX_ITEMS, POSITION_PERMUTATION_MAX_ITEMS,
};

/// Exact non-negative rational used for fractional and position-weighted values.
pub type Rational = Ratio<u128>;

/// Default bound on the number of cells in the dynamic-programming table.
pub const DEFAULT_MAX_TABLE_CELLS: u64 = 100_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct ItemId(pub u64);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    /// Gas units consumed when packed. Always positive.
    pub size: u64,
    pub value: u64,
}

impl Item {
    pub fn new(id: u64, size: u64, value: u64) -> Self {
        Self {
            id: ItemId(id),
            size,
            value,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnapsackError {
    #[error("capacity must be positive")]
    ZeroCapacity,
    #[error("instance has no items")]
    NoItems,
    #[error("item {0} has zero size")]
    ZeroSize(ItemId),
    #[error("duplicate item id {0}")]
    DuplicateId(ItemId),
    #[error("total value or size of the instance overflows 64 bits")]
    Overflow,
    #[error("instance too large: {cells} table cells exceeds the limit of {limit}")]
    InstanceTooLarge { cells: u128, limit: u64 },
    #[error("oracle limit: {items} items exceeds the brute-force limit of {limit}")]
    OracleLimit { items: usize, limit: usize },
    #[error("exact search limit: {items} items with a non-monotone weight profile exceeds {limit}")]
    ExactSearchLimit { items: usize, limit: usize },
    #[error("position weights cover {positions} positions but the instance has {items} items")]
    TooFewPositions { positions: usize, items: usize },
}

/// A validated knapsack instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    items: Vec<Item>,
    capacity: u64,
}

impl KnapsackInstance {
    pub fn new(items: Vec<Item>, capacity: u64) -> Result<Self, KnapsackError> {
        if capacity == 0 {
            return Err(KnapsackError::ZeroCapacity);
        }
        if items.is_empty() {
            return Err(KnapsackError::NoItems);
        }
        let mut seen = HashSet::with_capacity(items.len());
        let mut total_value: u128 = 0;
        let mut total_size: u128 = 0;
        for item in &items {
            if item.size == 0 {
                return Err(KnapsackError::ZeroSize(item.id));
            }
            if !seen.insert(item.id) {
                return Err(KnapsackError::DuplicateId(item.id));
            }
            total_value += u128::from(item.value);
            total_size += u128::from(item.size);
        }
        if total_value > u128::from(u64::MAX) || total_size > u128::from(u64::MAX) {
            return Err(KnapsackError::Overflow);
        }
        Ok(Self { items, capacity })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item(&self, id: ItemId) -> Option<&Item> {
        self.items.iter().find(|it| it.id == id)
    }

    /// Indices into `items()` sorted by ascending id.
    pub(crate) fn indices_by_id(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.items.len()).collect();
        idx.sort_by_key(|&i| self.items[i].id);
        idx
    }

    /// Builds a packing result for the given packing order of whole items.
    pub(crate) fn whole_packing(&self, selected: Vec<ItemId>) -> PackingResult {
        let (size, value) = selected.iter().fold((0u64, 0u64), |(s, v), id| {
            let it = self.item(*id).expect("selected id belongs to the instance");
            (s + it.size, v + it.value)
        });
        PackingResult {
            selected,
            total_size: size,
            total_value: Rational::from_integer(u128::from(value)),
            fractional_tail: None,
        }
    }
}

/// The part of an item packed by the fractional solver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalTail {
    pub id: ItemId,
    /// Packed fraction in `[0, 1]`.
    pub fraction: Rational,
    /// Gas occupied by the packed fraction.
    pub size: u64,
    /// `fraction * value` of the item.
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingResult {
    /// Whole items in packing order.
    pub selected: Vec<ItemId>,
    /// Gas used, including the fractional tail if present.
    pub total_size: u64,
    /// Objective value of the packing (exact).
    pub total_value: Rational,
    pub fractional_tail: Option<FractionalTail>,
}

impl PackingResult {
    pub fn empty() -> Self {
        Self {
            selected: Vec::new(),
            total_size: 0,
            total_value: Rational::from_integer(0),
            fractional_tail: None,
        }
    }

    /// The objective as an integer, when it is one.
    pub fn integral_value(&self) -> Option<u64> {
        if self.total_value.is_integer() {
            u64::try_from(self.total_value.to_integer()).ok()
        } else {
            None
        }
    }

    /// Like [`integral_value`](Self::integral_value) but for results of 0-1
    /// solvers, whose objectives are integral by construction.
    pub fn value_units(&self) -> u64 {
        self.integral_value().expect("0-1 packing has an integral objective")
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.selected.contains(&id)
    }

    /// Sorted copy of the selected ids.
    pub fn id_set(&self) -> Vec<ItemId> {
        let mut ids = self.selected.clone();
        ids.sort_unstable();
        ids
    }
}

/// Formats a rational as an integer when integral, else as `num/den`.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.to_integer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
