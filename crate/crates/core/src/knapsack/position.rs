use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{ItemId, KnapsackError, KnapsackInstance, PackingResult, Rational};

/// Largest instance the position-dependent solver enumerates.
pub const POSITION_EXACT_MAX_ITEMS: usize = 20;
/// Largest instance accepted when the weight profile is not monotone.
pub const POSITION_PERMUTATION_MAX_ITEMS: usize = 12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    Constant,
    NonIncreasing,
    NonDecreasing,
    Neither,
}

impl Monotonicity {
    pub fn is_monotone(self) -> bool {
        self != Monotonicity::Neither
    }
}

/// Position multipliers `f(1), f(2), ...` applied to the value of the item
/// packed at that position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionWeight {
    weights: Vec<Ratio<u64>>,
    monotonicity: Monotonicity,
}

impl PositionWeight {
    pub fn new(weights: Vec<Ratio<u64>>) -> Self {
        let non_inc = weights.windows(2).all(|w| w[0] >= w[1]);
        let non_dec = weights.windows(2).all(|w| w[0] <= w[1]);
        let monotonicity = match (non_inc, non_dec) {
            (true, true) => Monotonicity::Constant,
            (true, false) => Monotonicity::NonIncreasing,
            (false, true) => Monotonicity::NonDecreasing,
            (false, false) => Monotonicity::Neither,
        };
        Self { weights, monotonicity }
    }

    pub fn constant(value: Ratio<u64>, positions: usize) -> Self {
        Self::new(vec![value; positions])
    }

    pub fn weights(&self) -> &[Ratio<u64>] {
        &self.weights
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Exact optimum of `sum v_i * f(position_i)` over feasible subsets and
/// packing orders.
///
/// For a fixed subset the best order pairs the largest values with the
/// largest weights among positions `1..=m`, so only subsets are enumerated.
/// `selected` lists the items in position order.
pub fn position_dependent_pack(
    instance: &KnapsackInstance,
    weights: &PositionWeight,
) -> Result<PackingResult, KnapsackError> {
    let n = instance.len();
    if n > POSITION_EXACT_MAX_ITEMS {
        return Err(KnapsackError::ExactSearchLimit {
            items: n,
            limit: POSITION_EXACT_MAX_ITEMS,
        });
    }
    if weights.len() < n {
        return Err(KnapsackError::TooFewPositions {
            positions: weights.len(),
            items: n,
        });
    }
    if !weights.monotonicity().is_monotone() && n > POSITION_PERMUTATION_MAX_ITEMS {
        return Err(KnapsackError::ExactSearchLimit {
            items: n,
            limit: POSITION_PERMUTATION_MAX_ITEMS,
        });
    }

    // integer weights over a common denominator
    let f = &weights.weights()[..n];
    let denom = f.iter().fold(1u128, |acc, w| lcm(acc, u128::from(*w.denom())));
    let scaled: Vec<u128> = f
        .iter()
        .map(|w| u128::from(*w.numer()) * (denom / u128::from(*w.denom())))
        .collect();

    // slots_by_weight[m] = positions 0..m sorted by decreasing weight
    let slots_by_weight: Vec<Vec<usize>> = (0..=n)
        .map(|m| {
            let mut slots: Vec<usize> = (0..m).collect();
            slots.sort_by(|&a, &b| scaled[b].cmp(&scaled[a]).then(a.cmp(&b)));
            slots
        })
        .collect();

    let by_id = instance.indices_by_id();
    let items = instance.items();
    // bit positions (over by_id) in decreasing value order, lower id first
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&a, &b| items[by_id[b]].value.cmp(&items[by_id[a]].value).then(a.cmp(&b)));

    let cap = instance.capacity();
    let mut best_mask = 0u32;
    let mut best_score = 0u128;
    for mask in 1u32..(1u32 << n) {
        let size: u64 = (0..n)
            .filter(|&b| mask >> b & 1 == 1)
            .map(|b| items[by_id[b]].size)
            .sum();
        if size > cap {
            continue;
        }
        let m = mask.count_ones() as usize;
        let slots = &slots_by_weight[m];
        let score: u128 = by_value
            .iter()
            .filter(|&&b| mask >> b & 1 == 1)
            .zip(slots)
            .map(|(&b, &slot)| u128::from(items[by_id[b]].value) * scaled[slot])
            .sum();
        if score > best_score || (score == best_score && id_list_smaller(mask, best_mask)) {
            best_score = score;
            best_mask = mask;
        }
    }

    let m = best_mask.count_ones() as usize;
    let mut sequence: Vec<Option<ItemId>> = vec![None; m];
    for (&b, &slot) in by_value
        .iter()
        .filter(|&&b| best_mask >> b & 1 == 1)
        .zip(&slots_by_weight[m])
    {
        sequence[slot] = Some(items[by_id[b]].id);
    }
    let selected: Vec<ItemId> = sequence.into_iter().map(|id| id.expect("slot filled")).collect();
    let total_size = selected
        .iter()
        .map(|id| instance.item(*id).expect("id in instance").size)
        .sum();
    Ok(PackingResult {
        selected,
        total_size,
        total_value: Rational::new(best_score, denom),
        fractional_tail: None,
    })
}

fn id_list_smaller(a: u32, b: u32) -> bool {
    if a == b {
        return false;
    }
    let d = (a ^ b).trailing_zeros();
    let (has, lacks) = if a >> d & 1 == 1 { (a, b) } else { (b, a) };
    let smaller = if lacks >> d == 0 { lacks } else { has };
    smaller == a
}

fn lcm(a: u128, b: u128) -> u128 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    a / x * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::{solve_exact, Item};

    fn r(n: u64, d: u64) -> Ratio<u64> {
        Ratio::new(n, d)
    }

    fn unit_items(values: &[u64], cap: u64) -> KnapsackInstance {
        let items = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Item::new(i as u64 + 1, 1, v))
            .collect();
        KnapsackInstance::new(items, cap).unwrap()
    }

    /// Enumerates every subset and every ordering of it.
    fn permutation_oracle(inst: &KnapsackInstance, f: &[Ratio<u64>]) -> Rational {
        fn permute(vals: &mut Vec<u64>, k: usize, f: &[Ratio<u64>], best: &mut Rational) {
            if k == vals.len() {
                let s = vals.iter().zip(f).fold(Rational::from_integer(0), |acc, (&v, w)| {
                    acc + Rational::new(u128::from(v) * u128::from(*w.numer()), u128::from(*w.denom()))
                });
                if s > *best {
                    *best = s;
                }
                return;
            }
            for i in k..vals.len() {
                vals.swap(k, i);
                permute(vals, k + 1, f, best);
                vals.swap(k, i);
            }
        }
        let items = inst.items();
        let mut best = Rational::from_integer(0);
        for mask in 0u32..(1 << items.len()) {
            let chosen: Vec<&Item> = (0..items.len())
                .filter(|&b| mask >> b & 1 == 1)
                .map(|b| &items[b])
                .collect();
            if chosen.iter().map(|it| it.size).sum::<u64>() > inst.capacity() {
                continue;
            }
            let mut vals: Vec<u64> = chosen.iter().map(|it| it.value).collect();
            permute(&mut vals, 0, f, &mut best);
        }
        best
    }

    #[test]
    fn decreasing_weights_pack_high_values_first() {
        let inst = unit_items(&[10, 8, 6], 2);
        let f = PositionWeight::new(vec![r(1, 1), r(1, 2), r(1, 2)]);
        let res = position_dependent_pack(&inst, &f).unwrap();
        assert_eq!(res.selected, vec![ItemId(1), ItemId(2)]);
        assert_eq!(res.total_value, Rational::from_integer(14));
    }

    #[test]
    fn constant_weights_match_exact_solver() {
        let items = vec![Item::new(1, 4, 6), Item::new(2, 3, 5), Item::new(3, 3, 4)];
        let inst = KnapsackInstance::new(items, 6).unwrap();
        let f = PositionWeight::constant(r(1, 1), 3);
        let res = position_dependent_pack(&inst, &f).unwrap();
        let exact = solve_exact(&inst).unwrap();
        assert_eq!(res.total_value, exact.total_value);
        assert_eq!(res.id_set(), exact.id_set());
    }

    #[test]
    fn zero_weight_position() {
        let inst = unit_items(&[5, 4], 2);
        let f = PositionWeight::new(vec![r(1, 1), r(0, 1)]);
        let res = position_dependent_pack(&inst, &f).unwrap();
        assert_eq!(res.total_value, Rational::from_integer(5));
        assert_eq!(res.selected[0], ItemId(1));
    }

    #[test]
    fn monotonicity_flags() {
        assert_eq!(
            PositionWeight::new(vec![r(1, 1); 3]).monotonicity(),
            Monotonicity::Constant
        );
        assert_eq!(
            PositionWeight::new(vec![r(2, 1), r(1, 1)]).monotonicity(),
            Monotonicity::NonIncreasing
        );
        assert_eq!(
            PositionWeight::new(vec![r(1, 2), r(1, 1)]).monotonicity(),
            Monotonicity::NonDecreasing
        );
        assert_eq!(
            PositionWeight::new(vec![r(1, 2), r(1, 1), r(0, 1)]).monotonicity(),
            Monotonicity::Neither
        );
    }

    #[test]
    fn limits() {
        let inst = unit_items(&[1; 13], 5);
        let bumpy = PositionWeight::new((0..13).map(|i| r(i % 2 + 1, 1)).collect());
        assert!(matches!(
            position_dependent_pack(&inst, &bumpy),
            Err(KnapsackError::ExactSearchLimit { limit: 12, .. })
        ));
        let short = PositionWeight::constant(r(1, 1), 3);
        assert!(matches!(
            position_dependent_pack(&inst, &short),
            Err(KnapsackError::TooFewPositions { .. })
        ));
    }

    #[test]
    fn agrees_with_permutation_oracle_on_non_monotone_profiles() {
        let profiles = [
            vec![r(1, 2), r(1, 1), r(1, 3), r(2, 1), r(0, 1)],
            vec![r(3, 1), r(1, 1), r(2, 1), r(1, 5), r(4, 1)],
            vec![r(1, 1), r(1, 2), r(1, 3), r(1, 4), r(1, 5)],
        ];
        let items = vec![
            Item::new(1, 2, 9),
            Item::new(2, 1, 4),
            Item::new(3, 3, 7),
            Item::new(4, 1, 1),
            Item::new(5, 2, 6),
        ];
        for cap in [2, 4, 6, 9] {
            let inst = KnapsackInstance::new(items.clone(), cap).unwrap();
            for f in &profiles {
                let res = position_dependent_pack(&inst, &PositionWeight::new(f.clone())).unwrap();
                assert_eq!(res.total_value, permutation_oracle(&inst, f), "cap {cap} f {f:?}");
                assert!(res.total_size <= cap);
            }
        }
    }
}
