use std::cmp::Ordering;

use super::{FractionalTail, Item, ItemId, KnapsackInstance, PackingResult, Rational};

/// Indices of `items` in decreasing value-per-size order. Equal densities go
/// to `priority` first, then to the lower id.
pub fn density_order(items: &[Item], priority: Option<ItemId>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&a, &b| compare_density(&items[a], &items[b], priority));
    idx
}

fn compare_density(a: &Item, b: &Item, priority: Option<ItemId>) -> Ordering {
    // a.value / a.size vs b.value / b.size, descending
    let lhs = u128::from(a.value) * u128::from(b.size);
    let rhs = u128::from(b.value) * u128::from(a.size);
    rhs.cmp(&lhs)
        .then_with(|| prefer(priority, a.id, b.id))
        .then_with(|| a.id.cmp(&b.id))
}

fn prefer(priority: Option<ItemId>, a: ItemId, b: ItemId) -> Ordering {
    match priority {
        Some(p) if a == p && b != p => Ordering::Less,
        Some(p) if b == p && a != p => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

/// Greedy for the divisible problem: pack by decreasing density and split
/// the first item that does not fit. The result is the fractional optimum.
pub fn greedy_fractional(instance: &KnapsackInstance) -> PackingResult {
    let items = instance.items();
    let cap = instance.capacity();
    let mut used = 0u64;
    let mut value = 0u64;
    let mut selected = Vec::new();
    let mut tail = None;
    for i in density_order(items, None) {
        let it = &items[i];
        if used + it.size <= cap {
            used += it.size;
            value += it.value;
            selected.push(it.id);
            continue;
        }
        let room = cap - used;
        if room > 0 {
            let fraction = Rational::new(u128::from(room), u128::from(it.size));
            tail = Some(FractionalTail {
                id: it.id,
                value: fraction * Rational::from_integer(u128::from(it.value)),
                fraction,
                size: room,
            });
            used = cap;
        }
        break;
    }
    let tail_value = tail.as_ref().map_or(Rational::from_integer(0), |t| t.value);
    PackingResult {
        selected,
        total_size: used,
        total_value: Rational::from_integer(u128::from(value)) + tail_value,
        fractional_tail: tail,
    }
}

/// Greedy for the 0-1 problem.
///
/// Items are scanned in decreasing density and packed when they fit; items
/// that do not fit are skipped and the scan continues. With `apply_step3`
/// the packing is compared against the single highest-value item left out,
/// and that item alone is returned when it is worth strictly more.
pub fn greedy_01(instance: &KnapsackInstance, apply_step3: bool) -> PackingResult {
    greedy_01_with_priority(instance, apply_step3, None)
}

/// [`greedy_01`] where `priority` wins every tie between single items (equal
/// density in the scan, equal value when choosing the best excluded item).
/// Used to evaluate a bidder's threshold bid.
pub fn greedy_01_with_priority(
    instance: &KnapsackInstance,
    apply_step3: bool,
    priority: Option<ItemId>,
) -> PackingResult {
    let items = instance.items();
    let cap = instance.capacity();
    let mut used = 0u64;
    let mut value = 0u64;
    let mut packed = vec![false; items.len()];
    let mut selected = Vec::new();
    for i in density_order(items, priority) {
        let it = &items[i];
        if used + it.size <= cap {
            used += it.size;
            value += it.value;
            packed[i] = true;
            selected.push(it.id);
        }
    }

    if apply_step3 {
        let best_excluded = items
            .iter()
            .enumerate()
            .filter(|(i, it)| !packed[*i] && it.size <= cap)
            .map(|(_, it)| it)
            .min_by(|a, b| {
                b.value
                    .cmp(&a.value)
                    .then_with(|| prefer(priority, a.id, b.id))
                    .then_with(|| a.id.cmp(&b.id))
            });
        if let Some(single) = best_excluded {
            if single.value > value {
                return PackingResult {
                    selected: vec![single.id],
                    total_size: single.size,
                    total_value: Rational::from_integer(u128::from(single.value)),
                    fractional_tail: None,
                };
            }
        }
    }

    PackingResult {
        selected,
        total_size: used,
        total_value: Rational::from_integer(u128::from(value)),
        fractional_tail: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(items: &[(u64, u64)], cap: u64) -> KnapsackInstance {
        let items = items
            .iter()
            .enumerate()
            .map(|(i, &(v, k))| Item::new(i as u64 + 1, k, v))
            .collect();
        KnapsackInstance::new(items, cap).unwrap()
    }

    fn ids(r: &PackingResult) -> Vec<u64> {
        r.selected.iter().map(|id| id.0).collect()
    }

    #[test]
    fn fractional_splits_last_item() {
        // density 1.0 > 0.9: item 1 whole, then 9/10 of item 2 -> 1 + 8.1
        let r = greedy_fractional(&inst(&[(1, 1), (9, 10)], 10));
        assert_eq!(ids(&r), vec![1]);
        assert_eq!(r.total_value, Rational::new(91, 10));
        let tail = r.fractional_tail.unwrap();
        assert_eq!(tail.id, ItemId(2));
        assert_eq!(tail.fraction, Rational::new(9, 10));
        assert_eq!(r.total_size, 10);
    }

    #[test]
    fn fractional_all_fit() {
        let r = greedy_fractional(&inst(&[(3, 2), (4, 3)], 10));
        assert!(r.fractional_tail.is_none());
        assert_eq!(r.total_value, Rational::from_integer(7));
        assert_eq!(r.total_size, 5);
    }

    #[test]
    fn fractional_half_item() {
        let r = greedy_fractional(&inst(&[(7, 8)], 4));
        assert!(r.selected.is_empty());
        assert_eq!(r.fractional_tail.as_ref().unwrap().fraction, Rational::new(1, 2));
        assert_eq!(r.total_value, Rational::new(7, 2));
    }

    #[test]
    fn greedy_trap_with_and_without_step3() {
        let i = inst(&[(1, 1), (9, 10)], 10);
        let plain = greedy_01(&i, false);
        assert_eq!(ids(&plain), vec![1]);
        assert_eq!(plain.value_units(), 1);
        let step3 = greedy_01(&i, true);
        assert_eq!(ids(&step3), vec![2]);
        assert_eq!(step3.value_units(), 9);
    }

    #[test]
    fn skip_and_continue() {
        // densities 5/3, 6/4, 4/3: item 2 first, item 1 no longer fits, item 3 does
        let r = greedy_01(&inst(&[(6, 4), (5, 3), (4, 3)], 6), false);
        assert_eq!(ids(&r), vec![2, 3]);
        assert_eq!(r.value_units(), 9);
    }

    #[test]
    fn density_ties_break_by_id_or_priority() {
        let i = inst(&[(2, 1), (2, 1), (2, 1)], 2);
        assert_eq!(ids(&greedy_01(&i, true)), vec![1, 2]);
        let r = greedy_01_with_priority(&i, true, Some(ItemId(3)));
        assert_eq!(ids(&r), vec![3, 1]);
    }

    #[test]
    fn step3_keeps_packing_on_ties() {
        let r = greedy_01(&inst(&[(1, 1), (1, 10)], 10), true);
        assert_eq!(ids(&r), vec![1]);
    }

    #[test]
    fn oversized_items_never_chosen() {
        let r = greedy_01(&inst(&[(1, 1), (100, 11)], 10), true);
        assert_eq!(ids(&r), vec![1]);
    }
}
