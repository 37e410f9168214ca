use blocklab_core::knapsack::*;
use blocklab_core::suites::KnapsackSuite;
use num_rational::Ratio;
use proptest::prelude::*;

/// Plain subset enumeration, independent of the library's solvers.
fn enumerate_best(inst: &KnapsackInstance) -> (u64, u64) {
    let items = inst.items();
    let mut best_value = 0;
    let mut best_fill = 0;
    for mask in 0u32..(1 << items.len()) {
        let (mut s, mut v) = (0u64, 0u64);
        for (j, it) in items.iter().enumerate() {
            if mask >> j & 1 == 1 {
                s += it.size;
                v += it.value;
            }
        }
        if s <= inst.capacity() {
            best_value = best_value.max(v);
            best_fill = best_fill.max(s);
        }
    }
    (best_value, best_fill)
}

fn instance() -> impl Strategy<Value = KnapsackInstance> {
    (prop::collection::vec((1u64..=40, 0u64..=200), 1..=14), 1u64..=120).prop_map(|(raw, cap)| {
        let items = raw
            .into_iter()
            .enumerate()
            .map(|(i, (k, v))| Item::new(i as u64 + 1, k, v))
            .collect();
        KnapsackInstance::new(items, cap).unwrap()
    })
}

fn feasible(inst: &KnapsackInstance, r: &PackingResult) -> bool {
    let size: u64 = r.selected.iter().map(|id| inst.item(*id).unwrap().size).sum();
    let mut ids = r.selected.clone();
    ids.sort();
    ids.dedup();
    size == r.total_size && size <= inst.capacity() && ids.len() == r.selected.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn exact_and_brute_match_enumeration(inst in instance()) {
        let (best, fill) = enumerate_best(&inst);
        let exact = solve_exact(&inst).unwrap();
        let brute = solve_brute_force(&inst).unwrap();
        prop_assert_eq!(exact.value_units(), best);
        prop_assert_eq!(brute.value_units(), best);
        prop_assert_eq!(exact.id_set(), brute.id_set());
        prop_assert!(feasible(&inst, &exact) && feasible(&inst, &brute));
        prop_assert_eq!(subset_sum_pack(&inst).unwrap().total_size, fill);
    }

    #[test]
    fn greedy_bounds(inst in instance()) {
        let opt = Rational::from_integer(u128::from(solve_exact(&inst).unwrap().value_units()));
        let frac = greedy_fractional(&inst);
        let plain = greedy_01(&inst, false);
        let step3 = greedy_01(&inst, true);
        prop_assert!(frac.total_value >= opt);
        prop_assert!(frac.total_size <= inst.capacity());
        prop_assert!(feasible(&inst, &plain) && feasible(&inst, &step3));
        prop_assert!(step3.total_value >= plain.total_value);
        // at least half the optimum once oversized items are set aside
        prop_assert!(step3.total_value * Rational::from_integer(2) >= opt);
    }

    #[test]
    fn constant_position_weights_reduce_to_exact(inst in instance(), w in 1u64..=5) {
        let f = PositionWeight::constant(Ratio::new(w, 1), inst.len());
        let pos = position_dependent_pack(&inst, &f).unwrap();
        let exact = solve_exact(&inst).unwrap();
        prop_assert_eq!(pos.total_value, exact.total_value * Rational::from_integer(u128::from(w)));
    }
}

#[test]
fn seeded_oracle_suite_agrees() {
    for inst in KnapsackSuite::ORACLE.generate(11, 200) {
        let exact = solve_exact(&inst).unwrap();
        let brute = solve_brute_force(&inst).unwrap();
        assert_eq!(exact.value_units(), brute.value_units());
        assert_eq!(exact.selected, brute.selected);
    }
}

#[test]
fn step3_rescues_the_large_item() {
    let inst = KnapsackInstance::new(vec![Item::new(1, 1, 1), Item::new(2, 10, 9)], 10).unwrap();
    assert_eq!(greedy_01(&inst, false).value_units(), 1);
    assert_eq!(greedy_01(&inst, true).value_units(), 9);
    assert_eq!(greedy_fractional(&inst).total_value, Rational::new(91, 10));
}
