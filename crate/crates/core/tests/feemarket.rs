use blocklab_core::feemarket::*;
use blocklab_core::knapsack::Rational;
use proptest::prelude::*;

fn state(base: u64, target: u64, d: u64) -> BaseFeeState {
    BaseFeeState::new(base, target, 2 * target, d, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn target_is_a_fixed_point(base in 1u64..=1_000_000_000, target in 1u64..=30_000_000, d in 1u64..=64) {
        let s = state(base, target, d);
        prop_assert_eq!(update_base_fee(&s, target).unwrap().base_fee, base);
    }

    #[test]
    fn full_and_empty_blocks_move_by_an_eighth(base in 1u64..=1_000_000_000_000, target in 1u64..=30_000_000) {
        let s = state(base, target, 8);
        prop_assert_eq!(update_base_fee(&s, 2 * target).unwrap().base_fee, base * 9 / 8);
        prop_assert_eq!(update_base_fee(&s, 0).unwrap().base_fee, (base * 7 / 8).max(1));
    }

    #[test]
    fn response_is_monotone_and_bounded(
        base in 1u64..=1_000_000_000,
        target in 1u64..=1_000_000,
        d in 1u64..=16,
        a in 0u64..=2_000_000,
        b in 0u64..=2_000_000,
    ) {
        let s = state(base, target, d);
        let (lo, hi) = (a.min(b).min(2 * target), a.max(b).min(2 * target));
        let f_lo = update_base_fee(&s, lo).unwrap().base_fee;
        let f_hi = update_base_fee(&s, hi).unwrap().base_fee;
        prop_assert!(f_lo <= f_hi);
        // one step moves at most base / d, plus one unit of flooring
        prop_assert!(f_hi.abs_diff(base) <= base / d + 1);
        prop_assert!(f_lo.abs_diff(base) <= base / d + 1);
    }

    #[test]
    fn burn_plus_tips_is_every_fee(gas in prop::collection::vec((1u64..=1_000_000, 0u64..=1_000), 0..20), base in 0u64..=1_000) {
        let s = BaseFeeState::new(base, 10, 20, 8, 0).unwrap();
        let txs: Vec<ChargedTx> = gas
            .iter()
            .enumerate()
            .map(|(i, (g, t))| ChargedTx { tx_id: i as u64, gas: *g, tip: *t })
            .collect();
        let (fees, next) = burn_and_split(&txs, &s).unwrap();
        let total: u64 = gas.iter().map(|(g, t)| g * base + t).sum();
        prop_assert_eq!(fees.burn + fees.tips, total);
        prop_assert_eq!(next.cumulative_burn, fees.burn);
    }
}

#[test]
fn linear_burn_threshold() {
    let b = LinearBurn { numer: 2, denom: 1000 };
    assert_eq!(
        find_contraction_threshold(10, &b, 30_000_000).unwrap(),
        Threshold::At(5001)
    );
    assert_eq!(find_contraction_threshold(10, &b, 5000).unwrap(), Threshold::Never);
    let closure = |n: u64| Rational::new(2 * u128::from(n), 1000);
    assert_eq!(
        find_contraction_threshold(10, &closure, 30_000_000).unwrap(),
        Threshold::At(5001)
    );
}

#[test]
fn threshold_matches_a_linear_scan() {
    let step = StepBurn {
        steps: vec![(0, 1), (100, 5), (250, 12), (900, 40)],
    };
    for r in 0..45 {
        let scan = (0..=1000).find(|n| step.burn(*n) > Rational::from_integer(r));
        let expected = scan.map_or(Threshold::Never, Threshold::At);
        assert_eq!(
            find_contraction_threshold(r as u64, &step, 1000).unwrap(),
            expected,
            "R={r}"
        );
    }
    let wobbly = |n: u64| Rational::from_integer(u128::from(n % 7));
    assert!(matches!(
        find_contraction_threshold(3, &wobbly, 10_000),
        Err(FeeMarketError::NonMonotone { .. })
    ));
}

#[test]
fn base_fee_settles_where_demand_meets_target() {
    // users with values 1..=100 per gas, 1M gas each: 15 of them fill the
    // target, which happens for base fees between 84 and 85
    let demand: Vec<DemandUser> = (1..=100)
        .map(|v| DemandUser {
            id: v,
            value_per_gas: v,
            gas: 1_000_000,
        })
        .collect();
    let config = FeeMarketConfig {
        initial_base_fee: 10,
        min_tip: 1,
        ..Default::default()
    };
    let rows = simulate_base_fee(&config, &demand, 600).unwrap();
    let tail = &rows[400..];
    let mean_gas = tail.iter().map(|r| r.gas_used).sum::<u64>() / tail.len() as u64;
    assert!((13_000_000..=17_000_000).contains(&mean_gas), "mean gas {mean_gas}");
    assert!(tail.iter().all(|r| (75..=95).contains(&r.base_fee)), "{:?}", &tail[..5]);
    for r in &rows {
        assert_eq!(r.burn, r.base_fee * r.gas_used);
        assert_eq!(r.tips, r.gas_used);
    }
}
