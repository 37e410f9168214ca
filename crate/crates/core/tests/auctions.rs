use blocklab_core::auctions::*;
use blocklab_core::suites::ProfileSuite;

const SEED: u64 = 20240601;

#[test]
fn critical_pricing_has_no_profitable_deviation() {
    let suite = ProfileSuite::TRUTHFULNESS.generate(SEED, 200);
    let r = verify_truthfulness_suite(PricingRule::Critical, &suite, &Default::default()).unwrap();
    assert!(r.truthful(), "{:?}", r.first_witness);
}

#[test]
fn exact_vcg_has_no_profitable_deviation() {
    let suite = ProfileSuite::TRUTHFULNESS.generate(SEED, 200);
    let r = verify_truthfulness_suite(PricingRule::VcgExact, &suite, &Default::default()).unwrap();
    assert!(r.truthful(), "{:?}", r.first_witness);
}

#[test]
fn manipulable_rules_yield_witnesses() {
    let suite = ProfileSuite::TRUTHFULNESS.generate(SEED, 200);
    for rule in [PricingRule::Dp, PricingRule::Gsp, PricingRule::VcgGreedy] {
        let r = verify_truthfulness_suite(rule, &suite, &Default::default()).unwrap();
        let (idx, w) = r.first_witness.clone().unwrap_or_else(|| panic!("{rule}: no witness"));
        // replay the witness independently
        let values = &suite[idx];
        let truth = *values.bid(w.agent).unwrap();
        let gain = |amount: u64| {
            let out = run_mechanism(rule, &values.with_bid(w.agent, amount)).unwrap();
            if out.won(w.agent) {
                truth.amount as i64 - out.payment(w.agent)
            } else {
                0
            }
        };
        assert!(gain(w.deviation_bid) > gain(truth.amount), "{rule}");
    }
}

#[test]
fn greedy_allocation_is_monotone() {
    let suite = ProfileSuite::MONOTONICITY.generate(SEED, 500);
    let r = verify_monotonicity(allocate_greedy, &suite, &Default::default()).unwrap();
    assert!(r.passed, "{:?}", r.counterexample);
    assert!(r.perturbations > 0);

    let flat = BidProfile::new((1..=5).map(|i| Bid::new(i, 4, 1)).collect(), 3).unwrap();
    assert!(
        verify_monotonicity(allocate_greedy, &[flat], &Default::default())
            .unwrap()
            .passed
    );
}

#[test]
fn lowest_density_first_is_not_monotone() {
    let suite = ProfileSuite::MONOTONICITY.generate(SEED, 500);
    let r = verify_monotonicity(allocate_lowest_density_first, &suite, &Default::default()).unwrap();
    let w = r.counterexample.expect("control rule must fail");
    let p = &suite[w.instance];
    assert!(allocate_lowest_density_first(p).contains(&w.agent));
    assert!(!allocate_lowest_density_first(&p.with_bid(w.agent, w.raised_bid)).contains(&w.agent));
}

#[test]
fn uniform_price_matches_critical_on_equal_sizes() {
    for p in ProfileSuite::EQUAL_SIZE.generate(SEED, 500) {
        let winners = allocate_greedy(&p);
        let up = price_up(&p, &winners).unwrap();
        let crit = critical_payments(&p);
        assert_eq!(up.payments, crit.payments, "{p:?}");
    }
}

#[test]
fn revenue_ordering_and_bid_bounds_on_equal_sizes() {
    for p in ProfileSuite::EQUAL_SIZE.generate(SEED + 1, 500) {
        let winners = allocate_greedy(&p);
        let dp = price_dp(&p, &winners).unwrap();
        let gsp = price_gsp(&p, &winners).unwrap();
        let up = price_up(&p, &winners).unwrap();
        assert!(dp.revenue >= gsp.revenue && gsp.revenue >= up.revenue, "{p:?}");
        for o in [&dp, &gsp, &up, &critical_payments(&p)] {
            assert!(o.capped.is_empty());
            for (a, pay) in &o.payments {
                assert!(*pay >= 0 && *pay <= p.bid(*a).unwrap().amount as i64);
            }
            assert_eq!(o.revenue, o.payments.values().sum::<i64>());
        }
    }
}

#[test]
fn outcomes_respect_capacity_and_are_deterministic() {
    for p in ProfileSuite::MONOTONICITY.generate(SEED + 2, 300) {
        for rule in [
            PricingRule::Dp,
            PricingRule::Gsp,
            PricingRule::Up,
            PricingRule::Critical,
            PricingRule::VcgExact,
            PricingRule::VcgGreedy,
        ] {
            let a = run_mechanism(rule, &p).unwrap();
            assert_eq!(a, run_mechanism(rule, &p).unwrap());
            let used: u64 = a.winners.iter().map(|w| p.bid(*w).unwrap().size).sum();
            assert!(used <= p.capacity());
            assert!(a.payments.keys().all(|k| a.winners.contains(k)));
            if rule.is_bid_bounded() {
                for (ag, pay) in &a.payments {
                    assert!(*pay >= 0 && *pay <= p.bid(*ag).unwrap().amount as i64);
                }
            }
        }
    }
}

#[test]
fn single_bidder_up_is_truthful() {
    let p = BidProfile::new(vec![Bid::new(1, 9, 2)], 4).unwrap();
    assert!(
        verify_truthfulness(PricingRule::Up, &p, &Default::default())
            .unwrap()
            .truthful
    );
}
