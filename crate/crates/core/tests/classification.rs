use proptest::prelude::*;
use rtzsim::adders::{build_full_adder, build_rca, FullAdderKind};
use rtzsim::analysis::{classify_indication, classify_indication_ordered, Indication};
use rtzsim::data::{default_delays, uniform_delays};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn full_adder_class_ignores_enumeration_order(
        kind in prop::sample::select(FullAdderKind::ALL.to_vec()),
        order in Just(vec![0usize, 1, 2]).prop_shuffle(),
        uniform in any::<bool>(),
    ) {
        let n = build_full_adder(kind);
        let d = if uniform { uniform_delays().unwrap() } else { default_delays().unwrap() };
        prop_assert_eq!(
            classify_indication_ordered(&n, &d, &order).unwrap(),
            classify_indication(&n, &d).unwrap()
        );
    }

    #[test]
    fn two_bit_class_ignores_enumeration_order(
        kind in prop::sample::select(FullAdderKind::ALL.to_vec()),
        order in Just(vec![0usize, 1, 2, 3, 4]).prop_shuffle(),
    ) {
        let n = build_rca(2, kind.design().as_ref()).rca;
        let d = default_delays().unwrap();
        prop_assert_eq!(
            classify_indication_ordered(&n, &d, &order).unwrap(),
            classify_indication(&n, &d).unwrap()
        );
    }
}

#[test]
fn cascades_keep_the_full_adder_class() {
    let d = default_delays().unwrap();
    for kind in FullAdderKind::ALL {
        let fa = classify_indication(&build_full_adder(kind), &d).unwrap();
        let rca = classify_indication(&build_rca(2, kind.design().as_ref()).rca, &d).unwrap();
        assert_eq!(fa.overall, rca.overall, "{kind}");
        if kind == FullAdderKind::SeitzWeak {
            assert_eq!(rca.overall, Indication::Weak);
        }
    }
}
