mod common;

use proptest::prelude::*;
use rtzsim::adders::FullAdderKind;
use rtzsim::analysis::oracle_add;
use rtzsim::data::{default_delays, uniform_delays};
use rtzsim::netlist::{dual_rail_decode, dual_rail_encode, DualRail, Symbol};
use rtzsim::sim::{run_transactions, Operands, RtPolicy};

fn kind() -> impl Strategy<Value = FullAdderKind> {
    prop::sample::select(FullAdderKind::ALL.to_vec())
}

fn workload(max_width: usize) -> impl Strategy<Value = (usize, Vec<Operands>)> {
    (1..=max_width).prop_flat_map(|w| {
        let m = (1u64 << w) - 1;
        let op = (0..=m, 0..=m, any::<bool>()).prop_map(|(a, b, c)| Operands::new(a, b, c));
        (Just(w), prop::collection::vec(op, 1..12))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encode_decode_round_trip(s in prop::sample::select(vec![Symbol::Zero, Symbol::One, Symbol::Spacer])) {
        prop_assert_eq!(dual_rail_decode(dual_rail_encode(s)).unwrap(), s);
    }

    #[test]
    fn decode_is_total_except_both_high(d1 in any::<bool>(), d0 in any::<bool>()) {
        let r = dual_rail_decode(DualRail::new(d1, d0));
        prop_assert_eq!(r.is_err(), d1 && d0);
    }

    #[test]
    fn sums_match_integer_addition(k in kind(), (w, ops) in workload(8)) {
        let sys = common::system(k, w);
        let run = run_transactions(&sys, &ops, &default_delays().unwrap(), &RtPolicy::off()).unwrap();
        for r in &run.records {
            let (s, c) = oracle_add(r.operands.a, r.operands.b, r.operands.cin, w).unwrap();
            prop_assert_eq!((r.sum, r.cout), (s, c));
        }
    }

    #[test]
    fn repeated_runs_are_byte_identical(k in kind(), (w, ops) in workload(4)) {
        let sys = common::system(k, w);
        let d = default_delays().unwrap();
        let x = run_transactions(&sys, &ops, &d, &RtPolicy::check()).unwrap();
        let y = run_transactions(&sys, &ops, &d, &RtPolicy::check()).unwrap();
        prop_assert_eq!(x.trace.to_jsonl(), y.trace.to_jsonl());
        prop_assert_eq!(x.trace.to_vcd(), y.trace.to_vcd());
        prop_assert_eq!(x.records, y.records);
    }

    #[test]
    fn each_wire_alternates(k in kind(), (w, ops) in workload(4)) {
        let sys = common::system(k, w);
        let run = run_transactions(&sys, &ops, &default_delays().unwrap(), &RtPolicy::off()).unwrap();
        let mut last = vec![false; run.trace.wires.len()];
        for e in &run.trace.events {
            prop_assert_ne!(last[e.wire as usize], e.value, "wire {} repeated a value", run.trace.wire_name(e.wire));
            last[e.wire as usize] = e.value;
        }
    }

    #[test]
    fn every_gate_event_follows_its_cause_by_the_cell_delay(k in kind(), (w, ops) in workload(4), uniform in any::<bool>()) {
        let sys = common::system(k, w);
        let d = if uniform { uniform_delays().unwrap() } else { default_delays().unwrap() };
        let run = run_transactions(&sys, &ops, &d, &RtPolicy::off()).unwrap();
        let t = &run.trace;
        for e in t.gate_events() {
            let cause = t.event(e.cause.expect("gate events have a cause"));
            let kind = sys.netlist.gates[e.gate.unwrap() as usize].kind;
            prop_assert_eq!(e.time, cause.time + d.get(kind).unwrap());
            prop_assert!(cause.seq < e.seq);
            for &s in &e.support {
                prop_assert!(s < e.seq);
                prop_assert!(t.event(s).time <= cause.time);
            }
        }
    }

    #[test]
    fn enforce_only_delays_returns_to_zero(k in kind(), (w, ops) in workload(4), pad in 1u64..200) {
        let sys = common::system(k, w);
        let d = default_delays().unwrap();
        let off = run_transactions(&sys, &ops, &d, &RtPolicy::off()).unwrap();
        let on = run_transactions(&sys, &ops, &d, &RtPolicy::enforce(pad)).unwrap();
        for (x, y) in off.records.iter().zip(&on.records) {
            prop_assert_eq!((x.sum, x.cout), (y.sum, y.cout));
            prop_assert_eq!(x.forward_ps(), y.forward_ps());
            prop_assert!(y.reverse_ps() >= x.reverse_ps());
        }
    }
}
