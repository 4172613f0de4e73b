mod common;

use rtzsim::adders::{build_completion_detector, build_full_adder, build_rca, FullAdderKind};
use rtzsim::analysis::{check_monotonic_cover, full_adder_equations, sop_of};
use rtzsim::data::{default_delays, uniform_delays};
use rtzsim::netlist::{validate_netlist, GateKind, Netlist};
use rtzsim::sim::{run_transactions, RtPolicy};

#[test]
fn seitz_or_fan_ins_equal_the_equations() {
    for kind in [FullAdderKind::SeitzWeak, FullAdderKind::SeitzEarly] {
        let n = build_full_adder(kind);
        for (output, expected) in full_adder_equations() {
            let gate = n.gate(or_id(output)).unwrap_or_else(|| panic!("{kind}: no OR for {output}"));
            let mut got = sop_of(&n, &gate.output).unwrap();
            let mut want = expected.clone();
            got.sort();
            want.sort();
            assert_eq!(got, want, "{kind} {output}");
            assert_eq!(gate.kind.arity(), want.len());
        }
    }
}

fn or_id(output: &str) -> &'static str {
    match output {
        "SUM1" => "or_sum1",
        "SUM0" => "or_sum0",
        "COUT1" => "or_cout1",
        "COUT0" => "or_cout0",
        other => panic!("unexpected output {other}"),
    }
}

#[test]
fn optimized_inventories() {
    use GateKind::*;
    let counts = |k| build_full_adder(k).kind_counts().into_iter().collect::<Vec<_>>();
    assert_eq!(counts(FullAdderKind::AoptEo), vec![(Or2, 1), (Ao22, 6), (Ce2, 2)]);
    let lopt = counts(FullAdderKind::LoptEo);
    let complex: usize = lopt.iter().filter(|(k, _)| matches!(k, Ao21 | Ao22 | Ce2)).map(|(_, c)| c).sum();
    assert_eq!(complex, 7);
}

#[test]
fn monotonic_cover_over_every_width_one_transaction() {
    for kind in FullAdderKind::ALL {
        let sys = common::system(kind, 1);
        for d in [default_delays().unwrap(), uniform_delays().unwrap()] {
            let run = run_transactions(&sys, &common::ordered_pairs(1), &d, &RtPolicy::off()).unwrap();
            assert!(check_monotonic_cover(&sys.netlist, &run.trace).is_empty(), "{kind}");
        }
    }
}

#[test]
fn netlists_round_trip_through_json() {
    for kind in FullAdderKind::ALL {
        let fa = build_full_adder(kind);
        let rca = build_rca(5, kind.design().as_ref()).rca;
        for n in [fa, rca] {
            assert!(validate_netlist(&n).is_clean());
            let once = Netlist::from_json(&n.to_json()).unwrap();
            assert_eq!(once, n);
            assert_eq!(Netlist::from_json(&once.to_json()).unwrap().to_json(), n.to_json());
        }
    }
    assert!(validate_netlist(&build_completion_detector(65)).is_clean());
}

#[test]
fn unknown_gate_kind_is_a_parse_error() {
    let mut text = build_full_adder(FullAdderKind::AoptEo).to_json();
    text = text.replacen("\"AO22\"", "\"NAND9\"", 1);
    let err = Netlist::from_json(&text).unwrap_err();
    assert!(matches!(err, rtzsim::Error::Parse { .. }), "{err}");
}
