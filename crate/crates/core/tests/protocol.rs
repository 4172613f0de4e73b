mod common;

use rtzsim::adders::FullAdderKind;
use rtzsim::analysis::{audit_protocol, ProtocolViolation};
use rtzsim::data::{adversarial_delays, default_delays, seitz_slack_delays, uniform_delays};
use rtzsim::sim::{HandshakePhase, RtPolicy, run_transactions};

#[test]
fn no_protocol_violations_under_calibrated_delays() {
    for kind in FullAdderKind::ALL {
        for d in [default_delays(), uniform_delays(), seitz_slack_delays()] {
            let d = d.unwrap();
            for width in 1..=3 {
                let sys = common::system(kind, width);
                let run = run_transactions(&sys, &common::codewords(width), &d, &RtPolicy::check()).unwrap();
                let found = audit_protocol(&run.trace, &sys.adder);
                assert!(found.is_empty(), "{kind} width {width}: {:?}", &found[..found.len().min(3)]);
            }
        }
    }
}

#[test]
fn adversarial_delays_break_monotonicity_only() {
    for kind in FullAdderKind::ALL {
        let sys = common::system(kind, 2);
        let run = run_transactions(&sys, &common::ordered_pairs(2), &adversarial_delays().unwrap(), &RtPolicy::off()).unwrap();
        for v in audit_protocol(&run.trace, &sys.adder) {
            assert!(matches!(v, ProtocolViolation::NonMonotone { .. }), "{kind}: {v:?}");
        }
    }
}

#[test]
fn markers_follow_the_four_phases() {
    let sys = common::system(FullAdderKind::AoptEo, 3);
    let run = run_transactions(&sys, &common::codewords(3), &default_delays().unwrap(), &RtPolicy::off()).unwrap();
    let mut phase = HandshakePhase::ApplyValid;
    for e in &run.trace.events {
        // Phases only advance, in cycle order.
        while e.phase != phase {
            phase = phase.next();
        }
    }
    for m in &run.trace.transactions {
        assert!(m.valid_applied < m.ack_high && m.ack_high < m.spacer_applied && m.spacer_applied < m.ack_low);
    }
}
