mod common;

use std::collections::{HashMap, HashSet};

use rtzsim::adders::{AdderSystem, FullAdderKind};
use rtzsim::analysis::detect_orphans;
use rtzsim::data::{adversarial_delays, default_delays};
use rtzsim::sim::{run_transactions, RtPolicy, Trace};

/// Half-transaction number of each event, from the markers alone.
fn halves(trace: &Trace) -> Vec<Option<usize>> {
    let mut bounds = Vec::new();
    for m in &trace.transactions {
        bounds.push(m.valid_seq as usize);
        bounds.push(m.spacer_seq as usize);
    }
    bounds.push(trace.events.len());
    (0..trace.events.len())
        .map(|s| (0..bounds.len() - 1).find(|&h| bounds[h] <= s && s < bounds[h + 1]))
        .collect()
}

/// Forward search from each event along cause/support edges and the
/// carry-before-sum edges; true when some output or ack event is reached.
fn reaches_sink(trace: &Trace, sys: &AdderSystem) -> Vec<bool> {
    let half = halves(trace);
    let name = |e: usize| trace.wire_name(trace.events[e].wire);
    let sinks: HashSet<String> = sys
        .sums
        .iter()
        .chain(std::iter::once(sys.carry_out()))
        .flat_map(|p| [p.d1.clone(), p.d0.clone()])
        .chain(std::iter::once(sys.ackout.clone()))
        .collect();
    let stage_of = |ports: &[rtzsim::netlist::Port], w: &str| ports.iter().position(|p| p.d1 == w || p.d0 == w);

    let n = trace.events.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in trace.events.iter().enumerate() {
        for d in e.cause.iter().chain(e.support.iter()) {
            let d = *d as usize;
            if half[d].is_some() && half[d] == half[i] {
                succ[d].push(i);
            }
        }
    }
    let mut falls: HashMap<(usize, usize), (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (i, e) in trace.events.iter().enumerate() {
        let Some(h) = half[i] else { continue };
        if h % 2 == 0 || e.value {
            continue;
        }
        if let Some(q) = stage_of(&sys.sums, name(i)) {
            falls.entry((h, q)).or_default().1.push(i);
        }
        if let Some(q) = stage_of(&sys.carries[..sys.width], name(i)) {
            falls.entry((h, q)).or_default().0.push(i);
        }
    }
    for (carry, sum) in falls.values() {
        for &c in carry {
            for &s in sum {
                if trace.events[c].time <= trace.events[s].time {
                    succ[c].push(s);
                }
            }
        }
    }

    (0..n)
        .map(|start| {
            let mut stack = vec![start];
            let mut seen = HashSet::new();
            while let Some(e) = stack.pop() {
                if sinks.contains(name(e)) {
                    return true;
                }
                if seen.insert(e) {
                    stack.extend(succ[e].iter().copied());
                }
            }
            false
        })
        .collect()
}

fn check(kind: FullAdderKind, adversarial: bool) -> usize {
    let sys = common::system(kind, 2);
    let d = if adversarial { adversarial_delays().unwrap() } else { default_delays().unwrap() };
    // Every codeword after a few different predecessors keeps this quick.
    let ops: Vec<_> = common::ordered_pairs(2).into_iter().step_by(7).collect();
    let run = run_transactions(&sys, &ops, &d, &RtPolicy::off()).unwrap();
    let report = detect_orphans(&run.trace, &sys.adder);
    let reach = reaches_sink(&run.trace, &sys.adder);
    let reported: HashSet<u32> = report.orphans.iter().map(|o| o.event).collect();
    for e in run.trace.gate_events() {
        assert_eq!(
            reported.contains(&e.seq),
            !reach[e.seq as usize],
            "{kind}: event {} on {} at {} ps",
            e.seq,
            run.trace.wire_name(e.wire),
            e.time
        );
    }
    report.len()
}

#[test]
fn reported_orphans_match_an_independent_search() {
    for kind in FullAdderKind::ALL {
        check(kind, false);
    }
}

#[test]
fn adversarial_orphans_match_an_independent_search() {
    let mut total = 0;
    for kind in FullAdderKind::ALL {
        total += check(kind, true);
    }
    assert!(total > 0);
}
