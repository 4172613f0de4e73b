//! Whole-trace protocol audit for handshake runs.

use serde::Serialize;

use crate::adders::AdderSystem;
use crate::sim::{transaction_windows, Trace, WindowHalf};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolViolation {
    /// `ackout` moved while some detector input was not yet in the new state.
    AckOrder { time: u64, rising: bool, port: String },
    /// Both rails of a port high.
    IllegalCodeword { time: u64, port: String },
    /// A rise during a return-to-zero half or a fall during a valid half.
    NonMonotone { time: u64, wire: String, rising: bool },
}

/// Replays a transaction trace and checks ack ordering against the
/// detector inputs, the dual-rail code on every port (including internal
/// carries), and that each half of each transaction moves wires one way.
pub fn audit_protocol(trace: &Trace, system: &AdderSystem) -> Vec<ProtocolViolation> {
    let idx = |w: &str| trace.wire_index(w);
    let detector_inputs: Vec<(String, u32, u32)> = system
        .completion_detector
        .inputs
        .iter()
        .filter_map(|p| Some((p.name.clone(), idx(&p.d1)?, idx(&p.d0)?)))
        .collect();
    let mut ports: Vec<(String, u32, u32)> = detector_inputs.clone();
    for p in system.sums.iter().chain(&system.carries[1..]) {
        if let (Some(d1), Some(d0)) = (idx(&p.d1), idx(&p.d0)) {
            ports.push((p.name.clone(), d1, d0));
        }
    }
    let mut port_of = vec![Vec::new(); trace.wires.len()];
    for (k, (_, d1, d0)) in ports.iter().enumerate() {
        port_of[*d1 as usize].push(k);
        port_of[*d0 as usize].push(k);
    }
    let ack = idx(&system.ackout);

    let mut half_of = vec![WindowHalf::Valid; trace.events.len()];
    for w in transaction_windows(trace) {
        for s in w.start_seq..w.end_seq {
            half_of[s as usize] = w.half;
        }
    }

    let mut values = vec![false; trace.wires.len()];
    let mut out = Vec::new();
    for e in &trace.events {
        values[e.wire as usize] = e.value;
        let expected_rise = half_of[e.seq as usize] == WindowHalf::Valid;
        if e.value != expected_rise {
            out.push(ProtocolViolation::NonMonotone {
                time: e.time,
                wire: trace.wire_name(e.wire).to_string(),
                rising: e.value,
            });
        }
        if e.value {
            for &k in &port_of[e.wire as usize] {
                let (name, d1, d0) = &ports[k];
                if values[*d1 as usize] && values[*d0 as usize] {
                    out.push(ProtocolViolation::IllegalCodeword {
                        time: e.time,
                        port: name.clone(),
                    });
                }
            }
        }
        if Some(e.wire) == ack {
            for (name, d1, d0) in &detector_inputs {
                let valid = values[*d1 as usize] || values[*d0 as usize];
                if valid != e.value {
                    out.push(ProtocolViolation::AckOrder {
                        time: e.time,
                        rising: e.value,
                        port: name.clone(),
                    });
                }
            }
        }
    }
    out
}
