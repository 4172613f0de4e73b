//! Ripple-carry adders, the input completion detector, and the handshake
//! system that wraps them.

use std::collections::BTreeSet;

use super::{FullAdderDesign, GateSink, StagePorts};
use crate::netlist::{GateKind, Netlist, Port, WireId};

/// Output wire of the completion detector.
pub const ACKOUT: &str = "ackout";

/// Environment reaction time to acknowledge edges, in ps. Not part of any
/// reported latency.
pub const ENV_RESPONSE_PS: u64 = 10;

/// An n-bit ripple-carry adder plus the completion detector over its inputs.
#[derive(Debug, Clone)]
pub struct AdderSystem {
    pub design: String,
    pub width: usize,
    pub rca: Netlist,
    pub completion_detector: Netlist,
    /// `a[q]`, `b[q]`: operand bit q.
    pub a: Vec<Port>,
    pub b: Vec<Port>,
    pub sums: Vec<Port>,
    /// `carries[0]` is the carry-in, `carries[width]` the carry-out; the
    /// rest are internal.
    pub carries: Vec<Port>,
    pub ackout: WireId,
}

impl AdderSystem {
    pub fn carry_in(&self) -> &Port {
        &self.carries[0]
    }

    pub fn carry_out(&self) -> &Port {
        &self.carries[self.width]
    }

    /// Gate-id prefix of stage `q`.
    pub fn stage_prefix(q: usize) -> String {
        format!("fa{q}.")
    }

    /// The adder and detector in one netlist sharing the primary inputs.
    pub fn combined(&self) -> Netlist {
        let mut gates = self.rca.gates.clone();
        gates.extend(self.completion_detector.gates.iter().cloned());
        let mut n = Netlist {
            gates,
            inputs: self.rca.inputs.clone(),
            outputs: self.rca.outputs.clone(),
            forks: BTreeSet::new(),
        };
        n.annotate_forks();
        n
    }
}

/// Emits an OR2 per pair and a balanced C-element tree, pairing left to
/// right at each level. Returns the gate ids in emission order.
fn emit_completion_detector(out: &mut GateSink, pairs: &[Port], ackout: &str) {
    assert!(!pairs.is_empty(), "completion detector needs at least one pair");
    let mut level: Vec<String> = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        let local = format!("or{}", i + 1);
        if pairs.len() == 1 {
            out.gate("cd.", &local, GateKind::Or2, &[&p.d1, &p.d0], ackout);
            return;
        }
        level.push(out.node("cd.", &local, GateKind::Or2, &[&p.d1, &p.d0]));
    }
    let mut next_id = 1;
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2 + 1);
        let last_level = level.len() == 2;
        for chunk in level.chunks(2) {
            match chunk {
                [l, r] => {
                    let local = format!("c{next_id}");
                    next_id += 1;
                    if last_level {
                        out.gate("cd.", &local, GateKind::Ce2, &[l, r], ackout);
                    } else {
                        next.push(out.node("cd.", &local, GateKind::Ce2, &[l, r]));
                    }
                }
                [single] => next.push(single.clone()),
                _ => unreachable!(),
            }
        }
        if last_level {
            return;
        }
        level = next;
    }
}

/// Stand-alone detector over pairs `i0 .. i{n-1}` driving `ackout`.
pub fn build_completion_detector(num_dual_rail_inputs: usize) -> Netlist {
    assert!(num_dual_rail_inputs >= 1, "completion detector needs at least one pair");
    let ports: Vec<Port> = (0..num_dual_rail_inputs)
        .map(|i| Port::named(&format!("i{i}")))
        .collect();
    let mut sink = GateSink::default();
    emit_completion_detector(&mut sink, &ports, ACKOUT);
    let mut n = Netlist {
        gates: sink.into_gates(),
        inputs: ports,
        outputs: Vec::new(),
        forks: BTreeSet::new(),
    };
    n.annotate_forks();
    n
}

/// `width` stages of `design` chained through dual-rail carries `c1 .. c{n-1}`.
/// Ports: operands `a{q}`, `b{q}`, carry-in `c0`, sums `sum{q}`, carry-out `c{n}`.
pub fn build_rca(width: usize, design: &dyn FullAdderDesign) -> AdderSystem {
    assert!(width >= 1, "adder width must be at least 1");
    let a: Vec<Port> = (0..width).map(|q| Port::named(&format!("a{q}"))).collect();
    let b: Vec<Port> = (0..width).map(|q| Port::named(&format!("b{q}"))).collect();
    let sums: Vec<Port> = (0..width).map(|q| Port::named(&format!("sum{q}"))).collect();
    let carries: Vec<Port> = (0..=width).map(|q| Port::named(&format!("c{q}"))).collect();

    let mut sink = GateSink::default();
    for q in 0..width {
        let ports = StagePorts {
            a: a[q].clone(),
            b: b[q].clone(),
            cin: carries[q].clone(),
            sum: sums[q].clone(),
            cout: carries[q + 1].clone(),
        };
        design.emit(&mut sink, &AdderSystem::stage_prefix(q), &ports);
    }

    // Operand pairs interleaved per bit, then the carry-in.
    let mut inputs = Vec::with_capacity(2 * width + 1);
    for q in 0..width {
        inputs.push(a[q].clone());
        inputs.push(b[q].clone());
    }
    inputs.push(carries[0].clone());
    let mut outputs = sums.clone();
    outputs.push(carries[width].clone());

    let mut rca = Netlist {
        gates: sink.into_gates(),
        inputs: inputs.clone(),
        outputs,
        forks: BTreeSet::new(),
    };
    rca.annotate_forks();

    let mut cd_sink = GateSink::default();
    emit_completion_detector(&mut cd_sink, &inputs, ACKOUT);
    let mut completion_detector = Netlist {
        gates: cd_sink.into_gates(),
        inputs,
        outputs: Vec::new(),
        forks: BTreeSet::new(),
    };
    completion_detector.annotate_forks();

    AdderSystem {
        design: design.name().to_string(),
        width,
        rca,
        completion_detector,
        a,
        b,
        sums,
        carries,
        ackout: ACKOUT.to_string(),
    }
}

/// An adder system placed between a current-stage and next-stage register.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub adder: AdderSystem,
    /// Adder and detector in one netlist.
    pub netlist: Netlist,
    pub env_response_ps: u64,
}

pub fn build_handshake_system(adder: AdderSystem) -> SystemModel {
    let netlist = adder.combined();
    SystemModel {
        adder,
        netlist,
        env_response_ps: ENV_RESPONSE_PS,
    }
}
