use super::{FullAdderDesign, GateSink, StagePorts};
use crate::netlist::GateKind::*;

/// Area-optimized early-output full adder: six AO22 cells, an OR2 internal
/// completion detector and two C-elements on the sum rails.
///
/// `int1` is high for generate/kill (`A == B`), `int2` for propagate
/// (`A != B`); `int3 = int1 | int2` indicates that both operands arrived.
#[derive(Debug, Clone, Copy, Default)]
pub struct AreaOptimizedEarlyOutput;

/// Latency-optimized early-output full adder. The carry is produced by AO21
/// cells fed from separate generate (`m1`) and kill (`m2`) terms, so the
/// carry-in to carry-out path is a single AO21.
#[derive(Debug, Clone, Copy, Default)]
pub struct LatencyOptimizedEarlyOutput;

/// `nsum1`, `nsum0` and the two sum C-elements, shared by both designs.
fn emit_sum(out: &mut GateSink, p: &str, ports: &StagePorts, int1: &str, int2: &str, int3: &str) {
    let c = &ports.cin;
    let nsum1 = out.node(p, "nsum1", Ao22, &[int1, &c.d1, int2, &c.d0]);
    let nsum0 = out.node(p, "nsum0", Ao22, &[int1, &c.d0, int2, &c.d1]);
    out.gate(p, "c1", Ce2, &[&nsum1, int3], &ports.sum.d1);
    out.gate(p, "c2", Ce2, &[&nsum0, int3], &ports.sum.d0);
}

impl FullAdderDesign for AreaOptimizedEarlyOutput {
    fn name(&self) -> &str {
        "aopt-eo"
    }

    fn description(&self) -> &str {
        "area-optimized early-output full adder (6 AO22, 2 CE2, 1 OR2)"
    }

    fn needs_relative_timing(&self) -> bool {
        true
    }

    fn emit(&self, out: &mut GateSink, p: &str, ports: &StagePorts) {
        let (a, b, c) = (&ports.a, &ports.b, &ports.cin);
        let int1 = out.node(p, "int1", Ao22, &[&a.d1, &b.d1, &a.d0, &b.d0]);
        let int2 = out.node(p, "int2", Ao22, &[&a.d0, &b.d1, &a.d1, &b.d0]);
        let int3 = out.node(p, "int3", Or2, &[&int1, &int2]);
        emit_sum(out, p, ports, &int1, &int2, &int3);
        out.gate(p, "cg_cout1", Ao22, &[&int2, &c.d1, &a.d1, &b.d1], &ports.cout.d1);
        out.gate(p, "cg_cout0", Ao22, &[&int2, &c.d0, &a.d0, &b.d0], &ports.cout.d0);
    }
}

impl FullAdderDesign for LatencyOptimizedEarlyOutput {
    fn name(&self) -> &str {
        "lopt-eo"
    }

    fn description(&self) -> &str {
        "latency-optimized early-output full adder (3 AO22, 2 AO21, 2 CE2, 4 simple gates)"
    }

    fn needs_relative_timing(&self) -> bool {
        true
    }

    fn emit(&self, out: &mut GateSink, p: &str, ports: &StagePorts) {
        let (a, b, c) = (&ports.a, &ports.b, &ports.cin);
        let m1 = out.node(p, "m1", And2, &[&a.d1, &b.d1]);
        let m2 = out.node(p, "m2", And2, &[&a.d0, &b.d0]);
        let int1 = out.node(p, "int1", Or2, &[&m1, &m2]);
        let int2 = out.node(p, "int2", Ao22, &[&a.d0, &b.d1, &a.d1, &b.d0]);
        let int3 = out.node(p, "int3", Or2, &[&int1, &int2]);
        emit_sum(out, p, ports, &int1, &int2, &int3);
        out.gate(p, "cg_cout1", Ao21, &[&int2, &c.d1, &m1], &ports.cout.d1);
        out.gate(p, "cg_cout0", Ao21, &[&int2, &c.d0, &m2], &ports.cout.d0);
    }
}
