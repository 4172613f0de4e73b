use super::{FullAdderDesign, GateSink, StagePorts};
use crate::netlist::GateKind::*;

/// Weak-indication full adder: two-level AND/OR sum-of-minterms, with the
/// sum rails held by C-elements until an OR over all six input rails has
/// also returned to zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeitzWeak;

/// The weak-indication adder with the six-input OR and both C-elements
/// removed, so any single input returning to spacer resets every output.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeitzEarlyOutput;

/// Emits the shared AND/OR core and returns the two sum-collecting wires
/// `(sum1, sum0)`. When `sum_rails` is set the OR4 gates drive the sum
/// port directly.
fn emit_core(out: &mut GateSink, p: &str, ports: &StagePorts, sum_rails: Option<(&str, &str)>) -> (String, String) {
    let (a, b, c) = (&ports.a, &ports.b, &ports.cin);

    // Minterm a=x, b=y, cin=z lives on wire `m{x}{y}{z}`.
    let mut minterm = |x: bool, y: bool, z: bool| {
        let local = format!("m{}{}{}", u8::from(x), u8::from(y), u8::from(z));
        out.node(p, &local, And3, &[a.rail(x), b.rail(y), c.rail(z)])
    };
    let m000 = minterm(false, false, false);
    let m001 = minterm(false, false, true);
    let m010 = minterm(false, true, false);
    let m011 = minterm(false, true, true);
    let m100 = minterm(true, false, false);
    let m101 = minterm(true, false, true);
    let m110 = minterm(true, true, false);
    let m111 = minterm(true, true, true);
    let gen = out.node(p, "g11", And2, &[a.rail(true), b.rail(true)]);
    let kill = out.node(p, "k00", And2, &[a.rail(false), b.rail(false)]);

    let (s1, s0) = match sum_rails {
        Some((s1, s0)) => (s1.to_string(), s0.to_string()),
        None => (format!("{p}intsum1"), format!("{p}intsum0")),
    };
    out.gate(p, "or_sum1", Or4, &[&m001, &m010, &m100, &m111], &s1);
    out.gate(p, "or_sum0", Or4, &[&m000, &m011, &m101, &m110], &s0);
    out.gate(p, "or_cout1", Or3, &[&m011, &m101, &gen], &ports.cout.d1);
    out.gate(p, "or_cout0", Or3, &[&m010, &m100, &kill], &ports.cout.d0);
    (s1, s0)
}

impl FullAdderDesign for SeitzWeak {
    fn name(&self) -> &str {
        "seitz-weak"
    }

    fn description(&self) -> &str {
        "weak-indication AND/OR full adder with OR6 + C-element sum indication"
    }

    fn needs_relative_timing(&self) -> bool {
        false
    }

    fn emit(&self, out: &mut GateSink, p: &str, ports: &StagePorts) {
        let (s1, s0) = emit_core(out, p, ports, None);
        let (a, b, c) = (&ports.a, &ports.b, &ports.cin);
        let org = out.node(p, "org", Or6, &[&a.d1, &a.d0, &b.d1, &b.d0, &c.d1, &c.d0]);
        out.gate(p, "c_sum1", Ce2, &[&s1, &org], &ports.sum.d1);
        out.gate(p, "c_sum0", Ce2, &[&s0, &org], &ports.sum.d0);
    }
}

impl FullAdderDesign for SeitzEarlyOutput {
    fn name(&self) -> &str {
        "seitz-early"
    }

    fn description(&self) -> &str {
        "early-output (early reset) AND/OR full adder"
    }

    fn needs_relative_timing(&self) -> bool {
        true
    }

    fn emit(&self, out: &mut GateSink, p: &str, ports: &StagePorts) {
        emit_core(out, p, ports, Some((&ports.sum.d1, &ports.sum.d0)));
    }
}
