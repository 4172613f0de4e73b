//! Four-phase handshake environment around an adder system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::rt::{check_relative_timing, RtViolation};
use super::{HandshakePhase, RtMode, RtPolicy, Simulator, Trace, TransactionMarker};
use crate::adders::SystemModel;
use crate::cells::DelayModel;
use crate::error::{Error, Result};
use crate::netlist::Port;

/// One addition presented to the adder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Operands {
    pub a: u64,
    pub b: u64,
    pub cin: bool,
}

impl Operands {
    pub fn new(a: u64, b: u64, cin: bool) -> Self {
        Self { a, b, cin }
    }
}

/// Every input codeword of a `width`-bit adder, carry-in included.
pub fn all_codewords(width: usize) -> Result<Vec<Operands>> {
    if width == 0 || width > 10 {
        return Err(Error::Domain(format!("codeword enumeration needs 1 <= width <= 10, got {width}")));
    }
    let mut out = Vec::with_capacity(2 << (2 * width));
    for a in 0..1u64 << width {
        for b in 0..1u64 << width {
            for cin in [false, true] {
                out.push(Operands::new(a, b, cin));
            }
        }
    }
    Ok(out)
}

/// `count` uniformly random operand sets, reproducible from `seed`.
pub fn random_operands(width: usize, count: usize, seed: u64) -> Result<Vec<Operands>> {
    if width == 0 || width > 64 {
        return Err(Error::Domain(format!("width must be in 1..=64, got {width}")));
    }
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| Operands::new(rng.gen::<u64>() & mask, rng.gen::<u64>() & mask, rng.gen()))
        .collect())
}

/// Timing and result of one transaction. Times are absolute ps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimingRecord {
    pub operands: Operands,
    /// Sum bits as observed at the outputs.
    pub sum: u64,
    pub cout: bool,
    pub valid_applied: u64,
    pub outputs_valid: u64,
    pub ack_high: u64,
    pub spacer_applied: u64,
    pub outputs_spacer: u64,
    pub ack_low: u64,
    /// Per sum bit: time from valid applied to that bit becoming valid.
    pub stage_forward: Vec<u64>,
    /// Per sum bit: time from spacer applied to that bit returning to spacer.
    pub stage_reverse: Vec<u64>,
}

impl TimingRecord {
    pub fn forward_ps(&self) -> u64 {
        self.outputs_valid - self.valid_applied
    }

    pub fn reverse_ps(&self) -> u64 {
        self.outputs_spacer - self.spacer_applied
    }

    pub fn cycle_ps(&self) -> u64 {
        self.forward_ps() + self.reverse_ps()
    }
}

#[derive(Debug, Clone)]
pub struct TransactionRun {
    pub trace: Trace,
    pub records: Vec<TimingRecord>,
    /// Filled only under [`RtMode::Check`].
    pub rt_violations: Vec<RtViolation>,
}

struct Bus {
    inputs: Vec<(u32, u32)>,
    outputs: Vec<(u32, u32)>,
    is_output: Vec<bool>,
    ack: u32,
}

impl Bus {
    fn outputs_are(&self, sim: &Simulator, valid: bool) -> bool {
        self.outputs
            .iter()
            .all(|&(d1, d0)| (sim.value_at(d1) || sim.value_at(d0)) == valid)
    }
}

/// Rails to raise for `op`, as wire indices.
fn operand_rails(sys: &SystemModel, sim: &Simulator, op: &Operands) -> Result<Vec<u32>> {
    let n = sys.adder.width;
    if n < 64 && (op.a >> n != 0 || op.b >> n != 0) {
        return Err(Error::Range(format!(
            "operands {:#x}, {:#x} do not fit in {n} bits",
            op.a, op.b
        )));
    }
    let bit = |p: &Port, v: bool| sim.wire(p.rail(v));
    let mut rails = Vec::with_capacity(2 * n + 1);
    for q in 0..n {
        rails.push(bit(&sys.adder.a[q], op.a >> q & 1 == 1)?);
        rails.push(bit(&sys.adder.b[q], op.b >> q & 1 == 1)?);
    }
    rails.push(bit(sys.adder.carry_in(), op.cin)?);
    Ok(rails)
}

/// Steps the simulator until the outputs and `ackout` both show `valid`.
/// Returns (outputs reached, ack reached).
fn await_outputs_and_ack(sim: &mut Simulator, bus: &Bus, valid: bool) -> Result<(u64, u64)> {
    let mut outputs_at = bus.outputs_are(sim, valid).then(|| sim.now());
    let mut ack_at = (sim.value_at(bus.ack) == valid).then(|| sim.now());
    while outputs_at.is_none() || ack_at.is_none() {
        let Some(id) = sim.step()? else {
            let what = if valid { "valid data" } else { "spacer" };
            return Err(Error::ProtocolStall(format!(
                "circuit went quiet at {} ps before outputs and ackout showed {what}",
                sim.now()
            )));
        };
        let e = sim.trace().event(id);
        let (t, wire, value) = (e.time, e.wire, e.value);
        if wire == bus.ack && value == valid && ack_at.is_none() {
            ack_at = Some(t);
        }
        if outputs_at.is_none() && bus.is_output[wire as usize] && bus.outputs_are(sim, valid) {
            outputs_at = Some(t);
        }
    }
    Ok((outputs_at.unwrap(), ack_at.unwrap()))
}

/// Drives each operand set through a full valid/spacer handshake.
///
/// The environment applies valid data, waits for `ackout` high and all
/// outputs valid, waits its response time, applies spacer, waits for
/// `ackout` low and all outputs spacer, waits its response time, and moves
/// on. After the last transaction the circuit is run to quiescence.
pub fn run_transactions(
    sys: &SystemModel,
    operands: &[Operands],
    delays: &DelayModel,
    rt: &RtPolicy,
) -> Result<TransactionRun> {
    let adder = &sys.adder;
    let mut sim = Simulator::new(&sys.netlist, delays, rt)?;
    for c in &adder.carries {
        sim.watch_pair(&c.d1, &c.d0)?;
    }
    let pairs = |ports: &[Port]| -> Result<Vec<(u32, u32)>> {
        ports.iter().map(|p| Ok((sim.wire(&p.d1)?, sim.wire(&p.d0)?))).collect()
    };
    let inputs = pairs(&sys.netlist.inputs)?;
    let outputs = pairs(&sys.netlist.outputs)?;
    let mut is_output = vec![false; sim.trace().wires.len()];
    for &(d1, d0) in &outputs {
        is_output[d1 as usize] = true;
        is_output[d0 as usize] = true;
    }
    let bus = Bus {
        inputs,
        outputs,
        is_output,
        ack: sim.wire(&adder.ackout)?,
    };

    let mut records = Vec::with_capacity(operands.len());
    let mut t = 0;
    for op in operands {
        let rails = operand_rails(sys, &sim, op)?;
        sim.advance_to(t)?;
        sim.reset_step_budget();
        let mut marker = TransactionMarker {
            valid_applied: t,
            valid_seq: sim.seq(),
            ..Default::default()
        };
        sim.set_phase(HandshakePhase::ApplyValid);
        for &w in &rails {
            sim.drive_wire(w, true)?;
        }
        sim.set_phase(HandshakePhase::AwaitAckHigh);
        let (outputs_valid, ack_high) = await_outputs_and_ack(&mut sim, &bus, true)?;
        marker.ack_high = ack_high;

        let mut sum = 0u64;
        for (q, p) in adder.sums.iter().enumerate() {
            if sim.value(&p.d1)? {
                sum |= 1 << q;
            }
        }
        let cout = sim.value(&adder.carry_out().d1)?;

        let spacer_at = outputs_valid.max(ack_high) + sys.env_response_ps;
        sim.advance_to(spacer_at)?;
        sim.reset_step_budget();
        marker.spacer_applied = spacer_at;
        marker.spacer_seq = sim.seq();
        sim.set_phase(HandshakePhase::ApplySpacer);
        for &(d1, d0) in &bus.inputs {
            sim.drive_wire(d1, false)?;
            sim.drive_wire(d0, false)?;
        }
        sim.set_phase(HandshakePhase::AwaitAckLow);
        let (outputs_spacer, ack_low) = await_outputs_and_ack(&mut sim, &bus, false)?;
        marker.ack_low = ack_low;
        sim.trace_mut().transactions.push(marker);
        t = outputs_spacer.max(ack_low) + sys.env_response_ps;

        records.push(TimingRecord {
            operands: *op,
            sum,
            cout,
            valid_applied: 0,
            outputs_valid,
            ack_high,
            spacer_applied: spacer_at,
            outputs_spacer,
            ack_low,
            stage_forward: Vec::new(),
            stage_reverse: Vec::new(),
        });
    }
    sim.reset_step_budget();
    sim.settle()?;
    let trace = sim.into_trace();
    fill_stage_times(&trace, sys, &mut records);

    let rt_violations = if rt.mode == RtMode::Check {
        check_relative_timing(&trace, &sys.adder)
    } else {
        Vec::new()
    };
    Ok(TransactionRun {
        trace,
        records,
        rt_violations,
    })
}

/// Per-bit settle times, taken from the last edge on each sum port inside
/// the relevant half of each transaction.
fn fill_stage_times(trace: &Trace, sys: &SystemModel, records: &mut [TimingRecord]) {
    let width = sys.adder.width;
    let mut bit_of = vec![None; trace.wires.len()];
    for (q, p) in sys.adder.sums.iter().enumerate() {
        for rail in p.rails() {
            if let Some(w) = trace.wire_index(rail) {
                bit_of[w as usize] = Some(q);
            }
        }
    }
    let markers = &trace.transactions;
    for (i, rec) in records.iter_mut().enumerate() {
        let m = &markers[i];
        rec.valid_applied = m.valid_applied;
        let end = markers.get(i + 1).map_or(trace.events.len(), |n| n.valid_seq as usize);
        let mut fwd = vec![0; width];
        let mut rev = vec![0; width];
        for e in &trace.events[m.valid_seq as usize..end] {
            if let Some(q) = bit_of[e.wire as usize] {
                if e.value && e.seq < m.spacer_seq {
                    fwd[q] = e.time - m.valid_applied;
                } else if !e.value && e.seq >= m.spacer_seq {
                    rev[q] = e.time - m.spacer_applied;
                }
            }
        }
        rec.stage_forward = fwd;
        rec.stage_reverse = rev;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adders::{build_handshake_system, build_rca, FullAdderKind};
    use crate::data::default_delays;

    fn system(kind: FullAdderKind, n: usize) -> SystemModel {
        build_handshake_system(build_rca(n, kind.design().as_ref()))
    }

    #[test]
    fn every_design_adds_exhaustively_at_two_bits() {
        let ops: Vec<Operands> = (0..4)
            .flat_map(|a| (0..4).flat_map(move |b| [false, true].map(|c| Operands::new(a, b, c))))
            .collect();
        for kind in FullAdderKind::ALL {
            let run = run_transactions(&system(kind, 2), &ops, &default_delays().unwrap(), &RtPolicy::off()).unwrap();
            for r in &run.records {
                let total = r.operands.a + r.operands.b + u64::from(r.operands.cin);
                assert_eq!(r.sum | (u64::from(r.cout) << 2), total, "{kind}");
            }
        }
    }

    #[test]
    fn markers_follow_the_handshake() {
        let run = run_transactions(
            &system(FullAdderKind::AoptEo, 4),
            &[Operands::new(3, 5, false), Operands::new(15, 1, true)],
            &default_delays().unwrap(),
            &RtPolicy::off(),
        )
        .unwrap();
        let m = &run.trace.transactions;
        assert_eq!(m.len(), 2);
        for (i, mk) in m.iter().enumerate() {
            assert!(mk.valid_applied < mk.ack_high);
            assert!(mk.ack_high < mk.spacer_applied);
            assert!(mk.spacer_applied < mk.ack_low);
            if let Some(next) = m.get(i + 1) {
                assert!(mk.ack_low < next.valid_applied);
            }
        }
        for r in &run.records {
            assert_eq!(*r.stage_forward.iter().max().unwrap() + r.valid_applied <= r.outputs_valid, true);
            assert!(r.forward_ps() > 0 && r.reverse_ps() > 0);
        }
    }

    #[test]
    fn out_of_range_operands_are_rejected() {
        let err = run_transactions(
            &system(FullAdderKind::AoptEo, 2),
            &[Operands::new(4, 0, false)],
            &default_delays().unwrap(),
            &RtPolicy::off(),
        );
        assert!(matches!(err, Err(Error::Range(_))));
    }

    #[test]
    fn phases_are_tagged() {
        let run = run_transactions(
            &system(FullAdderKind::LoptEo, 1),
            &[Operands::new(1, 1, false)],
            &default_delays().unwrap(),
            &RtPolicy::off(),
        )
        .unwrap();
        let m = &run.trace.transactions[0];
        for e in &run.trace.events {
            let valid_half = e.seq < m.spacer_seq;
            assert_eq!(e.phase.is_valid_half(), valid_half, "{}", run.trace.dump());
        }
    }
}
