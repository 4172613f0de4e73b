//! Event-driven gate-level simulator.
//!
//! Time is integer picoseconds. Each gate has at most one scheduled output
//! transition: when an input change makes the gate evaluate back to its
//! current output before the scheduled time, the transition is withdrawn.
//! Stimuli at time `t` are applied before gate events at `t`.

mod env;
mod rt;
mod trace;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::cells::{eval_unchecked, DelayModel};
use crate::error::{Error, Result};
use crate::netlist::{validate_netlist, GateKind, Netlist};

pub use env::{all_codewords, random_operands, run_transactions, Operands, TimingRecord, TransactionRun};
pub use rt::{check_relative_timing, transaction_windows, RtViolation, Window, WindowHalf};
pub use trace::{Event, EventId, HandshakePhase, Trace, TransactionMarker};

/// Default cap on committed events per simulation.
pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

/// How the carry-before-sum reset ordering of early-output cascades is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RtMode {
    /// Not looked at.
    #[default]
    Off,
    /// Violations are reported after a transaction run.
    Check,
    /// Falling transitions of gates driving `sum*` output rails are delayed by the pad.
    Enforce,
}

impl std::str::FromStr for RtMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(RtMode::Off),
            "check" => Ok(RtMode::Check),
            "enforce" => Ok(RtMode::Enforce),
            _ => Err(Error::Unknown {
                what: "relative-timing mode",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RtPolicy {
    pub mode: RtMode,
    pub pad_ps: u64,
}

impl Default for RtPolicy {
    fn default() -> Self {
        Self {
            mode: RtMode::Off,
            pad_ps: 100,
        }
    }
}

impl RtPolicy {
    pub fn off() -> Self {
        Self::default()
    }

    pub fn check() -> Self {
        Self {
            mode: RtMode::Check,
            ..Self::default()
        }
    }

    pub fn enforce(pad_ps: u64) -> Self {
        Self {
            mode: RtMode::Enforce,
            pad_ps,
        }
    }
}

/// A primary-input rail change at an absolute time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    pub time: u64,
    pub wire: String,
    pub value: bool,
}

impl Stimulus {
    pub fn new(time: u64, wire: impl Into<String>, value: bool) -> Self {
        Self {
            time,
            wire: wire.into(),
            value,
        }
    }
}

#[derive(Debug)]
struct CGate {
    kind: GateKind,
    inputs: SmallVec<[u32; 6]>,
    output: u32,
    rise_ps: u64,
    fall_ps: u64,
}

#[derive(Debug)]
struct Compiled {
    wires: Arc<Vec<String>>,
    index: HashMap<String, u32>,
    gates: Vec<CGate>,
    gate_ids: Vec<String>,
    readers: Vec<SmallVec<[u32; 4]>>,
    driver: Vec<Option<u32>>,
}

impl Compiled {
    fn new(netlist: &Netlist, delays: &DelayModel, rt: &RtPolicy) -> Result<Self> {
        let report = validate_netlist(netlist);
        if !report.is_clean() {
            let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::MalformedNetlist(list.join("; ")));
        }
        let names: Vec<String> = netlist.wires().into_iter().map(str::to_string).collect();
        let index: HashMap<String, u32> = names.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();

        let padded: std::collections::HashSet<&str> = if rt.mode == RtMode::Enforce {
            netlist
                .outputs
                .iter()
                .filter(|p| p.name.starts_with("sum"))
                .flat_map(|p| p.rails())
                .collect()
        } else {
            Default::default()
        };

        let mut gates = Vec::with_capacity(netlist.gates.len());
        let mut readers = vec![SmallVec::new(); names.len()];
        let mut driver = vec![None; names.len()];
        for (gi, g) in netlist.gates.iter().enumerate() {
            let d = delays.require(g.kind)?;
            let output = index[&g.output];
            let inputs: SmallVec<[u32; 6]> = g.inputs.iter().map(|w| index[w]).collect();
            for &w in &inputs {
                let r: &mut SmallVec<[u32; 4]> = &mut readers[w as usize];
                if !r.contains(&(gi as u32)) {
                    r.push(gi as u32);
                }
            }
            driver[output as usize] = Some(gi as u32);
            let pad = if padded.contains(g.output.as_str()) { rt.pad_ps } else { 0 };
            gates.push(CGate {
                kind: g.kind,
                inputs,
                output,
                rise_ps: d,
                fall_ps: d + pad,
            });
        }
        Ok(Self {
            wires: Arc::new(names),
            index,
            gates,
            gate_ids: netlist.gates.iter().map(|g| g.id.clone()).collect(),
            readers,
            driver,
        })
    }
}

#[derive(Debug, Clone)]
struct Pending {
    token: u64,
    value: bool,
    cause: Option<EventId>,
    support: SmallVec<[EventId; 4]>,
}

/// Incremental simulator. The environment drives primary-input rails with
/// [`Simulator::drive`] and advances time with [`Simulator::step`] or
/// [`Simulator::advance_to`].
#[derive(Debug, Clone)]
pub struct Simulator {
    c: Arc<Compiled>,
    values: Vec<bool>,
    /// Output each gate is heading to: the committed value, or the value of
    /// its scheduled transition.
    projected: Vec<bool>,
    pending: Vec<Option<Pending>>,
    last_event: Vec<Option<EventId>>,
    queue: BinaryHeap<Reverse<(u64, u64, u32)>>,
    next_token: u64,
    now: u64,
    phase: HandshakePhase,
    pairs: Vec<(u32, u32)>,
    pair_of: Vec<SmallVec<[u32; 1]>>,
    trace: Trace,
    committed: u64,
    step_limit: u64,
}

impl Simulator {
    /// All wires start at 0, which is a stable state for every cell kind.
    pub fn new(netlist: &Netlist, delays: &DelayModel, rt: &RtPolicy) -> Result<Self> {
        let c = Arc::new(Compiled::new(netlist, delays, rt)?);
        let nw = c.wires.len();
        let ng = c.gates.len();
        let mut sim = Self {
            values: vec![false; nw],
            projected: vec![false; ng],
            pending: vec![None; ng],
            last_event: vec![None; nw],
            queue: BinaryHeap::new(),
            next_token: 0,
            now: 0,
            phase: HandshakePhase::ApplyValid,
            pairs: Vec::new(),
            pair_of: vec![SmallVec::new(); nw],
            trace: Trace {
                wires: c.wires.clone(),
                ..Trace::default()
            },
            committed: 0,
            step_limit: DEFAULT_STEP_LIMIT,
            c,
        };
        for p in netlist.inputs.iter().chain(&netlist.outputs) {
            sim.watch_pair(&p.d1, &p.d0)?;
        }
        Ok(sim)
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    /// Restarts the event count checked against the step limit. The
    /// handshake environment calls this at each of its actions, so the limit
    /// bounds a single settling phase rather than a whole run.
    pub fn reset_step_budget(&mut self) {
        self.committed = 0;
    }

    /// Reject any state where both rails are high.
    pub fn watch_pair(&mut self, d1: &str, d0: &str) -> Result<()> {
        let (i1, i0) = (self.wire(d1)?, self.wire(d0)?);
        if self.pairs.contains(&(i1, i0)) {
            return Ok(());
        }
        let k = self.pairs.len() as u32;
        self.pairs.push((i1, i0));
        self.pair_of[i1 as usize].push(k);
        self.pair_of[i0 as usize].push(k);
        Ok(())
    }

    pub fn wire(&self, name: &str) -> Result<u32> {
        self.c.index.get(name).copied().ok_or_else(|| Error::Unknown {
            what: "wire",
            name: name.to_string(),
        })
    }

    pub fn value(&self, name: &str) -> Result<bool> {
        Ok(self.values[self.wire(name)? as usize])
    }

    #[inline]
    pub fn value_at(&self, wire: u32) -> bool {
        self.values[wire as usize]
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn phase(&self) -> HandshakePhase {
        self.phase
    }

    /// Phase tag given to events committed from now on.
    pub fn set_phase(&mut self, phase: HandshakePhase) {
        self.phase = phase;
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut Trace {
        &mut self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Number of committed events so far; the id the next event will get.
    pub fn seq(&self) -> EventId {
        self.trace.events.len() as EventId
    }

    pub fn gate_id(&self, gate: u32) -> &str {
        &self.c.gate_ids[gate as usize]
    }

    /// Drops the recorded events but keeps the circuit state, so a settled
    /// simulator can be cloned as the starting point of many experiments.
    /// Event ids restart at 0.
    pub fn clear_trace(&mut self) {
        assert!(self.queue.is_empty() || self.peek_time().is_none(), "clear_trace on a busy simulator");
        self.trace.events.clear();
        self.trace.transactions.clear();
        self.last_event.iter_mut().for_each(|e| *e = None);
    }

    /// Applies a primary-input rail change at the current time.
    pub fn drive(&mut self, wire: &str, value: bool) -> Result<()> {
        let w = self.wire(wire)?;
        self.drive_wire(w, value)
    }

    /// [`Simulator::drive`] by wire index.
    pub fn drive_wire(&mut self, w: u32, value: bool) -> Result<()> {
        match self.c.driver.get(w as usize) {
            None => return Err(Error::Domain(format!("no wire with index {w}"))),
            Some(Some(_)) => {
                return Err(Error::Domain(format!(
                    "`{}` is driven by a gate, not the environment",
                    self.c.wires[w as usize]
                )))
            }
            Some(None) => {}
        }
        if self.values[w as usize] != value {
            self.commit(w, value, None, SmallVec::new(), None)?;
        }
        Ok(())
    }

    /// Time of the next pending gate transition.
    pub fn peek_time(&mut self) -> Option<u64> {
        while let Some(&Reverse((t, token, g))) = self.queue.peek() {
            if self.is_live(g, token) {
                return Some(t);
            }
            self.queue.pop();
        }
        None
    }

    pub fn is_quiescent(&mut self) -> bool {
        self.peek_time().is_none()
    }

    fn is_live(&self, g: u32, token: u64) -> bool {
        matches!(&self.pending[g as usize], Some(p) if p.token == token)
    }

    /// Commits the next gate transition; `None` when nothing is pending.
    pub fn step(&mut self) -> Result<Option<EventId>> {
        while let Some(Reverse((t, token, g))) = self.queue.pop() {
            if !self.is_live(g, token) {
                continue;
            }
            let p = self.pending[g as usize].take().expect("live pending");
            self.now = t;
            let out = self.c.gates[g as usize].output;
            let id = self.commit(out, p.value, p.cause, p.support, Some(g))?;
            return Ok(Some(id));
        }
        Ok(None)
    }

    /// Commits every transition scheduled strictly before `t`, then moves the
    /// clock to `t`.
    pub fn advance_to(&mut self, t: u64) -> Result<()> {
        while let Some(next) = self.peek_time() {
            if next >= t {
                break;
            }
            self.step()?;
        }
        self.now = self.now.max(t);
        Ok(())
    }

    /// Runs until no transition is pending.
    pub fn settle(&mut self) -> Result<()> {
        while self.step()?.is_some() {}
        Ok(())
    }

    fn commit(
        &mut self,
        wire: u32,
        value: bool,
        cause: Option<EventId>,
        support: SmallVec<[EventId; 4]>,
        gate: Option<u32>,
    ) -> Result<EventId> {
        self.committed += 1;
        if self.committed > self.step_limit {
            return Err(Error::Oscillation { limit: self.step_limit });
        }
        let id = self.trace.events.len() as EventId;
        self.trace.events.push(Event {
            seq: id,
            time: self.now,
            wire,
            value,
            cause,
            support,
            gate,
            phase: self.phase,
        });
        self.values[wire as usize] = value;
        self.last_event[wire as usize] = Some(id);
        if value {
            for &k in &self.pair_of[wire as usize] {
                let (d1, d0) = self.pairs[k as usize];
                if self.values[d1 as usize] && self.values[d0 as usize] {
                    return Err(Error::IllegalCodeword(format!(
                        "{} and {} both high at {} ps",
                        self.c.wires[d1 as usize], self.c.wires[d0 as usize], self.now
                    )));
                }
            }
        }
        for i in 0..self.c.readers[wire as usize].len() {
            let g = self.c.readers[wire as usize][i];
            self.reevaluate(g, id);
        }
        Ok(id)
    }

    fn reevaluate(&mut self, g: u32, cause: EventId) {
        let gate = &self.c.gates[g as usize];
        let k = gate.inputs.len();
        let mut buf = [false; 6];
        for (b, &w) in buf.iter_mut().zip(&gate.inputs) {
            *b = self.values[w as usize];
        }
        let x = &mut buf[..k];
        let gi = g as usize;
        let v = eval_unchecked(gate.kind, x, self.projected[gi]);
        if v == self.projected[gi] {
            return;
        }
        self.projected[gi] = v;
        if self.pending[gi].take().is_some() {
            // Back to the committed value before the transition happened.
            return;
        }
        let committed = self.values[gate.output as usize];
        let mut support: SmallVec<[EventId; 4]> = SmallVec::new();
        for (i, &w) in gate.inputs.iter().enumerate() {
            if w == gate.output {
                continue;
            }
            x[i] = !x[i];
            let flipped = eval_unchecked(gate.kind, x, committed);
            x[i] = !x[i];
            if flipped != v {
                if let Some(e) = self.last_event[w as usize] {
                    if !support.contains(&e) {
                        support.push(e);
                    }
                }
            }
        }
        let delay = if v { gate.rise_ps } else { gate.fall_ps };
        let token = self.next_token;
        self.next_token += 1;
        self.queue.push(Reverse((self.now + delay, token, g)));
        self.pending[gi] = Some(Pending {
            token,
            value: v,
            cause: Some(cause),
            support,
        });
    }
}

/// Simulates `stimuli` (any order; ties keep their given order) to quiescence.
pub fn simulate(netlist: &Netlist, stimuli: &[Stimulus], delays: &DelayModel, rt: &RtPolicy) -> Result<Trace> {
    let mut sim = Simulator::new(netlist, delays, rt)?;
    let mut order: Vec<&Stimulus> = stimuli.iter().collect();
    order.sort_by_key(|s| s.time);
    for s in order {
        sim.advance_to(s.time)?;
        sim.drive(&s.wire, s.value)?;
    }
    sim.settle()?;
    Ok(sim.into_trace())
}
