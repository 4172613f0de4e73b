//! Committed transitions and their export formats.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub type EventId = u32;

/// The environment's four-phase return-to-zero state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandshakePhase {
    #[default]
    ApplyValid,
    AwaitAckHigh,
    ApplySpacer,
    AwaitAckLow,
}

impl HandshakePhase {
    pub fn next(self) -> Self {
        match self {
            HandshakePhase::ApplyValid => HandshakePhase::AwaitAckHigh,
            HandshakePhase::AwaitAckHigh => HandshakePhase::ApplySpacer,
            HandshakePhase::ApplySpacer => HandshakePhase::AwaitAckLow,
            HandshakePhase::AwaitAckLow => HandshakePhase::ApplyValid,
        }
    }

    /// True for the two phases in which data (not spacer) is on the bus.
    pub fn is_valid_half(self) -> bool {
        matches!(self, HandshakePhase::ApplyValid | HandshakePhase::AwaitAckHigh)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HandshakePhase::ApplyValid => "apply_valid",
            HandshakePhase::AwaitAckHigh => "await_ack_high",
            HandshakePhase::ApplySpacer => "apply_spacer",
            HandshakePhase::AwaitAckLow => "await_ack_low",
        }
    }
}

/// One committed wire transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Position in the trace; totally orders simultaneous events.
    pub seq: EventId,
    pub time: u64,
    pub wire: u32,
    pub value: bool,
    /// Input event whose re-evaluation scheduled this one; `None` for stimuli.
    pub cause: Option<EventId>,
    /// Latest events on the gate inputs the new output depended on when it
    /// was scheduled (flipping that input back would have changed the output).
    pub support: SmallVec<[EventId; 4]>,
    /// Driving gate index, `None` for stimuli.
    pub gate: Option<u32>,
    pub phase: HandshakePhase,
}

impl Event {
    pub fn is_stimulus(&self) -> bool {
        self.gate.is_none()
    }
}

/// Boundaries of one handshake transaction, as times and trace positions.
/// Positions are the trace length at the moment the environment acted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransactionMarker {
    pub valid_applied: u64,
    pub valid_seq: EventId,
    pub ack_high: u64,
    pub spacer_applied: u64,
    pub spacer_seq: EventId,
    pub ack_low: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub wires: Arc<Vec<String>>,
    pub events: Vec<Event>,
    pub transactions: Vec<TransactionMarker>,
}

#[derive(Serialize)]
struct JsonEvent<'a> {
    t: u64,
    wire: &'a str,
    v: u8,
    cause: Option<EventId>,
    phase: &'a str,
}

impl Trace {
    pub fn wire_name(&self, wire: u32) -> &str {
        &self.wires[wire as usize]
    }

    pub fn wire_index(&self, name: &str) -> Option<u32> {
        self.wires.iter().position(|w| w == name).map(|i| i as u32)
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id as usize]
    }

    pub fn gate_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| !e.is_stimulus())
    }

    /// Events on `wire`, in commit order.
    pub fn events_on<'a>(&'a self, wire: &'a str) -> impl Iterator<Item = &'a Event> + 'a {
        let idx = self.wire_index(wire);
        self.events.iter().filter(move |e| Some(e.wire) == idx)
    }

    /// Wire values just before event `seq` commits.
    pub fn values_before(&self, seq: EventId) -> Vec<bool> {
        let mut values = vec![false; self.wires.len()];
        for e in &self.events[..seq as usize] {
            values[e.wire as usize] = e.value;
        }
        values
    }

    /// One JSON object per line: `{t, wire, v, cause, phase}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.events {
            let line = JsonEvent {
                t: e.time,
                wire: self.wire_name(e.wire),
                v: u8::from(e.value),
                cause: e.cause,
                phase: e.phase.as_str(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("json is utf-8")
    }

    /// Value-change dump with a 1 ps timescale; every wire is a 1-bit var
    /// in a single `top` scope, all starting at 0.
    pub fn write_vcd<W: Write>(&self, mut out: W) -> io::Result<()> {
        let codes: Vec<String> = (0..self.wires.len()).map(vcd_code).collect();
        writeln!(out, "$timescale 1ps $end")?;
        writeln!(out, "$scope module top $end")?;
        for (name, code) in self.wires.iter().zip(&codes) {
            writeln!(out, "$var wire 1 {code} {name} $end")?;
        }
        writeln!(out, "$upscope $end")?;
        writeln!(out, "$enddefinitions $end")?;
        writeln!(out, "#0")?;
        writeln!(out, "$dumpvars")?;
        for code in &codes {
            writeln!(out, "0{code}")?;
        }
        writeln!(out, "$end")?;
        let mut current = 0;
        for e in &self.events {
            if e.time != current {
                writeln!(out, "#{}", e.time)?;
                current = e.time;
            }
            writeln!(out, "{}{}", u8::from(e.value), codes[e.wire as usize])?;
        }
        Ok(())
    }

    pub fn to_vcd(&self) -> String {
        let mut buf = Vec::new();
        self.write_vcd(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("vcd is ascii")
    }

    /// Human-readable listing, mostly for debugging failing tests.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            let _ = writeln!(
                s,
                "#{:<5} t={:<6} {:<16} {} cause={:?} support={:?} {}",
                e.seq,
                e.time,
                self.wire_name(e.wire),
                if e.value { "rise" } else { "fall" },
                e.cause,
                e.support.as_slice(),
                e.phase.as_str()
            );
        }
        s
    }
}

/// VCD identifier code: base-94 over the printable ASCII range.
fn vcd_code(mut i: usize) -> String {
    let mut code = String::new();
    loop {
        code.push((b'!' + (i % 94) as u8) as char);
        i /= 94;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vcd_codes_are_unique_and_printable() {
        let codes: std::collections::HashSet<String> = (0..20_000).map(vcd_code).collect();
        assert_eq!(codes.len(), 20_000);
        assert!(codes.iter().all(|c| c.bytes().all(|b| (33..=126).contains(&b))));
    }

    #[test]
    fn phases_cycle() {
        let mut p = HandshakePhase::ApplyValid;
        for _ in 0..4 {
            p = p.next();
        }
        assert_eq!(p, HandshakePhase::ApplyValid);
    }
}
