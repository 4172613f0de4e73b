//! Orphan detection: transitions that no acknowledged sink depends on.
//!
//! An event depends on its cause and on its support (the inputs it needed),
//! restricted to the same half-transaction. The carry-before-sum timing
//! assumption adds one more dependency: a stage's sum-rail fall depends on
//! every carry-in fall of that stage that happened no later in the same
//! return-to-zero half. Sinks are primary-output and `ackout` events.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;
use smallvec::SmallVec;

use crate::adders::AdderSystem;
use crate::sim::{transaction_windows, EventId, HandshakePhase, Trace, WindowHalf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrphanKind {
    /// The driving gate's output transition reaches nothing acknowledged.
    Gate,
    /// Same, on a wire that forks to several readers.
    Wire,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orphan {
    pub event: EventId,
    pub wire: String,
    pub time: u64,
    pub rising: bool,
    pub phase: HandshakePhase,
    pub transaction: usize,
    pub kind: OrphanKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OrphanReport {
    pub orphans: Vec<Orphan>,
}

impl OrphanReport {
    pub fn is_empty(&self) -> bool {
        self.orphans.is_empty()
    }

    pub fn len(&self) -> usize {
        self.orphans.len()
    }
}

/// Window index of every event, or `usize::MAX` outside any transaction.
pub(crate) fn window_of(trace: &Trace) -> (Vec<usize>, Vec<crate::sim::Window>) {
    let windows = transaction_windows(trace);
    let mut of = vec![usize::MAX; trace.events.len()];
    for (k, w) in windows.iter().enumerate() {
        for s in w.start_seq..w.end_seq {
            of[s as usize] = k;
        }
    }
    (of, windows)
}

/// Dependencies of every event, as used by [`detect_orphans`].
pub fn acknowledgement_predecessors(trace: &Trace, system: &AdderSystem) -> Vec<SmallVec<[EventId; 4]>> {
    let (win, windows) = window_of(trace);
    let mut preds: Vec<SmallVec<[EventId; 4]>> = trace
        .events
        .iter()
        .map(|e| {
            let mut p: SmallVec<[EventId; 4]> = SmallVec::new();
            for d in e.cause.iter().chain(e.support.iter()) {
                if win[*d as usize] == win[e.seq as usize] && !p.contains(d) {
                    p.push(*d);
                }
            }
            p
        })
        .collect();

    // Stage q: sum rails and carry-in rails.
    let mut sum_stage: HashMap<u32, usize> = HashMap::new();
    let mut carry_stage: HashMap<u32, usize> = HashMap::new();
    for q in 0..system.width {
        for r in system.sums[q].rails() {
            if let Some(w) = trace.wire_index(r) {
                sum_stage.insert(w, q);
            }
        }
        for r in system.carries[q].rails() {
            if let Some(w) = trace.wire_index(r) {
                carry_stage.insert(w, q);
            }
        }
    }
    for w in windows.iter().filter(|w| w.half == WindowHalf::Rtz) {
        let evs = &trace.events[w.start_seq as usize..w.end_seq as usize];
        let carry_falls: Vec<(usize, u64, EventId)> = evs
            .iter()
            .filter(|e| !e.value)
            .filter_map(|e| carry_stage.get(&e.wire).map(|&q| (q, e.time, e.seq)))
            .collect();
        for e in evs.iter().filter(|e| !e.value) {
            if let Some(&q) = sum_stage.get(&e.wire) {
                for &(cq, t, id) in &carry_falls {
                    if cq == q && t <= e.time && !preds[e.seq as usize].contains(&id) {
                        preds[e.seq as usize].push(id);
                    }
                }
            }
        }
    }
    preds
}

/// Sink events: edges on primary outputs and on `ackout`.
pub fn acknowledged_sinks(trace: &Trace, system: &AdderSystem) -> Vec<EventId> {
    let sink_wires: HashSet<u32> = system
        .sums
        .iter()
        .chain(std::iter::once(system.carry_out()))
        .flat_map(|p| p.rails())
        .chain(std::iter::once(system.ackout.as_str()))
        .filter_map(|w| trace.wire_index(w))
        .collect();
    trace
        .events
        .iter()
        .filter(|e| sink_wires.contains(&e.wire))
        .map(|e| e.seq)
        .collect()
}

pub fn detect_orphans(trace: &Trace, system: &AdderSystem) -> OrphanReport {
    let preds = acknowledgement_predecessors(trace, system);
    let (win, windows) = window_of(trace);
    let mut reached = vec![false; trace.events.len()];
    let mut queue: VecDeque<EventId> = VecDeque::new();
    for s in acknowledged_sinks(trace, system) {
        reached[s as usize] = true;
        queue.push_back(s);
    }
    while let Some(e) = queue.pop_front() {
        for &p in &preds[e as usize] {
            if !reached[p as usize] {
                reached[p as usize] = true;
                queue.push_back(p);
            }
        }
    }

    let forks = system.combined().forks;
    let orphans = trace
        .events
        .iter()
        .filter(|e| !e.is_stimulus() && !reached[e.seq as usize])
        .map(|e| {
            let wire = trace.wire_name(e.wire).to_string();
            let kind = if forks.contains(&wire) {
                OrphanKind::Wire
            } else {
                OrphanKind::Gate
            };
            let w = win[e.seq as usize];
            Orphan {
                event: e.seq,
                wire,
                time: e.time,
                rising: e.value,
                phase: e.phase,
                transaction: if w == usize::MAX { usize::MAX } else { windows[w].transaction },
                kind,
            }
        })
        .collect();
    OrphanReport { orphans }
}
