//! Transaction windows and the carry-before-sum reset check.

use serde::Serialize;

use super::{EventId, Trace};
use crate::adders::AdderSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowHalf {
    Valid,
    Rtz,
}

/// A contiguous slice `[start_seq, end_seq)` of the trace belonging to one
/// half of one transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub transaction: usize,
    pub half: WindowHalf,
    pub start_seq: EventId,
    pub end_seq: EventId,
    pub start_time: u64,
}

/// Valid half: from valid applied to spacer applied. Return-to-zero half:
/// from spacer applied to the next valid (or the end of the trace).
pub fn transaction_windows(trace: &Trace) -> Vec<Window> {
    let m = &trace.transactions;
    let mut out = Vec::with_capacity(2 * m.len());
    for (i, mk) in m.iter().enumerate() {
        out.push(Window {
            transaction: i,
            half: WindowHalf::Valid,
            start_seq: mk.valid_seq,
            end_seq: mk.spacer_seq,
            start_time: mk.valid_applied,
        });
        out.push(Window {
            transaction: i,
            half: WindowHalf::Rtz,
            start_seq: mk.spacer_seq,
            end_seq: m.get(i + 1).map_or(trace.events.len() as EventId, |n| n.valid_seq),
            start_time: mk.spacer_applied,
        });
    }
    out
}

/// A stage whose sum returned to spacer while its carry-in was still valid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RtViolation {
    pub transaction: usize,
    pub stage: usize,
    pub sum_fall_ps: u64,
    /// `None` when the carry-in did not reset within the window at all.
    pub carry_fall_ps: Option<u64>,
}

/// In every return-to-zero window, each stage's high carry-in rail must fall
/// no later than its high sum rail.
pub fn check_relative_timing(trace: &Trace, adder: &AdderSystem) -> Vec<RtViolation> {
    let idx = |w: &str| trace.wire_index(w).map_or(u32::MAX, |i| i);
    let stages: Vec<([u32; 2], [u32; 2])> = (0..adder.width)
        .map(|q| {
            let s = &adder.sums[q];
            let c = &adder.carries[q];
            ([idx(&s.d1), idx(&s.d0)], [idx(&c.d1), idx(&c.d0)])
        })
        .collect();

    let mut values = vec![false; trace.wires.len()];
    let mut pos = 0usize;
    let mut out = Vec::new();
    for w in transaction_windows(trace) {
        for e in &trace.events[pos..w.start_seq as usize] {
            values[e.wire as usize] = e.value;
        }
        pos = w.start_seq as usize;
        if w.half != WindowHalf::Rtz {
            continue;
        }
        let high = |pair: [u32; 2]| pair.into_iter().find(|&r| r != u32::MAX && values[r as usize]);
        let watched: Vec<(usize, Option<u32>, Option<u32>)> = stages
            .iter()
            .enumerate()
            .map(|(q, &(s, c))| (q, high(s), high(c)))
            .collect();
        let mut first_fall = vec![None::<u64>; trace.wires.len()];
        for e in &trace.events[w.start_seq as usize..w.end_seq as usize] {
            if !e.value && first_fall[e.wire as usize].is_none() {
                first_fall[e.wire as usize] = Some(e.time);
            }
        }
        for (q, sum_rail, carry_rail) in watched {
            let (Some(s), Some(c)) = (sum_rail, carry_rail) else {
                continue;
            };
            let Some(sum_fall) = first_fall[s as usize] else {
                continue;
            };
            let carry_fall = first_fall[c as usize];
            if carry_fall.map_or(true, |cf| sum_fall < cf) {
                out.push(RtViolation {
                    transaction: w.transaction,
                    stage: q,
                    sum_fall_ps: sum_fall,
                    carry_fall_ps: carry_fall,
                });
            }
        }
    }
    out
}
