//! Exhaustive input-output indication classification.

use std::fmt;

use serde::Serialize;

use crate::cells::DelayModel;
use crate::error::{Error, Result};
use crate::netlist::Netlist;
use crate::sim::{RtPolicy, Simulator};

/// Largest number of dual-rail inputs accepted for exhaustive enumeration.
pub const MAX_CLASSIFY_INPUTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Indication {
    Strong,
    Weak,
    Early,
}

impl fmt::Display for Indication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Indication::Strong => "STRONG",
            Indication::Weak => "WEAK",
            Indication::Early => "EARLY",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndicationClass {
    pub set_phase: Indication,
    pub reset_phase: Indication,
    pub overall: Indication,
}

impl IndicationClass {
    pub fn from_phases(set_phase: Indication, reset_phase: Indication) -> Self {
        let overall = if set_phase == Indication::Early || reset_phase == Indication::Early {
            Indication::Early
        } else if set_phase == Indication::Strong && reset_phase == Indication::Strong {
            Indication::Strong
        } else {
            Indication::Weak
        };
        Self {
            set_phase,
            reset_phase,
            overall,
        }
    }
}

#[derive(Default)]
struct PhaseSeen {
    moved: bool,
    completed: bool,
}

impl PhaseSeen {
    fn class(&self) -> Indication {
        if self.completed {
            Indication::Early
        } else if self.moved {
            Indication::Weak
        } else {
            Indication::Strong
        }
    }
}

pub fn classify_indication(netlist: &Netlist, delays: &DelayModel) -> Result<IndicationClass> {
    let order: Vec<usize> = (0..netlist.inputs.len()).collect();
    classify_indication_ordered(netlist, delays, &order)
}

/// Classification with subset bit `i` standing for input `order[i]`. The
/// result does not depend on `order`; it exists so that can be tested.
pub fn classify_indication_ordered(netlist: &Netlist, delays: &DelayModel, order: &[usize]) -> Result<IndicationClass> {
    let k = netlist.inputs.len();
    if k > MAX_CLASSIFY_INPUTS {
        return Err(Error::TooManyInputs {
            got: k,
            max: MAX_CLASSIFY_INPUTS,
        });
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..k).collect::<Vec<_>>() {
        return Err(Error::Domain(format!("input order must be a permutation of 0..{k}")));
    }
    let mut base = Simulator::new(netlist, delays, &RtPolicy::off())?;
    base.clear_trace();
    let outs: Vec<(u32, u32)> = netlist
        .outputs
        .iter()
        .map(|p| Ok((base.wire(&p.d1)?, base.wire(&p.d0)?)))
        .collect::<Result<_>>()?;

    let rail_for = |i: usize, cw: u32| -> &str {
        let p = &netlist.inputs[order[i]];
        p.rail(cw >> i & 1 == 1)
    };
    let mut set = PhaseSeen::default();
    let mut reset = PhaseSeen::default();
    let full = (1u32 << k) - 1;
    for cw in 0..=full {
        let mut valid = base.clone();
        for i in 0..k {
            valid.drive(rail_for(i, cw), true)?;
        }
        valid.settle()?;
        valid.clear_trace();
        let valid_state: Vec<bool> = outs
            .iter()
            .flat_map(|&(d1, d0)| [valid.value_at(d1), valid.value_at(d0)])
            .collect();

        for s in 1..full {
            let mut sim = base.clone();
            for i in (0..k).filter(|i| s >> i & 1 == 1) {
                sim.drive(rail_for(i, cw), true)?;
            }
            sim.settle()?;
            set.moved |= outs.iter().any(|&(d1, d0)| sim.value_at(d1) || sim.value_at(d0));
            set.completed |= outs.iter().all(|&(d1, d0)| sim.value_at(d1) || sim.value_at(d0));

            let mut sim = valid.clone();
            for i in (0..k).filter(|i| s >> i & 1 == 1) {
                sim.drive(rail_for(i, cw), false)?;
            }
            sim.settle()?;
            let now: Vec<bool> = outs
                .iter()
                .flat_map(|&(d1, d0)| [sim.value_at(d1), sim.value_at(d0)])
                .collect();
            reset.moved |= now != valid_state;
            reset.completed |= now.iter().all(|&v| !v);
        }
    }
    Ok(IndicationClass::from_phases(set.class(), reset.class()))
}
