//! Wires, gates, dual-rail ports and the netlist graph.
//!
//! A netlist is a flat list of gates over named wires. Primary inputs and
//! outputs are declared as dual-rail pairs; rail wires are conventionally
//! named `<port>.1` and `<port>.0`. Internal wires and acknowledge signals
//! may be single-rail.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type WireId = String;

/// One bit of dual-rail data, or the spacer that separates codewords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symbol {
    Zero,
    One,
    Spacer,
}

impl Symbol {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    /// The carried bit, `None` for the spacer.
    pub fn bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            Symbol::Spacer => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Zero => f.write_str("0"),
            Symbol::One => f.write_str("1"),
            Symbol::Spacer => f.write_str("spacer"),
        }
    }
}

/// State of a dual-rail pair `(d1, d0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DualRail {
    pub d1: bool,
    pub d0: bool,
}

impl DualRail {
    pub const SPACER: DualRail = DualRail {
        d1: false,
        d0: false,
    };

    pub fn new(d1: bool, d0: bool) -> Self {
        Self { d1, d0 }
    }

    pub fn is_valid(self) -> bool {
        self.d1 != self.d0
    }

    pub fn is_spacer(self) -> bool {
        !self.d1 && !self.d0
    }
}

pub fn dual_rail_encode(symbol: Symbol) -> DualRail {
    match symbol {
        Symbol::One => DualRail::new(true, false),
        Symbol::Zero => DualRail::new(false, true),
        Symbol::Spacer => DualRail::SPACER,
    }
}

pub fn dual_rail_decode(pair: DualRail) -> Result<Symbol> {
    match (pair.d1, pair.d0) {
        (true, false) => Ok(Symbol::One),
        (false, true) => Ok(Symbol::Zero),
        (false, false) => Ok(Symbol::Spacer),
        (true, true) => Err(Error::IllegalCodeword(
            "both rails of the pair are high".into(),
        )),
    }
}

/// Rail wire name for a dual-rail port: `rail_name("a0", true) == "a0.1"`.
pub fn rail_name(port: &str, rail: bool) -> WireId {
    format!("{port}.{}", u8::from(rail))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And2,
    And3,
    Or2,
    Or3,
    Or4,
    Or6,
    Ao21,
    Ao22,
    Ao222,
    Ce2,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::And2,
        GateKind::And3,
        GateKind::Or2,
        GateKind::Or3,
        GateKind::Or4,
        GateKind::Or6,
        GateKind::Ao21,
        GateKind::Ao22,
        GateKind::Ao222,
        GateKind::Ce2,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::And2 | GateKind::Or2 | GateKind::Ce2 => 2,
            GateKind::And3 | GateKind::Or3 | GateKind::Ao21 => 3,
            GateKind::Or4 | GateKind::Ao22 => 4,
            GateKind::Or6 | GateKind::Ao222 => 6,
        }
    }

    /// Cells that may legitimately sit on a feedback loop.
    pub fn holds_state(self) -> bool {
        matches!(self, GateKind::Ce2 | GateKind::Ao222)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And2 => "AND2",
            GateKind::And3 => "AND3",
            GateKind::Or2 => "OR2",
            GateKind::Or3 => "OR3",
            GateKind::Or4 => "OR4",
            GateKind::Or6 => "OR6",
            GateKind::Ao21 => "AO21",
            GateKind::Ao22 => "AO22",
            GateKind::Ao222 => "AO222",
            GateKind::Ce2 => "CE2",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Unknown {
                what: "gate kind",
                name: s.trim().to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
    #[serde(rename = "in")]
    pub inputs: Vec<WireId>,
    #[serde(rename = "out")]
    pub output: WireId,
}

impl Gate {
    pub fn new(id: impl Into<String>, kind: GateKind, inputs: &[&str], output: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind,
            inputs: inputs.iter().map(|w| w.to_string()).collect(),
            output: output.into(),
        }
    }
}

/// A named dual-rail port.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Port {
    pub name: String,
    pub d1: WireId,
    pub d0: WireId,
}

impl Port {
    /// Port whose rails follow the `<name>.1` / `<name>.0` convention.
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            d1: rail_name(name, true),
            d0: rail_name(name, false),
        }
    }

    pub fn rail(&self, rail: bool) -> &str {
        if rail {
            &self.d1
        } else {
            &self.d0
        }
    }

    pub fn rails(&self) -> [&str; 2] {
        [&self.d1, &self.d0]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Netlist {
    pub gates: Vec<Gate>,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    #[serde(default)]
    pub forks: BTreeSet<WireId>,
}

impl Netlist {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn gate(&self, id: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.id == id)
    }

    pub fn input(&self, name: &str) -> Option<&Port> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&Port> {
        self.outputs.iter().find(|p| p.name == name)
    }

    /// Every wire mentioned by a gate or a port.
    pub fn wires(&self) -> BTreeSet<&str> {
        let mut wires = BTreeSet::new();
        for g in &self.gates {
            wires.extend(g.inputs.iter().map(String::as_str));
            wires.insert(g.output.as_str());
        }
        for p in self.inputs.iter().chain(&self.outputs) {
            wires.extend(p.rails());
        }
        wires
    }

    pub fn input_rails(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().flat_map(|p| p.rails())
    }

    /// Gate driving each wire. With multiple drivers the last one wins;
    /// `validate_netlist` reports that case.
    pub fn drivers(&self) -> HashMap<&str, &Gate> {
        self.gates.iter().map(|g| (g.output.as_str(), g)).collect()
    }

    /// Gates reading each wire.
    pub fn readers(&self) -> HashMap<&str, Vec<&Gate>> {
        let mut map: HashMap<&str, Vec<&Gate>> = HashMap::new();
        for g in &self.gates {
            for w in &g.inputs {
                let entry = map.entry(w.as_str()).or_default();
                if !entry.iter().any(|h| h.id == g.id) {
                    entry.push(g);
                }
            }
        }
        map
    }

    pub fn kind_counts(&self) -> BTreeMap<GateKind, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.kind).or_insert(0) += 1;
        }
        counts
    }

    /// Marks every wire with more than one reader as an isochronic fork.
    pub fn annotate_forks(&mut self) {
        let forks: BTreeSet<WireId> = self
            .readers()
            .into_iter()
            .filter(|(_, r)| r.len() > 1)
            .map(|(w, _)| w.to_string())
            .collect();
        self.forks = forks;
    }
}

/// One broken netlist invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Arity {
        gate: String,
        gate_kind: GateKind,
        expected: usize,
        got: usize,
    },
    DuplicateGateId {
        gate: String,
    },
    Dangling {
        wire: WireId,
        reader: String,
    },
    UndrivenOutput {
        wire: WireId,
    },
    MultipleDrivers {
        wire: WireId,
        gates: Vec<String>,
    },
    DrivenInput {
        wire: WireId,
        gate: String,
    },
    CombinationalCycle {
        gates: Vec<String>,
    },
    UnpairedRail {
        wire: WireId,
        detail: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Arity {
                gate,
                gate_kind,
                expected,
                got,
            } => write!(f, "gate {gate}: {gate_kind} takes {expected} inputs, has {got}"),
            Violation::DuplicateGateId { gate } => write!(f, "gate id {gate} used more than once"),
            Violation::Dangling { wire, reader } => {
                write!(f, "wire {wire} read by {reader} has no driver")
            }
            Violation::UndrivenOutput { wire } => write!(f, "output rail {wire} has no driver"),
            Violation::MultipleDrivers { wire, gates } => {
                write!(f, "wire {wire} driven by {}", gates.join(", "))
            }
            Violation::DrivenInput { wire, gate } => {
                write!(f, "primary input rail {wire} is also driven by {gate}")
            }
            Violation::CombinationalCycle { gates } => {
                write!(f, "combinational cycle through {}", gates.join(", "))
            }
            Violation::UnpairedRail { wire, detail } => write!(f, "rail {wire}: {detail}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_netlist(netlist: &Netlist) -> ValidationReport {
    let mut violations = Vec::new();

    let mut ids = BTreeSet::new();
    for g in &netlist.gates {
        if !ids.insert(g.id.as_str()) {
            violations.push(Violation::DuplicateGateId { gate: g.id.clone() });
        }
        if g.inputs.len() != g.kind.arity() {
            violations.push(Violation::Arity {
                gate: g.id.clone(),
                gate_kind: g.kind,
                expected: g.kind.arity(),
                got: g.inputs.len(),
            });
        }
    }

    let mut drivers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for g in &netlist.gates {
        drivers.entry(g.output.as_str()).or_default().push(g.id.as_str());
    }
    for (wire, gates) in &drivers {
        if gates.len() > 1 {
            violations.push(Violation::MultipleDrivers {
                wire: wire.to_string(),
                gates: gates.iter().map(|g| g.to_string()).collect(),
            });
        }
    }

    // Each primary I/O rail belongs to exactly one pair.
    let mut rail_owner: BTreeMap<&str, &str> = BTreeMap::new();
    for p in netlist.inputs.iter().chain(&netlist.outputs) {
        if p.d1 == p.d0 {
            violations.push(Violation::UnpairedRail {
                wire: p.d1.clone(),
                detail: format!("port {} uses the same wire for both rails", p.name),
            });
            continue;
        }
        for rail in p.rails() {
            if let Some(other) = rail_owner.insert(rail, &p.name) {
                violations.push(Violation::UnpairedRail {
                    wire: rail.to_string(),
                    detail: format!("belongs to both {other} and {}", p.name),
                });
            }
        }
    }

    let input_rails: BTreeSet<&str> = netlist.input_rails().collect();
    for rail in &input_rails {
        if let Some(gates) = drivers.get(rail) {
            violations.push(Violation::DrivenInput {
                wire: rail.to_string(),
                gate: gates[0].to_string(),
            });
        }
    }
    for g in &netlist.gates {
        for w in &g.inputs {
            if !input_rails.contains(w.as_str()) && !drivers.contains_key(w.as_str()) {
                violations.push(Violation::Dangling {
                    wire: w.clone(),
                    reader: g.id.clone(),
                });
            }
        }
    }
    for p in &netlist.outputs {
        for rail in p.rails() {
            if !drivers.contains_key(rail) && !input_rails.contains(rail) {
                violations.push(Violation::UndrivenOutput {
                    wire: rail.to_string(),
                });
            }
        }
    }

    if let Some(cycle) = combinational_cycle(netlist) {
        violations.push(Violation::CombinationalCycle { gates: cycle });
    }

    ValidationReport { violations }
}

/// Gates left over after Kahn's algorithm on the graph restricted to
/// stateless gates, or `None` if that graph is acyclic.
fn combinational_cycle(netlist: &Netlist) -> Option<Vec<String>> {
    let comb: Vec<&Gate> = netlist
        .gates
        .iter()
        .filter(|g| !g.kind.holds_state())
        .collect();
    let index: HashMap<&str, usize> = comb
        .iter()
        .enumerate()
        .map(|(i, g)| (g.output.as_str(), i))
        .collect();
    let mut indegree = vec![0usize; comb.len()];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); comb.len()];
    for (i, g) in comb.iter().enumerate() {
        for w in &g.inputs {
            if let Some(&j) = index.get(w.as_str()) {
                succ[j].push(i);
                indegree[i] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..comb.len()).filter(|&i| indegree[i] == 0).collect();
    let mut done = 0;
    while let Some(i) = ready.pop() {
        done += 1;
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    if done == comb.len() {
        None
    } else {
        let mut stuck: Vec<String> = (0..comb.len())
            .filter(|&i| indegree[i] > 0)
            .map(|i| comb[i].id.clone())
            .collect();
        stuck.sort();
        Some(stuck)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Netlist {
        let mut n = Netlist {
            gates: vec![
                Gate::new("g1", GateKind::And2, &["x.1", "y.1"], "z.1"),
                Gate::new("g0", GateKind::Or2, &["x.0", "y.0"], "z.0"),
            ],
            inputs: vec![Port::named("x"), Port::named("y")],
            outputs: vec![Port::named("z")],
            forks: BTreeSet::new(),
        };
        n.annotate_forks();
        n
    }

    #[test]
    fn encode_matches_rail_convention() {
        assert_eq!(dual_rail_encode(Symbol::One), DualRail::new(true, false));
        assert_eq!(dual_rail_encode(Symbol::Zero), DualRail::new(false, true));
        assert_eq!(dual_rail_encode(Symbol::Spacer), DualRail::new(false, false));
    }

    #[test]
    fn decode_rejects_both_rails_high() {
        assert_eq!(dual_rail_decode(DualRail::new(true, false)), Ok(Symbol::One));
        assert_eq!(dual_rail_decode(DualRail::SPACER), Ok(Symbol::Spacer));
        assert!(matches!(
            dual_rail_decode(DualRail::new(true, true)),
            Err(Error::IllegalCodeword(_))
        ));
    }

    #[test]
    fn decode_inverts_encode() {
        for s in [Symbol::Zero, Symbol::One, Symbol::Spacer] {
            assert_eq!(dual_rail_decode(dual_rail_encode(s)).unwrap(), s);
        }
    }

    #[test]
    fn clean_netlist_validates() {
        assert!(validate_netlist(&tiny()).is_clean());
    }

    #[test]
    fn arity_violation_reported() {
        let mut n = tiny();
        n.gates.push(Gate::new("bad", GateKind::Ao22, &["x.1", "y.1", "x.0"], "w"));
        let report = validate_netlist(&n);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::Arity { gate, expected: 4, got: 3, .. } if gate == "bad"
        )));
    }

    #[test]
    fn multiple_drivers_reported() {
        let mut n = tiny();
        n.gates.push(Gate::new("dup", GateKind::Or2, &["x.1", "y.1"], "z.1"));
        let report = validate_netlist(&n);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MultipleDrivers { wire, .. } if wire == "z.1")));
    }

    #[test]
    fn dangling_and_unpaired_reported() {
        let mut n = tiny();
        n.gates.push(Gate::new("g2", GateKind::Or2, &["x.1", "nowhere"], "w"));
        n.outputs.push(Port {
            name: "zz".into(),
            d1: "z.1".into(),
            d0: "w".into(),
        });
        let report = validate_netlist(&n);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Dangling { wire, .. } if wire == "nowhere")));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::UnpairedRail { wire, .. } if wire == "z.1")));
    }

    #[test]
    fn combinational_cycle_reported_but_c_element_loops_allowed() {
        let mut n = tiny();
        n.gates.push(Gate::new("fb", GateKind::Ao222, &["x.1", "y.1", "x.1", "q", "y.1", "q"], "q"));
        assert!(validate_netlist(&n).is_clean());

        n.gates.push(Gate::new("l1", GateKind::Or2, &["x.1", "l2o"], "l1o"));
        n.gates.push(Gate::new("l2", GateKind::Or2, &["y.1", "l1o"], "l2o"));
        let report = validate_netlist(&n);
        assert_eq!(
            report.violations,
            vec![Violation::CombinationalCycle {
                gates: vec!["l1".into(), "l2".into()]
            }]
        );
    }

    #[test]
    fn validation_is_idempotent() {
        let mut n = tiny();
        n.gates.push(Gate::new("dup", GateKind::Or2, &["x.1"], "z.1"));
        let before = n.clone();
        assert_eq!(validate_netlist(&n), validate_netlist(&n));
        assert_eq!(n, before);
    }

    #[test]
    fn json_rejects_unknown_keys_and_kinds() {
        let good = tiny().to_json();
        assert_eq!(Netlist::from_json(&good).unwrap(), tiny());
        let extra = good.replacen('{', "{\"colour\": 1,", 1);
        assert!(Netlist::from_json(&extra).is_err());
        let bad_kind = good.replace("\"AND2\"", "\"NAND9\"");
        assert!(matches!(Netlist::from_json(&bad_kind), Err(Error::Parse { .. })));
    }

    #[test]
    fn fork_annotation_marks_fanout() {
        let mut n = tiny();
        n.gates.push(Gate::new("g3", GateKind::Or2, &["x.1", "x.0"], "w"));
        n.annotate_forks();
        assert!(n.forks.contains("x.1"));
        assert!(!n.forks.contains("y.1"));
    }
}
