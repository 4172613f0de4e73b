//! Product-term algebra over dual-rail literals, and structural checks that
//! read sum-of-products directly off a netlist.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::netlist::{GateKind, Netlist};
use crate::sim::Trace;

/// One rail of a signal: `A1` is rail 1 of `A`. A plain (single-rail)
/// literal is written as rail 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Literal {
    pub signal: String,
    pub rail: bool,
}

impl Literal {
    pub fn new(signal: &str, rail: bool) -> Self {
        Self {
            signal: signal.to_string(),
            rail,
        }
    }

    /// `"a.1"` -> `A1`. Wires without a rail suffix become plain literals.
    pub fn from_wire(wire: &str) -> Self {
        match wire.rsplit_once('.') {
            Some((port, "1")) => Literal::new(&port.to_ascii_uppercase(), true),
            Some((port, "0")) => Literal::new(&port.to_ascii_uppercase(), false),
            _ => Literal::new(wire, true),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.signal, u8::from(self.rail))
    }
}

/// A conjunction of literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cube(pub BTreeSet<Literal>);

impl Cube {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Self {
        Cube(lits.into_iter().collect())
    }

    /// Dual-rail shorthand: `Cube::rails(&[("A", false), ("B", true)])` is `A0·B1`.
    pub fn rails(lits: &[(&str, bool)]) -> Self {
        Cube::new(lits.iter().map(|&(s, r)| Literal::new(s, r)))
    }

    /// Plain literals, all on rail 1.
    pub fn plain(signals: &[&str]) -> Self {
        Cube::new(signals.iter().map(|s| Literal::new(s, true)))
    }

    /// Two cubes are disjoint when they need opposite rails of one signal.
    pub fn is_disjoint(&self, other: &Cube) -> bool {
        self.0
            .iter()
            .any(|l| other.0.iter().any(|m| l.signal == m.signal && l.rail != m.rail))
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// True iff the conjunction of every pair of products is null.
pub fn check_disjoint_products(products: &[Cube]) -> bool {
    products
        .iter()
        .enumerate()
        .all(|(i, p)| products[i + 1..].iter().all(|q| p.is_disjoint(q)))
}

/// Dual-rail full-adder output equations as (output rail, products).
pub fn full_adder_equations() -> Vec<(&'static str, Vec<Cube>)> {
    let c = |a, b, cin| Cube::rails(&[("A", a), ("B", b), ("CIN", cin)]);
    vec![
        (
            "SUM1",
            vec![c(false, false, true), c(false, true, false), c(true, false, false), c(true, true, true)],
        ),
        (
            "SUM0",
            vec![c(false, false, false), c(false, true, true), c(true, false, true), c(true, true, false)],
        ),
        (
            "COUT1",
            vec![c(false, true, true), c(true, false, true), Cube::rails(&[("A", true), ("B", true)])],
        ),
        (
            "COUT0",
            vec![c(false, true, false), c(true, false, false), Cube::rails(&[("A", false), ("B", false)])],
        ),
    ]
}

fn is_and(kind: GateKind) -> bool {
    matches!(kind, GateKind::And2 | GateKind::And3)
}

fn is_or(kind: GateKind) -> bool {
    matches!(kind, GateKind::Or2 | GateKind::Or3 | GateKind::Or4 | GateKind::Or6)
}

/// OR gates whose every input is an AND gate output, i.e. the second level
/// of a two-level sum of products.
pub fn product_collecting_ors(netlist: &Netlist) -> Vec<&crate::netlist::Gate> {
    let drivers = netlist.drivers();
    netlist
        .gates
        .iter()
        .filter(|g| is_or(g.kind))
        .filter(|g| {
            g.inputs
                .iter()
                .all(|w| drivers.get(w.as_str()).is_some_and(|d| is_and(d.kind)))
        })
        .collect()
}

/// The products an OR gate collects, read structurally: each AND input
/// contributes its input literals.
pub fn sop_of(netlist: &Netlist, or_output: &str) -> Option<Vec<Cube>> {
    let drivers = netlist.drivers();
    let or = drivers.get(or_output)?;
    if !is_or(or.kind) {
        return None;
    }
    Some(
        or.inputs
            .iter()
            .map(|w| match drivers.get(w.as_str()) {
                Some(d) if is_and(d.kind) => Cube::new(d.inputs.iter().map(|x| Literal::from_wire(x))),
                _ => Cube::new([Literal::from_wire(w)]),
            })
            .collect(),
    )
}

/// A product-collecting OR gate that saw two high inputs at once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverViolation {
    pub gate: String,
    pub time: u64,
    pub high_inputs: Vec<String>,
}

/// Replays `trace` and checks that no product-collecting OR gate of
/// `netlist` ever has more than one high input.
pub fn check_monotonic_cover(netlist: &Netlist, trace: &Trace) -> Vec<CoverViolation> {
    let ors = product_collecting_ors(netlist);
    let idx: HashMap<&str, u32> = trace
        .wires
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as u32))
        .collect();
    let mut watch: HashMap<u32, Vec<usize>> = HashMap::new();
    let inputs: Vec<Vec<u32>> = ors
        .iter()
        .enumerate()
        .map(|(k, g)| {
            g.inputs
                .iter()
                .filter_map(|w| idx.get(w.as_str()).copied())
                .inspect(|&w| watch.entry(w).or_default().push(k))
                .collect()
        })
        .collect();
    let mut values = vec![false; trace.wires.len()];
    let mut out = Vec::new();
    for e in &trace.events {
        values[e.wire as usize] = e.value;
        if !e.value {
            continue;
        }
        for &k in watch.get(&e.wire).map_or(&[][..], Vec::as_slice) {
            let high: Vec<String> = inputs[k]
                .iter()
                .filter(|&&w| values[w as usize])
                .map(|&w| trace.wire_name(w).to_string())
                .collect();
            if high.len() > 1 {
                out.push(CoverViolation {
                    gate: ors[k].id.clone(),
                    time: e.time,
                    high_inputs: high,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equation_products_are_disjoint() {
        for (name, products) in full_adder_equations() {
            assert!(check_disjoint_products(&products), "{name}");
        }
    }

    #[test]
    fn overlapping_products_are_detected() {
        assert!(!check_disjoint_products(&[Cube::plain(&["A", "B"]), Cube::plain(&["A", "C"])]));
        assert!(check_disjoint_products(&[Cube::plain(&["A", "B"])]));
        assert!(check_disjoint_products(&[]));
    }

    #[test]
    fn literal_from_wire() {
        assert_eq!(Literal::from_wire("cin.0").to_string(), "CIN0");
        assert_eq!(Literal::from_wire("a.1"), Literal::new("A", true));
        assert_eq!(Literal::from_wire("x"), Literal::new("x", true));
    }

    #[test]
    fn disjointness_matches_brute_force() {
        // Two cubes over three dual-rail signals are disjoint iff no valid
        // codeword satisfies both.
        let all: Vec<Cube> = (0..27u32)
            .map(|mut code| {
                let mut lits = Vec::new();
                for s in ["A", "B", "C"] {
                    match code % 3 {
                        1 => lits.push(Literal::new(s, true)),
                        2 => lits.push(Literal::new(s, false)),
                        _ => {}
                    }
                    code /= 3;
                }
                Cube::new(lits)
            })
            .collect();
        let sat = |c: &Cube, cw: u32| {
            c.0.iter().all(|l| {
                let bit = match l.signal.as_str() {
                    "A" => cw & 1,
                    "B" => cw >> 1 & 1,
                    _ => cw >> 2 & 1,
                };
                (bit == 1) == l.rail
            })
        };
        for p in &all {
            for q in &all {
                let overlap = (0..8).any(|cw| sat(p, cw) && sat(q, cw));
                assert_eq!(p.is_disjoint(q), !overlap, "{p} {q}");
            }
        }
    }
}
