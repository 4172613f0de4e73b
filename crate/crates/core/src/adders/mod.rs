//! Full-adder designs and the structures built from them.
//!
//! Each design implements [`FullAdderDesign`] and is looked up by name in an
//! [`AdderRegistry`]. The ripple-carry adder, completion detector and
//! handshake wrapper in [`rca`] work with any registered design.

mod optimized;
pub mod rca;
mod seitz;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::netlist::{Gate, GateKind, Netlist, Port};

pub use optimized::{AreaOptimizedEarlyOutput, LatencyOptimizedEarlyOutput};
pub use rca::{build_completion_detector, build_handshake_system, build_rca, AdderSystem, SystemModel};
pub use seitz::{SeitzEarlyOutput, SeitzWeak};

/// The four built-in designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FullAdderKind {
    SeitzWeak,
    SeitzEarly,
    AoptEo,
    LoptEo,
}

impl FullAdderKind {
    pub const ALL: [FullAdderKind; 4] = [
        FullAdderKind::SeitzWeak,
        FullAdderKind::SeitzEarly,
        FullAdderKind::AoptEo,
        FullAdderKind::LoptEo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FullAdderKind::SeitzWeak => "seitz-weak",
            FullAdderKind::SeitzEarly => "seitz-early",
            FullAdderKind::AoptEo => "aopt-eo",
            FullAdderKind::LoptEo => "lopt-eo",
        }
    }

    pub fn design(self) -> Arc<dyn FullAdderDesign> {
        registry().get(self.name()).expect("built-in design registered")
    }
}

impl fmt::Display for FullAdderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FullAdderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FullAdderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "full adder",
                name: s.to_string(),
            })
    }
}

/// Dual-rail ports of one full-adder stage.
#[derive(Debug, Clone)]
pub struct StagePorts {
    pub a: Port,
    pub b: Port,
    pub cin: Port,
    pub sum: Port,
    pub cout: Port,
}

impl StagePorts {
    /// Ports of a stand-alone adder: `a`, `b`, `cin` -> `sum`, `cout`.
    pub fn standalone() -> Self {
        Self {
            a: Port::named("a"),
            b: Port::named("b"),
            cin: Port::named("cin"),
            sum: Port::named("sum"),
            cout: Port::named("cout"),
        }
    }
}

/// A dual-rail full adder that can stamp itself into a netlist.
pub trait FullAdderDesign: Send + Sync {
    /// Registry key, e.g. `"aopt-eo"`.
    fn name(&self) -> &str;

    fn description(&self) -> &str;

    /// Whether a cascade of this design needs the carry-before-sum reset
    /// ordering between neighbouring stages.
    fn needs_relative_timing(&self) -> bool;

    /// Appends the gates of one stage. Internal wires and gate ids are
    /// prefixed with `prefix`.
    fn emit(&self, out: &mut GateSink, prefix: &str, ports: &StagePorts);

    fn build(&self) -> Netlist {
        let ports = StagePorts::standalone();
        let mut sink = GateSink::default();
        self.emit(&mut sink, "", &ports);
        let mut netlist = Netlist {
            gates: sink.into_gates(),
            inputs: vec![ports.a, ports.b, ports.cin],
            outputs: vec![ports.sum, ports.cout],
            forks: Default::default(),
        };
        netlist.annotate_forks();
        netlist
    }
}

/// Collects gates while a design is emitted.
#[derive(Debug, Default)]
pub struct GateSink {
    gates: Vec<Gate>,
}

impl GateSink {
    /// Adds `kind(inputs) -> output` with id `prefix + local` and returns the output wire.
    pub fn gate(&mut self, prefix: &str, local: &str, kind: GateKind, inputs: &[&str], output: &str) -> String {
        self.gates.push(Gate::new(format!("{prefix}{local}"), kind, inputs, output));
        output.to_string()
    }

    /// Like [`GateSink::gate`] with the output wire named after the gate.
    pub fn node(&mut self, prefix: &str, local: &str, kind: GateKind, inputs: &[&str]) -> String {
        let out = format!("{prefix}{local}");
        self.gate(prefix, local, kind, inputs, &out)
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }
}

/// Name-keyed collection of full-adder designs.
#[derive(Clone, Default)]
pub struct AdderRegistry {
    designs: BTreeMap<String, Arc<dyn FullAdderDesign>>,
}

impl AdderRegistry {
    pub fn with_builtins() -> Self {
        let mut reg = Self::default();
        reg.register(Arc::new(SeitzWeak)).unwrap();
        reg.register(Arc::new(SeitzEarlyOutput)).unwrap();
        reg.register(Arc::new(AreaOptimizedEarlyOutput)).unwrap();
        reg.register(Arc::new(LatencyOptimizedEarlyOutput)).unwrap();
        reg
    }

    pub fn register(&mut self, design: Arc<dyn FullAdderDesign>) -> Result<()> {
        let name = design.name().to_string();
        if self.designs.contains_key(&name) {
            return Err(Error::Domain(format!("design `{name}` is already registered")));
        }
        self.designs.insert(name, design);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn FullAdderDesign>> {
        self.designs.get(name).cloned().ok_or_else(|| Error::Unknown {
            what: "full adder",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.designs.keys().map(String::as_str)
    }
}

impl fmt::Debug for AdderRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.designs.keys()).finish()
    }
}

/// Process-wide registry holding the built-in designs.
pub fn registry() -> &'static AdderRegistry {
    static REGISTRY: OnceLock<AdderRegistry> = OnceLock::new();
    REGISTRY.get_or_init(AdderRegistry::with_builtins)
}

pub fn build_full_adder(kind: FullAdderKind) -> Netlist {
    kind.design().build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::validate_netlist;
    use GateKind::*;

    fn counts(kind: FullAdderKind) -> Vec<(GateKind, usize)> {
        build_full_adder(kind).kind_counts().into_iter().collect()
    }

    #[test]
    fn builtins_are_registered_by_name() {
        let names: Vec<&str> = registry().names().collect();
        assert_eq!(names, ["aopt-eo", "lopt-eo", "seitz-early", "seitz-weak"]);
        for kind in FullAdderKind::ALL {
            assert_eq!(kind.design().name(), kind.name());
            assert_eq!(kind.name().parse::<FullAdderKind>().unwrap(), kind);
        }
        assert!(registry().get("ripple-9000").is_err());
    }

    #[test]
    fn duplicate_registration_rejected() {
        let mut reg = AdderRegistry::with_builtins();
        assert!(reg.register(Arc::new(SeitzWeak)).is_err());
    }

    #[test]
    fn every_design_validates() {
        for kind in FullAdderKind::ALL {
            let report = validate_netlist(&build_full_adder(kind));
            assert!(report.is_clean(), "{kind}: {:?}", report.violations);
        }
    }

    #[test]
    fn area_optimized_inventory() {
        assert_eq!(counts(FullAdderKind::AoptEo), vec![(Or2, 1), (Ao22, 6), (Ce2, 2)]);
    }

    #[test]
    fn latency_optimized_inventory() {
        assert_eq!(
            counts(FullAdderKind::LoptEo),
            vec![(And2, 2), (Or2, 2), (Ao21, 2), (Ao22, 3), (Ce2, 2)]
        );
    }

    #[test]
    fn seitz_inventories() {
        assert_eq!(
            counts(FullAdderKind::SeitzEarly),
            vec![(And2, 2), (And3, 8), (Or3, 2), (Or4, 2)]
        );
        assert_eq!(
            counts(FullAdderKind::SeitzWeak),
            vec![(And2, 2), (And3, 8), (Or3, 2), (Or4, 2), (Or6, 1), (Ce2, 2)]
        );
    }

    #[test]
    fn primary_inputs_are_forks() {
        let n = build_full_adder(FullAdderKind::AoptEo);
        for rail in ["a.1", "a.0", "b.1", "b.0", "cin.1", "cin.0", "int1", "int2", "int3"] {
            assert!(n.forks.contains(rail), "{rail}");
        }
    }
}
