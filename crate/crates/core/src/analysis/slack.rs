//! Reset-path timing slack of two cascaded stages and the carry critical path.
//!
//! Paths are taken over the settled valid state: a gate contributes an edge
//! from each high input to its output if that output is high too, so only
//! the gates that actually have to fall during the next return-to-zero phase
//! are on a path.

use std::collections::HashMap;

use serde::Serialize;

use crate::adders::{build_rca, AdderSystem, FullAdderDesign};
use crate::cells::DelayModel;
use crate::error::{Error, Result};
use crate::netlist::{GateKind, Netlist};
use crate::sim::{simulate, RtPolicy, Simulator, Stimulus};

/// Operand pattern applied to both stages of the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlackScenario {
    /// Stage 0 propagates an incoming 1 (`a=1, b=0, cin=1`); stage 1 propagates it.
    Propagate,
    /// Both stages generate (`a=b=1`, `cin=0`).
    Generate,
    /// Both stages kill (`a=b=0`, `cin=1`).
    Kill,
}

impl SlackScenario {
    /// (a, b, cin) for the two-bit cascade.
    fn operands(self) -> (u64, u64, bool) {
        match self {
            SlackScenario::Propagate => (0b11, 0b00, true),
            SlackScenario::Generate => (0b11, 0b11, false),
            SlackScenario::Kill => (0b00, 0b00, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub gate: String,
    pub kind: GateKind,
    pub delay_ps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlackPaths {
    pub scenario: SlackScenario,
    /// Stage-1 operands to the stage-1 sum.
    pub direct_ps: u64,
    /// Stage-0 operands through the internal carry to the stage-1 sum.
    pub indirect_ps: u64,
    pub slack_ps: i64,
    pub direct_path: Vec<PathStep>,
    pub indirect_path: Vec<PathStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlackReport {
    pub design: String,
    /// The carry-propagate case: the margin the timing assumption relies on.
    pub propagate: SlackPaths,
    pub generate: SlackPaths,
    pub kill: SlackPaths,
}

impl SlackReport {
    pub fn slack_ps(&self) -> i64 {
        self.propagate.slack_ps
    }
}

fn settled_values(netlist: &Netlist, delays: &DelayModel, rails: &[String]) -> Result<HashMap<String, bool>> {
    let stim: Vec<Stimulus> = rails.iter().map(|r| Stimulus::new(0, r.clone(), true)).collect();
    let trace = simulate(netlist, &stim, delays, &RtPolicy::off())?;
    let mut v: HashMap<String, bool> = trace.wires.iter().map(|w| (w.clone(), false)).collect();
    for e in &trace.events {
        v.insert(trace.wire_name(e.wire).to_string(), e.value);
    }
    Ok(v)
}

fn operand_rails(sys: &AdderSystem, (a, b, cin): (u64, u64, bool)) -> Vec<String> {
    let mut rails = Vec::new();
    for q in 0..sys.width {
        rails.push(sys.a[q].rail(a >> q & 1 == 1).to_string());
        rails.push(sys.b[q].rail(b >> q & 1 == 1).to_string());
    }
    rails.push(sys.carry_in().rail(cin).to_string());
    rails
}

/// Longest sensitized path from any of `sources` to `target`.
fn longest_path(
    netlist: &Netlist,
    high: &HashMap<String, bool>,
    delays: &DelayModel,
    sources: &[&str],
    target: &str,
) -> Result<Option<(u64, Vec<PathStep>)>> {
    let is_high = |w: &str| high.get(w).copied().unwrap_or(false);
    let mut dist: HashMap<&str, (u64, Option<usize>)> = HashMap::new();
    for s in sources.iter().filter(|s| is_high(s)) {
        dist.insert(s, (0, None));
    }
    // The cascades are acyclic, so |gates| relaxation rounds suffice.
    for _ in 0..=netlist.gates.len() {
        let mut changed = false;
        for (gi, g) in netlist.gates.iter().enumerate() {
            if !is_high(&g.output) {
                continue;
            }
            let d = delays.require(g.kind)?;
            for w in g.inputs.iter().filter(|w| is_high(w)) {
                if let Some(&(dw, _)) = dist.get(w.as_str()) {
                    let cand = dw + d;
                    if dist.get(g.output.as_str()).is_none_or(|&(cur, _)| cand > cur) {
                        dist.insert(&g.output, (cand, Some(gi)));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let Some(&(total, _)) = dist.get(target) else {
        return Ok(None);
    };
    // Walk back along the argmax predecessor of each node.
    let mut steps = Vec::new();
    let mut node = target;
    while let Some(&(dn, Some(gi))) = dist.get(node) {
        let g = &netlist.gates[gi];
        let d = delays.require(g.kind)?;
        steps.push(PathStep {
            gate: g.id.clone(),
            kind: g.kind,
            delay_ps: d,
        });
        node = g
            .inputs
            .iter()
            .find(|w| dist.get(w.as_str()).is_some_and(|&(dw, _)| dw + d == dn))
            .expect("a predecessor realises the distance");
    }
    steps.reverse();
    Ok(Some((total, steps)))
}

fn stage_sum_paths(design: &dyn FullAdderDesign, delays: &DelayModel, scenario: SlackScenario) -> Result<SlackPaths> {
    let sys = build_rca(2, design);
    let ops = scenario.operands();
    let rails = operand_rails(&sys, ops);
    let high = settled_values(&sys.rca, delays, &rails)?;
    let pick = |p: &crate::netlist::Port| -> Result<String> {
        p.rails()
            .into_iter()
            .find(|r| high.get(*r).copied().unwrap_or(false))
            .map(str::to_string)
            .ok_or_else(|| Error::Domain(format!("{} is not valid in the settled state", p.name)))
    };
    let sum1 = pick(&sys.sums[1])?;
    let c1 = pick(&sys.carries[1])?;
    let stage1_ops = [pick(&sys.a[1])?, pick(&sys.b[1])?];
    let stage0_ops = [pick(&sys.a[0])?, pick(&sys.b[0])?];
    let s1: Vec<&str> = stage1_ops.iter().map(String::as_str).collect();
    let s0: Vec<&str> = stage0_ops.iter().map(String::as_str).collect();

    let missing = |what: &str| Error::Domain(format!("{}: no sensitized {what} path", design.name()));
    let (direct_ps, direct_path) = longest_path(&sys.rca, &high, delays, &s1, &sum1)?.ok_or_else(|| missing("direct"))?;
    let (to_carry, mut indirect_path) =
        longest_path(&sys.rca, &high, delays, &s0, &c1)?.ok_or_else(|| missing("operand-to-carry"))?;
    let (from_carry, rest) =
        longest_path(&sys.rca, &high, delays, &[c1.as_str()], &sum1)?.ok_or_else(|| missing("carry-to-sum"))?;
    indirect_path.extend(rest);
    let indirect_ps = to_carry + from_carry;
    Ok(SlackPaths {
        scenario,
        direct_ps,
        indirect_ps,
        slack_ps: indirect_ps as i64 - direct_ps as i64,
        direct_path,
        indirect_path,
    })
}

/// Difference between the indirect (through the internal carry) and direct
/// reset paths of the stage-1 sum in a two-stage cascade.
pub fn compute_timing_slack(design: &dyn FullAdderDesign, delays: &DelayModel) -> Result<SlackReport> {
    if !design.needs_relative_timing() {
        return Err(Error::UnsupportedKind(design.name().to_string()));
    }
    Ok(SlackReport {
        design: design.name().to_string(),
        propagate: stage_sum_paths(design, delays, SlackScenario::Propagate)?,
        generate: stage_sum_paths(design, delays, SlackScenario::Generate)?,
        kill: stage_sum_paths(design, delays, SlackScenario::Kill)?,
    })
}

/// Slack measured by simulation rather than path search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasuredSlack {
    pub node: String,
    pub direct_ps: u64,
    pub indirect_ps: u64,
    pub slack_ps: i64,
}

/// From the settled valid state of the two-stage cascade, resets only the
/// stage-1 operands (direct) or only the stage-0 operands (indirect) and
/// times the fall of the stage-1 sum data node. That node is the sum rail
/// itself, or, when a C-element drives the sum, its input that depends on
/// the carry-in: with only stage 0 reset the C-element itself never falls.
pub fn measure_slack_by_simulation(
    design: &dyn FullAdderDesign,
    delays: &DelayModel,
    scenario: SlackScenario,
) -> Result<MeasuredSlack> {
    let sys = build_rca(2, design);
    let rails = operand_rails(&sys, scenario.operands());
    let mut base = Simulator::new(&sys.rca, delays, &RtPolicy::off())?;
    for r in &rails {
        base.drive(r, true)?;
    }
    base.settle()?;

    let sum_rail = sys.sums[1]
        .rails()
        .into_iter()
        .find(|r| base.value(r).unwrap_or(false))
        .ok_or_else(|| Error::Domain("stage-1 sum is not valid".into()))?
        .to_string();
    let drivers = sys.rca.drivers();
    let driver = drivers[sum_rail.as_str()];
    let node = if driver.kind == GateKind::Ce2 {
        let cin: Vec<&str> = sys.carries[1].rails().to_vec();
        driver
            .inputs
            .iter()
            .find(|w| depends_on(&sys.rca, w, &cin))
            .cloned()
            .unwrap_or_else(|| sum_rail.clone())
    } else {
        sum_rail.clone()
    };

    let time_fall = |stage: usize| -> Result<u64> {
        let mut sim = base.clone();
        let t0 = sim.now();
        for p in [&sys.a[stage], &sys.b[stage]] {
            for r in p.rails() {
                sim.drive(r, false)?;
            }
        }
        sim.settle()?;
        let w = sim.wire(&node)?;
        sim.trace()
            .events
            .iter()
            .find(|e| e.wire == w && !e.value && e.time >= t0)
            .map(|e| e.time - t0)
            .ok_or_else(|| Error::Domain(format!("{node} did not fall when stage {stage} reset")))
    };
    let direct_ps = time_fall(1)?;
    let indirect_ps = time_fall(0)?;
    Ok(MeasuredSlack {
        node,
        direct_ps,
        indirect_ps,
        slack_ps: indirect_ps as i64 - direct_ps as i64,
    })
}

/// Whether `wire` is structurally reachable from any of `sources`.
fn depends_on(netlist: &Netlist, wire: &str, sources: &[&str]) -> bool {
    let drivers = netlist.drivers();
    let mut stack = vec![wire];
    let mut seen = std::collections::HashSet::new();
    while let Some(w) = stack.pop() {
        if sources.contains(&w) {
            return true;
        }
        if !seen.insert(w) {
            continue;
        }
        if let Some(g) = drivers.get(w) {
            stack.extend(g.inputs.iter().map(String::as_str));
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPath {
    pub design: String,
    pub kinds: Vec<GateKind>,
    pub gates: Vec<String>,
}

/// Gates on the longest carry-in to carry-out path of one stage, i.e. the
/// cells that recur once per stage along a rippling carry.
pub fn critical_path_elements(design: &dyn FullAdderDesign) -> CriticalPath {
    let n = design.build();
    let cin = n.input("cin").expect("full adder has cin");
    let cout = n.output("cout").expect("full adder has cout");
    let readers = n.readers();

    // Longest path by gate count, depth-first from each carry-in rail.
    fn walk<'a>(
        w: &'a str,
        targets: &[&str],
        readers: &HashMap<&'a str, Vec<&'a crate::netlist::Gate>>,
        memo: &mut HashMap<&'a str, Option<Vec<&'a crate::netlist::Gate>>>,
    ) -> Option<Vec<&'a crate::netlist::Gate>> {
        if targets.contains(&w) {
            return Some(Vec::new());
        }
        if let Some(m) = memo.get(w) {
            return m.clone();
        }
        memo.insert(w, None);
        let mut best: Option<Vec<&crate::netlist::Gate>> = None;
        for g in readers.get(w).map_or(&[][..], Vec::as_slice) {
            if let Some(rest) = walk(&g.output, targets, readers, memo) {
                if best.as_ref().is_none_or(|b| rest.len() + 1 > b.len()) {
                    let mut p = vec![*g];
                    p.extend(rest);
                    best = Some(p);
                }
            }
        }
        memo.insert(w, best.clone());
        best
    }

    let targets = cout.rails();
    let mut memo = HashMap::new();
    let best = cin
        .rails()
        .into_iter()
        .filter_map(|r| walk(r, &targets, &readers, &mut memo))
        .max_by_key(|p| p.len())
        .unwrap_or_default();
    CriticalPath {
        design: design.name().to_string(),
        kinds: best.iter().map(|g| g.kind).collect(),
        gates: best.iter().map(|g| g.id.clone()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adders::FullAdderKind;
    use crate::data::{default_delays, seitz_slack_delays};

    #[test]
    fn seitz_weak_has_no_timing_assumption() {
        let d = default_delays().unwrap();
        assert!(matches!(
            compute_timing_slack(FullAdderKind::SeitzWeak.design().as_ref(), &d),
            Err(Error::UnsupportedKind(_))
        ));
    }

    #[test]
    fn aopt_paths() {
        let d = default_delays().unwrap();
        let r = compute_timing_slack(FullAdderKind::AoptEo.design().as_ref(), &d).unwrap();
        assert_eq!((r.propagate.direct_ps, r.propagate.indirect_ps), (250, 322));
        let kinds: Vec<GateKind> = r.propagate.indirect_path.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, [GateKind::Ao22, GateKind::Ao22, GateKind::Ao22, GateKind::Ce2]);
        assert_eq!(r.generate.slack_ps, 0);
    }

    #[test]
    fn lopt_generate_variant() {
        let d = default_delays().unwrap();
        let r = compute_timing_slack(FullAdderKind::LoptEo.design().as_ref(), &d).unwrap();
        assert_eq!(r.slack_ps(), 25);
        assert_eq!(r.generate.slack_ps, 3);
    }

    #[test]
    fn simulation_agrees_with_paths() {
        for (kind, d) in [
            (FullAdderKind::AoptEo, default_delays().unwrap()),
            (FullAdderKind::LoptEo, default_delays().unwrap()),
            (FullAdderKind::SeitzEarly, seitz_slack_delays().unwrap()),
        ] {
            let design = kind.design();
            let paths = compute_timing_slack(design.as_ref(), &d).unwrap();
            let sim = measure_slack_by_simulation(design.as_ref(), &d, SlackScenario::Propagate).unwrap();
            assert_eq!(sim.slack_ps, paths.slack_ps(), "{kind}");
        }
    }
}
