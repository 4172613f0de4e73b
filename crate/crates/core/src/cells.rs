//! Behavioral gate models and per-kind propagation delays.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::GateKind;

/// Internal state of a cell. Only the C-element reads it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateState {
    pub held_output: bool,
}

/// Evaluate one gate. For `CE2` the returned state is the new output;
/// every other kind passes the state through untouched.
pub fn eval_gate(kind: GateKind, inputs: &[bool], state: GateState) -> Result<(bool, GateState)> {
    if inputs.len() != kind.arity() {
        return Err(Error::ArityMismatch {
            kind,
            expected: kind.arity(),
            got: inputs.len(),
        });
    }
    let out = eval_unchecked(kind, inputs, state.held_output);
    let state = if kind == GateKind::Ce2 {
        GateState { held_output: out }
    } else {
        state
    };
    Ok((out, state))
}

/// Evaluation without the arity check; `held` is the C-element's current output.
#[inline]
pub(crate) fn eval_unchecked(kind: GateKind, x: &[bool], held: bool) -> bool {
    match kind {
        GateKind::And2 | GateKind::And3 => x.iter().all(|&b| b),
        GateKind::Or2 | GateKind::Or3 | GateKind::Or4 | GateKind::Or6 => x.iter().any(|&b| b),
        GateKind::Ao21 => (x[0] && x[1]) || x[2],
        GateKind::Ao22 => (x[0] && x[1]) || (x[2] && x[3]),
        GateKind::Ao222 => (x[0] && x[1]) || (x[2] && x[3]) || (x[4] && x[5]),
        GateKind::Ce2 => {
            if x[0] == x[1] {
                x[0]
            } else {
                held
            }
        }
    }
}

/// Propagation delay per gate kind, in integer picoseconds.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DelayModel {
    delays: BTreeMap<GateKind, u64>,
}

impl DelayModel {
    /// Every kind set to the same delay.
    pub fn uniform(ps: u64) -> Self {
        assert!(ps > 0, "delays must be positive");
        Self {
            delays: GateKind::ALL.iter().map(|&k| (k, ps)).collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (GateKind, u64)>) -> Result<Self> {
        let mut model = Self::default();
        for (k, ps) in pairs {
            model.set(k, ps)?;
        }
        Ok(model)
    }

    pub fn get(&self, kind: GateKind) -> Option<u64> {
        self.delays.get(&kind).copied()
    }

    /// Delay of `kind`; a missing kind is a configuration error.
    pub fn require(&self, kind: GateKind) -> Result<u64> {
        self.get(kind).ok_or_else(|| Error::Unknown {
            what: "delay for gate kind",
            name: kind.to_string(),
        })
    }

    pub fn set(&mut self, kind: GateKind, ps: u64) -> Result<()> {
        if ps == 0 {
            return Err(Error::Domain(format!("delay of {kind} must be positive")));
        }
        self.delays.insert(kind, ps);
        Ok(())
    }

    pub fn with(mut self, kind: GateKind, ps: u64) -> Self {
        self.set(kind, ps).expect("positive delay");
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateKind, u64)> + '_ {
        self.delays.iter().map(|(&k, &v)| (k, v))
    }

    /// Sum of the delays of a sequence of cells.
    pub fn path_delay(&self, kinds: &[GateKind]) -> Result<u64> {
        kinds.iter().map(|&k| self.require(k)).sum()
    }

    /// Parses the flat `KIND = ps` format. `#` starts a comment.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut model = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let loc = format!("line {}", lineno + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(&loc, "expected `KIND = ps`"))?;
            let kind = GateKind::from_str(key).map_err(|e| Error::parse(&loc, e.to_string()))?;
            let ps: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(&loc, format!("`{}` is not an integer ps value", value.trim())))?;
            model.set(kind, ps).map_err(|e| Error::parse(&loc, e.to_string()))?;
        }
        Ok(model)
    }

    pub fn to_config(&self) -> String {
        self.iter().map(|(k, ps)| format!("{k} = {ps}\n")).collect()
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// A linear statement about path delays: `sum(coeff * delay(kind)) = total_ps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathConstraint {
    pub terms: Vec<(i64, GateKind)>,
    pub total_ps: i64,
}

impl PathConstraint {
    pub fn new(terms: &[(i64, GateKind)], total_ps: i64) -> Self {
        Self {
            terms: terms.to_vec(),
            total_ps,
        }
    }
}

impl fmt::Display for PathConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, k)) in self.terms.iter().enumerate() {
            match (i, *c < 0) {
                (0, false) => write!(f, "{c}*{k}")?,
                (0, true) => write!(f, "-{}*{k}", -c)?,
                (_, false) => write!(f, " + {c}*{k}")?,
                (_, true) => write!(f, " - {}*{k}", -c)?,
            }
        }
        write!(f, " = {}", self.total_ps)
    }
}

impl FromStr for PathConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lhs, rhs) = s
            .split_once('=')
            .ok_or_else(|| Error::parse(s, "expected `k1*KIND + k2*KIND = ps`"))?;
        let total_ps: i64 = rhs
            .trim()
            .parse()
            .map_err(|_| Error::parse(s, format!("`{}` is not an integer ps value", rhs.trim())))?;
        // Normalise "a - b" into "a + -b" before splitting into terms.
        let normalised = lhs.replace('-', "+-");
        let mut terms = Vec::new();
        for raw in normalised.split('+') {
            let term: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            if term.is_empty() {
                continue;
            }
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, term.as_str()),
            };
            let (coeff, kind) = match body.split_once('*') {
                Some((c, k)) => (
                    c.parse::<i64>()
                        .map_err(|_| Error::parse(s, format!("bad coefficient `{c}`")))?,
                    k,
                ),
                None => (1, body),
            };
            let kind = GateKind::from_str(kind).map_err(|e| Error::parse(s, e.to_string()))?;
            terms.push((sign * coeff, kind));
        }
        if terms.is_empty() {
            return Err(Error::parse(s, "constraint has no terms"));
        }
        Ok(Self { terms, total_ps })
    }
}

pub fn parse_constraints(text: &str) -> Result<Vec<PathConstraint>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = strip_comment(raw);
            (!line.is_empty()).then(|| {
                line.parse::<PathConstraint>().map_err(|e| match e {
                    Error::Parse { message, .. } => Error::parse(format!("line {}", i + 1), message),
                    other => other,
                })
            })
        })
        .collect()
}

/// Solves the constraint system for the kinds it mentions and overlays the
/// solution on `defaults`. Each mentioned kind must be pinned to a unique
/// positive integer.
pub fn calibrate_delays(constraints: &[PathConstraint], defaults: &DelayModel) -> Result<DelayModel> {
    let kinds: Vec<GateKind> = constraints
        .iter()
        .flat_map(|c| c.terms.iter().map(|&(_, k)| k))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cols = kinds.len();
    let col = |k: GateKind| kinds.iter().position(|&x| x == k).unwrap();

    // Augmented matrix [A | b] over the rationals.
    let mut rows: Vec<Vec<Ratio<i64>>> = constraints
        .iter()
        .map(|c| {
            let mut row = vec![Ratio::from_integer(0); cols + 1];
            for &(coeff, k) in &c.terms {
                row[col(k)] += Ratio::from_integer(coeff);
            }
            row[cols] = Ratio::from_integer(c.total_ps);
            row
        })
        .collect();

    let pivots = reduce_row_echelon(&mut rows, cols);

    for row in &rows[pivots.len()..] {
        if row[cols] != Ratio::from_integer(0) {
            return Err(Error::Inconsistent(
                "the path statements contradict each other".into(),
            ));
        }
    }

    let mut model = defaults.clone();
    let mut undetermined = Vec::new();
    for (c, &kind) in kinds.iter().enumerate() {
        let pinned = pivots.iter().enumerate().find_map(|(r, &p)| {
            let row = &rows[r];
            (p == c && (0..cols).all(|j| j == c || row[j] == Ratio::from_integer(0))).then(|| row[cols])
        });
        match pinned {
            Some(v) if v.is_integer() && *v.numer() > 0 => model.set(kind, *v.numer() as u64)?,
            Some(v) => {
                return Err(Error::Inconsistent(format!(
                    "{kind} would be {v} ps; delays must be positive integers"
                )))
            }
            None => undetermined.push(kind.to_string()),
        }
    }
    if !undetermined.is_empty() {
        return Err(Error::Underdetermined(undetermined));
    }
    Ok(model)
}

/// Gauss-Jordan elimination in place; returns the pivot column of each
/// leading row.
fn reduce_row_echelon(rows: &mut [Vec<Ratio<i64>>], cols: usize) -> Vec<usize> {
    let zero = Ratio::from_integer(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != zero) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= lead;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != zero {
                let factor = rows[i][c];
                for j in 0..=cols {
                    let sub = factor * rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;
    use GateKind::*;

    fn all_vectors(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1u32 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
    }

    #[test]
    fn complex_gate_truth_examples() {
        let s = GateState::default();
        assert!(eval_gate(Ao22, &[true, true, false, false], s).unwrap().0);
        assert!(!eval_gate(Ao22, &[true, false, false, true], s).unwrap().0);
        assert!(eval_gate(Ao21, &[false, false, true], s).unwrap().0);
        assert!(eval_gate(Ao21, &[true, true, false], s).unwrap().0);
    }

    #[test]
    fn c_element_holds_on_disagreement() {
        let held = GateState { held_output: true };
        assert_eq!(eval_gate(Ce2, &[true, false], held).unwrap(), (true, held));
        let (out, st) = eval_gate(Ce2, &[false, false], held).unwrap();
        assert!(!out);
        assert!(!st.held_output);
        let (out, st) = eval_gate(Ce2, &[true, true], GateState::default()).unwrap();
        assert!(out && st.held_output);
    }

    #[test]
    fn arity_is_checked() {
        assert_eq!(
            eval_gate(Ao22, &[true; 3], GateState::default()),
            Err(Error::ArityMismatch {
                kind: Ao22,
                expected: 4,
                got: 3
            })
        );
    }

    #[test]
    fn combinational_kinds_are_monotone() {
        for kind in GateKind::ALL.into_iter().filter(|k| *k != Ce2) {
            let n = kind.arity();
            for x in all_vectors(n) {
                let (fx, _) = eval_gate(kind, &x, GateState::default()).unwrap();
                for i in 0..n {
                    if !x[i] {
                        let mut y = x.clone();
                        y[i] = true;
                        let (fy, _) = eval_gate(kind, &y, GateState::default()).unwrap();
                        assert!(!fx || fy, "{kind} not monotone at {x:?} -> {y:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn ao222_with_feedback_is_a_c_element() {
        for x in [false, true] {
            for y in [false, true] {
                for z in [false, true] {
                    let (via_ao, _) = eval_gate(Ao222, &[x, y, x, z, y, z], GateState::default()).unwrap();
                    let (direct, _) = eval_gate(Ce2, &[x, y], GateState { held_output: z }).unwrap();
                    assert_eq!(via_ao, direct, "x={x} y={y} z={z}");
                }
            }
        }
    }

    #[test]
    fn calibrates_ao22_and_c_element_from_path_sums() {
        let cons = parse_constraints("2*AO22 + CE2 = 250\n3*AO22 + 1*CE2 = 322\n").unwrap();
        let m = calibrate_delays(&cons, &DelayModel::default()).unwrap();
        assert_eq!(m.get(Ao22), Some(72));
        assert_eq!(m.get(Ce2), Some(106));
    }

    #[test]
    fn calibrates_carry_gates_from_slack_statements() {
        let cons = parse_constraints("AO21 = 25\nAO21 - OR2 = 3 # generate/kill slack\n").unwrap();
        let m = calibrate_delays(&cons, &DelayModel::default()).unwrap();
        assert_eq!(m.get(Ao21), Some(25));
        assert_eq!(m.get(Or2), Some(22));
    }

    #[test]
    fn sum_alone_is_underdetermined() {
        let cons = parse_constraints("AND3 + OR3 = 133").unwrap();
        assert_eq!(
            calibrate_delays(&cons, &DelayModel::default()),
            Err(Error::Underdetermined(vec!["AND3".into(), "OR3".into()]))
        );
    }

    #[test]
    fn partially_pinned_system_names_only_free_kinds() {
        let cons = parse_constraints("AO21 = 25\nAND3 + OR3 = 133").unwrap();
        assert_eq!(
            calibrate_delays(&cons, &DelayModel::default()),
            Err(Error::Underdetermined(vec!["AND3".into(), "OR3".into()]))
        );
    }

    #[test]
    fn contradictions_and_bad_solutions_are_inconsistent() {
        let cons = parse_constraints("AO22 = 72\n2*AO22 = 150").unwrap();
        assert!(matches!(
            calibrate_delays(&cons, &DelayModel::default()),
            Err(Error::Inconsistent(_))
        ));
        let cons = parse_constraints("2*AO22 = 145").unwrap();
        assert!(matches!(
            calibrate_delays(&cons, &DelayModel::default()),
            Err(Error::Inconsistent(_))
        ));
        let cons = parse_constraints("AO21 - OR2 = 3\nAO21 = 2").unwrap();
        assert!(matches!(
            calibrate_delays(&cons, &DelayModel::default()),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn unmentioned_kinds_keep_defaults() {
        let defaults = DelayModel::from_pairs([(And2, 20), (Ao22, 1)]).unwrap();
        let cons = parse_constraints("AO22 = 72").unwrap();
        let m = calibrate_delays(&cons, &defaults).unwrap();
        assert_eq!(m.get(And2), Some(20));
        assert_eq!(m.get(Ao22), Some(72));
    }

    #[test]
    fn config_round_trips_and_reports_lines() {
        let m = DelayModel::parse_config("# comment\nAO22 = 72\nce2=106\n").unwrap();
        assert_eq!(DelayModel::parse_config(&m.to_config()).unwrap(), m);
        match DelayModel::parse_config("AO22 = 72\nNAND9 = 3") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 2"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(DelayModel::parse_config("AO22 = 0").is_err());
    }

    #[test]
    fn constraint_display_parses_back() {
        let c: PathConstraint = "2*AO22 - 1*CE2 = 38".parse().unwrap();
        assert_eq!(c.to_string().parse::<PathConstraint>().unwrap(), c);
    }
}
