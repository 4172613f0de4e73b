//! Measured latencies, the analytic cycle-time model, and the cycle-time
//! table derived from published 32-bit latencies.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::asset;
use crate::error::{Error, Result};
use crate::sim::{Operands, TimingRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
}

impl Stats {
    fn of(xs: impl Iterator<Item = u64> + Clone) -> Self {
        let n = xs.clone().count().max(1) as f64;
        Self {
            min: xs.clone().min().unwrap_or(0),
            max: xs.clone().max().unwrap_or(0),
            mean: xs.map(|x| x as f64).sum::<f64>() / n,
        }
    }
}

/// One transaction's latencies in ps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TransactionTiming {
    pub forward_ps: u64,
    pub reverse_ps: u64,
    pub cycle_ps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub forward: Stats,
    pub reverse: Stats,
    pub cycle: Stats,
    pub transactions: Vec<TransactionTiming>,
    /// Worst time, over all transactions, for each sum bit to go valid.
    pub stage_forward_max: Vec<u64>,
    /// Worst time, over all transactions, for each sum bit to return to spacer.
    pub stage_reverse_max: Vec<u64>,
}

pub fn measure_latencies(records: &[TimingRecord]) -> Result<TimingReport> {
    if records.is_empty() {
        return Err(Error::Domain("no transactions to measure".into()));
    }
    let transactions: Vec<TransactionTiming> = records
        .iter()
        .map(|r| TransactionTiming {
            forward_ps: r.forward_ps(),
            reverse_ps: r.reverse_ps(),
            cycle_ps: r.forward_ps() + r.reverse_ps(),
        })
        .collect();
    let width = records[0].stage_forward.len();
    let col_max = |f: fn(&TimingRecord) -> &Vec<u64>| -> Vec<u64> {
        (0..width)
            .map(|q| records.iter().map(|r| f(r)[q]).max().unwrap_or(0))
            .collect()
    };
    Ok(TimingReport {
        forward: Stats::of(transactions.iter().map(|t| t.forward_ps)),
        reverse: Stats::of(transactions.iter().map(|t| t.reverse_ps)),
        cycle: Stats::of(transactions.iter().map(|t| t.cycle_ps)),
        stage_forward_max: col_max(|r| &r.stage_forward),
        stage_reverse_max: col_max(|r| &r.stage_reverse),
        transactions,
    })
}

/// Operands whose carry is generated at bit 0, propagated through bits
/// `1..m`, and killed at every bit from `m` up; `cin = 0`.
pub fn forced_chain_operands(width: usize, m: usize) -> Result<Operands> {
    if m == 0 || m > width || width > 64 {
        return Err(Error::Domain(format!("chain length {m} does not fit width {width}")));
    }
    // Bit 0: a=b=1. Bits 1..m: a=1, b=0. Above: a=b=0.
    let a = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    Ok(Operands::new(a, 1, false))
}

/// Handshake style of an adder, selecting its cycle-time formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleStyle {
    Strong,
    WeakBasic,
    WeakDistributed,
    EarlyOutput,
    RelativeTimed,
}

impl CycleStyle {
    pub const ALL: [CycleStyle; 5] = [
        CycleStyle::Strong,
        CycleStyle::WeakBasic,
        CycleStyle::WeakDistributed,
        CycleStyle::EarlyOutput,
        CycleStyle::RelativeTimed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CycleStyle::Strong => "strong",
            CycleStyle::WeakBasic => "weak-basic",
            CycleStyle::WeakDistributed => "weak-distributed",
            CycleStyle::EarlyOutput => "early-output",
            CycleStyle::RelativeTimed => "relative-timed",
        }
    }
}

impl fmt::Display for CycleStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CycleStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CycleStyle::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "cycle style",
                name: s.to_string(),
            })
    }
}

/// Forward latency, reverse latency and cycle time, in the unit of `T_fa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleEstimate {
    pub forward: f64,
    pub reverse: f64,
    pub cycle: f64,
}

/// `n`-bit adder with an `m`-stage carry chain and full-adder delay `t_fa`.
pub fn analytic_cycle_time(style: CycleStyle, n: usize, m: usize, t_fa: f64) -> Result<CycleEstimate> {
    if m == 0 || m > n {
        return Err(Error::Domain(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    if !(t_fa > 0.0 && t_fa.is_finite()) {
        return Err(Error::Domain(format!("full-adder delay must be positive, got {t_fa}")));
    }
    let (n, m) = (n as f64, m as f64);
    let (forward, reverse) = match style {
        CycleStyle::Strong => (n * t_fa, n * t_fa),
        CycleStyle::WeakBasic => (m * t_fa, m * t_fa),
        CycleStyle::WeakDistributed | CycleStyle::EarlyOutput => (m * t_fa, 2.0 * t_fa),
        CycleStyle::RelativeTimed => (m * t_fa, t_fa),
    };
    Ok(CycleEstimate {
        forward,
        reverse,
        cycle: forward + reverse,
    })
}

/// One published 32-bit adder: handshake style, power, worst-case
/// latency and areas. Power and area are carried, never recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub adder: String,
    pub style: CycleStyle,
    pub power_uw: f64,
    pub latency_ns: f64,
    pub rca_area_um2: f64,
    pub fa_area_um2: f64,
}

/// Published cycle times for the four chain lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Row {
    pub adder: String,
    pub style: CycleStyle,
    pub m4: f64,
    pub m8: f64,
    pub m16: f64,
    pub m32: f64,
}

impl Table4Row {
    pub fn get(&self, m: usize) -> Option<f64> {
        match m {
            4 => Some(self.m4),
            8 => Some(self.m8),
            16 => Some(self.m16),
            32 => Some(self.m32),
            _ => None,
        }
    }
}

fn read_csv<T: for<'de> Deserialize<'de>>(name: &str, text: &str) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::parse(format!("{name} record {}", i + 1), e.to_string())))
        .collect()
}

pub fn parse_table2(text: &str) -> Result<Vec<Table2Row>> {
    read_csv("table2", text)
}

pub fn parse_table4(text: &str) -> Result<Vec<Table4Row>> {
    read_csv("table4", text)
}

pub fn bundled_table2() -> Result<Vec<Table2Row>> {
    parse_table2(&asset("table2.csv")?)
}

pub fn bundled_table4() -> Result<Vec<Table4Row>> {
    parse_table4(&asset("table4_published.csv")?)
}

/// Chain lengths of the cycle-time table.
pub const TABLE4_CHAINS: [usize; 4] = [4, 8, 16, 32];
/// Width of the published adders.
pub const TABLE4_WIDTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleCell {
    pub adder: String,
    pub style: CycleStyle,
    pub m: usize,
    pub cycle_ns: f64,
    pub published_ns: Option<f64>,
    pub delta_ns: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleTable {
    pub cells: Vec<CycleCell>,
}

impl CycleTable {
    pub fn max_abs_delta(&self) -> Option<f64> {
        self.cells
            .iter()
            .filter_map(|c| c.delta_ns.map(f64::abs))
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
    }

    /// One row per adder: `adder,style,m4,delta_m4,m8,delta_m8,...`; ns to
    /// two decimals, deltas empty when nothing was published.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("adder,style");
        for m in TABLE4_CHAINS {
            let _ = write!(s, ",m{m},delta_m{m}");
        }
        s.push('\n');
        for row in self.cells.chunks(TABLE4_CHAINS.len()) {
            let quoted = if row[0].adder.contains(',') {
                format!("\"{}\"", row[0].adder.replace('"', "\"\""))
            } else {
                row[0].adder.clone()
            };
            let _ = write!(s, "{quoted},{}", row[0].style);
            for c in row {
                let _ = write!(s, ",{}", fmt_ns(c.cycle_ns));
                match c.delta_ns {
                    Some(d) => {
                        let _ = write!(s, ",{}", fmt_ns(d));
                    }
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Two decimals, without a negative zero.
pub fn fmt_ns(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Integer ps as ns with two decimals.
pub fn ps_to_ns(ps: u64) -> String {
    fmt_ns(ps as f64 / 1000.0)
}

/// Cycle times for every adder at each chain length in [`TABLE4_CHAINS`],
/// with `T_fa` the published 32-bit latency divided by 32. Cells are
/// compared with `published` rows matched on (adder, style).
pub fn reproduce_table4(table2: &[Table2Row], published: &[Table4Row]) -> Result<CycleTable> {
    let mut cells = Vec::with_capacity(table2.len() * TABLE4_CHAINS.len());
    for row in table2 {
        let t_fa = row.latency_ns / TABLE4_WIDTH as f64;
        let reference = published.iter().find(|p| p.adder == row.adder && p.style == row.style);
        for m in TABLE4_CHAINS {
            let est = analytic_cycle_time(row.style, TABLE4_WIDTH, m, t_fa)?;
            let published_ns = reference.and_then(|p| p.get(m));
            cells.push(CycleCell {
                adder: row.adder.clone(),
                style: row.style,
                m,
                cycle_ns: est.cycle,
                published_ns,
                delta_ns: published_ns.map(|p| est.cycle - p),
            });
        }
    }
    Ok(CycleTable { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn formulas() {
        let rt = analytic_cycle_time(CycleStyle::RelativeTimed, 32, 4, 1.0).unwrap();
        assert!(close(rt.forward, 4.0) && close(rt.reverse, 1.0) && close(rt.cycle, 5.0));
        let eo = analytic_cycle_time(CycleStyle::EarlyOutput, 32, 4, 1.0).unwrap();
        assert!(close(eo.cycle, 6.0));
        let wd = analytic_cycle_time(CycleStyle::WeakDistributed, 32, 16, 1.0).unwrap();
        assert!(close(wd.cycle, 18.0));
        let wb = analytic_cycle_time(CycleStyle::WeakBasic, 32, 8, 1.0).unwrap();
        assert!(close(wb.cycle, 16.0));
        for m in [1, 7, 32] {
            let s = analytic_cycle_time(CycleStyle::Strong, 32, m, 9.04 / 32.0).unwrap();
            assert!((s.cycle - 18.08).abs() < 1e-9);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(analytic_cycle_time(CycleStyle::Strong, 4, 5, 1.0).is_err());
        assert!(analytic_cycle_time(CycleStyle::Strong, 4, 0, 1.0).is_err());
        assert!(analytic_cycle_time(CycleStyle::Strong, 4, 2, 0.0).is_err());
    }

    #[test]
    fn forced_chain_shape() {
        let op = forced_chain_operands(8, 3).unwrap();
        assert_eq!((op.a, op.b, op.cin), (0b111, 0b001, false));
        assert!(forced_chain_operands(4, 5).is_err());
        assert_eq!(forced_chain_operands(64, 64).unwrap().a, u64::MAX);
    }

    #[test]
    fn bundled_tables_load() {
        let t2 = bundled_table2().unwrap();
        let t4 = bundled_table4().unwrap();
        assert_eq!(t2.len(), 12);
        assert_eq!(t4.len(), 12);
        let table = reproduce_table4(&t2, &t4).unwrap();
        assert_eq!(table.cells.len(), 48);
        assert!(table.cells.iter().all(|c| c.published_ns.is_some()));
    }

    #[test]
    fn csv_has_one_line_per_adder() {
        let table = reproduce_table4(&bundled_table2().unwrap(), &bundled_table4().unwrap()).unwrap();
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 13);
        assert!(csv.starts_with("adder,style,m4,delta_m4,m8"));
    }

    #[test]
    fn ns_formatting() {
        assert_eq!(fmt_ns(-0.001), "0.00");
        assert_eq!(ps_to_ns(72), "0.07");
        assert_eq!(ps_to_ns(18080), "18.08");
    }
}
