//! Measurements and checks over netlists and traces.

mod carry;
mod indication;
mod orphans;
mod protocol;
mod slack;
mod structure;
mod timing;

pub use carry::{
    carry_chain_stats, chain_from_trace, exhaustive_chain_stats, longest_active_chain, longest_propagate_run,
    trace_chain_stats, ChainStats,
};
pub use indication::{
    classify_indication, classify_indication_ordered, Indication, IndicationClass, MAX_CLASSIFY_INPUTS,
};
pub use orphans::{acknowledged_sinks, acknowledgement_predecessors, detect_orphans, Orphan, OrphanKind, OrphanReport};
pub use protocol::{audit_protocol, ProtocolViolation};
pub use slack::{
    compute_timing_slack, critical_path_elements, measure_slack_by_simulation, CriticalPath, MeasuredSlack, PathStep,
    SlackPaths, SlackReport, SlackScenario,
};
pub use structure::{
    check_disjoint_products, check_monotonic_cover, full_adder_equations, product_collecting_ors, sop_of,
    CoverViolation, Cube, Literal,
};
pub use timing::{
    analytic_cycle_time, bundled_table2, bundled_table4, fmt_ns, forced_chain_operands, measure_latencies,
    parse_table2, parse_table4, ps_to_ns, reproduce_table4, CycleCell, CycleEstimate, CycleStyle, CycleTable, Stats,
    Table2Row, Table4Row, TimingReport, TransactionTiming, TABLE4_CHAINS, TABLE4_WIDTH,
};

use crate::error::{Error, Result};

/// Reference `width`-bit addition: `(a + b + cin) mod 2^width` and the carry out.
pub fn oracle_add(a: u64, b: u64, cin: bool, width: usize) -> Result<(u64, bool)> {
    if width == 0 || width > 64 {
        return Err(Error::Range(format!("width must be in 1..=64, got {width}")));
    }
    if width < 64 && (a >> width != 0 || b >> width != 0) {
        return Err(Error::Range(format!("{a} or {b} does not fit in {width} bits")));
    }
    let total = a as u128 + b as u128 + u128::from(cin);
    let mask = (1u128 << width) - 1;
    Ok(((total & mask) as u64, total >> width & 1 == 1))
}
