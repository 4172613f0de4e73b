use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use rtzsim::adders::{build_handshake_system, build_rca, registry, FullAdderDesign};
use rtzsim::analysis::{
    analytic_cycle_time, audit_protocol, bundled_table2, bundled_table4, carry_chain_stats, check_monotonic_cover,
    classify_indication, compute_timing_slack, critical_path_elements, detect_orphans, exhaustive_chain_stats,
    fmt_ns, forced_chain_operands, measure_latencies, measure_slack_by_simulation, oracle_add, parse_table2,
    parse_table4, reproduce_table4, trace_chain_stats, CycleStyle, SlackScenario, Stats,
};
use rtzsim::cells::{calibrate_delays, parse_constraints, DelayModel};
use rtzsim::data::{delay_preset, DELAY_PRESETS};
use rtzsim::netlist::{validate_netlist, Netlist};
use rtzsim::sim::{all_codewords, random_operands, run_transactions, Operands, RtMode, RtPolicy, TransactionRun};

use crate::{
    BuildArgs, CarryStatsArgs, ClassifyArgs, Command, Common, CycleModelArgs, DelayArgs, SimArgs, SlackArgs,
    Stimulus, Table4Args, ValidateArgs,
};

pub enum Outcome {
    Clean,
    Findings,
}

pub fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Build(a) => build(a),
        Command::Sim(a) => sim(a),
        Command::Classify(a) => classify(a),
        Command::Orphans(a) => orphans(a),
        Command::Slack(a) => slack(a),
        Command::CycleModel(a) => cycle_model(a),
        Command::Table4(a) => table4(a),
        Command::CarryStats(a) => carry_stats(a),
        Command::Validate(a) => validate(a),
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                // a reader such as `head` closing early is not an error
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).context("writing stdout"),
                _ => Ok(()),
            }
        }
    }
}

fn emit_json(common: &Common, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(common, &text)
}

fn outcome(common: &Common, findings: bool) -> Outcome {
    if common.strict && findings {
        Outcome::Findings
    } else {
        Outcome::Clean
    }
}

fn design(name: &str) -> Result<Arc<dyn FullAdderDesign>> {
    Ok(registry().get(name)?)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// `--delays` names a file when one exists at that path, a bundled preset
/// otherwise (a trailing `.cfg` is accepted).
fn load_delays(args: &DelayArgs) -> Result<DelayModel> {
    let path = Path::new(&args.delays);
    let base = if path.is_file() {
        DelayModel::parse_config(&read(path)?).with_context(|| format!("in {}", path.display()))?
    } else {
        let name = args.delays.strip_suffix(".cfg").unwrap_or(&args.delays);
        if !DELAY_PRESETS.contains(&name) {
            bail!(
                "`{}` is neither a file nor a delay preset ({})",
                args.delays,
                DELAY_PRESETS.join(", ")
            );
        }
        delay_preset(name)?
    };
    match &args.constraints {
        Some(c) => {
            let cons = parse_constraints(&read(c)?).with_context(|| format!("in {}", c.display()))?;
            Ok(calibrate_delays(&cons, &base)?)
        }
        None => Ok(base),
    }
}

fn delays_json(d: &DelayModel) -> Value {
    let map: BTreeMap<String, u64> = d.iter().map(|(k, ps)| (k.to_string(), ps)).collect();
    json!(map)
}

fn rt_policy(mode: &str, pad_ps: u64) -> Result<RtPolicy> {
    Ok(RtPolicy {
        mode: mode.parse::<RtMode>()?,
        pad_ps,
    })
}

fn parse_u64(s: &str) -> Result<u64> {
    let v = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    v.with_context(|| format!("`{s}` is not a number"))
}

fn parse_op(s: &str) -> Result<Operands> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts[..] else {
        bail!("operand `{s}` is not of the form A:B:CIN");
    };
    let cin = match c {
        "0" => false,
        "1" => true,
        _ => bail!("carry-in `{c}` must be 0 or 1"),
    };
    Ok(Operands::new(parse_u64(a)?, parse_u64(b)?, cin))
}

fn operands(s: &Stimulus, width: usize, seed: Option<u64>) -> Result<Vec<Operands>> {
    if let Some(n) = s.random {
        return Ok(random_operands(width, n, seed.context("--random needs --seed")?)?);
    }
    if let Some(m) = s.forced_chain {
        return Ok(vec![forced_chain_operands(width, m)?]);
    }
    if !s.ops.is_empty() {
        return s.ops.iter().map(|o| parse_op(o)).collect();
    }
    if s.pairs {
        if width > 4 {
            bail!("--pairs is limited to widths up to 4");
        }
        let cw = all_codewords(width)?;
        return Ok(cw.iter().flat_map(|x| cw.iter().flat_map(move |y| [*x, *y])).collect());
    }
    if width > 8 {
        bail!("exhaustive stimulus is limited to widths up to 8; use --random, --forced-chain or --op");
    }
    Ok(all_codewords(width)?)
}

fn build(a: BuildArgs) -> Result<Outcome> {
    let d = design(&a.adder)?;
    let netlist = match a.width {
        None => d.build(),
        Some(0) => bail!("width must be at least 1"),
        Some(w) if a.system => build_rca(w, d.as_ref()).combined(),
        Some(w) => build_rca(w, d.as_ref()).rca,
    };
    let report = validate_netlist(&netlist);
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    eprintln!(
        "{} gates, {} inputs, {} outputs{}",
        netlist.gates.len(),
        netlist.inputs.len(),
        netlist.outputs.len(),
        if report.is_clean() { ", validator clean" } else { "" }
    );
    let mut text = netlist.to_json();
    text.push('\n');
    emit(&a.common, &text)?;
    Ok(outcome(&a.common, !report.is_clean()))
}

fn stats_json(s: &Stats) -> Value {
    json!({ "min": s.min, "max": s.max, "mean": (s.mean * 100.0).round() / 100.0 })
}

struct Prepared {
    run: TransactionRun,
    system: rtzsim::adders::SystemModel,
    delays: DelayModel,
    rt: RtPolicy,
}

fn simulate(a: &SimArgs) -> Result<Prepared> {
    if a.width == 0 || a.width > 64 {
        bail!("width must be in 1..=64");
    }
    let d = design(&a.adder)?;
    let delays = load_delays(&a.delays)?;
    let rt = rt_policy(&a.rt, a.pad_ps)?;
    let ops = operands(&a.stimulus, a.width, a.seed)?;
    let system = build_handshake_system(build_rca(a.width, d.as_ref()));
    let run = run_transactions(&system, &ops, &delays, &rt)?;
    if let Some(p) = &a.trace {
        std::fs::write(p, run.trace.to_jsonl()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.vcd {
        std::fs::write(p, run.trace.to_vcd()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(Prepared {
        run,
        system,
        delays,
        rt,
    })
}

fn sim(a: SimArgs) -> Result<Outcome> {
    let p = simulate(&a)?;
    let width = a.width;
    let timing = measure_latencies(&p.run.records)?;
    let mut wrong = 0;
    let transactions: Vec<Value> = p
        .run
        .records
        .iter()
        .map(|r| {
            let expected = oracle_add(r.operands.a, r.operands.b, r.operands.cin, width).ok();
            let ok = expected == Some((r.sum, r.cout));
            if !ok {
                wrong += 1;
            }
            json!({
                "a": r.operands.a,
                "b": r.operands.b,
                "cin": r.operands.cin as u8,
                "sum": r.sum,
                "cout": r.cout as u8,
                "correct": ok,
                "forward_ps": r.forward_ps(),
                "reverse_ps": r.reverse_ps(),
                "cycle_ps": r.cycle_ps(),
            })
        })
        .collect();
    let protocol = audit_protocol(&p.run.trace, &p.system.adder);
    let cover = check_monotonic_cover(&p.system.netlist, &p.run.trace);
    let orphans = detect_orphans(&p.run.trace, &p.system.adder);
    let report = json!({
        "adder": a.adder,
        "width": width,
        "delays_ps": delays_json(&p.delays),
        "rt": { "mode": p.rt.mode, "pad_ps": p.rt.pad_ps },
        "transactions": p.run.records.len(),
        "events": p.run.trace.events.len(),
        "wrong_results": wrong,
        "forward_ps": stats_json(&timing.forward),
        "reverse_ps": stats_json(&timing.reverse),
        "cycle_ps": stats_json(&timing.cycle),
        "stage_forward_max_ps": timing.stage_forward_max,
        "stage_reverse_max_ps": timing.stage_reverse_max,
        "rt_violations": p.run.rt_violations.len(),
        "rt_violation_list": p.run.rt_violations,
        "protocol_violations": protocol.len(),
        "protocol_violation_list": protocol,
        "cover_violations": cover.len(),
        "orphans": orphans.len(),
        "records": transactions,
    });
    emit_json(&a.common, &report)?;
    let findings = wrong > 0 || !p.run.rt_violations.is_empty() || !protocol.is_empty() || !cover.is_empty() || !orphans.is_empty();
    Ok(outcome(&a.common, findings))
}

fn orphans(a: SimArgs) -> Result<Outcome> {
    let p = simulate(&a)?;
    let report = detect_orphans(&p.run.trace, &p.system.adder);
    let mut by_wire: BTreeMap<&str, usize> = BTreeMap::new();
    for o in &report.orphans {
        *by_wire.entry(o.wire.as_str()).or_default() += 1;
    }
    let out = json!({
        "adder": a.adder,
        "width": a.width,
        "transactions": p.run.records.len(),
        "orphans": report.len(),
        "by_wire": by_wire,
        "rt_violations": p.run.rt_violations.len(),
        "orphan_list": report.orphans,
    });
    emit_json(&a.common, &out)?;
    Ok(outcome(&a.common, !report.is_empty() || !p.run.rt_violations.is_empty()))
}

fn classify(a: ClassifyArgs) -> Result<Outcome> {
    let d = design(&a.adder)?;
    let netlist = match a.width {
        None => d.build(),
        Some(w) => build_rca(w, d.as_ref()).rca,
    };
    let class = classify_indication(&netlist, &load_delays(&a.delays)?)?;
    emit_json(
        &a.common,
        &json!({
            "adder": a.adder,
            "width": a.width.unwrap_or(1),
            "set_phase": class.set_phase,
            "reset_phase": class.reset_phase,
            "overall": class.overall,
        }),
    )?;
    Ok(Outcome::Clean)
}

fn slack(a: SlackArgs) -> Result<Outcome> {
    let d = design(&a.adder)?;
    let delays = load_delays(&a.delays)?;
    let path = critical_path_elements(d.as_ref());
    let path_ps = delays.path_delay(&path.kinds)?;
    let mut findings = false;
    let slack = if d.needs_relative_timing() {
        let s = compute_timing_slack(d.as_ref(), &delays)?;
        findings |= [&s.propagate, &s.generate, &s.kill].iter().any(|p| p.slack_ps < 0);
        serde_json::to_value(&s)?
    } else {
        Value::Null
    };
    let mut out = json!({
        "adder": a.adder,
        "critical_path": { "kinds": path.kinds, "gates": path.gates, "delay_ps": path_ps },
        "slack_ps": slack.get("propagate").and_then(|p| p.get("slack_ps")).cloned().unwrap_or(Value::Null),
        "slack": slack,
    });
    if a.simulate && d.needs_relative_timing() {
        let measured = [SlackScenario::Propagate, SlackScenario::Generate, SlackScenario::Kill]
            .into_iter()
            .map(|s| Ok(json!({ "scenario": s, "measured": measure_slack_by_simulation(d.as_ref(), &delays, s)? })))
            .collect::<Result<Vec<Value>>>()?;
        out["measured"] = json!(measured);
    }
    emit_json(&a.common, &out)?;
    Ok(outcome(&a.common, findings))
}

fn cycle_model(a: CycleModelArgs) -> Result<Outcome> {
    let style: CycleStyle = a.style.parse()?;
    let e = analytic_cycle_time(style, a.n, a.m, a.tfa_ns)?;
    let text = format!(
        "style,n,m,tfa_ns,forward_ns,reverse_ns,cycle_ns\n{style},{},{},{},{},{},{}\n",
        a.n,
        a.m,
        a.tfa_ns,
        fmt_ns(e.forward),
        fmt_ns(e.reverse),
        fmt_ns(e.cycle)
    );
    emit(&a.common, &text)?;
    Ok(Outcome::Clean)
}

fn table4(a: Table4Args) -> Result<Outcome> {
    let table2 = match &a.data {
        Some(p) => parse_table2(&read(p)?)?,
        None => bundled_table2()?,
    };
    let published = match &a.published {
        Some(p) => parse_table4(&read(p)?)?,
        None => bundled_table4()?,
    };
    let table = reproduce_table4(&table2, &published)?;
    emit(&a.common, &table.to_csv())?;
    let compared = table.cells.iter().filter(|c| c.delta_ns.is_some()).count();
    let max = table.max_abs_delta();
    match max {
        Some(m) => eprintln!("{compared} cells compared, max |delta| = {m:.4} ns"),
        None => eprintln!("no published cells to compare"),
    }
    Ok(outcome(&a.common, max.is_some_and(|m| m > a.tolerance_ns)))
}

fn carry_stats(a: CarryStatsArgs) -> Result<Outcome> {
    let stats = if let Some(name) = &a.trace_adder {
        trace_chain_stats(design(name)?.as_ref(), a.width, &load_delays(&a.delays)?)?
    } else if a.exhaustive {
        exhaustive_chain_stats(a.width)?
    } else {
        carry_chain_stats(a.width, a.samples, a.seed.context("--seed is required for sampling")?)?
    };
    eprintln!(
        "n={} samples={} mean={:.3} P(<=4)={:.4} P(<=8)={:.4} plain_mean={:.3}",
        stats.width,
        stats.samples,
        stats.mean,
        stats.fraction_at_most(4),
        stats.fraction_at_most(8),
        stats.plain_mean
    );
    match a.format.as_str() {
        "csv" => emit(&a.common, &stats.to_csv())?,
        "json" => emit_json(&a.common, &serde_json::to_value(&stats)?)?,
        other => bail!("unknown format `{other}` (csv or json)"),
    }
    Ok(Outcome::Clean)
}

/// Reads and parses a netlist file. Schema problems are left to
/// [`validate_netlist`].
pub fn parse_netlist_file(path: &Path) -> Result<Netlist> {
    let text = read(path)?;
    Netlist::from_json(&text).with_context(|| format!("in {}", path.display()))
}

fn validate(a: ValidateArgs) -> Result<Outcome> {
    let netlist = parse_netlist_file(&a.netlist)?;
    let report = validate_netlist(&netlist);
    let counts: BTreeMap<String, usize> = netlist.kind_counts().into_iter().map(|(k, c)| (k.to_string(), c)).collect();
    emit_json(
        &a.common,
        &json!({
            "gates": netlist.gates.len(),
            "wires": netlist.wires().len(),
            "inputs": netlist.inputs.len(),
            "outputs": netlist.outputs.len(),
            "kind_counts": counts,
            "clean": report.is_clean(),
            "violations": report.violations,
        }),
    )?;
    Ok(outcome(&a.common, !report.is_clean()))
}
