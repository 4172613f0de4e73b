//! `rtzsim`: build, simulate and analyse dual-rail return-to-zero adders.
//!
//! Exit status: 0 on success, 1 when `--strict` is given and the analysis
//! found something (orphans, timing violations, wrong sums, table deltas out
//! of tolerance, netlist violations), 2 on usage, parse or I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "rtzsim", version, about = "Dual-rail return-to-zero adder simulator and analyser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a full adder or ripple-carry adder netlist as JSON.
    Build(BuildArgs),
    /// Run handshake transactions and report latencies and findings.
    Sim(SimArgs),
    /// Classify indication (strong / weak / early) by exhaustive input subsets.
    Classify(ClassifyArgs),
    /// Report unacknowledged transitions over a transaction run.
    Orphans(SimArgs),
    /// Timing slack of the carry-before-sum assumption and the per-stage critical path.
    Slack(SlackArgs),
    /// Analytic forward / reverse / cycle time of an n-bit adder with an m-stage chain.
    CycleModel(CycleModelArgs),
    /// Cycle-time table for m = 4, 8, 16, 32 from published 32-bit latencies.
    Table4(Table4Args),
    /// Longest carry-chain distribution.
    CarryStats(CarryStatsArgs),
    /// Parse and check a netlist file.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Write the main output here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Exit with status 1 when the analysis reports findings.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct DelayArgs {
    /// Delay preset (default, seitz-slack, uniform, adversarial) or a delay config file.
    #[arg(long, default_value = "default")]
    delays: String,
    /// Path-constraint file solved on top of `--delays`.
    #[arg(long)]
    constraints: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// Full-adder design.
    #[arg(long)]
    adder: String,
    /// Ripple-carry width; without it the stand-alone full adder is emitted.
    #[arg(long)]
    width: Option<usize>,
    /// Include the input completion detector (`ackout`).
    #[arg(long, requires = "width")]
    system: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
#[group(id = "stimulus", multiple = false)]
struct Stimulus {
    /// Every input codeword once (widths up to 8).
    #[arg(long)]
    exhaustive: bool,
    /// Every ordered pair of codewords back to back (widths up to 4).
    #[arg(long)]
    pairs: bool,
    /// N uniformly random operand sets; needs `--seed`.
    #[arg(long, value_name = "N", requires = "seed")]
    random: Option<usize>,
    /// One transaction with a carry generated at bit 0 and propagated through bits 1..M.
    #[arg(long, value_name = "M")]
    forced_chain: Option<usize>,
    /// Explicit operands `A:B:CIN` (decimal or 0x-hex); repeatable.
    #[arg(long = "op", value_name = "A:B:CIN")]
    ops: Vec<String>,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    adder: String,
    #[arg(long, default_value_t = 2)]
    width: usize,
    #[command(flatten)]
    delays: DelayArgs,
    /// Relative-timing policy: off, check or enforce.
    #[arg(long, default_value = "check")]
    rt: String,
    /// Padding added to sum-reset edges under `--rt enforce`, in ps.
    #[arg(long, default_value_t = 100)]
    pad_ps: u64,
    #[command(flatten)]
    stimulus: Stimulus,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the event trace as JSON lines.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Write the event trace as VCD.
    #[arg(long, value_name = "FILE")]
    vcd: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    adder: String,
    /// Classify a ripple-carry adder of this width instead of one stage.
    #[arg(long)]
    width: Option<usize>,
    #[command(flatten)]
    delays: DelayArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SlackArgs {
    #[arg(long)]
    adder: String,
    #[command(flatten)]
    delays: DelayArgs,
    /// Also measure the slack on simulated two-stage resets.
    #[arg(long)]
    simulate: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CycleModelArgs {
    /// strong, weak-basic, weak-distributed, early-output or relative-timed.
    #[arg(long)]
    style: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Full-adder delay in ns.
    #[arg(long)]
    tfa_ns: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Table4Args {
    /// Published 32-bit adder data (CSV); the bundled copy by default.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Published cycle times to compare against (CSV).
    #[arg(long)]
    published: Option<PathBuf>,
    /// Largest accepted |delta| under `--strict`, in ns.
    #[arg(long, default_value_t = 0.01)]
    tolerance_ns: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CarryStatsArgs {
    #[arg(long)]
    width: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Required for sampling.
    #[arg(long, required_unless_present_any = ["exhaustive", "trace_adder"])]
    seed: Option<u64>,
    /// Enumerate every operand pair instead of sampling (widths up to 12).
    #[arg(long)]
    exhaustive: bool,
    /// Measure chains on simulated traces of this design (widths up to 8).
    #[arg(long, value_name = "ADDER", conflicts_with_all = ["seed", "exhaustive"])]
    trace_adder: Option<String>,
    #[command(flatten)]
    delays: DelayArgs,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Netlist JSON file.
    netlist: PathBuf,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(commands::Outcome::Clean) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Findings) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
