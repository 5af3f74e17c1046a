//! The `tsmon` command line.
//!
//! Exit codes: 0 success, 1 diagnostics or monitor findings, 2 usage or
//! I/O error, 3 parse error. Results go to standard output as JSON;
//! diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dsl::parse_protocol;
use crate::model::ProtocolSpec;
use crate::monitor::{self, MonitorConfig, Summary, DEFAULT_ERROR_BOUND, DEFAULT_WARMUP};
use crate::sim::{self, AbpConfig, BitVoteConfig, NetConfig, SimRun};
use crate::wellformed::{self, build_trs, export_dot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Findings = 1,
    Usage = 2,
    Parse = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tsmon",
    version,
    about = "Typestate validation, simulation and ratio monitoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a protocol file against the well-formedness and transition rules.
    Validate { spec: PathBuf },
    /// Export the transition graph as Graphviz DOT.
    Graph {
        spec: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Simulate a protocol over a lossy network and write traces.
    Simulate(SimulateArgs),
    /// Monitor a trace against a protocol file.
    Monitor(MonitorArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Protocol {
    Abp,
    Bitvote,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    protocol: Protocol,
    #[arg(long, env = "TSMON_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    #[arg(long, default_value_t = 0.0)]
    dup: f64,
    /// Bit flips for abp (default 10), voting rounds for bitvote (default 1).
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long, default_value_t = 2)]
    n: u64,
    #[arg(long, default_value_t = 5)]
    k: u64,
    /// Probability that the abp receiver acknowledges a message.
    #[arg(long, default_value_t = 1.0)]
    ack_prob: f64,
    /// Resend interval (abp) or retry interval (bitvote) in ticks.
    #[arg(long, default_value_t = 10)]
    interval: u64,
    #[arg(long, default_value_t = 2)]
    base_delay: u64,
    #[arg(long, default_value_t = 1)]
    jitter: u64,
    #[arg(long, default_value = "tsmon-out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MonitorArgs {
    spec: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ERROR_BOUND)]
    error: f64,
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    warmup: u64,
    /// Write the log as JSON Lines.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Override a declared constant, e.g. `--const n=3`.
    #[arg(long = "const", value_parser = parse_const)]
    consts: Vec<(String, i64)>,
}

fn parse_const(s: &str) -> Result<(String, i64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value = value.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((name.trim().to_string(), value))
}

struct Failure(ExitStatus);

fn usage(msg: impl std::fmt::Display) -> Failure {
    eprintln!("error: {msg}");
    Failure(ExitStatus::Usage)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    let result = match cli.command {
        Command::Validate { spec } => cmd_validate(&spec),
        Command::Graph { spec, dot } => cmd_graph(&spec, dot.as_deref()),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Monitor(args) => cmd_monitor(&args),
    };
    match result {
        Ok(status) | Err(Failure(status)) => status.code(),
    }
}

fn load(path: &Path) -> Result<ProtocolSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format_args!("{}: {e}", path.display())))?;
    parse_protocol(&text).map_err(|e| {
        eprintln!(
            "{} {}:{}:{} {}",
            e.kind.code(),
            path.display(),
            e.span.line,
            e.span.column,
            e.message
        );
        Failure(ExitStatus::Parse)
    })
}

/// Prints diagnostics and reports whether there were none.
fn report(path: &Path, spec: &ProtocolSpec) -> bool {
    let diags = wellformed::validate(spec);
    for d in &diags {
        let (line, col) = d.span.map_or((1, 1), |s| (s.line, s.column));
        eprintln!("{} {}:{line}:{col} {}", d.rule, path.display(), d.detail);
    }
    diags.is_empty()
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(usage)?;
    writeln!(out).map_err(usage)
}

fn cmd_validate(path: &Path) -> Result<ExitStatus, Failure> {
    let spec = load(path)?;
    Ok(if report(path, &spec) {
        ExitStatus::Success
    } else {
        ExitStatus::Findings
    })
}

fn cmd_graph(path: &Path, dot: Option<&Path>) -> Result<ExitStatus, Failure> {
    let spec = load(path)?;
    if !report(path, &spec) {
        return Ok(ExitStatus::Findings);
    }
    let text = export_dot(&spec, &build_trs(&spec));
    match dot {
        Some(out) => fs::write(out, text).map_err(|e| usage(format_args!("{}: {e}", out.display())))?,
        None => print!("{text}"),
    }
    Ok(ExitStatus::Success)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitStatus, Failure> {
    let net = NetConfig {
        seed: args.seed,
        drop_prob: args.drop,
        dup_prob: args.dup,
        base_delay: args.base_delay,
        jitter: args.jitter,
        ..NetConfig::default()
    };
    let run: Result<SimRun, sim::SimError> = match args.protocol {
        Protocol::Abp => sim::run_abp(&AbpConfig {
            net,
            rounds: args.rounds.unwrap_or(10),
            resend_interval: args.interval,
            receiver_ack_prob: args.ack_prob,
        }),
        Protocol::Bitvote => sim::run_bitvote(&BitVoteConfig {
            net,
            n: args.n,
            k: args.k,
            voting_rounds: args.rounds.unwrap_or(1),
            retry_interval: args.interval,
        }),
    };
    let run = run.map_err(usage)?;
    run.write_to(&args.out)
        .map_err(|e| usage(format_args!("{}: {e}", args.out.display())))?;
    print_json(&run.manifest)?;
    Ok(ExitStatus::Success)
}

#[derive(Serialize)]
struct MonitorReport {
    #[serde(flatten)]
    summary: Summary,
    final_state: String,
}

fn cmd_monitor(args: &MonitorArgs) -> Result<ExitStatus, Failure> {
    let spec = load(&args.spec)?;
    let spec = spec
        .with_consts(args.consts.iter().map(|(k, v)| (k.as_str(), *v)))
        .map_err(usage)?;
    if !report(&args.spec, &spec) {
        return Ok(ExitStatus::Findings);
    }
    let conf = MonitorConfig::new(args.error, args.warmup).map_err(usage)?;
    let file = fs::File::open(&args.trace).map_err(|e| usage(format_args!("{}: {e}", args.trace.display())))?;
    let events =
        monitor::read_trace(BufReader::new(file)).map_err(|e| usage(format_args!("{}: {e}", args.trace.display())))?;
    let info = monitor::run_trace(&spec, &conf, &events).map_err(usage)?;
    if let Some(path) = &args.log {
        let write = || -> io::Result<()> {
            let mut w = BufWriter::new(fs::File::create(path)?);
            monitor::write_jsonl(&mut w, &info.log)?;
            w.flush()
        };
        write().map_err(|e| usage(format_args!("{}: {e}", path.display())))?;
    }
    let summary = Summary::of(events.len(), &info.log);
    print_json(&MonitorReport {
        summary,
        final_state: info.state.clone(),
    })?;
    Ok(if summary.is_clean() {
        ExitStatus::Success
    } else {
        ExitStatus::Findings
    })
}
