//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use tsmon::monitor::{read_trace, run_trace, write_jsonl, LogEntry, MonitorConfig, TraceEvent, Verdict};
use tsmon::semantics::{initial_config, step, TInfo};
use tsmon::wellformed::{build_trs, is_productive, is_reachable, validate, Transition};
use tsmon::{bundled, parse_protocol, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

/// The single diagnostic code a source produces, whether from parsing or
/// from validation.
fn sole_code(src: &str) -> Result<String, String> {
    match parse_protocol(src) {
        Err(e) => Ok(e.kind.code().to_string()),
        Ok(spec) => {
            let diags = validate(&spec);
            match diags.as_slice() {
                [d] => Ok(d.rule.code().to_string()),
                other => Err(format!("expected one diagnostic, got {other:?}")),
            }
        }
    }
}

fn mutate(src: &str, from: &str, to: &str) -> String {
    assert!(src.contains(from), "mutation anchor `{from}` missing");
    src.replacen(from, to, 1)
}

fn corpus_and_mutations() -> Outcome {
    let start = Instant::now();
    for (name, src) in bundled::ALL {
        let spec = parse_protocol(src).map_err(|e| format!("{name}: {e}"))?;
        let diags = validate(&spec);
        ensure(diags.is_empty(), format!("{name}: {diags:?}"))?;
    }
    let mutations = [
        (
            "duplicate state",
            mutate(bundled::SENDER, "state S1 =", "state S0 ="),
            "NO-DUPLICATE-STATE-NAME",
        ),
        (
            "ratio sum 0.9",
            mutate(bundled::RECEIVER, "[0.5] : R1 }", "[0.4] : R1 }"),
            "VALID-RATIO-SUM",
        ),
        (
            "missing decision label",
            mutate(bundled::AUTH, ", failure: Unauth>", ">"),
            "ENUMERATE-ALL-DECISIONS",
        ),
        (
            "unreachable state",
            mutate(bundled::AUTH, "<success: Auth", "<success: Unauth"),
            "USEFUL-STATES",
        ),
        (
            "undeclared assign key",
            mutate(bundled::LEADER, "[_; [A2]; []]", "[_; [A9]; []]"),
            "UNDECLARED-NAME",
        ),
        (
            "epsilon in decision map",
            mutate(bundled::AUTH, "failure: Unauth", "failure: _"),
            "SYNTAX",
        ),
        (
            "ratio out of range",
            mutate(bundled::RECEIVER, "[0.5] : R1 }", "[1.5] : R1 }"),
            "RATIO-RANGE",
        ),
        (
            "duplicate action",
            mutate(bundled::PEER, "void vwb(Bit)", "void vreq(Bit)"),
            "DUPLICATE-ACTION",
        ),
        (
            "boolean without decision",
            mutate(bundled::SENDER, "void ack", "boolean ack"),
            "ENUMERATE-ALL-DECISIONS",
        ),
        (
            "assignment to constant",
            mutate(bundled::LEADER, "A4: retries <-", "A4: k <-"),
            "CONST-ASSIGNMENT",
        ),
    ];
    for (what, src, expect) in &mutations {
        let got = sole_code(src).map_err(|e| format!("{what}: {e}"))?;
        ensure(&got == expect, format!("{what}: expected {expect}, got {got}"))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!(
        "{} specs clean, {} mutations flagged",
        bundled::ALL.len(),
        mutations.len()
    ))
}

fn trs_oracle() -> Outcome {
    let start = Instant::now();
    let set = |ts: &[(&str, &str, Value, &str)]| -> BTreeSet<Transition> {
        ts.iter()
            .map(|(a, m, v, b)| Transition::new(a, m, v.clone(), b))
            .collect()
    };
    let sender = build_trs(&bundled::load(bundled::SENDER));
    ensure(
        sender.tuples
            == set(&[
                ("S0", "msg", Value::None, "S1"),
                ("S1", "msg", Value::None, "S1"),
                ("S1", "ack", Value::None, "S0"),
            ]),
        format!("sender: {:?}", sender.tuples),
    )?;
    let auth = build_trs(&bundled::load(bundled::AUTH));
    ensure(
        auth.tuples
            == set(&[
                ("Unauth", "login", Value::label("success"), "Auth"),
                ("Unauth", "login", Value::label("failure"), "Unauth"),
                ("Auth", "logoff", Value::None, "Unauth"),
            ]),
        format!("auth: {:?}", auth.tuples),
    )?;
    for seed in 0..200 {
        let src = common::gen_spec(seed, true);
        let spec = parse_protocol(&src).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(validate(&spec).is_empty(), format!("seed {seed} not well-formed"))?;
        let trs = build_trs(&spec);
        ensure(
            trs.len() == common::expected_tuple_count(&spec),
            format!("seed {seed}: tuple count"),
        )?;
        let states: Vec<String> = spec.typestate().state_names().map(String::from).collect();
        let reach = common::fixpoint_reachable(&trs, &trs.start);
        let prod = common::fixpoint_productive(&trs, &states);
        for s in &states {
            ensure(
                is_reachable(s, &trs, &trs.start) == reach.contains(s),
                format!("seed {seed}: reach {s}"),
            )?;
            ensure(
                is_productive(s, &trs) == prod.contains(s),
                format!("seed {seed}: prod {s}"),
            )?;
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok("fixed sets exact, 200 random specs agree".into())
}

fn run_steps(src: &str, actions: &[&str]) -> Result<(Vec<TInfo>, Vec<bool>), String> {
    let spec = bundled::load(src);
    let mut cfg = initial_config(&spec).map_err(|e| e.to_string())?;
    let (mut configs, mut flags) = (Vec::new(), Vec::new());
    for a in actions {
        let out = step(&spec, &cfg, a, &Value::None).map_err(|e| e.to_string())?;
        flags.push(out.triggered);
        configs.push(out.next.clone());
        cfg = out.next;
    }
    Ok((configs, flags))
}

fn counter_trace() -> Outcome {
    let (cfgs, flags) = run_steps(bundled::COUNTER, &["m", "m"])?;
    let got: Vec<(&str, Option<i64>)> = cfgs.iter().map(|c| (c.state.as_str(), c.store.var("acks"))).collect();
    ensure(got == [("S0", Some(1)), ("S1", Some(0))], format!("{got:?}"))?;
    ensure(flags == [false, true], format!("{flags:?}"))?;
    Ok("<S0,{acks:1}> then <S1,{acks:0}>, triggered [false, true]".into())
}

fn leader_trajectory() -> Outcome {
    let (cfgs, _) = run_steps(bundled::LEADER, &["vreq"; 5])?;
    let last = cfgs.last().unwrap();
    ensure(last.state == "L2", format!("(a) ended in {}", last.state))?;
    ensure(
        last.store.var("acks") == Some(0) && last.store.var("retries") == Some(5),
        format!("(a) store {:?}", last.store.vars()),
    )?;
    ensure(
        cfgs[3].store.var("retries") == Some(1),
        "(a) retries before the last request",
    )?;
    let (cfgs, flags) = run_steps(bundled::LEADER, &["vreq", "vack", "vack"])?;
    ensure(
        cfgs[2].state == "L2" && flags == [true, false, true],
        format!("(b) {:?} {flags:?}", cfgs[2].state),
    )?;
    ensure(cfgs[1].store.var("acks") == Some(1), "(b) acks after first vote")?;
    Ok("retry exhaustion and quorum both reach L2".into())
}

fn monitoring_formula() -> Outcome {
    let spec = bundled::load(bundled::RECEIVER);
    let mut events = vec![TraceEvent::new("r", "msg", tsmon::Direction::In, Value::None, 0)];
    let len = 40u64;
    for i in 0..len {
        let (a, d) = if i % 2 == 0 {
            ("ack", tsmon::Direction::Out)
        } else {
            ("msg", tsmon::Direction::In)
        };
        events.push(TraceEvent::new("r", a, d, Value::None, i + 1));
    }
    let out = run_trace(&spec, &MonitorConfig::new(0.25, 0).unwrap(), &events).map_err(|e| e.to_string())?;
    ensure(out.log.len() == len as usize, "log length")?;
    let (mut mine, mut theirs) = (0u64, 0u64);
    for (i, e) in out.log.iter().enumerate() {
        // Counts before this event: the current action has `mine`, the
        // other one `theirs`.
        let n = mine + theirs;
        let expect = (mine + 1) as f64 / (n + 1) as f64;
        ensure(
            e.observed == Some(expect),
            format!("event {i}: {:?} vs {expect}", e.observed),
        )?;
        let verdict = if expect < 0.25 {
            Verdict::DeviationLow
        } else if expect > 0.75 {
            Verdict::DeviationHigh
        } else {
            Verdict::Ok
        };
        ensure(e.verdict == verdict, format!("event {i}: {:?}", e.verdict))?;
        // After this event the roles swap and the counts catch up.
        (mine, theirs) = (theirs, mine + 1);
    }
    let head: Vec<f64> = out.log.iter().take(6).map(|e| e.observed.unwrap()).collect();
    ensure(head == [1.0, 0.5, 2.0 / 3.0, 0.5, 0.6, 0.5], format!("{head:?}"))?;
    Ok(format!("{len} estimates exact"))
}

fn tsmon(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tsmon"))
        .args(args)
        .env_remove("TSMON_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) | Some(1) => Ok(out),
        code => Err(format!(
            "tsmon {args:?} exited {code:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        )),
    }
}

fn spec_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .display()
        .to_string()
}

fn read_log(path: &Path) -> Result<Vec<LogEntry>, String> {
    fs::read_to_string(path)
        .map_err(|e| e.to_string())?
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn simulate_and_monitor(dir: &Path, seed: u64, extra: &[&str]) -> Result<Vec<LogEntry>, String> {
    let out = dir.join(format!("run{seed}"));
    let seed = seed.to_string();
    let mut args = vec!["simulate", "abp", "--rounds", "200", "--drop", "0.2", "--seed", &seed];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    tsmon(&args)?;
    let log = out.join("receiver.log");
    tsmon(&[
        "monitor",
        &spec_path("receiver.tsp"),
        "--trace",
        out.join("receiver.jsonl").to_str().unwrap(),
        "--error",
        "0.1",
        "--warmup",
        "20",
        "--log",
        log.to_str().unwrap(),
    ])?;
    read_log(&log)
}

fn faithful_run() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = simulate_and_monitor(dir.path(), 42, &[])?;
    let illegal = log.iter().filter(|e| e.verdict == Verdict::Illegal).count();
    ensure(illegal == 0, format!("{illegal} illegal entries"))?;
    let judged: Vec<_> = log.iter().filter(|e| e.verdict != Verdict::Warmup).collect();
    let dev = judged
        .iter()
        .filter(|e| matches!(e.verdict, Verdict::DeviationLow | Verdict::DeviationHigh))
        .count();
    let rate = dev as f64 / judged.len().max(1) as f64;
    ensure(!judged.is_empty() && rate < 0.05, format!("deviation rate {rate}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{} entries, deviation rate {rate:.3}", log.len()))
}

fn lazy_receiver() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut first = Vec::new();
    for seed in 1..=20 {
        let log = simulate_and_monitor(dir.path(), seed, &["--ack-prob", "0.6"])?;
        let hit = log
            .iter()
            .filter(|e| e.verdict != Verdict::Illegal)
            .take(200)
            .position(|e| e.action == "ack" && e.verdict == Verdict::DeviationLow);
        match hit {
            Some(i) => first.push(i),
            None => return Err(format!("seed {seed}: no ack deviation_low in 200 entries")),
        }
    }
    Ok(format!(
        "all 20 seeds flagged, latest at entry {}",
        first.iter().max().unwrap()
    ))
}

fn epsilon_opacity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("bv");
    tsmon(&[
        "simulate",
        "bitvote",
        "--n",
        "3",
        "--k",
        "4",
        "--rounds",
        "30",
        "--drop",
        "0.2",
        "--seed",
        "8",
        "--out",
        out.to_str().unwrap(),
    ])?;
    let spec = bundled::load(bundled::PEER);
    let conf = MonitorConfig::new(0.1, 5).unwrap();
    let mut total = 0;
    for p in ["peer0", "peer1", "peer2"] {
        let file = fs::File::open(out.join(format!("{p}.jsonl"))).map_err(|e| e.to_string())?;
        let events = read_trace(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
        let vwb = events.iter().filter(|e| e.action == "vwb").count();
        ensure(vwb > 0, format!("{p}: no vwb in trace"))?;
        let with = run_trace(&spec, &conf, &events).map_err(|e| e.to_string())?;
        let filtered: Vec<TraceEvent> = events.iter().filter(|e| e.action != "vwb").cloned().collect();
        let without = run_trace(&spec, &conf, &filtered).map_err(|e| e.to_string())?;
        ensure(with.log.iter().all(|e| e.action != "vwb"), format!("{p}: vwb logged"))?;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_jsonl(&mut a, &with.log).unwrap();
        write_jsonl(&mut b, &without.log).unwrap();
        ensure(a == b, format!("{p}: logs differ"))?;
        total += vwb;
    }
    Ok(format!("{total} vwb events invisible to the log"))
}

fn read_dir_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for proto in [["abp", "--rounds", "100"], ["bitvote", "--rounds", "10"]] {
        let mut runs = Vec::new();
        for i in 0..2 {
            let out = dir.path().join(format!("{}{i}", proto[0]));
            let mut args = vec!["simulate"];
            args.extend_from_slice(&proto);
            args.extend_from_slice(&[
                "--drop",
                "0.25",
                "--dup",
                "0.1",
                "--seed",
                "1234",
                "--out",
                out.to_str().unwrap(),
            ]);
            tsmon(&args)?;
            runs.push(read_dir_bytes(&out)?);
        }
        ensure(runs[0] == runs[1], format!("{} traces differ", proto[0]))?;
        compared += runs[0].len();
    }
    let trace = dir.path().join("abp0").join("receiver.jsonl");
    let mut logs = Vec::new();
    for i in 0..2 {
        let log = dir.path().join(format!("log{i}.jsonl"));
        tsmon(&[
            "monitor",
            &spec_path("receiver.tsp"),
            "--trace",
            trace.to_str().unwrap(),
            "--log",
            log.to_str().unwrap(),
        ])?;
        logs.push(fs::read(log).map_err(|e| e.to_string())?);
    }
    ensure(logs[0] == logs[1] && !logs[0].is_empty(), "monitor logs differ")?;
    Ok(format!("{compared} files and 2 logs byte-identical"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "example corpus validates and mutations are caught",
            corpus_and_mutations,
        ),
        ("transition relation matches oracles", trs_oracle),
        ("counter semantics trace", counter_trace),
        ("leader trajectories", leader_trajectory),
        ("monitoring estimates", monitoring_formula),
        ("faithful receiver end to end", faithful_run),
        ("lazy receiver detected", lazy_receiver),
        ("unmonitored actions are invisible", epsilon_opacity),
        ("simulation and monitoring are deterministic", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS  {title} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {title} ({why})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
