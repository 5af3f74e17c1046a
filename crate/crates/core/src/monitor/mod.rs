//! Runtime monitoring of action ratios.
//!
//! Each legal event is executed on the typestate. Events on actions with a
//! numeric ratio `mu` also update the per-state counters and are compared
//! against the interval `[mu - E, mu + E]` using the estimate
//! `(p + 1) / (n + 1)`, taken from the counters before the event.

mod trace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ProtocolSpec, Ratio};
use crate::semantics::{self, SemanticsError, VarStore};

pub use trace::{read_trace, write_jsonl, TraceError, TraceEvent};

pub const DEFAULT_ERROR_BOUND: f64 = 0.1;
pub const DEFAULT_WARMUP: u64 = 10;

/// Absorbs rounding in `mu +- E` so that boundary estimates stay inside.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("error bound must be positive and finite, got {0}")]
    ErrorBound(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig {
    error_bound: f64,
    per_action_error: BTreeMap<(String, String), f64>,
    warmup: u64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            error_bound: DEFAULT_ERROR_BOUND,
            per_action_error: BTreeMap::new(),
            warmup: DEFAULT_WARMUP,
        }
    }
}

fn check_bound(e: f64) -> Result<f64, ConfigError> {
    if e.is_finite() && e > 0.0 {
        Ok(e)
    } else {
        Err(ConfigError::ErrorBound(e))
    }
}

impl MonitorConfig {
    pub fn new(error_bound: f64, warmup: u64) -> Result<Self, ConfigError> {
        Ok(MonitorConfig {
            error_bound: check_bound(error_bound)?,
            per_action_error: BTreeMap::new(),
            warmup,
        })
    }

    /// Overrides the bound for one action of one state.
    pub fn with_action_error(mut self, state: &str, action: &str, e: f64) -> Result<Self, ConfigError> {
        self.per_action_error
            .insert((state.into(), action.into()), check_bound(e)?);
        Ok(self)
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn warmup(&self) -> u64 {
        self.warmup
    }

    pub fn error_for(&self, state: &str, action: &str) -> f64 {
        self.per_action_error
            .get(&(state.to_string(), action.to_string()))
            .copied()
            .unwrap_or(self.error_bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    DeviationLow,
    DeviationHigh,
    Warmup,
    Illegal,
}

/// One monitored or illegal event. Illegal entries carry no ratio data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub state: String,
    pub action: String,
    pub mu: Option<f64>,
    pub interval: Option<[f64; 2]>,
    pub observed: Option<f64>,
    pub verdict: Verdict,
    pub event_index: u64,
}

/// Monitor configuration: typestate configuration plus counters and log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MTInfo {
    pub state: String,
    pub store: VarStore,
    pub n: BTreeMap<String, u64>,
    pub p: BTreeMap<(String, String), u64>,
    pub log: Vec<LogEntry>,
}

impl MTInfo {
    pub fn initial(spec: &ProtocolSpec) -> Result<Self, SemanticsError> {
        let t = semantics::initial_config(spec)?;
        Ok(MTInfo {
            state: t.state,
            store: t.store,
            n: BTreeMap::new(),
            p: BTreeMap::new(),
            log: Vec::new(),
        })
    }

    pub fn n_of(&self, state: &str) -> u64 {
        self.n.get(state).copied().unwrap_or(0)
    }

    pub fn p_of(&self, state: &str, action: &str) -> u64 {
        self.p
            .get(&(state.to_string(), action.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

fn classify(observed: f64, low: f64, high: f64) -> Verdict {
    if observed < low - BOUNDARY_SLACK {
        Verdict::DeviationLow
    } else if observed > high + BOUNDARY_SLACK {
        Verdict::DeviationHigh
    } else {
        Verdict::Ok
    }
}

/// Consumes one event. Never fails: illegal events are logged and leave
/// the configuration otherwise untouched.
pub fn monitor_step(spec: &ProtocolSpec, mut cfg: MTInfo, conf: &MonitorConfig, ev: &TraceEvent) -> MTInfo {
    let illegal = |cfg: &mut MTInfo| {
        cfg.log.push(LogEntry {
            state: cfg.state.clone(),
            action: ev.action.clone(),
            mu: None,
            interval: None,
            observed: None,
            verdict: Verdict::Illegal,
            event_index: ev.seq,
        })
    };

    let ts = spec.typestate();
    let ratio = match ts.find_branch(&cfg.state, &ev.action) {
        Some((dir, b)) if dir == ev.dir => b.ratio,
        _ => {
            illegal(&mut cfg);
            return cfg;
        }
    };
    let current = semantics::TInfo {
        state: cfg.state.clone(),
        store: cfg.store.clone(),
    };
    let next = match semantics::step(spec, &current, &ev.action, &ev.value) {
        Ok(out) => out.next,
        Err(_) => {
            illegal(&mut cfg);
            return cfg;
        }
    };

    if let Ratio::Value(mu) = ratio {
        let s = cfg.state.clone();
        let n = cfg.n.entry(s.clone()).or_insert(0);
        let p = cfg.p.entry((s.clone(), ev.action.clone())).or_insert(0);
        let observed = (*p + 1) as f64 / (*n + 1) as f64;
        *n += 1;
        *p += 1;
        let e = conf.error_for(&s, &ev.action);
        let (low, high) = (mu - e, mu + e);
        let verdict = if *n < conf.warmup {
            Verdict::Warmup
        } else {
            classify(observed, low, high)
        };
        cfg.log.push(LogEntry {
            state: s,
            action: ev.action.clone(),
            mu: Some(mu),
            interval: Some([low, high]),
            observed: Some(observed),
            verdict,
            event_index: ev.seq,
        });
    }
    cfg.state = next.state;
    cfg.store = next.store;
    cfg
}

/// Folds [`monitor_step`] over `events` from the initial configuration.
pub fn run_trace(spec: &ProtocolSpec, conf: &MonitorConfig, events: &[TraceEvent]) -> Result<MTInfo, SemanticsError> {
    let init = MTInfo::initial(spec)?;
    Ok(events.iter().fold(init, |cfg, ev| monitor_step(spec, cfg, conf, ev)))
}

/// Verdict counts over a log.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub events: usize,
    pub monitored: usize,
    pub ok: usize,
    pub warmup: usize,
    pub deviations: usize,
    pub illegal: usize,
}

impl Summary {
    pub fn of(events: usize, log: &[LogEntry]) -> Self {
        let mut s = Summary {
            events,
            ..Summary::default()
        };
        for e in log {
            match e.verdict {
                Verdict::Ok => s.ok += 1,
                Verdict::Warmup => s.warmup += 1,
                Verdict::DeviationLow | Verdict::DeviationHigh => s.deviations += 1,
                Verdict::Illegal => s.illegal += 1,
            }
        }
        s.monitored = s.ok + s.warmup + s.deviations;
        s
    }

    pub fn is_clean(&self) -> bool {
        self.deviations == 0 && self.illegal == 0
    }
}

/// Incremental monitor for one participant.
#[derive(Debug, Clone)]
pub struct Monitor<'a> {
    spec: &'a ProtocolSpec,
    conf: MonitorConfig,
    info: MTInfo,
}

impl<'a> Monitor<'a> {
    pub fn new(spec: &'a ProtocolSpec, conf: MonitorConfig) -> Result<Self, SemanticsError> {
        Ok(Monitor {
            spec,
            conf,
            info: MTInfo::initial(spec)?,
        })
    }

    /// Feeds one event; returns the entry it logged, if any.
    pub fn observe(&mut self, ev: &TraceEvent) -> Option<&LogEntry> {
        let before = self.info.log.len();
        let info = std::mem::take(&mut self.info);
        self.info = monitor_step(self.spec, info, &self.conf, ev);
        self.info.log.get(before)
    }

    pub fn info(&self) -> &MTInfo {
        &self.info
    }

    pub fn into_info(self) -> MTInfo {
        self.info
    }
}
