//! Deterministic simulation of the alternating bit and BitVote protocols
//! over a lossy network.
//!
//! Runs produce one trace per participant in the monitor's event format.
//! All randomness comes from a single [`SplitMix64`] stream seeded from the
//! configuration, so equal configurations give byte-identical output.

mod abp;
mod bitvote;
mod net;
mod rng;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Direction, Value};
use crate::monitor::{write_jsonl, TraceEvent};

pub use abp::{run_abp, AbpConfig};
pub use bitvote::{majority_bit, run_bitvote, BitVoteConfig};
pub use net::{EventKind, LinkFault, NetConfig, NetStats, Network, SimEvent, DEFAULT_TICK_BUDGET};
pub use rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{name} probability must lie in range, got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("{name} must be at least {min}, got {value}")]
    TooSmall { name: &'static str, min: u64, value: u64 },
}

fn at_least(name: &'static str, min: u64, value: u64) -> Result<(), SimError> {
    if value < min {
        Err(SimError::TooSmall { name, min, value })
    } else {
        Ok(())
    }
}

/// Run metadata written next to the traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub protocol: String,
    pub seed: u64,
    pub ticks: u64,
    pub truncated: bool,
    pub config: serde_json::Value,
    pub events: BTreeMap<String, usize>,
    pub network: NetStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub traces: BTreeMap<String, Vec<TraceEvent>>,
    pub manifest: Manifest,
}

impl SimRun {
    pub fn trace(&self, participant: &str) -> &[TraceEvent] {
        self.traces.get(participant).map_or(&[], Vec::as_slice)
    }

    /// Writes `<participant>.jsonl` per trace and `manifest.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (who, events) in &self.traces {
            let mut w = BufWriter::new(fs::File::create(dir.join(format!("{who}.jsonl")))?);
            write_jsonl(&mut w, events)?;
            w.flush()?;
        }
        let mut manifest = serde_json::to_string_pretty(&self.manifest)?;
        manifest.push('\n');
        fs::write(dir.join("manifest.json"), manifest)
    }
}

/// Per-participant traces with sequence numbers assigned in order.
struct Recorder {
    names: Vec<String>,
    traces: BTreeMap<String, Vec<TraceEvent>>,
}

impl Recorder {
    fn new(names: &[String]) -> Self {
        Recorder {
            names: names.to_vec(),
            traces: names.iter().map(|n| (n.clone(), Vec::new())).collect(),
        }
    }

    fn record(&mut self, who: usize, action: &str, dir: Direction) {
        let name = &self.names[who];
        let trace = self.traces.get_mut(name).expect("participant registered");
        let seq = trace.len() as u64;
        trace.push(TraceEvent::new(name, action, dir, Value::None, seq));
    }

    fn finish<C: Serialize, M: Clone>(self, protocol: &str, cfg: &C, net_cfg: &NetConfig, net: &Network<M>) -> SimRun {
        let events = self.traces.iter().map(|(k, v)| (k.clone(), v.len())).collect();
        SimRun {
            manifest: Manifest {
                protocol: protocol.into(),
                seed: net_cfg.seed,
                ticks: net.now(),
                truncated: net.truncated(),
                config: serde_json::to_value(cfg).expect("config serializes"),
                events,
                network: net.stats(),
            },
            traces: self.traces,
        }
    }
}
