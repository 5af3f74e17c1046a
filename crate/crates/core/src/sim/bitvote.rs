use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{at_least, EventKind, NetConfig, Network, Recorder, SimError, SimRun};
use crate::model::Direction;

const LEADER: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitVoteConfig {
    pub net: NetConfig,
    pub n: u64,
    pub k: u64,
    pub voting_rounds: u64,
    pub retry_interval: u64,
}

impl BitVoteConfig {
    pub fn new(net: NetConfig, n: u64, k: u64) -> Self {
        BitVoteConfig {
            net,
            n,
            k,
            voting_rounds: 1,
            retry_interval: 10,
        }
    }

    /// `k` must be at least 2: the first request leaves the start state
    /// without checking the retry budget.
    pub fn validate(&self) -> Result<(), SimError> {
        self.net.validate()?;
        at_least("n", 1, self.n)?;
        at_least("k", 2, self.k)?;
        at_least("voting rounds", 1, self.voting_rounds)?;
        at_least("retry interval", 1, self.retry_interval)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Msg {
    Vreq { round: u64 },
    Vack { round: u64, bit: bool },
    Vwb { round: u64 },
}

/// The more frequent bit; ties, including no votes, give `false`.
pub fn majority_bit(votes: impl IntoIterator<Item = bool>) -> bool {
    let (ones, zeros) = votes
        .into_iter()
        .fold((0u64, 0u64), |(o, z), b| if b { (o + 1, z) } else { (o, z + 1) });
    ones > zeros
}

struct Leader {
    round: u64,
    retries: u64,
    votes: BTreeMap<usize, bool>,
    generation: u64,
    written: Vec<bool>,
}

#[derive(Default)]
struct Peer {
    started: bool,
    current: Option<(u64, bool)>,
    concluded: Option<u64>,
}

impl Peer {
    fn is_concluded(&self, round: u64) -> bool {
        self.concluded.is_some_and(|c| round <= c)
    }
}

/// Runs `voting_rounds` rounds of BitVote between `leader` and peers
/// `peer0..peer{n-1}`.
///
/// Each request costs one retry. A round ends when all `n` peers have
/// voted or the retries are exhausted; the leader then writes back the
/// majority of the votes it holds and starts the next round. Peers vote a
/// random bit once per round and repeat it for retried requests.
/// Duplicate and outdated messages are ignored and not traced.
pub fn run_bitvote(cfg: &BitVoteConfig) -> Result<SimRun, SimError> {
    cfg.validate()?;
    let peers = cfg.n as usize;
    let names: Vec<String> = std::iter::once("leader".to_string())
        .chain((0..peers).map(|i| format!("peer{i}")))
        .collect();
    let mut net: Network<Msg> = Network::new(&cfg.net, names.clone());
    let mut rec = Recorder::new(&names);
    let mut leader = Leader {
        round: 0,
        retries: cfg.k,
        votes: BTreeMap::new(),
        generation: 0,
        written: Vec::new(),
    };
    let mut peer_state: Vec<Peer> = (0..peers).map(|_| Peer::default()).collect();

    fn conclude(cfg: &BitVoteConfig, l: &mut Leader, net: &mut Network<Msg>, rec: &mut Recorder) {
        let bit = majority_bit(l.votes.values().copied());
        l.written.push(bit);
        rec.record(LEADER, "vwb", Direction::Out);
        for p in 1..=cfg.n as usize {
            net.send(LEADER, p, Msg::Vwb { round: l.round });
        }
        l.round += 1;
        l.votes.clear();
        l.retries = cfg.k;
        l.generation += 1;
        if l.round < cfg.voting_rounds {
            request(cfg, l, net, rec);
        }
    }

    fn request(cfg: &BitVoteConfig, l: &mut Leader, net: &mut Network<Msg>, rec: &mut Recorder) {
        l.retries -= 1;
        rec.record(LEADER, "vreq", Direction::Out);
        for p in 1..=cfg.n as usize {
            net.send(LEADER, p, Msg::Vreq { round: l.round });
        }
        if l.retries == 0 {
            conclude(cfg, l, net, rec);
        } else {
            net.timer(LEADER, l.generation, cfg.retry_interval);
        }
    }

    request(cfg, &mut leader, &mut net, &mut rec);

    while let Some(ev) = net.next_event() {
        let done = leader.round >= cfg.voting_rounds;
        match (ev.dst, ev.kind) {
            (LEADER, EventKind::Timer(g)) if g == leader.generation && !done => {
                request(cfg, &mut leader, &mut net, &mut rec);
            }
            (
                LEADER,
                EventKind::Deliver {
                    from,
                    msg: Msg::Vack { round, bit },
                },
            ) if round == leader.round && !done && !leader.votes.contains_key(&from) => {
                rec.record(LEADER, "vack", Direction::In);
                leader.votes.insert(from, bit);
                if leader.votes.len() as u64 == cfg.n {
                    conclude(cfg, &mut leader, &mut net, &mut rec);
                }
            }
            (
                p,
                EventKind::Deliver {
                    msg: Msg::Vreq { round },
                    ..
                },
            ) if p != LEADER => {
                let peer = &mut peer_state[p - 1];
                if peer.is_concluded(round) || peer.current.is_some_and(|(r, _)| r > round) {
                    continue;
                }
                let vote = match peer.current {
                    Some((r, b)) if r == round => b,
                    _ => net.rng().bit(),
                };
                peer.current = Some((round, vote));
                peer.started = true;
                rec.record(p, "vreq", Direction::In);
                rec.record(p, "vack", Direction::Out);
                net.send(p, LEADER, Msg::Vack { round, bit: vote });
            }
            (
                p,
                EventKind::Deliver {
                    msg: Msg::Vwb { round },
                    ..
                },
            ) if p != LEADER => {
                let peer = &mut peer_state[p - 1];
                if !peer.started || peer.is_concluded(round) {
                    continue;
                }
                peer.concluded = Some(round);
                rec.record(p, "vwb", Direction::In);
            }
            _ => {}
        }
    }
    let mut run = rec.finish("bitvote", cfg, &cfg.net, &net);
    run.manifest.config["written_bits"] = serde_json::json!(leader.written);
    Ok(run)
}
