use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use super::SimError;

pub const DEFAULT_TICK_BUDGET: u64 = 100_000;

/// Drop probability for one directed link, replacing the global one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkFault {
    pub from: String,
    pub to: String,
    pub drop_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub seed: u64,
    pub drop_prob: f64,
    pub dup_prob: f64,
    pub base_delay: u64,
    pub jitter: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub link_faults: Vec<LinkFault>,
    pub tick_budget: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            seed: 0,
            drop_prob: 0.0,
            dup_prob: 0.0,
            base_delay: 2,
            jitter: 1,
            link_faults: Vec::new(),
            tick_budget: DEFAULT_TICK_BUDGET,
        }
    }
}

fn probability(name: &'static str, p: f64, inclusive: bool) -> Result<(), SimError> {
    let ok = p >= 0.0 && if inclusive { p <= 1.0 } else { p < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(SimError::Probability { name, value: p })
    }
}

pub(super) fn probability_in_unit(name: &'static str, p: f64) -> Result<(), SimError> {
    probability(name, p, true)
}

impl NetConfig {
    pub fn with_seed(seed: u64) -> Self {
        NetConfig {
            seed,
            ..NetConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        probability("drop", self.drop_prob, true)?;
        probability("dup", self.dup_prob, false)?;
        for f in &self.link_faults {
            probability("link drop", f.drop_prob, true)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind<M> {
    Deliver { from: usize, msg: M },
    Timer(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent<M> {
    pub time: u64,
    pub dst: usize,
    pub kind: EventKind<M>,
}

struct Queued<M> {
    seq: u64,
    ev: SimEvent<M>,
}

impl<M> PartialEq for Queued<M> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<M> Eq for Queued<M> {}

impl<M> PartialOrd for Queued<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the earliest (time, seq) first.
impl<M> Ord for Queued<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.ev.time, other.seq).cmp(&(self.ev.time, self.seq))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NetStats {
    pub sent: u64,
    pub dropped: u64,
    pub duplicated: u64,
}

/// Discrete-event network between named participants.
pub struct Network<M> {
    cfg: NetConfig,
    names: Vec<String>,
    rng: SplitMix64,
    queue: BinaryHeap<Queued<M>>,
    next_seq: u64,
    now: u64,
    truncated: bool,
    stats: NetStats,
}

impl<M: Clone> Network<M> {
    pub fn new(cfg: &NetConfig, names: Vec<String>) -> Self {
        Network {
            cfg: cfg.clone(),
            names,
            rng: SplitMix64::new(cfg.seed),
            queue: BinaryHeap::new(),
            next_seq: 0,
            now: 0,
            truncated: false,
            stats: NetStats::default(),
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn stats(&self) -> NetStats {
        self.stats
    }

    pub fn rng(&mut self) -> &mut SplitMix64 {
        &mut self.rng
    }

    fn push(&mut self, ev: SimEvent<M>) {
        self.queue.push(Queued { seq: self.next_seq, ev });
        self.next_seq += 1;
    }

    fn drop_prob(&self, from: usize, to: usize) -> f64 {
        self.cfg
            .link_faults
            .iter()
            .find(|f| f.from == self.names[from] && f.to == self.names[to])
            .map_or(self.cfg.drop_prob, |f| f.drop_prob)
    }

    fn delay(&mut self) -> u64 {
        self.cfg.base_delay + self.rng.below(self.cfg.jitter + 1)
    }

    /// Sends `msg`. Loss and duplication are independent draws; each copy
    /// gets its own delay.
    pub fn send(&mut self, from: usize, to: usize, msg: M) {
        self.stats.sent += 1;
        let dropped = self.rng.chance(self.drop_prob(from, to));
        let duplicated = self.rng.chance(self.cfg.dup_prob);
        if dropped {
            self.stats.dropped += 1;
            return;
        }
        let copies = if duplicated { 2 } else { 1 };
        if duplicated {
            self.stats.duplicated += 1;
        }
        for _ in 0..copies {
            let time = self.now + self.delay();
            self.push(SimEvent {
                time,
                dst: to,
                kind: EventKind::Deliver { from, msg: msg.clone() },
            });
        }
    }

    pub fn timer(&mut self, dst: usize, tag: u64, after: u64) {
        let time = self.now + after;
        self.push(SimEvent {
            time,
            dst,
            kind: EventKind::Timer(tag),
        });
    }

    /// Next event in time order, or `None` when the queue is empty or the
    /// tick budget is exceeded.
    pub fn next_event(&mut self) -> Option<SimEvent<M>> {
        let q = self.queue.pop()?;
        if q.ev.time > self.cfg.tick_budget {
            self.truncated = true;
            self.queue.clear();
            return None;
        }
        self.now = q.ev.time;
        Some(q.ev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(cfg: NetConfig) -> Network<u32> {
        Network::new(&cfg, vec!["a".into(), "b".into()])
    }

    #[test]
    fn events_pop_in_time_then_insertion_order() {
        let mut n = net(NetConfig::default());
        n.timer(0, 1, 5);
        n.timer(1, 2, 3);
        n.timer(0, 3, 5);
        let tags: Vec<_> = std::iter::from_fn(|| n.next_event())
            .map(|e| match e.kind {
                EventKind::Timer(t) => (e.time, t),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(tags, [(3, 2), (5, 1), (5, 3)]);
    }

    #[test]
    fn link_fault_overrides_global_drop() {
        let cfg = NetConfig {
            link_faults: vec![LinkFault {
                from: "b".into(),
                to: "a".into(),
                drop_prob: 1.0,
            }],
            ..NetConfig::default()
        };
        let mut n = net(cfg);
        for i in 0..20 {
            n.send(0, 1, i);
            n.send(1, 0, i);
        }
        let got: Vec<_> = std::iter::from_fn(|| n.next_event()).collect();
        assert_eq!(got.len(), 20);
        assert!(got.iter().all(|e| e.dst == 1));
        assert_eq!(
            n.stats(),
            NetStats {
                sent: 40,
                dropped: 20,
                duplicated: 0
            }
        );
    }

    #[test]
    fn delays_stay_in_range() {
        let mut n = net(NetConfig {
            base_delay: 4,
            jitter: 3,
            dup_prob: 0.5,
            ..NetConfig::default()
        });
        for i in 0..200 {
            n.send(0, 1, i);
        }
        let evs: Vec<_> = std::iter::from_fn(|| n.next_event()).collect();
        assert!(evs.len() > 200);
        assert!(evs.iter().all(|e| (4..=7).contains(&e.time)));
    }

    #[test]
    fn budget_truncates() {
        let mut n = net(NetConfig {
            tick_budget: 10,
            ..NetConfig::default()
        });
        n.timer(0, 0, 10);
        n.timer(0, 1, 11);
        assert!(n.next_event().is_some());
        assert!(n.next_event().is_none());
        assert!(n.truncated());
    }

    #[test]
    fn validation() {
        assert!(NetConfig {
            drop_prob: 1.0,
            ..NetConfig::default()
        }
        .validate()
        .is_ok());
        assert!(NetConfig {
            drop_prob: 1.5,
            ..NetConfig::default()
        }
        .validate()
        .is_err());
        assert!(NetConfig {
            dup_prob: 1.0,
            ..NetConfig::default()
        }
        .validate()
        .is_err());
        assert!(NetConfig {
            drop_prob: -0.1,
            ..NetConfig::default()
        }
        .validate()
        .is_err());
    }
}
