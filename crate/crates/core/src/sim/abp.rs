use serde::{Deserialize, Serialize};

use super::{at_least, net::probability_in_unit, EventKind, NetConfig, Network, Recorder, SimError, SimRun};
use crate::model::Direction;

const SENDER: usize = 0;
const RECEIVER: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbpConfig {
    pub net: NetConfig,
    pub rounds: u64,
    pub resend_interval: u64,
    /// Probability that the receiver acknowledges a received `msg`. Below
    /// one it models a lazy receiver.
    pub receiver_ack_prob: f64,
}

impl AbpConfig {
    pub fn new(net: NetConfig, rounds: u64) -> Self {
        AbpConfig {
            net,
            rounds,
            resend_interval: 10,
            receiver_ack_prob: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.net.validate()?;
        at_least("rounds", 1, self.rounds)?;
        at_least("resend interval", 1, self.resend_interval)?;
        probability_in_unit("ack", self.receiver_ack_prob)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Msg {
    Msg(bool),
    Ack(bool),
}

/// Runs the alternating bit protocol between `sender` and `receiver`.
///
/// The sender resends `msg(bit)` every `resend_interval` ticks until the
/// matching `ack(bit)` arrives, then flips the bit. The receiver
/// acknowledges every `msg`, re-acknowledging duplicates of the last bit.
/// Outdated acknowledgements are ignored and do not appear in the trace.
pub fn run_abp(cfg: &AbpConfig) -> Result<SimRun, SimError> {
    cfg.validate()?;
    let names = vec!["sender".to_string(), "receiver".to_string()];
    let mut net: Network<Msg> = Network::new(&cfg.net, names.clone());
    let mut rec = Recorder::new(&names);

    let mut bit = false;
    let mut flips = 0;
    let mut generation = 0;
    let mut expected = false;

    let send_msg = |net: &mut Network<Msg>, rec: &mut Recorder, bit: bool, generation: u64| {
        rec.record(SENDER, "msg", Direction::Out);
        net.send(SENDER, RECEIVER, Msg::Msg(bit));
        net.timer(SENDER, generation, cfg.resend_interval);
    };
    send_msg(&mut net, &mut rec, bit, generation);

    while let Some(ev) = net.next_event() {
        match (ev.dst, ev.kind) {
            (SENDER, EventKind::Timer(g)) if g == generation && flips < cfg.rounds => {
                send_msg(&mut net, &mut rec, bit, generation);
            }
            (SENDER, EventKind::Deliver { msg: Msg::Ack(b), .. }) if b == bit && flips < cfg.rounds => {
                rec.record(SENDER, "ack", Direction::In);
                flips += 1;
                bit = !bit;
                generation += 1;
                if flips < cfg.rounds {
                    send_msg(&mut net, &mut rec, bit, generation);
                }
            }
            (RECEIVER, EventKind::Deliver { msg: Msg::Msg(b), .. }) => {
                rec.record(RECEIVER, "msg", Direction::In);
                if b == expected {
                    expected = !expected;
                }
                let acks = cfg.receiver_ack_prob >= 1.0 || net.rng().chance(cfg.receiver_ack_prob);
                if acks {
                    rec.record(RECEIVER, "ack", Direction::Out);
                    net.send(RECEIVER, SENDER, Msg::Ack(b));
                }
            }
            _ => {}
        }
    }
    Ok(rec.finish("abp", cfg, &cfg.net, &net))
}
