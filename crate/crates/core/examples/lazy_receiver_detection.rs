//! A receiver that acknowledges only 60% of messages drifts outside the
//! declared 0.5 ratio for `ack`.

use tsmon::bundled;
use tsmon::monitor::{run_trace, MonitorConfig, Verdict};
use tsmon::sim::{run_abp, AbpConfig, NetConfig};

fn main() {
    let spec = bundled::load(bundled::RECEIVER);
    let conf = MonitorConfig::new(0.1, 20).unwrap();
    for seed in 1..=5 {
        let net = NetConfig {
            drop_prob: 0.2,
            ..NetConfig::with_seed(seed)
        };
        let cfg = AbpConfig {
            receiver_ack_prob: 0.6,
            ..AbpConfig::new(net, 200)
        };
        let run = run_abp(&cfg).unwrap();
        let info = run_trace(&spec, &conf, run.trace("receiver")).unwrap();
        let first = info
            .log
            .iter()
            .find(|e| e.action == "ack" && e.verdict == Verdict::DeviationLow);
        match first {
            Some(e) => println!(
                "seed {seed}: ack low at event {} (observed {:.3})",
                e.event_index,
                e.observed.unwrap()
            ),
            None => println!("seed {seed}: no deviation"),
        }
    }
}
