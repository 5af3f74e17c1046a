//! Simulate the alternating bit protocol and monitor both sides.
//!
//! `cargo run --example abp_simulation [out-dir]` also writes the traces.

use tsmon::bundled;
use tsmon::monitor::{run_trace, MonitorConfig, Summary};
use tsmon::sim::{run_abp, AbpConfig, NetConfig};

fn main() {
    let net = NetConfig {
        drop_prob: 0.2,
        dup_prob: 0.05,
        ..NetConfig::with_seed(42)
    };
    let run = run_abp(&AbpConfig::new(net, 200)).unwrap();
    println!("{}", serde_json::to_string_pretty(&run.manifest).unwrap());

    let conf = MonitorConfig::new(0.1, 20).unwrap();
    for (who, spec) in [("sender", bundled::SENDER), ("receiver", bundled::RECEIVER)] {
        let events = run.trace(who);
        let info = run_trace(&bundled::load(spec), &conf, events).unwrap();
        println!("{who}: {:?}", Summary::of(events.len(), &info.log));
    }
    if let Some(dir) = std::env::args().nth(1) {
        run.write_to(dir.as_ref()).unwrap();
    }
}
