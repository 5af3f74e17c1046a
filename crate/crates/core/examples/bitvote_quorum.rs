//! Run BitVote with silent peers and replay the leader's trace to show
//! each write-back was allowed by its quorum or retry predicate.

use tsmon::semantics::{initial_config, step};
use tsmon::sim::{run_bitvote, BitVoteConfig, LinkFault, NetConfig};
use tsmon::{bundled, Value};

fn main() {
    let faults = vec![LinkFault {
        from: "peer1".into(),
        to: "leader".into(),
        drop_prob: 1.0,
    }];
    let net = NetConfig {
        drop_prob: 0.1,
        link_faults: faults,
        ..NetConfig::with_seed(7)
    };
    let cfg = BitVoteConfig {
        voting_rounds: 3,
        ..BitVoteConfig::new(net, 2, 5)
    };
    let run = run_bitvote(&cfg).unwrap();
    println!("written bits: {}", run.manifest.config["written_bits"]);

    let spec = bundled::load(bundled::LEADER);
    let mut t = initial_config(&spec).unwrap();
    for ev in run.trace("leader") {
        let before = t.store.clone();
        let out = step(&spec, &t, &ev.action, &Value::None).unwrap();
        if out.next.state == "L2" {
            println!(
                "{} closed the round (acks={:?}, retries={:?} before)",
                ev.action,
                before.var("acks"),
                before.var("retries")
            );
        }
        t = out.next;
    }
}
