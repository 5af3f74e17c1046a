//! Step the BitVote leader through its internal state.

use tsmon::semantics::{initial_config, step};
use tsmon::{bundled, Value};

fn run(title: &str, actions: &[&str]) {
    let spec = bundled::load(bundled::LEADER);
    let mut cfg = initial_config(&spec).unwrap();
    println!("{title}");
    for a in actions {
        let out = step(&spec, &cfg, a, &Value::None).unwrap();
        println!(
            "  {a:5} -> {} {:?} triggered={}",
            out.next.state,
            out.next.store.vars(),
            out.triggered
        );
        cfg = out.next;
    }
}

fn main() {
    run("no votes arrive", &["vreq"; 5]);
    run("both peers vote", &["vreq", "vack", "vack"]);
}
