//! Transition tuples, reachability and a DOT rendering.

use tsmon::bundled;
use tsmon::wellformed::{build_trs, export_dot, is_productive, is_reachable};

fn main() {
    let spec = bundled::load(bundled::AUTH);
    let trs = build_trs(&spec);
    for t in trs.iter() {
        println!("{t}");
    }
    for s in spec.typestate().state_names() {
        println!(
            "{s}: reachable={} productive={}",
            is_reachable(s, &trs, &trs.start),
            is_productive(s, &trs)
        );
    }
    print!("{}", export_dot(&spec, &trs));
}
