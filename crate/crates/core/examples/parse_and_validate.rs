//! Parse a protocol, print its canonical form and check it.
//!
//! `cargo run --example parse_and_validate [file.tsp]`

use tsmon::wellformed::validate;
use tsmon::{bundled, parse_protocol, serialize_protocol};

fn main() {
    let source = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => bundled::LEADER.to_string(),
    };
    let spec = match parse_protocol(&source) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("{} {e}", e.kind.code());
            std::process::exit(3);
        }
    };
    print!("{}", serialize_protocol(&spec));

    // A one-token mutation: the L1 ratios no longer sum to one.
    let broken = parse_protocol(&bundled::LEADER.replacen("[0.5; [A1]", "[0.4; [A1]", 1)).unwrap();
    for d in validate(&spec).iter().chain(&validate(&broken)) {
        println!("{} at {:?}: {}", d.rule, d.span, d.detail);
    }
}
