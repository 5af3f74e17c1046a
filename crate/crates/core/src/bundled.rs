//! The example protocols shipped in `examples/*.tsp`.

use crate::dsl::parse_protocol;
use crate::model::ProtocolSpec;

/// Alternating bit protocol sender.
pub const SENDER: &str = include_str!("../examples/sender.tsp");
/// Alternating bit protocol receiver, with `ack`/`msg` ratios of one half.
pub const RECEIVER: &str = include_str!("../examples/receiver.tsp");
/// BitVote leader with its counters, assignments and predicates.
pub const LEADER: &str = include_str!("../examples/leader.tsp");
/// BitVote peer.
pub const PEER: &str = include_str!("../examples/peer.tsp");
/// Authentication with a decision state.
pub const AUTH: &str = include_str!("../examples/auth.tsp");
/// Minimal triggering/non-triggering example.
pub const COUNTER: &str = include_str!("../examples/counter.tsp");

/// Every bundled spec with its file stem.
pub const ALL: [(&str, &str); 6] = [
    ("sender", SENDER),
    ("receiver", RECEIVER),
    ("leader", LEADER),
    ("peer", PEER),
    ("auth", AUTH),
    ("counter", COUNTER),
];

/// Parses a bundled source. Panics only if a shipped file is broken.
pub fn load(source: &str) -> ProtocolSpec {
    parse_protocol(source).expect("bundled spec parses")
}
