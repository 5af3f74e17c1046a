//! Feed events to a monitor one at a time and print each log entry.

use tsmon::bundled;
use tsmon::monitor::{Monitor, MonitorConfig, TraceEvent};
use tsmon::{Direction, Value};

fn main() {
    let spec = bundled::load(bundled::RECEIVER);
    let conf = MonitorConfig::new(0.25, 0).unwrap();
    let mut monitor = Monitor::new(&spec, conf).unwrap();
    let script = [
        ("msg", Direction::In),
        ("ack", Direction::Out),
        ("msg", Direction::In),
        ("ack", Direction::Out),
        ("msg", Direction::In),
        ("ack", Direction::Out),
        ("msg", Direction::Out),
    ];
    for (seq, (action, dir)) in script.into_iter().enumerate() {
        let ev = TraceEvent::new("receiver", action, dir, Value::None, seq as u64);
        match monitor.observe(&ev) {
            Some(entry) => println!("{}", serde_json::to_string(entry).unwrap()),
            None => println!("{action}: not monitored"),
        }
    }
}
