//! JSON Lines trace and log formats.

use std::io::{self, BufRead, Write};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{Direction, Value};

/// One observed action of a participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub participant: String,
    pub action: String,
    #[serde(with = "direction")]
    pub dir: Direction,
    #[serde(default)]
    pub value: Value,
    pub seq: u64,
}

impl TraceEvent {
    pub fn new(participant: &str, action: &str, dir: Direction, value: Value, seq: u64) -> Self {
        TraceEvent {
            participant: participant.into(),
            action: action.into(),
            dir,
            value,
            seq,
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: seq {seq} does not follow {prev}")]
    Order { line: usize, seq: u64, prev: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads one event per non-blank line. Sequence numbers must strictly
/// increase.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceEvent>, TraceError> {
    let mut events: Vec<TraceEvent> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: TraceEvent = serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?;
        if let Some(prev) = events.last() {
            if ev.seq <= prev.seq {
                return Err(TraceError::Order {
                    line: i + 1,
                    seq: ev.seq,
                    prev: prev.seq,
                });
            }
        }
        events.push(ev);
    }
    Ok(events)
}

/// Writes any serializable records as JSON Lines.
pub fn write_jsonl<W: Write, T: Serialize>(mut w: W, records: &[T]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::None => s.serialize_none(),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Label(l) => s.serialize_str(l),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Value;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("null, a boolean or a string")
            }
            fn visit_unit<E: de::Error>(self) -> Result<Value, E> {
                Ok(Value::None)
            }
            fn visit_none<E: de::Error>(self) -> Result<Value, E> {
                Ok(Value::None)
            }
            fn visit_some<D: Deserializer<'de>>(self, d: D) -> Result<Value, D::Error> {
                d.deserialize_any(V)
            }
            fn visit_bool<E: de::Error>(self, b: bool) -> Result<Value, E> {
                Ok(Value::Bool(b))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Value, E> {
                Ok(Value::Label(s.to_string()))
            }
        }
        d.deserialize_option(V)
    }
}

mod direction {
    use super::*;

    pub fn serialize<S: Serializer>(d: &Direction, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match d {
            Direction::In => "in",
            Direction::Out => "out",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Direction, D::Error> {
        match String::deserialize(d)?.as_str() {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            other => Err(de::Error::unknown_variant(other, &["in", "out"])),
        }
    }
}
