use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::model::{Destination, ProtocolSpec, Value};

/// One `(state, action, value, next)` tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: String,
    pub action: String,
    pub value: Value,
    pub to: String,
}

impl Transition {
    pub fn new(from: &str, action: &str, value: Value, to: &str) -> Self {
        Transition {
            from: from.into(),
            action: action.into(),
            value,
            to: to.into(),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.from, self.action, self.value, self.to)
    }
}

/// The transition relation of a typestate together with its start state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSet {
    pub start: String,
    pub tuples: BTreeSet<Transition>,
}

impl TransitionSet {
    pub fn new(start: impl Into<String>, tuples: impl IntoIterator<Item = Transition>) -> Self {
        TransitionSet {
            start: start.into(),
            tuples: tuples.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.tuples.iter()
    }

    pub fn outgoing<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        self.tuples.iter().filter(move |t| t.from == state)
    }

    pub fn incoming<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        self.tuples.iter().filter(move |t| t.to == state)
    }

    /// A state with no outgoing tuple.
    pub fn is_terminal(&self, state: &str) -> bool {
        self.outgoing(state).next().is_none()
    }
}

/// One tuple per plain branch (value `none`) and one per decision outcome.
pub fn build_trs(spec: &ProtocolSpec) -> TransitionSet {
    let ts = spec.typestate();
    let mut tuples = BTreeSet::new();
    for (state, body) in ts.states() {
        for (_, b) in body.branches() {
            match &b.dest {
                Destination::Plain(to) => {
                    tuples.insert(Transition::new(state, b.name(), Value::None, to));
                }
                Destination::Decision(map) => {
                    for (outcome, to) in map {
                        tuples.insert(Transition::new(state, b.name(), outcome.clone(), to));
                    }
                }
            }
        }
    }
    TransitionSet {
        start: ts.start().to_string(),
        tuples,
    }
}

/// Whether `state` can be reached from `start`, searching backwards through
/// predecessors with a visited set.
pub fn is_reachable(state: &str, trs: &TransitionSet, start: &str) -> bool {
    fn go<'a>(s: &'a str, trs: &'a TransitionSet, start: &str, visited: &mut HashSet<&'a str>) -> bool {
        if s == start {
            return true;
        }
        if !visited.insert(s) {
            return false;
        }
        trs.incoming(s)
            .any(|t| !visited.contains(t.from.as_str()) && go(&t.from, trs, start, visited))
    }
    go(state, trs, start, &mut HashSet::new())
}

/// Whether some state without outgoing tuples is reachable from `state`
/// (including `state` itself).
pub fn is_productive(state: &str, trs: &TransitionSet) -> bool {
    fn go<'a>(s: &'a str, trs: &'a TransitionSet, visited: &mut HashSet<&'a str>) -> bool {
        if trs.is_terminal(s) {
            return true;
        }
        if !visited.insert(s) {
            return false;
        }
        trs.outgoing(s)
            .any(|t| !visited.contains(t.to.as_str()) && go(&t.to, trs, visited))
    }
    go(state, trs, &mut HashSet::new())
}
