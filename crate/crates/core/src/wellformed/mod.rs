//! Well-formedness of typestates and of their transition sets.
//!
//! [`check_well_formed`] covers the typestate rules (unique state names,
//! ratio sums, exhaustive decisions). [`check_transition_rules`] covers the
//! transition-set rules (useful states, determinism) and the properties
//! that follow from them. Both collect every violation instead of stopping
//! at the first.

mod dot;
mod trs;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::dsl::SourceSpan;
use crate::model::{Destination, ProtocolSpec, Value};

pub use dot::export_dot;
pub use trs::{build_trs, is_productive, is_reachable, Transition, TransitionSet};

/// Ratios of a state must sum to 1 within this tolerance.
pub const RATIO_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    NoDuplicateStateName,
    ValidRatioSum,
    EnumerateAllDecisions,
    UsefulStates,
    Deterministic,
    WeakConnectivity,
    DecisionTotality,
    PlainTransition,
    DecisionTransition,
    UndeclaredDestination,
    TrsConsistency,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::NoDuplicateStateName => "NO-DUPLICATE-STATE-NAME",
            Rule::ValidRatioSum => "VALID-RATIO-SUM",
            Rule::EnumerateAllDecisions => "ENUMERATE-ALL-DECISIONS",
            Rule::UsefulStates => "USEFUL-STATES",
            Rule::Deterministic => "DETERMINISTIC",
            Rule::WeakConnectivity => "WEAK-CONNECTIVITY",
            Rule::DecisionTotality => "DECISION-TOTALITY",
            Rule::PlainTransition => "PLAIN-TRANSITION",
            Rule::DecisionTransition => "DECISION-TRANSITION",
            Rule::UndeclaredDestination => "UNDECLARED-DESTINATION",
            Rule::TrsConsistency => "TRS-CONSISTENCY",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub rule: Rule,
    pub state: Option<String>,
    pub action: Option<String>,
    pub detail: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    fn new(spec: &ProtocolSpec, rule: Rule, state: &str, action: Option<&str>, detail: String) -> Self {
        let map = spec.source_map();
        let span = action.and_then(|a| map.branch(state, a)).or_else(|| map.state(state));
        Diagnostic {
            rule,
            state: Some(state.to_string()),
            action: action.map(str::to_string),
            detail,
            span,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.rule, self.detail)
    }
}

/// Checks the three typestate rules. An empty result means the typestate
/// is well-formed.
pub fn check_well_formed(spec: &ProtocolSpec) -> Vec<Diagnostic> {
    let ts = spec.typestate();
    let mut out = Vec::new();

    // Always holds for a `Typestate`; the parser reports duplicates itself.
    let mut seen = BTreeSet::new();
    for name in ts.state_names() {
        if !seen.insert(name) {
            out.push(Diagnostic::new(
                spec,
                Rule::NoDuplicateStateName,
                name,
                None,
                format!("state `{name}` is declared more than once"),
            ));
        }
    }

    for (state, body) in ts.states() {
        let ratios = ts.ratios_of(state);
        if !ratios.is_empty() {
            let sum: f64 = ratios.iter().sum();
            if (sum - 1.0).abs() > RATIO_SUM_TOLERANCE {
                out.push(Diagnostic::new(
                    spec,
                    Rule::ValidRatioSum,
                    state,
                    None,
                    format!("ratios of state `{state}` sum to {sum}, expected 1"),
                ));
            }
        }

        for (_, b) in body.branches() {
            let decisions = ts.decisions_of(state, b.name()).expect("branch exists");
            match spec.enum_labels(&b.action.ret) {
                Ok(labels) if labels == decisions => {}
                Ok(labels) => out.push(Diagnostic::new(
                    spec,
                    Rule::EnumerateAllDecisions,
                    state,
                    Some(b.name()),
                    format!(
                        "action `{}` in state `{state}` decides on {{{}}} but `{}` has labels {{{}}}",
                        b.name(),
                        join(&decisions),
                        b.action.ret,
                        join(&labels)
                    ),
                )),
                Err(e) => out.push(Diagnostic::new(
                    spec,
                    Rule::EnumerateAllDecisions,
                    state,
                    Some(b.name()),
                    e.to_string(),
                )),
            }
        }
    }
    out
}

fn join(values: &BTreeSet<Value>) -> String {
    values.iter().map(Value::to_string).collect::<Vec<_>>().join(", ")
}

/// Checks the transition-set rules and the properties implied by them.
///
/// The productivity half of "useful states" only applies when the
/// typestate has at least one terminal state, so protocols that loop
/// forever are accepted. Determinism is checked per returned value: each
/// `(state, action, value)` has at most one successor, and an action is
/// either plain or a decision, never both.
pub fn check_transition_rules(spec: &ProtocolSpec, trs: &TransitionSet) -> Vec<Diagnostic> {
    let ts = spec.typestate();
    let mut out = Vec::new();
    let diag =
        |rule, state: &str, action: Option<&str>, detail: String| Diagnostic::new(spec, rule, state, action, detail);

    for t in trs.iter() {
        match ts.find_branch(&t.from, &t.action) {
            None => out.push(diag(
                Rule::TrsConsistency,
                &t.from,
                None,
                format!("tuple {t} has no matching branch in the typestate"),
            )),
            Some((_, b)) => match &b.dest {
                Destination::Plain(to) => {
                    if t.value != Value::None || *to != t.to {
                        out.push(diag(
                            Rule::PlainTransition,
                            &t.from,
                            Some(&t.action),
                            format!("tuple {t} does not match plain destination `{to}`"),
                        ));
                    }
                }
                Destination::Decision(map) => {
                    if map.get(&t.value) != Some(&t.to) {
                        out.push(diag(
                            Rule::DecisionTransition,
                            &t.from,
                            Some(&t.action),
                            format!("tuple {t} is not an entry of the decision map"),
                        ));
                    }
                }
            },
        }
        if !ts.contains(&t.to) {
            out.push(diag(
                Rule::UndeclaredDestination,
                &t.from,
                Some(&t.action),
                format!("destination `{}` of `{}` is not a declared state", t.to, t.action),
            ));
        }
    }

    let has_terminal = ts.state_names().any(|s| trs.is_terminal(s));
    for state in ts.state_names() {
        if !is_reachable(state, trs, &trs.start) {
            out.push(diag(
                Rule::UsefulStates,
                state,
                None,
                format!("state `{state}` is not reachable from `{}`", trs.start),
            ));
        }
        if has_terminal && !is_productive(state, trs) {
            out.push(diag(
                Rule::UsefulStates,
                state,
                None,
                format!("no terminal state is reachable from `{state}`"),
            ));
        }
    }

    let mut by_value: BTreeMap<(&str, &str, &Value), BTreeSet<&str>> = BTreeMap::new();
    let mut by_action: BTreeMap<(&str, &str), (bool, bool)> = BTreeMap::new();
    for t in trs.iter() {
        by_value
            .entry((&t.from, &t.action, &t.value))
            .or_default()
            .insert(&t.to);
        let kinds = by_action.entry((&t.from, &t.action)).or_default();
        if t.value == Value::None {
            kinds.0 = true;
        } else {
            kinds.1 = true;
        }
    }
    for ((s, m, v), targets) in &by_value {
        if targets.len() > 1 {
            let list: Vec<&str> = targets.iter().copied().collect();
            out.push(diag(
                Rule::Deterministic,
                s,
                Some(m),
                format!(
                    "`{m}` returning {v} in `{s}` leads to several states: {}",
                    list.join(", ")
                ),
            ));
        }
    }
    for ((s, m), (plain, decision)) in &by_action {
        if *plain && *decision {
            out.push(diag(
                Rule::Deterministic,
                s,
                Some(m),
                format!("`{m}` in `{s}` has both plain and decision transitions"),
            ));
        }
    }

    for (state, body) in ts.states() {
        for (_, b) in body.branches() {
            let decisions = ts.decisions_of(state, b.name()).expect("branch exists");
            for v in decisions {
                let found = trs.outgoing(state).any(|t| t.action == b.name() && t.value == v);
                if !found {
                    out.push(diag(
                        Rule::DecisionTotality,
                        state,
                        Some(b.name()),
                        format!("no transition for `{}` returning {v} in `{state}`", b.name()),
                    ));
                }
            }
        }
    }

    if let Some(detail) = weak_connectivity(spec, trs) {
        out.push(diag(Rule::WeakConnectivity, ts.start(), None, detail));
    }
    out
}

fn weak_connectivity(spec: &ProtocolSpec, trs: &TransitionSet) -> Option<String> {
    let names: Vec<&str> = spec.typestate().state_names().collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut parent: Vec<usize> = (0..names.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for t in trs.iter() {
        if let (Some(&a), Some(&b)) = (index.get(t.from.as_str()), index.get(t.to.as_str())) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 0);
    let detached: Vec<&str> = (0..names.len())
        .filter(|&i| find(&mut parent, i) != root)
        .map(|i| names[i])
        .collect();
    if detached.is_empty() {
        None
    } else {
        Some(format!(
            "states {} are disconnected from `{}`",
            detached.join(", "),
            names[0]
        ))
    }
}

/// Typestate rules followed by the transition rules over a freshly built
/// transition set.
pub fn validate(spec: &ProtocolSpec) -> Vec<Diagnostic> {
    let mut out = check_well_formed(spec);
    let trs = build_trs(spec);
    out.extend(check_transition_rules(spec, &trs));
    out
}
