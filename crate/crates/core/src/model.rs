//! Domain types for typestates with internal state, plus the accessor
//! functions used by the checker, the semantics and the monitor.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::dsl::SourceMap;
use crate::expr::{Assignment, Expr, Predicate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("action `{action}` is not defined in state `{state}`")]
    UndefinedAction { state: String, action: String },
    #[error("unknown enumeration `{0}`")]
    UnknownEnum(String),
    #[error("a typestate needs at least one state")]
    EmptyTypestate,
    #[error("state `{0}` is declared more than once")]
    DuplicateState(String),
    #[error("action `{action}` appears more than once in state `{state}`")]
    DuplicateAction { state: String, action: String },
    #[error("decision of `{action}` in state `{state}` has no outcomes")]
    EmptyDecision { state: String, action: String },
    #[error("ratio {0} is outside [0, 1]")]
    RatioOutOfRange(f64),
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("`{0}` is a constant and cannot be assigned")]
    ConstAssignment(String),
    #[error("`{0}` is declared both as a constant and as a variable")]
    NameClash(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeRef {
    Unit,
    Boolean,
    Enum(String),
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Unit => f.write_str("void"),
            TypeRef::Boolean => f.write_str("boolean"),
            TypeRef::Enum(name) => f.write_str(name),
        }
    }
}

/// `ret name(params)`. Parameter types are recorded for documentation
/// only; dispatch is by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSignature {
    pub name: String,
    pub params: Vec<String>,
    pub ret: TypeRef,
}

impl ActionSignature {
    pub fn void(name: impl Into<String>) -> Self {
        ActionSignature {
            name: name.into(),
            params: Vec::new(),
            ret: TypeRef::Unit,
        }
    }
}

/// Declared share of a state's executions, or `Epsilon` for an action that
/// is not monitored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Epsilon,
    Value(f64),
}

impl Ratio {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Ratio::Value(value))
        } else {
            Err(ModelError::RatioOutOfRange(value))
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Epsilon => None,
            Ratio::Value(v) => Some(v),
        }
    }

    pub fn is_epsilon(self) -> bool {
        matches!(self, Ratio::Epsilon)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Epsilon => f.write_str("_"),
            Ratio::Value(v) => write!(f, "{v}"),
        }
    }
}

/// A returned value that selects a transition: `none` for plain
/// destinations, a boolean, or an enumeration label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Value {
    #[default]
    None,
    Bool(bool),
    Label(String),
}

impl Value {
    pub fn label(label: impl Into<String>) -> Self {
        Value::Label(label.into())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::None => f.write_str("none"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Label(l) => f.write_str(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Plain(String),
    /// Outcome to state, in declaration order. Never empty.
    Decision(IndexMap<Value, String>),
}

impl Destination {
    /// The state selected by `value`, if this destination admits it.
    pub fn target(&self, value: &Value) -> Option<&str> {
        match self {
            Destination::Plain(s) if *value == Value::None => Some(s),
            Destination::Plain(_) => None,
            Destination::Decision(map) => map.get(value).map(String::as_str),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn sigil(self) -> char {
        match self {
            Direction::In => '?',
            Direction::Out => '!',
        }
    }
}

/// `ret m(params) [ratio; pre; preds] : dest [post]`
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub action: ActionSignature,
    pub ratio: Ratio,
    pub pre_assigns: Vec<String>,
    pub preds: Vec<String>,
    pub dest: Destination,
    pub post_assigns: Vec<String>,
}

impl Branch {
    /// A branch with empty attributes: `[_; []; []]` and no post-assignments.
    pub fn plain(action: ActionSignature, dest: impl Into<String>) -> Self {
        Branch {
            action,
            ratio: Ratio::Epsilon,
            pre_assigns: Vec::new(),
            preds: Vec::new(),
            dest: Destination::Plain(dest.into()),
            post_assigns: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.action.name
    }
}

/// Input and output branches of a state. Both non-empty makes it a mixed
/// session; both empty makes it terminal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateBody {
    pub inputs: Vec<Branch>,
    pub outputs: Vec<Branch>,
}

impl StateBody {
    pub fn terminal() -> Self {
        StateBody::default()
    }

    pub fn is_terminal(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty()
    }

    pub fn is_mixed(&self) -> bool {
        !self.inputs.is_empty() && !self.outputs.is_empty()
    }

    /// All branches, outputs first.
    pub fn branches(&self) -> impl Iterator<Item = (Direction, &Branch)> {
        self.outputs
            .iter()
            .map(|b| (Direction::Out, b))
            .chain(self.inputs.iter().map(|b| (Direction::In, b)))
    }

    pub fn find(&self, action: &str) -> Option<(Direction, &Branch)> {
        self.branches().find(|(_, b)| b.name() == action)
    }
}

/// Result of resolving a state name: its body, or the name itself when the
/// typestate does not define it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved<'a> {
    Body(&'a StateBody),
    Name(&'a str),
}

/// The attributes of one action in one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attrs<'a> {
    pub ratio: Ratio,
    pub dest: &'a Destination,
    pub pre_assigns: &'a [String],
    pub post_assigns: &'a [String],
    pub preds: &'a [String],
}

/// Ordered map of state bodies. The first state is the start state.
#[derive(Debug, Clone, PartialEq)]
pub struct Typestate {
    states: IndexMap<String, StateBody>,
}

impl Typestate {
    pub fn new<I, S>(states: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (S, StateBody)>,
        S: Into<String>,
    {
        let mut map = IndexMap::new();
        for (name, body) in states {
            let name = name.into();
            let mut seen = BTreeSet::new();
            for (_, branch) in body.branches() {
                if !seen.insert(branch.name()) {
                    return Err(ModelError::DuplicateAction {
                        state: name,
                        action: branch.name().to_string(),
                    });
                }
                if let Destination::Decision(d) = &branch.dest {
                    if d.is_empty() {
                        return Err(ModelError::EmptyDecision {
                            state: name,
                            action: branch.name().to_string(),
                        });
                    }
                }
                if let Ratio::Value(v) = branch.ratio {
                    Ratio::new(v)?;
                }
            }
            if map.contains_key(&name) {
                return Err(ModelError::DuplicateState(name));
            }
            map.insert(name, body);
        }
        if map.is_empty() {
            return Err(ModelError::EmptyTypestate);
        }
        Ok(Typestate { states: map })
    }

    pub fn start(&self) -> &str {
        self.states
            .get_index(0)
            .map(|(k, _)| k.as_str())
            .expect("typestate is never empty")
    }

    pub fn states(&self) -> impl Iterator<Item = (&str, &StateBody)> {
        self.states.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.states.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, state: &str) -> bool {
        self.states.contains_key(state)
    }

    pub fn body(&self, state: &str) -> Option<&StateBody> {
        self.states.get(state)
    }

    /// Total: a defined name yields its body, anything else yields itself.
    pub fn resolve_state<'a>(&'a self, state: &'a str) -> Resolved<'a> {
        match self.states.get(state) {
            Some(body) => Resolved::Body(body),
            None => Resolved::Name(state),
        }
    }

    pub fn find_branch(&self, state: &str, action: &str) -> Option<(Direction, &Branch)> {
        self.states.get(state)?.find(action)
    }

    pub fn attrs(&self, state: &str, action: &str) -> Result<Attrs<'_>, ModelError> {
        let (_, b) = self
            .find_branch(state, action)
            .ok_or_else(|| ModelError::UndefinedAction {
                state: state.to_string(),
                action: action.to_string(),
            })?;
        Ok(Attrs {
            ratio: b.ratio,
            dest: &b.dest,
            pre_assigns: &b.pre_assigns,
            post_assigns: &b.post_assigns,
            preds: &b.preds,
        })
    }

    pub fn ratio_of(&self, state: &str, action: &str) -> Result<Ratio, ModelError> {
        Ok(self.attrs(state, action)?.ratio)
    }

    pub fn dest_of(&self, state: &str, action: &str) -> Result<&Destination, ModelError> {
        Ok(self.attrs(state, action)?.dest)
    }

    pub fn pre_assigns_of(&self, state: &str, action: &str) -> Result<&[String], ModelError> {
        Ok(self.attrs(state, action)?.pre_assigns)
    }

    pub fn post_assigns_of(&self, state: &str, action: &str) -> Result<&[String], ModelError> {
        Ok(self.attrs(state, action)?.post_assigns)
    }

    pub fn preds_of(&self, state: &str, action: &str) -> Result<&[String], ModelError> {
        Ok(self.attrs(state, action)?.preds)
    }

    /// Outcome labels of a decision destination; `{none}` for a plain one.
    pub fn decisions_of(&self, state: &str, action: &str) -> Result<BTreeSet<Value>, ModelError> {
        Ok(match self.dest_of(state, action)? {
            Destination::Plain(_) => BTreeSet::from([Value::None]),
            Destination::Decision(map) => map.keys().cloned().collect(),
        })
    }

    /// Names of every action offered in `state`; empty for undefined names.
    pub fn actions_of(&self, state: &str) -> BTreeSet<&str> {
        match self.states.get(state) {
            Some(body) => body.branches().map(|(_, b)| b.name()).collect(),
            None => BTreeSet::new(),
        }
    }

    /// Numeric ratios of the actions of `state`, epsilon entries dropped.
    pub fn ratios_of(&self, state: &str) -> Vec<f64> {
        match self.resolve_state(state) {
            Resolved::Body(body) => body.branches().filter_map(|(_, b)| b.ratio.value()).collect(),
            Resolved::Name(_) => Vec::new(),
        }
    }
}

/// Constants, variables, assignments, predicates and enumerations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InternalStateDecl {
    pub consts: IndexMap<String, i64>,
    /// Initializer of each variable; may reference constants.
    pub vars: IndexMap<String, Expr>,
    pub assigns: IndexMap<String, Assignment>,
    pub preds: IndexMap<String, Predicate>,
    pub enums: IndexMap<String, Vec<String>>,
}

impl InternalStateDecl {
    fn check(&self) -> Result<(), ModelError> {
        let undeclared = |kind, name: &str| ModelError::Undeclared {
            kind,
            name: name.to_string(),
        };
        for name in self.vars.keys() {
            if self.consts.contains_key(name) {
                return Err(ModelError::NameClash(name.clone()));
            }
        }
        for init in self.vars.values() {
            if let Some(n) = init.names().into_iter().find(|n| !self.consts.contains_key(*n)) {
                return Err(undeclared("constant", n));
            }
        }
        let declared = |n: &str| self.consts.contains_key(n) || self.vars.contains_key(n);
        for a in self.assigns.values() {
            if self.consts.contains_key(&a.target) {
                return Err(ModelError::ConstAssignment(a.target.clone()));
            }
            if !self.vars.contains_key(&a.target) {
                return Err(undeclared("variable", &a.target));
            }
            if let Some(n) = a.expr.names().into_iter().find(|n| !declared(n)) {
                return Err(undeclared("name", n));
            }
        }
        for p in self.preds.values() {
            if let Some(n) = p.names().into_iter().find(|n| !declared(n)) {
                return Err(undeclared("name", n));
            }
        }
        Ok(())
    }
}

/// One participant: its typestate and its internal-state declarations.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    internal: InternalStateDecl,
    typestate: Typestate,
    source: SourceMap,
}

impl PartialEq for ProtocolSpec {
    fn eq(&self, other: &Self) -> bool {
        self.internal == other.internal && self.typestate == other.typestate
    }
}

impl ProtocolSpec {
    /// Builds a spec, checking that every key, name and enumeration it
    /// references is declared.
    pub fn new(internal: InternalStateDecl, typestate: Typestate) -> Result<Self, ModelError> {
        internal.check()?;
        for (_, body) in typestate.states() {
            for (_, b) in body.branches() {
                if let TypeRef::Enum(e) = &b.action.ret {
                    if !internal.enums.contains_key(e) {
                        return Err(ModelError::UnknownEnum(e.clone()));
                    }
                }
                for key in b.pre_assigns.iter().chain(&b.post_assigns) {
                    if !internal.assigns.contains_key(key) {
                        return Err(ModelError::Undeclared {
                            kind: "assignment",
                            name: key.clone(),
                        });
                    }
                }
                for key in &b.preds {
                    if !internal.preds.contains_key(key) {
                        return Err(ModelError::Undeclared {
                            kind: "predicate",
                            name: key.clone(),
                        });
                    }
                }
            }
        }
        Ok(ProtocolSpec {
            internal,
            typestate,
            source: SourceMap::default(),
        })
    }

    pub(crate) fn with_source(mut self, source: SourceMap) -> Self {
        self.source = source;
        self
    }

    pub fn internal(&self) -> &InternalStateDecl {
        &self.internal
    }

    pub fn typestate(&self) -> &Typestate {
        &self.typestate
    }

    pub fn source_map(&self) -> &SourceMap {
        &self.source
    }

    /// Replaces the values of existing constants. Unknown names are rejected.
    pub fn with_consts<'a, I>(mut self, overrides: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (&'a str, i64)>,
    {
        for (name, value) in overrides {
            match self.internal.consts.get_mut(name) {
                Some(slot) => *slot = value,
                None => {
                    return Err(ModelError::Undeclared {
                        kind: "constant",
                        name: name.to_string(),
                    })
                }
            }
        }
        Ok(self)
    }

    /// Labels a value of type `ty` can take.
    pub fn enum_labels(&self, ty: &TypeRef) -> Result<BTreeSet<Value>, ModelError> {
        match ty {
            TypeRef::Unit => Ok(BTreeSet::from([Value::None])),
            TypeRef::Boolean => Ok(BTreeSet::from([Value::Bool(true), Value::Bool(false)])),
            TypeRef::Enum(name) => self
                .internal
                .enums
                .get(name)
                .map(|labels| labels.iter().cloned().map(Value::Label).collect())
                .ok_or_else(|| ModelError::UnknownEnum(name.clone())),
        }
    }
}
