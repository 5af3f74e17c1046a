//! Execution of a typestate over its internal state.
//!
//! A step on action `m` returning `v` first applies the pre-assignments,
//! then evaluates the predicates on the updated store. If they hold the
//! step is triggering: the typestate moves to the destination selected by
//! `v` and the post-assignments run. Otherwise the state is unchanged and
//! only the pre-assignments are kept.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::EvalError;
use crate::model::{InternalStateDecl, ProtocolSpec, TypeRef, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown assignment `{0}`")]
    UnknownAssign(String),
    #[error("unknown predicate `{0}`")]
    UnknownPred(String),
    #[error("`{0}` is not a variable")]
    NotAVariable(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("illegal action `{action}` returning {value} in state `{state}`")]
    IllegalAction {
        state: String,
        action: String,
        value: Value,
    },
    #[error("action `{action}` in state `{state}` returns a value but none was given")]
    MissingValue { state: String, action: String },
}

/// Variables (mutable) and constants (read-only) of one execution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarStore {
    vars: BTreeMap<String, i64>,
    consts: BTreeMap<String, i64>,
}

impl VarStore {
    pub fn new(vars: BTreeMap<String, i64>, consts: BTreeMap<String, i64>) -> Self {
        VarStore { vars, consts }
    }

    /// Variables shadow nothing: the two name sets are disjoint.
    pub fn get(&self, name: &str) -> Option<i64> {
        self.vars.get(name).or_else(|| self.consts.get(name)).copied()
    }

    pub fn var(&self, name: &str) -> Option<i64> {
        self.vars.get(name).copied()
    }

    pub fn vars(&self) -> &BTreeMap<String, i64> {
        &self.vars
    }

    pub fn consts(&self) -> &BTreeMap<String, i64> {
        &self.consts
    }

    fn lookup(&self) -> impl Fn(&str) -> Option<i64> + '_ {
        move |n| self.get(n)
    }
}

/// A typestate configuration: current state plus store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TInfo {
    pub state: String,
    pub store: VarStore,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub next: TInfo,
    pub triggered: bool,
}

/// Applies the named assignments left to right.
pub fn update(decls: &InternalStateDecl, keys: &[String], store: &VarStore) -> Result<VarStore, SemanticsError> {
    let mut store = store.clone();
    for key in keys {
        let a = decls
            .assigns
            .get(key)
            .ok_or_else(|| SemanticsError::UnknownAssign(key.clone()))?;
        let v = a.expr.eval(&store.lookup())?;
        match store.vars.get_mut(&a.target) {
            Some(slot) => *slot = v,
            None => return Err(SemanticsError::NotAVariable(a.target.clone())),
        }
    }
    Ok(store)
}

/// Conjunction of the named predicates; true for an empty list.
pub fn eval(decls: &InternalStateDecl, keys: &[String], store: &VarStore) -> Result<bool, SemanticsError> {
    for key in keys {
        let p = decls
            .preds
            .get(key)
            .ok_or_else(|| SemanticsError::UnknownPred(key.clone()))?;
        if !p.eval(&store.lookup())? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Start state with variables initialised from the declarations.
pub fn initial_config(spec: &ProtocolSpec) -> Result<TInfo, SemanticsError> {
    let decls = spec.internal();
    let consts: BTreeMap<String, i64> = decls.consts.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let lookup = |n: &str| consts.get(n).copied();
    let mut vars = BTreeMap::new();
    for (name, init) in &decls.vars {
        vars.insert(name.clone(), init.eval(&lookup)?);
    }
    Ok(TInfo {
        state: spec.typestate().start().to_string(),
        store: VarStore { vars, consts },
    })
}

/// Executes action `action` returning `value` from `cfg`.
///
/// Fails with [`SemanticsError::IllegalAction`] when the typestate has no
/// transition for `(state, action, value)`; a non-`void` action called
/// with [`Value::None`] fails with [`SemanticsError::MissingValue`].
pub fn step(spec: &ProtocolSpec, cfg: &TInfo, action: &str, value: &Value) -> Result<StepOutcome, SemanticsError> {
    let illegal = || SemanticsError::IllegalAction {
        state: cfg.state.clone(),
        action: action.to_string(),
        value: value.clone(),
    };
    let (_, branch) = spec.typestate().find_branch(&cfg.state, action).ok_or_else(illegal)?;
    if branch.action.ret != TypeRef::Unit && *value == Value::None {
        return Err(SemanticsError::MissingValue {
            state: cfg.state.clone(),
            action: action.to_string(),
        });
    }
    let target = branch.dest.target(value).ok_or_else(illegal)?;

    let decls = spec.internal();
    let store = update(decls, &branch.pre_assigns, &cfg.store)?;
    if eval(decls, &branch.preds, &store)? {
        let store = update(decls, &branch.post_assigns, &store)?;
        Ok(StepOutcome {
            next: TInfo {
                state: target.to_string(),
                store,
            },
            triggered: true,
        })
    } else {
        Ok(StepOutcome {
            next: TInfo {
                state: cfg.state.clone(),
                store,
            },
            triggered: false,
        })
    }
}
