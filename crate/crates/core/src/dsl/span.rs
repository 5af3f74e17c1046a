use std::collections::HashMap;
use std::fmt;

/// Location of a token in a `.tsp` source: 1-based line and column, length
/// in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        SourceSpan { line, column, length }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Spans of parsed nodes, kept beside the model so that structural
/// equality of specs ignores where things were written.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    states: HashMap<String, SourceSpan>,
    branches: HashMap<(String, String), SourceSpan>,
}

impl SourceMap {
    pub(crate) fn insert_state(&mut self, state: &str, span: SourceSpan) {
        self.states.insert(state.to_string(), span);
    }

    pub(crate) fn insert_branch(&mut self, state: &str, action: &str, span: SourceSpan) {
        self.branches.insert((state.to_string(), action.to_string()), span);
    }

    pub fn state(&self, state: &str) -> Option<SourceSpan> {
        self.states.get(state).copied()
    }

    pub fn branch(&self, state: &str, action: &str) -> Option<SourceSpan> {
        self.branches.get(&(state.to_string(), action.to_string())).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}
