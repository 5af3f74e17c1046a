use std::collections::HashSet;

use indexmap::IndexMap;

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind, SourceMap, SourceSpan};
use crate::expr::{Assignment, CmpOp, Comparison, Expr, Predicate};
use crate::model::{
    ActionSignature, Branch, Destination, InternalStateDecl, ProtocolSpec, Ratio, StateBody, TypeRef, Typestate, Value,
};

const KEYWORDS: &[&str] = &[
    "const", "var", "assign", "pred", "enum", "state", "end", "void", "boolean", "true", "false", "none",
];

/// Parses one participant's `.tsp` source.
///
/// Structural invariants (unique names, declared references, ratio range)
/// are enforced here; the well-formedness rules are left to
/// [`crate::wellformed`]. The first error aborts.
pub fn parse_protocol(text: &str) -> Result<ProtocolSpec, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        raw: Raw::default(),
    };
    p.file()?;
    p.raw.resolve()
}

#[derive(Debug, Clone)]
struct Ident {
    name: String,
    span: SourceSpan,
}

struct RawBranch {
    span: SourceSpan,
    ret: TypeRef,
    ret_span: SourceSpan,
    name: Ident,
    params: Vec<String>,
    ratio: Ratio,
    pre: Vec<Ident>,
    preds: Vec<Ident>,
    dest: Destination,
    post: Vec<Ident>,
}

struct RawState {
    name: Ident,
    inputs: Vec<RawBranch>,
    outputs: Vec<RawBranch>,
}

/// A declaration plus every name it references, for span-accurate
/// reference errors.
struct Refs<T> {
    key: Ident,
    value: T,
    refs: Vec<Ident>,
}

#[derive(Default)]
struct Raw {
    consts: IndexMap<String, (i64, SourceSpan)>,
    vars: Vec<Refs<Expr>>,
    assigns: Vec<(Ident, Refs<Expr>)>,
    preds: Vec<Refs<Predicate>>,
    enums: IndexMap<String, Vec<String>>,
    states: Vec<RawState>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    raw: Raw,
}

fn syntax(span: SourceSpan, msg: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::Syntax, span, msg)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(syntax(
                self.span(),
                format!("expected {}, found {}", tok.describe(), self.peek().describe()),
            ))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.span(),
                format!("expected `{kw}`, found {}", self.peek().describe()),
            ))
        }
    }

    /// Any identifier, keywords included.
    fn word(&mut self, what: &str) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            other => Err(syntax(
                self.span(),
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    /// An identifier that is not a reserved word.
    fn name(&mut self, what: &str) -> Result<Ident, ParseError> {
        let span = self.span();
        let id = self.word(what)?;
        if KEYWORDS.contains(&id.name.as_str()) {
            return Err(syntax(
                span,
                format!("`{}` is reserved and cannot be used as {what}", id.name),
            ));
        }
        Ok(id)
    }

    fn file(&mut self) -> Result<(), ParseError> {
        loop {
            let span = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(w) => match w.as_str() {
                    "const" => self.const_decl()?,
                    "var" => self.var_decl()?,
                    "assign" => self.assign_decl()?,
                    "pred" => self.pred_decl()?,
                    "enum" => self.enum_decl()?,
                    "state" => self.state_decl()?,
                    _ => return Err(syntax(span, format!("expected a declaration, found `{w}`"))),
                },
                other => {
                    return Err(syntax(
                        span,
                        format!("expected a declaration, found {}", other.describe()),
                    ))
                }
            }
        }
        if self.raw.states.is_empty() {
            return Err(syntax(self.span(), "a typestate needs at least one `state`"));
        }
        Ok(())
    }

    fn check_unique(seen: bool, id: &Ident, what: &str) -> Result<(), ParseError> {
        if seen {
            Err(ParseError::new(
                ParseErrorKind::DuplicateDeclaration,
                id.span,
                format!("{what} `{}` is declared more than once", id.name),
            ))
        } else {
            Ok(())
        }
    }

    fn int_literal(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat(&Tok::Minus);
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(text) if !text.contains('.') => {
                self.bump();
                let magnitude: i128 = text.parse().map_err(|_| out_of_range(span, &text))?;
                let v = if negative { -magnitude } else { magnitude };
                i64::try_from(v).map_err(|_| out_of_range(span, &text))
            }
            other => Err(syntax(span, format!("expected an integer, found {}", other.describe()))),
        }
    }

    fn const_decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("const")?;
        let id = self.name("a constant name")?;
        self.expect(Tok::Assign)?;
        let v = self.int_literal()?;
        self.expect(Tok::Semi)?;
        let clash = self.raw.consts.contains_key(&id.name) || self.raw.vars.iter().any(|r| r.key.name == id.name);
        Self::check_unique(clash, &id, "name")?;
        self.raw.consts.insert(id.name, (v, id.span));
        Ok(())
    }

    fn var_decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("var")?;
        let key = self.name("a variable name")?;
        self.expect(Tok::Assign)?;
        let mut refs = Vec::new();
        let value = self.expr(&mut refs)?;
        self.expect(Tok::Semi)?;
        let clash = self.raw.consts.contains_key(&key.name) || self.raw.vars.iter().any(|r| r.key.name == key.name);
        Self::check_unique(clash, &key, "name")?;
        self.raw.vars.push(Refs { key, value, refs });
        Ok(())
    }

    fn assign_decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("assign")?;
        let key = self.name("an assignment key")?;
        self.expect(Tok::Colon)?;
        let target = self.name("a variable name")?;
        self.expect(Tok::Arrow)?;
        let mut refs = Vec::new();
        let value = self.expr(&mut refs)?;
        self.expect(Tok::Semi)?;
        let seen = self.raw.assigns.iter().any(|(_, r)| r.key.name == key.name);
        Self::check_unique(seen, &key, "assignment")?;
        self.raw.assigns.push((target, Refs { key, value, refs }));
        Ok(())
    }

    fn pred_decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("pred")?;
        let key = self.name("a predicate key")?;
        self.expect(Tok::Colon)?;
        let mut refs = Vec::new();
        let mut clauses = vec![self.comparison(&mut refs)?];
        while self.eat(&Tok::AndAnd) {
            clauses.push(self.comparison(&mut refs)?);
        }
        self.expect(Tok::Semi)?;
        let seen = self.raw.preds.iter().any(|r| r.key.name == key.name);
        Self::check_unique(seen, &key, "predicate")?;
        self.raw.preds.push(Refs {
            key,
            value: Predicate::new(clauses),
            refs,
        });
        Ok(())
    }

    fn enum_decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("enum")?;
        let id = self.name("an enumeration name")?;
        self.expect(Tok::LBrace)?;
        let mut labels: Vec<String> = Vec::new();
        loop {
            let label = self.name("an enumeration label")?;
            Self::check_unique(labels.contains(&label.name), &label, "label")?;
            labels.push(label.name);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Self::check_unique(self.raw.enums.contains_key(&id.name), &id, "enumeration")?;
        self.raw.enums.insert(id.name, labels);
        Ok(())
    }

    fn state_decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("state")?;
        let name = self.name("a state name")?;
        if self.raw.states.iter().any(|s| s.name.name == name.name) {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateState,
                name.span,
                format!("state `{}` is declared more than once", name.name),
            ));
        }
        self.expect(Tok::Assign)?;
        let mut state = RawState {
            name,
            inputs: Vec::new(),
            outputs: Vec::new(),
        };
        if self.is_keyword("end") {
            self.bump();
        } else {
            let first = self.side(&mut state)?;
            if self.eat(&Tok::Plus) {
                let span = self.span();
                let second = self.side(&mut state)?;
                if second == first {
                    return Err(syntax(span, "a mixed session joins one `!{}` and one `?{}` side"));
                }
            }
        }
        self.raw.states.push(state);
        Ok(())
    }

    /// Parses one side into `state`; returns true for an output side.
    fn side(&mut self, state: &mut RawState) -> Result<bool, ParseError> {
        let output = match self.peek() {
            Tok::Bang => true,
            Tok::Question => false,
            other => {
                return Err(syntax(
                    self.span(),
                    format!("expected `!{{`, `?{{` or `end`, found {}", other.describe()),
                ))
            }
        };
        self.bump();
        self.expect(Tok::LBrace)?;
        if *self.peek() == Tok::RBrace {
            return Err(syntax(
                self.span(),
                "empty branch list; write `end` for a terminal state",
            ));
        }
        loop {
            let b = self.branch()?;
            let taken = state
                .inputs
                .iter()
                .chain(&state.outputs)
                .any(|o| o.name.name == b.name.name);
            if taken {
                return Err(ParseError::new(
                    ParseErrorKind::DuplicateAction,
                    b.name.span,
                    format!(
                        "action `{}` appears more than once in state `{}`",
                        b.name.name, state.name.name
                    ),
                ));
            }
            if output {
                state.outputs.push(b);
            } else {
                state.inputs.push(b);
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(output)
    }

    fn type_ref(&mut self) -> Result<(TypeRef, SourceSpan), ParseError> {
        let id = self.word("a return type")?;
        let ty = match id.name.as_str() {
            "void" => TypeRef::Unit,
            "boolean" => TypeRef::Boolean,
            w if KEYWORDS.contains(&w) => {
                return Err(syntax(id.span, format!("`{w}` is not a type")));
            }
            _ => TypeRef::Enum(id.name),
        };
        Ok((ty, id.span))
    }

    fn branch(&mut self) -> Result<RawBranch, ParseError> {
        let (ret, ret_span) = self.type_ref()?;
        let name = self.name("an action name")?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                params.push(self.word("a parameter type")?.name);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;

        let (mut ratio, mut pre, mut preds) = (Ratio::Epsilon, Vec::new(), Vec::new());
        if self.eat(&Tok::LBracket) {
            ratio = self.ratio()?;
            if self.eat(&Tok::Semi) {
                pre = self.keys()?;
                self.expect(Tok::Semi)?;
                preds = self.keys()?;
            }
            self.expect(Tok::RBracket)?;
        }
        self.expect(Tok::Colon)?;
        let dest = self.destination()?;
        let post = if *self.peek() == Tok::LBracket {
            self.keys()?
        } else {
            Vec::new()
        };
        Ok(RawBranch {
            span: name.span,
            ret,
            ret_span,
            name,
            params,
            ratio,
            pre,
            preds,
            dest,
            post,
        })
    }

    fn ratio(&mut self) -> Result<Ratio, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Underscore => {
                self.bump();
                Ok(Ratio::Epsilon)
            }
            Tok::Number(text) => {
                self.bump();
                let v: f64 = text.parse().map_err(|_| syntax(span, format!("bad ratio `{text}`")))?;
                Ratio::new(v).map_err(|_| {
                    ParseError::new(
                        ParseErrorKind::RatioRange,
                        span,
                        format!("ratio {text} is outside [0, 1]"),
                    )
                })
            }
            other => Err(syntax(
                span,
                format!("expected a ratio or `_`, found {}", other.describe()),
            )),
        }
    }

    fn keys(&mut self) -> Result<Vec<Ident>, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                out.push(self.name("a key")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }

    fn destination(&mut self) -> Result<Destination, ParseError> {
        if !self.eat(&Tok::Lt) {
            return Ok(Destination::Plain(self.name("a destination state")?.name));
        }
        let mut map = IndexMap::new();
        loop {
            let span = self.span();
            let outcome = match self.peek().clone() {
                Tok::Ident(w) if w == "true" => Value::Bool(true),
                Tok::Ident(w) if w == "false" => Value::Bool(false),
                Tok::Underscore => {
                    return Err(syntax(span, "`_` is a ratio, not a decision outcome"));
                }
                _ => Value::Label(self.name("a decision outcome")?.name),
            };
            if matches!(outcome, Value::Bool(_)) {
                self.bump();
            }
            self.expect(Tok::Colon)?;
            let target = self.name("a destination state")?;
            if map.contains_key(&outcome) {
                return Err(ParseError::new(
                    ParseErrorKind::DuplicateOutcome,
                    span,
                    format!("outcome `{outcome}` appears more than once"),
                ));
            }
            map.insert(outcome, target.name);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Gt)?;
        Ok(Destination::Decision(map))
    }

    fn comparison(&mut self, refs: &mut Vec<Ident>) -> Result<Comparison, ParseError> {
        let lhs = self.expr(refs)?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            other => {
                return Err(syntax(
                    self.span(),
                    format!("expected a comparison, found {}", other.describe()),
                ))
            }
        };
        self.bump();
        let rhs = self.expr(refs)?;
        Ok(Comparison { lhs, op, rhs })
    }

    fn expr(&mut self, refs: &mut Vec<Ident>) -> Result<Expr, ParseError> {
        let mut lhs = self.term(refs)?;
        loop {
            let add = match self.peek() {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => break,
            };
            self.bump();
            let rhs = self.term(refs)?;
            lhs = if add {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self, refs: &mut Vec<Ident>) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(refs)?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary(refs)?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self, refs: &mut Vec<Ident>) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Minus => {
                if matches!(self.peek_at(1), Tok::Number(_)) {
                    return Ok(Expr::Lit(self.int_literal()?));
                }
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary(refs)?)))
            }
            Tok::Number(_) => Ok(Expr::Lit(self.int_literal()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr(refs)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let id = self.name("a name")?;
                let e = Expr::Name(id.name.clone());
                refs.push(id);
                Ok(e)
            }
            other => Err(syntax(
                span,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

fn out_of_range(span: SourceSpan, text: &str) -> ParseError {
    ParseError::new(
        ParseErrorKind::IntegerRange,
        span,
        format!("integer `{text}` does not fit in 64 bits"),
    )
}

fn undeclared(id: &Ident, kind: &str) -> ParseError {
    ParseError::new(
        ParseErrorKind::UndeclaredName,
        id.span,
        format!("undeclared {kind} `{}`", id.name),
    )
}

impl Raw {
    fn resolve(self) -> Result<ProtocolSpec, ParseError> {
        let var_names: HashSet<&str> = self.vars.iter().map(|v| v.key.name.as_str()).collect();
        let known = |n: &str| self.consts.contains_key(n) || var_names.contains(n);

        for v in &self.vars {
            if let Some(id) = v.refs.iter().find(|id| !self.consts.contains_key(&id.name)) {
                return Err(undeclared(id, "constant"));
            }
        }
        for (target, a) in &self.assigns {
            if self.consts.contains_key(&target.name) {
                return Err(ParseError::new(
                    ParseErrorKind::ConstAssignment,
                    target.span,
                    format!("`{}` is a constant and cannot be assigned", target.name),
                ));
            }
            if !var_names.contains(target.name.as_str()) {
                return Err(undeclared(target, "variable"));
            }
            if let Some(id) = a.refs.iter().find(|id| !known(&id.name)) {
                return Err(undeclared(id, "name"));
            }
        }
        for p in &self.preds {
            if let Some(id) = p.refs.iter().find(|id| !known(&id.name)) {
                return Err(undeclared(id, "name"));
            }
        }

        let assign_keys: HashSet<&str> = self.assigns.iter().map(|(_, a)| a.key.name.as_str()).collect();
        let pred_keys: HashSet<&str> = self.preds.iter().map(|p| p.key.name.as_str()).collect();
        let mut source = SourceMap::default();
        let mut states = Vec::with_capacity(self.states.len());
        for st in &self.states {
            source.insert_state(&st.name.name, st.name.span);
            let mut convert = |raw: &RawBranch| -> Result<Branch, ParseError> {
                if let TypeRef::Enum(e) = &raw.ret {
                    if !self.enums.contains_key(e) {
                        return Err(undeclared(
                            &Ident {
                                name: e.clone(),
                                span: raw.ret_span,
                            },
                            "enumeration",
                        ));
                    }
                }
                for key in raw.pre.iter().chain(&raw.post) {
                    if !assign_keys.contains(key.name.as_str()) {
                        return Err(undeclared(key, "assignment"));
                    }
                }
                if let Some(key) = raw.preds.iter().find(|k| !pred_keys.contains(k.name.as_str())) {
                    return Err(undeclared(key, "predicate"));
                }
                source.insert_branch(&st.name.name, &raw.name.name, raw.span);
                let names = |ids: &[Ident]| ids.iter().map(|i| i.name.clone()).collect();
                Ok(Branch {
                    action: ActionSignature {
                        name: raw.name.name.clone(),
                        params: raw.params.clone(),
                        ret: raw.ret.clone(),
                    },
                    ratio: raw.ratio,
                    pre_assigns: names(&raw.pre),
                    preds: names(&raw.preds),
                    dest: raw.dest.clone(),
                    post_assigns: names(&raw.post),
                })
            };
            let outputs = st.outputs.iter().map(&mut convert).collect::<Result<Vec<_>, _>>()?;
            let inputs = st.inputs.iter().map(&mut convert).collect::<Result<Vec<_>, _>>()?;
            states.push((st.name.name.clone(), StateBody { inputs, outputs }));
        }

        let internal = InternalStateDecl {
            consts: self.consts.iter().map(|(k, (v, _))| (k.clone(), *v)).collect(),
            vars: self.vars.into_iter().map(|v| (v.key.name, v.value)).collect(),
            assigns: self
                .assigns
                .into_iter()
                .map(|(target, a)| {
                    (
                        a.key.name,
                        Assignment {
                            target: target.name,
                            expr: a.value,
                        },
                    )
                })
                .collect(),
            preds: self.preds.into_iter().map(|p| (p.key.name, p.value)).collect(),
            enums: self.enums,
        };
        let typestate = Typestate::new(states).expect("parser enforces typestate invariants");
        let spec = ProtocolSpec::new(internal, typestate).expect("parser enforces reference invariants");
        Ok(spec.with_source(source))
    }
}
