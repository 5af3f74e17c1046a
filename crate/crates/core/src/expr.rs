//! Integer expressions, assignments and comparison predicates over the
//! internal state of a typestate.
//!
//! The language is intentionally small: integer literals, names (variables
//! or constants), unary minus, `+`, `-`, `*`, and conjunctions of
//! comparisons. Arithmetic is checked 64-bit signed; overflow is an error.

use std::fmt;

use thiserror::Error;

/// Errors raised while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("integer overflow while evaluating `{0}`")]
    Overflow(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(i64),
    Name(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn name(name: impl Into<String>) -> Self {
        Expr::Name(name.into())
    }

    /// Evaluates the expression, resolving names through `lookup`.
    pub fn eval<F>(&self, lookup: &F) -> Result<i64, EvalError>
    where
        F: Fn(&str) -> Option<i64>,
    {
        let overflow = || EvalError::Overflow(self.to_string());
        match self {
            Expr::Lit(v) => Ok(*v),
            Expr::Name(n) => lookup(n).ok_or_else(|| EvalError::UnknownName(n.clone())),
            Expr::Neg(e) => e.eval(lookup)?.checked_neg().ok_or_else(overflow),
            Expr::Add(a, b) => a.eval(lookup)?.checked_add(b.eval(lookup)?).ok_or_else(overflow),
            Expr::Sub(a, b) => a.eval(lookup)?.checked_sub(b.eval(lookup)?).ok_or_else(overflow),
            Expr::Mul(a, b) => a.eval(lookup)?.checked_mul(b.eval(lookup)?).ok_or_else(overflow),
        }
    }

    /// Every name referenced by the expression, in left-to-right order.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Name(n) => out.push(n),
            Expr::Neg(e) => e.collect_names(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Lit(_) | Expr::Name(_) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        let paren = prec < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Lit(v) => write!(f, "{v}")?,
            Expr::Name(n) => f.write_str(n)?,
            Expr::Neg(e) => {
                f.write_str("-")?;
                // `-(5)` keeps a negated literal distinct from the literal `-5`.
                let min = if matches!(**e, Expr::Lit(_)) { 5 } else { 3 };
                e.fmt_prec(f, min)?;
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    _ => "*",
                };
                a.fmt_prec(f, prec)?;
                write!(f, " {op} ")?;
                b.fmt_prec(f, prec + 1)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// A conjunction of comparisons, e.g. `acks == n && retries > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub clauses: Vec<Comparison>,
}

impl Predicate {
    pub fn new(clauses: Vec<Comparison>) -> Self {
        Predicate { clauses }
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<bool, EvalError>
    where
        F: Fn(&str) -> Option<i64>,
    {
        for c in &self.clauses {
            if !c.op.apply(c.lhs.eval(lookup)?, c.rhs.eval(lookup)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn names(&self) -> Vec<&str> {
        self.clauses
            .iter()
            .flat_map(|c| c.lhs.names().into_iter().chain(c.rhs.names()))
            .collect()
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `target <- expr`. The target is always a variable, never a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub target: String,
    pub expr: Expr,
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {}", self.target, self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lookup(name: &str) -> Option<i64> {
        match name {
            "acks" => Some(2),
            "n" => Some(2),
            "big" => Some(i64::MAX),
            _ => None,
        }
    }

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn arithmetic_and_names() {
        let e = Expr::Add(b(Expr::name("acks")), b(Expr::Mul(b(Expr::Lit(3)), b(Expr::name("n")))));
        assert_eq!(e.eval(&lookup), Ok(8));
        assert_eq!(e.names(), vec!["acks", "n"]);
        assert_eq!(e.to_string(), "acks + 3 * n");
    }

    #[test]
    fn overflow_is_an_error() {
        let e = Expr::Add(b(Expr::name("big")), b(Expr::Lit(1)));
        assert!(matches!(e.eval(&lookup), Err(EvalError::Overflow(_))));
    }

    #[test]
    fn unknown_name() {
        assert_eq!(Expr::name("x").eval(&lookup), Err(EvalError::UnknownName("x".into())));
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let e = Expr::Mul(b(Expr::Sub(b(Expr::name("a")), b(Expr::name("b")))), b(Expr::Lit(2)));
        assert_eq!(e.to_string(), "(a - b) * 2");
        let e = Expr::Sub(b(Expr::name("a")), b(Expr::Sub(b(Expr::name("b")), b(Expr::name("c")))));
        assert_eq!(e.to_string(), "a - (b - c)");
        assert_eq!(Expr::Neg(b(Expr::Lit(5))).to_string(), "-(5)");
        assert_eq!(Expr::Lit(-5).to_string(), "-5");
    }

    #[test]
    fn predicate_is_a_conjunction() {
        let p = Predicate::new(vec![
            Comparison {
                lhs: Expr::name("acks"),
                op: CmpOp::Eq,
                rhs: Expr::name("n"),
            },
            Comparison {
                lhs: Expr::name("acks"),
                op: CmpOp::Gt,
                rhs: Expr::Lit(5),
            },
        ]);
        assert_eq!(p.eval(&lookup), Ok(false));
        assert_eq!(p.to_string(), "acks == n && acks > 5");
    }
}
