//! Guard and action expressions: integer arithmetic, comparisons, boolean
//! connectives, enumeration literals, record construction and field access.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::{Type, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

const UNARY_PRECEDENCE: u8 = 6;
const POSTFIX_PRECEDENCE: u8 = 7;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    /// A bound input variable, a local variable, or an enumeration literal.
    Ident(String),
    Field(Box<Expr>, String),
    Record(Vec<(String, Expr)>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn ident(name: impl Into<String>) -> Self {
        Expr::Ident(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Identifiers referenced anywhere in the expression, in first-use order.
    pub fn identifiers(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::Int(_) | Expr::Bool(_) => {}
                Expr::Ident(name) => {
                    if !out.contains(&name.as_str()) {
                        out.push(name);
                    }
                }
                Expr::Field(inner, _) | Expr::Unary(_, inner) => walk(inner, out),
                Expr::Record(fields) => fields.iter().for_each(|(_, e)| walk(e, out)),
                Expr::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(..) => UNARY_PRECEDENCE,
            Expr::Int(n) if *n < 0 => UNARY_PRECEDENCE,
            _ => POSTFIX_PRECEDENCE + 1,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Ident(name) => f.write_str(name),
            Expr::Field(inner, field) => {
                if inner.precedence() <= POSTFIX_PRECEDENCE {
                    write!(f, "({inner}).{field}")
                } else {
                    write!(f, "{inner}.{field}")
                }
            }
            Expr::Record(fields) => {
                f.write_str("{")?;
                for (i, (name, e)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name} = {e}")?;
                }
                f.write_str("}")
            }
            Expr::Unary(op, inner) => {
                f.write_str(match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "not ",
                })?;
                // `-(3)` and `-(3.f)` must not collapse into the literal `-3`,
                // and `--` starts a comment
                let text = inner.to_string();
                let literal = text.starts_with(|c: char| c.is_ascii_digit());
                if inner.precedence() <= UNARY_PRECEDENCE || (literal && *op == UnOp::Neg) {
                    write!(f, "({inner})")
                } else {
                    write!(f, "{inner}")
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let p = op.precedence();
                let lp = lhs.precedence();
                let rp = rhs.precedence();
                let left_parens = lp < p || (op.is_comparison() && lp == p);
                let right_parens = rp <= p;
                if left_parens {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if right_parens {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
        }
    }
}

/// Static type of an expression. Integer ranges are checked at runtime.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SType {
    Int,
    Bool,
    Enum(String),
    Record(BTreeMap<String, SType>),
}

impl From<&Type> for SType {
    fn from(ty: &Type) -> Self {
        match ty {
            Type::Int { .. } => SType::Int,
            Type::Bool => SType::Bool,
            Type::Enum { name, .. } => SType::Enum(name.clone()),
            Type::Record { fields, .. } => {
                SType::Record(fields.iter().map(|(n, t)| (n.clone(), SType::from(t))).collect())
            }
        }
    }
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SType::Int => f.write_str("int"),
            SType::Bool => f.write_str("bool"),
            SType::Enum(name) => f.write_str(name),
            SType::Record(fields) => {
                f.write_str("record {")?;
                for (i, (n, t)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}: {t}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unresolved name `{0}`")]
    Unresolved(String),
    #[error("operator `{op}` cannot be applied to {found}")]
    Operand { op: String, found: String },
    #[error("expected {expected}, found {found}")]
    Mismatch { expected: String, found: String },
    #[error("no field `{field}` in {ty}")]
    NoField { field: String, ty: String },
    #[error("duplicate field `{0}` in record literal")]
    DuplicateField(String),
}

/// Infers the static type of `expr`; `lookup` resolves identifiers.
pub fn typecheck(expr: &Expr, lookup: &dyn Fn(&str) -> Option<SType>) -> Result<SType, TypeError> {
    match expr {
        Expr::Int(_) => Ok(SType::Int),
        Expr::Bool(_) => Ok(SType::Bool),
        Expr::Ident(name) => lookup(name).ok_or_else(|| TypeError::Unresolved(name.clone())),
        Expr::Field(inner, field) => match typecheck(inner, lookup)? {
            SType::Record(fields) => fields.get(field).cloned().ok_or_else(|| TypeError::NoField {
                field: field.clone(),
                ty: SType::Record(fields.clone()).to_string(),
            }),
            other => Err(TypeError::NoField {
                field: field.clone(),
                ty: other.to_string(),
            }),
        },
        Expr::Record(fields) => {
            let mut out = BTreeMap::new();
            for (name, e) in fields {
                if out.insert(name.clone(), typecheck(e, lookup)?).is_some() {
                    return Err(TypeError::DuplicateField(name.clone()));
                }
            }
            Ok(SType::Record(out))
        }
        Expr::Unary(op, inner) => {
            let t = typecheck(inner, lookup)?;
            let want = match op {
                UnOp::Neg => SType::Int,
                UnOp::Not => SType::Bool,
            };
            if t == want {
                Ok(t)
            } else {
                Err(TypeError::Operand {
                    op: match op {
                        UnOp::Neg => "-".into(),
                        UnOp::Not => "not".into(),
                    },
                    found: t.to_string(),
                })
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            let l = typecheck(lhs, lookup)?;
            let r = typecheck(rhs, lookup)?;
            let operand_err = |found: &SType| TypeError::Operand {
                op: op.symbol().into(),
                found: found.to_string(),
            };
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    if l != SType::Int {
                        return Err(operand_err(&l));
                    }
                    if r != SType::Int {
                        return Err(operand_err(&r));
                    }
                    Ok(SType::Int)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    if l != SType::Int {
                        return Err(operand_err(&l));
                    }
                    if r != SType::Int {
                        return Err(operand_err(&r));
                    }
                    Ok(SType::Bool)
                }
                BinOp::Eq | BinOp::Ne => {
                    if l != r {
                        return Err(TypeError::Mismatch {
                            expected: l.to_string(),
                            found: r.to_string(),
                        });
                    }
                    Ok(SType::Bool)
                }
                BinOp::And | BinOp::Or => {
                    if l != SType::Bool {
                        return Err(operand_err(&l));
                    }
                    if r != SType::Bool {
                        return Err(operand_err(&r));
                    }
                    Ok(SType::Bool)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum EvalError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("operator `{op}` applied to {found}")]
    Operand { op: String, found: String },
    #[error("no field `{0}`")]
    NoField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
}

/// Evaluates `expr`; `lookup` resolves identifiers. `and`/`or` short-circuit.
pub fn eval(expr: &Expr, lookup: &dyn Fn(&str) -> Option<Value>) -> Result<Value, EvalError> {
    match expr {
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Ident(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone())),
        Expr::Field(inner, field) => match eval(inner, lookup)? {
            Value::Record(mut fields) => fields
                .remove(field)
                .ok_or_else(|| EvalError::NoField(field.clone())),
            _ => Err(EvalError::NoField(field.clone())),
        },
        Expr::Record(fields) => {
            let mut out = BTreeMap::new();
            for (name, e) in fields {
                out.insert(name.clone(), eval(e, lookup)?);
            }
            Ok(Value::Record(out))
        }
        Expr::Unary(op, inner) => apply_unary(*op, eval(inner, lookup)?),
        Expr::Binary(BinOp::And, lhs, rhs) => match eval(lhs, lookup)? {
            Value::Bool(false) => Ok(Value::Bool(false)),
            Value::Bool(true) => expect_bool("and", eval(rhs, lookup)?),
            other => Err(operand("and", &other)),
        },
        Expr::Binary(BinOp::Or, lhs, rhs) => match eval(lhs, lookup)? {
            Value::Bool(true) => Ok(Value::Bool(true)),
            Value::Bool(false) => expect_bool("or", eval(rhs, lookup)?),
            other => Err(operand("or", &other)),
        },
        Expr::Binary(op, lhs, rhs) => apply_binary(*op, eval(lhs, lookup)?, eval(rhs, lookup)?),
    }
}

fn operand(op: &str, v: &Value) -> EvalError {
    EvalError::Operand {
        op: op.into(),
        found: v.to_string(),
    }
}

fn expect_bool(op: &str, v: Value) -> Result<Value, EvalError> {
    match v {
        Value::Bool(_) => Ok(v),
        other => Err(operand(op, &other)),
    }
}

pub fn apply_unary(op: UnOp, v: Value) -> Result<Value, EvalError> {
    match (op, v) {
        (UnOp::Neg, Value::Int(n)) => n.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
        (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (UnOp::Neg, other) => Err(operand("-", &other)),
        (UnOp::Not, other) => Err(operand("not", &other)),
    }
}

/// Strict binary operators. `and`/`or` here evaluate both sides; callers
/// wanting short-circuit behaviour handle those operators themselves.
pub fn apply_binary(op: BinOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use BinOp::*;
    match op {
        Add | Sub | Mul | Div | Mod | Lt | Le | Gt | Ge => {
            let (Value::Int(a), Value::Int(b)) = (&l, &r) else {
                let bad = if l.as_int().is_none() { &l } else { &r };
                return Err(operand(op.symbol(), bad));
            };
            let (a, b) = (*a, *b);
            let int = |x: Option<i64>| x.map(Value::Int).ok_or(EvalError::Overflow);
            match op {
                Add => int(a.checked_add(b)),
                Sub => int(a.checked_sub(b)),
                Mul => int(a.checked_mul(b)),
                Div if b == 0 => Err(EvalError::DivisionByZero),
                Mod if b == 0 => Err(EvalError::DivisionByZero),
                Div => int(a.checked_div_euclid(b)),
                Mod => int(a.checked_rem_euclid(b)),
                Lt => Ok(Value::Bool(a < b)),
                Le => Ok(Value::Bool(a <= b)),
                Gt => Ok(Value::Bool(a > b)),
                _ => Ok(Value::Bool(a >= b)),
            }
        }
        Eq => Ok(Value::Bool(l == r)),
        Ne => Ok(Value::Bool(l != r)),
        And | Or => match (l, r) {
            (Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(if op == And { a && b } else { a || b })),
            (Value::Bool(_), other) | (other, _) => Err(operand(op.symbol(), &other)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_is(n: i64) -> impl Fn(&str) -> Option<Value> {
        move |name| (name == "X").then_some(Value::Int(n))
    }

    #[test]
    fn arithmetic_and_short_circuit() {
        let sq = Expr::binary(BinOp::Mul, Expr::ident("X"), Expr::ident("X"));
        assert_eq!(eval(&sq, &x_is(3)), Ok(Value::Int(9)));

        // X != 0 and 10 div X > 1 must not divide by zero when X = 0
        let guarded = Expr::binary(
            BinOp::And,
            Expr::binary(BinOp::Ne, Expr::ident("X"), Expr::Int(0)),
            Expr::binary(
                BinOp::Gt,
                Expr::binary(BinOp::Div, Expr::Int(10), Expr::ident("X")),
                Expr::Int(1),
            ),
        );
        assert_eq!(eval(&guarded, &x_is(0)), Ok(Value::Bool(false)));
        assert_eq!(eval(&guarded, &x_is(4)), Ok(Value::Bool(true)));
        assert_eq!(
            eval(&Expr::binary(BinOp::Mod, Expr::Int(1), Expr::Int(0)), &x_is(0)),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn int_plus_bool_is_a_type_error() {
        let e = Expr::binary(BinOp::Add, Expr::ident("X"), Expr::Bool(true));
        let lookup = |n: &str| (n == "X").then_some(SType::Int);
        assert!(matches!(typecheck(&e, &lookup), Err(TypeError::Operand { .. })));
    }

    #[test]
    fn record_field_access() {
        let rec = Expr::Record(vec![("hi".into(), Expr::Int(1)), ("lo".into(), Expr::Int(0))]);
        let e = Expr::Field(Box::new(rec), "hi".into());
        assert_eq!(eval(&e, &|_| None), Ok(Value::Int(1)));
        assert_eq!(typecheck(&e, &|_| None), Ok(SType::Int));
    }

    #[test]
    fn printing_parenthesizes_by_precedence() {
        let e = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, Expr::Int(1), Expr::Int(2)),
            Expr::binary(BinOp::Sub, Expr::Int(3), Expr::Int(-4)),
        );
        assert_eq!(e.to_string(), "(1 + 2) * (3 - -4)");
        assert_eq!(Expr::Unary(UnOp::Neg, Box::new(Expr::Int(3))).to_string(), "-(3)");
    }
}
