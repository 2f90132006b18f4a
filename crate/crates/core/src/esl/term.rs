//! Terms, constants and the built-in function registry.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use bigdecimal::{BigDecimal, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A ground value: an exact decimal number or a piece of text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Number(BigDecimal),
    Text(String),
}

impl Constant {
    /// Builds a numeric constant, stripping trailing zeros so that `15.20` and `15.2` coincide.
    pub fn number(value: BigDecimal) -> Self {
        Constant::Number(value.normalized())
    }

    pub fn text(value: impl Into<String>) -> Self {
        Constant::Text(value.into())
    }

    /// Interprets an object rendering: plain decimal literals become numbers, anything
    /// else stays text.
    pub fn from_rendering(text: &str) -> Self {
        let trimmed = text.trim();
        match parse_decimal_literal(trimmed) {
            Some(value) => Constant::number(value),
            None => Constant::Text(trimmed.to_string()),
        }
    }

    pub fn as_number(&self) -> Option<&BigDecimal> {
        match self {
            Constant::Number(n) => Some(n),
            Constant::Text(_) => None,
        }
    }

    /// Rendering used inside natural-language sentences: numbers in plain notation,
    /// text verbatim.
    pub fn plain(&self) -> String {
        match self {
            Constant::Number(n) => n.normalized().to_plain_string(),
            Constant::Text(s) => s.clone(),
        }
    }

    /// Rendering used inside proposition identifiers. Text that could be confused with a
    /// number or with the identifier punctuation is quoted.
    pub fn canonical(&self) -> String {
        match self {
            Constant::Number(_) => self.plain(),
            Constant::Text(s) => {
                let needs_quotes = s.is_empty()
                    || s.trim() != s
                    || s.chars().any(|c| matches!(c, ',' | '(' | ')' | '"' | '\\'))
                    || parse_decimal_literal(s).is_some();
                if needs_quotes {
                    serde_json::to_string(s).expect("string serialization")
                } else {
                    s.clone()
                }
            }
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl Serialize for Constant {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.plain())
    }
}

impl<'de> Deserialize<'de> for Constant {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(s) => Ok(Constant::from_rendering(&s)),
            serde_json::Value::Number(n) => Ok(Constant::from_rendering(&n.to_string())),
            other => Err(serde::de::Error::custom(format!(
                "expected a string or number constant, found {other}"
            ))),
        }
    }
}

/// Accepts `-?digits(.digits)?` only; exponents and other float syntax are rejected.
pub fn parse_decimal_literal(text: &str) -> Option<BigDecimal> {
    let digits = text.strip_prefix('-').unwrap_or(text);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int) || frac.is_some_and(|f| !all_digits(f)) {
        return None;
    }
    BigDecimal::from_str(text).ok()
}

/// A term of the specification language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermNode {
    Variable(String),
    Constant(Constant),
    FuncApp { name: String, args: Vec<TermNode> },
}

impl TermNode {
    pub fn var(name: impl Into<String>) -> Self {
        TermNode::Variable(name.into())
    }

    pub fn num(text: &str) -> Self {
        TermNode::Constant(Constant::from_rendering(text))
    }

    pub fn app(name: impl Into<String>, args: Vec<TermNode>) -> Self {
        TermNode::FuncApp {
            name: name.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            TermNode::Variable(_) => false,
            TermNode::Constant(_) => true,
            TermNode::FuncApp { args, .. } => args.iter().all(TermNode::is_ground),
        }
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            TermNode::Variable(v) => {
                out.insert(v.clone());
            }
            TermNode::Constant(_) => {}
            TermNode::FuncApp { args, .. } => {
                for a in args {
                    a.collect_variables(out);
                }
            }
        }
    }

    /// Replaces variables using `lookup`; unbound variables are left in place.
    pub fn substitute(&self, lookup: &dyn Fn(&str) -> Option<Constant>) -> TermNode {
        match self {
            TermNode::Variable(v) => match lookup(v) {
                Some(c) => TermNode::Constant(c),
                None => self.clone(),
            },
            TermNode::Constant(_) => self.clone(),
            TermNode::FuncApp { name, args } => TermNode::FuncApp {
                name: name.clone(),
                args: args.iter().map(|a| a.substitute(lookup)).collect(),
            },
        }
    }
}

/// Built-in functions available inside terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Add,
    Sub,
    Mul,
    Div,
    Square,
    Abs,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Add,
        Builtin::Sub,
        Builtin::Mul,
        Builtin::Div,
        Builtin::Square,
        Builtin::Abs,
    ];

    pub fn lookup(name: &str) -> Option<Builtin> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Mul => "*",
            Builtin::Div => "/",
            Builtin::Square => "Square",
            Builtin::Abs => "Abs",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Square | Builtin::Abs => 1,
            _ => 2,
        }
    }

    pub fn is_infix(self) -> bool {
        self.arity() == 2
    }

    /// Binding strength of infix operators (higher binds tighter).
    pub fn precedence(self) -> u8 {
        match self {
            Builtin::Add | Builtin::Sub => 1,
            Builtin::Mul | Builtin::Div => 2,
            Builtin::Square | Builtin::Abs => 3,
        }
    }

    fn apply(self, args: &[BigDecimal]) -> Result<BigDecimal, EvalError> {
        Ok(match self {
            Builtin::Add => &args[0] + &args[1],
            Builtin::Sub => &args[0] - &args[1],
            Builtin::Mul => &args[0] * &args[1],
            Builtin::Div => {
                if args[1].is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                &args[0] / &args[1]
            }
            Builtin::Square => &args[0] * &args[0],
            Builtin::Abs => args[0].abs(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("term contains unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("function `{function}` expects numeric arguments, got `{value}`")]
    NonNumericArg { function: String, value: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` expects {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
}

/// Folds a ground term to a constant with exact decimal arithmetic. Text constants pass
/// through unchanged.
pub fn eval_term(term: &TermNode) -> Result<Constant, EvalError> {
    match term {
        TermNode::Variable(v) => Err(EvalError::UnboundVariable(v.clone())),
        TermNode::Constant(c) => Ok(match c {
            Constant::Number(n) => Constant::number(n.clone()),
            Constant::Text(_) => c.clone(),
        }),
        TermNode::FuncApp { name, args } => {
            let builtin =
                Builtin::lookup(name).ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
            if args.len() != builtin.arity() {
                return Err(EvalError::Arity {
                    name: name.clone(),
                    expected: builtin.arity(),
                    found: args.len(),
                });
            }
            let mut values = Vec::with_capacity(args.len());
            for arg in args {
                match eval_term(arg)? {
                    Constant::Number(n) => values.push(n),
                    other @ Constant::Text(_) => {
                        return Err(EvalError::NonNumericArg {
                            function: name.clone(),
                            value: other.plain(),
                        })
                    }
                }
            }
            Ok(Constant::number(builtin.apply(&values)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(s: &str) -> Constant {
        Constant::from_rendering(s)
    }

    #[test]
    fn folds_product_exactly() {
        let t = TermNode::app("*", vec![TermNode::num("15.2"), TermNode::num("10")]);
        assert_eq!(eval_term(&t).unwrap(), num("152"));
        assert_eq!(eval_term(&t).unwrap().plain(), "152");
        let t = TermNode::app("*", vec![TermNode::num("15.12"), TermNode::num("10")]);
        assert_eq!(eval_term(&t).unwrap().plain(), "151.2");
    }

    #[test]
    fn constant_is_identity() {
        assert_eq!(eval_term(&TermNode::num("7")).unwrap(), num("7"));
        assert_eq!(
            eval_term(&TermNode::Constant(Constant::text("bubble gum"))).unwrap(),
            Constant::text("bubble gum")
        );
    }

    #[test]
    fn square_of_negative() {
        // (-3) * (-3) = 9
        let t = TermNode::app("Square", vec![TermNode::num("-3")]);
        assert_eq!(eval_term(&t).unwrap(), num("9"));
        let t = TermNode::app("Abs", vec![TermNode::num("-2.50")]);
        assert_eq!(eval_term(&t).unwrap().plain(), "2.5");
    }

    #[test]
    fn decimal_sums_are_exact() {
        let t = TermNode::app("+", vec![TermNode::num("0.1"), TermNode::num("0.2")]);
        assert_eq!(eval_term(&t).unwrap().plain(), "0.3");
    }

    #[test]
    fn errors() {
        let t = TermNode::app("/", vec![TermNode::num("1"), TermNode::num("0.0")]);
        assert_eq!(eval_term(&t), Err(EvalError::DivisionByZero));
        let t = TermNode::app(
            "*",
            vec![
                TermNode::Constant(Constant::text("Alex")),
                TermNode::num("2"),
            ],
        );
        assert!(matches!(
            eval_term(&t),
            Err(EvalError::NonNumericArg { .. })
        ));
        assert_eq!(
            eval_term(&TermNode::var("x")),
            Err(EvalError::UnboundVariable("x".into()))
        );
    }

    #[test]
    fn renderings() {
        assert_eq!(num("15.20"), num("15.2"));
        assert_eq!(num("1500").plain(), "1500");
        assert_eq!(num("-0.50").plain(), "-0.5");
        assert_eq!(Constant::from_rendering("Alex"), Constant::text("Alex"));
        assert_eq!(Constant::from_rendering("1e5"), Constant::text("1e5"));
        assert_eq!(Constant::text("12").canonical(), "\"12\"");
        assert_eq!(Constant::text("a, b").canonical(), "\"a, b\"");
        assert_eq!(Constant::text("bubble gum").canonical(), "bubble gum");
    }
}
