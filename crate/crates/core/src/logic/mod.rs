//! Ground propositional machinery: three-valued truth, rule-like implications and the
//! forward-chaining graph.

mod brute;
mod graph;
mod rule_like;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_check, BruteForceVerdict, TooLarge, MAX_BRUTE_FORCE_PROPOSITIONS};
pub use graph::{Derivation, FcGraph, FcOutcome, FcStatus, Node};
pub use rule_like::to_rule_like;

/// Truth under the open-world assumption: anything not stated is `Unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != Truth::Unknown
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "True",
            Truth::False => "False",
            Truth::Unknown => "Unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTruthError(pub String);

impl fmt::Display for ParseTruthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not a truth value: {:?}", self.0)
    }
}

impl std::error::Error for ParseTruthError {}

impl FromStr for Truth {
    type Err = ParseTruthError;

    /// Case-insensitive `true`/`false`/`unknown`, also `yes`/`no`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" => Ok(Truth::True),
            "false" | "no" => Ok(Truth::False),
            "unknown" => Ok(Truth::Unknown),
            _ => Err(ParseTruthError(s.to_string())),
        }
    }
}

/// Canonical text of a ground atom, e.g. `IsGreater(152,151.2)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PropositionId(String);

impl PropositionId {
    pub fn new(text: impl Into<String>) -> Self {
        PropositionId(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PropositionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundLiteral {
    pub prop: PropositionId,
    pub negated: bool,
}

impl GroundLiteral {
    pub fn pos(prop: PropositionId) -> Self {
        GroundLiteral {
            prop,
            negated: false,
        }
    }

    pub fn neg(prop: PropositionId) -> Self {
        GroundLiteral {
            prop,
            negated: true,
        }
    }

    pub fn complement(&self) -> Self {
        GroundLiteral {
            prop: self.prop.clone(),
            negated: !self.negated,
        }
    }

    pub fn positive(&self) -> Self {
        GroundLiteral::pos(self.prop.clone())
    }

    /// Value of the literal under a two-valued assignment of its proposition.
    pub fn holds(&self, prop_value: bool) -> bool {
        prop_value != self.negated
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬{}", self.prop)
        } else {
            write!(f, "{}", self.prop)
        }
    }
}

impl Serialize for GroundLiteral {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroundLiteral {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(match s.strip_prefix('¬') {
            Some(rest) => GroundLiteral::neg(PropositionId::new(rest)),
            None => GroundLiteral::pos(PropositionId::new(s)),
        })
    }
}

/// A ground rule `D1 ∨ … ∨ Dm ⇒ C1 ∧ … ∧ Cn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundDeNF {
    pub lhs: Vec<Vec<GroundLiteral>>,
    pub rhs: Vec<Vec<GroundLiteral>>,
}

impl GroundDeNF {
    pub fn literals(&self) -> impl Iterator<Item = &GroundLiteral> {
        self.lhs.iter().chain(&self.rhs).flatten()
    }

    pub fn holds(&self, value: &dyn Fn(&PropositionId) -> bool) -> bool {
        let lhs = self
            .lhs
            .iter()
            .any(|c| c.iter().all(|l| l.holds(value(&l.prop))));
        let rhs = self
            .rhs
            .iter()
            .all(|c| c.iter().any(|l| l.holds(value(&l.prop))));
        !lhs || rhs
    }
}

impl fmt::Display for GroundDeNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |groups: &[Vec<GroundLiteral>], inner: &str, outer: &str| {
            groups
                .iter()
                .map(|g| {
                    let s: Vec<String> = g.iter().map(ToString::to_string).collect();
                    if g.len() > 1 && groups.len() > 1 {
                        format!("({})", s.join(inner))
                    } else {
                        s.join(inner)
                    }
                })
                .collect::<Vec<_>>()
                .join(outer)
        };
        write!(
            f,
            "{} ⇒ {}",
            join(&self.lhs, " ∧ ", " ∨ "),
            join(&self.rhs, " ∨ ", " ∧ ")
        )
    }
}

/// `body ⇒ head` with a conjunctive body. The body is kept sorted and free of duplicates,
/// so structurally equal implications compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundImplication {
    body: Vec<GroundLiteral>,
    head: GroundLiteral,
}

impl GroundImplication {
    pub fn new(body: impl IntoIterator<Item = GroundLiteral>, head: GroundLiteral) -> Self {
        let mut body: Vec<GroundLiteral> = body.into_iter().collect();
        body.sort();
        body.dedup();
        GroundImplication { body, head }
    }

    pub fn fact(head: GroundLiteral) -> Self {
        GroundImplication {
            body: Vec::new(),
            head,
        }
    }

    pub fn body(&self) -> &[GroundLiteral] {
        &self.body
    }

    pub fn head(&self) -> &GroundLiteral {
        &self.head
    }

    pub fn holds(&self, value: &dyn Fn(&PropositionId) -> bool) -> bool {
        !self.body.iter().all(|l| l.holds(value(&l.prop)))
            || self.head.holds(value(&self.head.prop))
    }

    /// Label of the LHS node: body literals joined by `&`, `⊤` for an empty body.
    pub fn body_label(&self) -> String {
        if self.body.is_empty() {
            "⊤".to_string()
        } else {
            self.body
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("&")
        }
    }
}

impl fmt::Display for GroundImplication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            write!(f, "⊤ ⇒ {}", self.head)
        } else {
            let body: Vec<String> = self.body.iter().map(ToString::to_string).collect();
            write!(f, "{} ⇒ {}", body.join(" ∧ "), self.head)
        }
    }
}

impl PartialOrd for GroundImplication {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by canonical text, which fixes the rule iteration order of forward chaining.
impl Ord for GroundImplication {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_string()
            .cmp(&other.to_string())
            .then_with(|| (&self.body, &self.head).cmp(&(&other.body, &other.head)))
    }
}
