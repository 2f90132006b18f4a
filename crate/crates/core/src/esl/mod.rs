//! The expert specification language: predicates with natural-language descriptions and
//! rules of the shape `DNF => CNF`.

mod error;
mod lexer;
pub mod normal;
mod parser;
mod print;
mod render;
pub mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use error::{Location, Section, SpecError, SymbolKind};
pub use normal::{normalize_to_denf, Formula, DEFAULT_CLAUSE_LIMIT};
pub use parser::{parse_rule, parse_spec, parse_spec_bytes, parse_spec_with, ParseOptions};
pub use print::{print_rule, print_spec};
pub use render::{render_atom_text, render_ground_atom_text, substitute_words};
pub use term::{eval_term, Builtin, Constant, EvalError, TermNode};

use crate::logic::PropositionId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<String>,
    pub description: String,
}

impl PredicateDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// The declaration in its source form, `Name(p1,p2) := description`.
    pub fn source_text(&self) -> String {
        if self.params.is_empty() {
            format!("{} := {}", self.name, self.description)
        } else {
            format!(
                "{}({}) := {}",
                self.name,
                self.params.join(","),
                self.description
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<TermNode>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<TermNode>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.args {
            a.collect_variables(&mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(TermNode::is_ground)
    }

    /// Folds every argument; fails if any argument still contains a variable.
    pub fn ground(&self) -> Result<GroundAtom, EvalError> {
        let args = self.args.iter().map(eval_term).collect::<Result<_, _>>()?;
        Ok(GroundAtom {
            predicate: self.predicate.clone(),
            args,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::atom_text(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredLiteral {
    pub atom: Atom,
    pub negated: bool,
}

impl PredLiteral {
    pub fn pos(atom: Atom) -> Self {
        PredLiteral {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        PredLiteral {
            atom,
            negated: true,
        }
    }
}

/// A rule `D1 or ... or Dm => C1 and ... and Cn`: `lhs` holds the conjunctions `Di`,
/// `rhs` holds the disjunctions `Cj`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EslRule {
    pub lhs: Vec<Vec<PredLiteral>>,
    pub rhs: Vec<Vec<PredLiteral>>,
}

impl EslRule {
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for lit in self.lhs.iter().chain(&self.rhs).flatten() {
            out.extend(lit.atom.variables());
        }
        out
    }

    /// Distinct LHS atoms in order of first occurrence.
    pub fn lhs_atoms(&self) -> Vec<&Atom> {
        let mut seen = BTreeSet::new();
        self.lhs
            .iter()
            .flatten()
            .map(|l| &l.atom)
            .filter(|a| seen.insert(*a))
            .collect()
    }
}

impl fmt::Display for EslRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_rule(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EslSpec {
    pub variables: BTreeSet<String>,
    pub predicates: Vec<PredicateDecl>,
    pub rules: Vec<EslRule>,
}

impl EslSpec {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// Human-readable one-line summary, e.g. `1 variable, 2 predicates, 1 rule`.
    pub fn summary(&self) -> String {
        fn plural(n: usize, word: &str) -> String {
            if n == 1 {
                format!("{n} {word}")
            } else {
                format!("{n} {word}s")
            }
        }
        format!(
            "{}, {}, {}",
            plural(self.variables.len(), "variable"),
            plural(self.predicates.len(), "predicate"),
            plural(self.rules.len(), "rule")
        )
    }

    /// Non-fatal findings: parameters that never occur as a word in their description.
    pub fn lint(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for decl in &self.predicates {
            let words: BTreeSet<&str> = render::words(&decl.description).collect();
            for p in &decl.params {
                if !words.contains(p.as_str()) {
                    warnings.push(format!(
                        "predicate `{}`: parameter `{p}` does not occur in its description",
                        decl.name
                    ));
                }
            }
        }
        warnings
    }
}

/// A fully evaluated atom; its canonical text is the proposition identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Constant>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<Constant>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn id(&self) -> PropositionId {
        PropositionId::new(self.to_string())
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(Constant::canonical).collect();
        write!(f, "{}({})", self.predicate, args.join(","))
    }
}

/// Ground atoms indexed by proposition identity.
pub type AtomTable = BTreeMap<PropositionId, GroundAtom>;
