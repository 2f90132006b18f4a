//! Conversion of arbitrary and/or/not formulas into DNF and CNF by distribution.

use std::collections::BTreeSet;

use super::{EslRule, PredLiteral};

pub const DEFAULT_CLAUSE_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula<A> {
    Atom(A),
    Not(Box<Formula<A>>),
    And(Vec<Formula<A>>),
    Or(Vec<Formula<A>>),
    Implies(Box<Formula<A>>, Box<Formula<A>>),
}

impl<A> Formula<A> {
    pub fn negate(f: Formula<A>) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(lhs: Formula<A>, rhs: Formula<A>) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// Two-valued evaluation.
    pub fn eval(&self, value: &dyn Fn(&A) -> bool) -> bool {
        match self {
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
            Formula::Implies(l, r) => !l.eval(value) || r.eval(value),
        }
    }
}

/// A literal as `(atom, negated)`.
pub type Lit<A> = (A, bool);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseLimitExceeded {
    pub limit: usize,
}

/// Disjunctive normal form: a list of conjunctions.
pub fn to_dnf<A: Clone + Ord>(
    f: &Formula<A>,
    limit: usize,
) -> Result<Vec<Vec<Lit<A>>>, ClauseLimitExceeded> {
    dnf(f, true, limit)
}

/// Conjunctive normal form: a list of disjunctions. Computed as the dual of the DNF of
/// the negation.
pub fn to_cnf<A: Clone + Ord>(
    f: &Formula<A>,
    limit: usize,
) -> Result<Vec<Vec<Lit<A>>>, ClauseLimitExceeded> {
    Ok(dnf(f, false, limit)?
        .into_iter()
        .map(|conj| conj.into_iter().map(|(a, neg)| (a, !neg)).collect())
        .collect())
}

/// DNF of `f` when `positive`, of `¬f` otherwise.
fn dnf<A: Clone + Ord>(
    f: &Formula<A>,
    positive: bool,
    limit: usize,
) -> Result<Vec<Vec<Lit<A>>>, ClauseLimitExceeded> {
    let out = match (f, positive) {
        (Formula::Atom(a), _) => vec![vec![(a.clone(), !positive)]],
        (Formula::Not(g), _) => dnf(g, !positive, limit)?,
        (Formula::And(gs), true) | (Formula::Or(gs), false) => {
            let mut acc: Vec<Vec<Lit<A>>> = vec![vec![]];
            for g in gs {
                acc = product(&acc, &dnf(g, positive, limit)?, limit)?;
            }
            acc
        }
        (Formula::Or(gs), true) | (Formula::And(gs), false) => {
            let mut acc = Vec::new();
            for g in gs {
                acc.extend(dnf(g, positive, limit)?);
            }
            acc
        }
        // a => b  ==  ¬a ∨ b
        (Formula::Implies(a, b), true) => {
            let mut acc = dnf(a, false, limit)?;
            acc.extend(dnf(b, true, limit)?);
            acc
        }
        // ¬(a => b)  ==  a ∧ ¬b
        (Formula::Implies(a, b), false) => {
            product(&dnf(a, true, limit)?, &dnf(b, false, limit)?, limit)?
        }
    };
    let out = dedup_clauses(out);
    if out.len() > limit {
        return Err(ClauseLimitExceeded { limit });
    }
    Ok(out)
}

fn product<A: Clone + Ord>(
    left: &[Vec<Lit<A>>],
    right: &[Vec<Lit<A>>],
    limit: usize,
) -> Result<Vec<Vec<Lit<A>>>, ClauseLimitExceeded> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            let mut c = l.clone();
            for lit in r {
                if !c.contains(lit) {
                    c.push(lit.clone());
                }
            }
            out.push(c);
        }
    }
    let out = dedup_clauses(out);
    if out.len() > limit {
        return Err(ClauseLimitExceeded { limit });
    }
    Ok(out)
}

/// Removes repeated literals inside a clause and repeated clauses (as sets), keeping
/// first occurrences in order.
fn dedup_clauses<A: Clone + Ord>(clauses: Vec<Vec<Lit<A>>>) -> Vec<Vec<Lit<A>>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(clauses.len());
    for c in clauses {
        let mut lits: Vec<Lit<A>> = Vec::with_capacity(c.len());
        for l in c {
            if !lits.contains(&l) {
                lits.push(l);
            }
        }
        let mut key = lits.clone();
        key.sort();
        if seen.insert(key) {
            out.push(lits);
        }
    }
    out
}

/// Rewrites `lhs => rhs` into DNF on the left and CNF on the right.
pub fn normalize_to_denf(
    lhs: &Formula<crate::esl::Atom>,
    rhs: &Formula<crate::esl::Atom>,
    limit: usize,
) -> Result<EslRule, ClauseLimitExceeded> {
    let to_lits = |clauses: Vec<Vec<Lit<crate::esl::Atom>>>| -> Vec<Vec<PredLiteral>> {
        clauses
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|(atom, negated)| PredLiteral { atom, negated })
                    .collect()
            })
            .collect()
    };
    Ok(EslRule {
        lhs: to_lits(to_dnf(lhs, limit)?),
        rhs: to_lits(to_cnf(rhs, limit)?),
    })
}
