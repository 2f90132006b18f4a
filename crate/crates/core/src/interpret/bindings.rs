//! Variable bindings found by matching rule premises against perceived facts.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{DomainOfDiscourse, PerceivedFact};
use crate::esl::{eval_term, Atom, Constant, EslRule, GroundAtom, TermNode};

pub const DEFAULT_BINDING_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum BindingKind {
    /// Every premise atom is ground and has a perceived truth value (Unknown included).
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Binding {
    /// Variable → object id.
    pub map: BTreeMap<String, String>,
    pub kind: BindingKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TooManyBindings;

type Sigma = BTreeMap<String, Constant>;

/// Bindings under which at least one premise atom coincides with a perceived fact.
///
/// Each premise atom is either matched against a perceived fact of the same predicate or
/// skipped; a binding strictly contained in another one is dropped. A rule without
/// variables yields the single empty binding. The result is sorted by variable name,
/// then object id.
pub fn enumerate_bindings(
    rule: &EslRule,
    dod: &DomainOfDiscourse,
    facts: &[PerceivedFact],
    cap: usize,
) -> Result<Vec<Binding>, TooManyBindings> {
    let perceived: BTreeSet<&GroundAtom> = facts.iter().map(|f| &f.atom).collect();
    let lhs = rule.lhs_atoms();
    if rule.variables().is_empty() {
        return Ok(vec![Binding {
            map: BTreeMap::new(),
            kind: classify(&lhs, &Sigma::new(), &perceived),
        }]);
    }
    if dod.objects.is_empty() {
        return Ok(Vec::new());
    }
    let mut atoms = lhs.clone();
    // atoms that can bind variables go first, so compound arguments see bound values
    atoms.sort_by_key(|a| !a.args.iter().all(is_simple));
    let mut search = Search {
        atoms: &atoms,
        facts: perceived.iter().copied().collect(),
        found: BTreeSet::new(),
        cap,
        budget: cap.saturating_mul(100).max(10_000),
    };
    search.run(0, Sigma::new(), false)?;

    let found: Vec<Sigma> = search.found.into_iter().collect();
    let maximal: Vec<&Sigma> = found
        .iter()
        .filter(|s| {
            !found
                .iter()
                .any(|t| t.len() > s.len() && s.iter().all(|(k, v)| t.get(k) == Some(v)))
        })
        .collect();
    let mut out: Vec<Binding> = maximal
        .into_iter()
        .filter_map(|s| {
            let map = s
                .iter()
                .map(|(v, c)| dod.object_id(c).map(|id| (v.clone(), id.to_string())))
                .collect::<Option<BTreeMap<_, _>>>()?;
            Some(Binding {
                map,
                kind: classify(&lhs, s, &perceived),
            })
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn is_simple(t: &TermNode) -> bool {
    !matches!(t, TermNode::FuncApp { .. })
}

fn classify(lhs: &[&Atom], sigma: &Sigma, perceived: &BTreeSet<&GroundAtom>) -> BindingKind {
    let all = lhs.iter().all(|a| {
        let lookup = |v: &str| sigma.get(v).cloned();
        super::substitute_atom(a, &lookup)
            .ground()
            .is_ok_and(|g| perceived.contains(&g))
    });
    if all {
        BindingKind::Complete
    } else {
        BindingKind::Partial
    }
}

struct Search<'a> {
    atoms: &'a [&'a Atom],
    facts: Vec<&'a GroundAtom>,
    found: BTreeSet<Sigma>,
    cap: usize,
    budget: usize,
}

impl Search<'_> {
    fn run(&mut self, i: usize, sigma: Sigma, matched: bool) -> Result<(), TooManyBindings> {
        if self.budget == 0 {
            return Err(TooManyBindings);
        }
        self.budget -= 1;
        if i == self.atoms.len() {
            if matched && self.found.insert(sigma) && self.found.len() > self.cap {
                return Err(TooManyBindings);
            }
            return Ok(());
        }
        let atom = self.atoms[i];
        let candidates: Vec<Sigma> = self
            .facts
            .iter()
            .filter(|f| f.predicate == atom.predicate && f.args.len() == atom.args.len())
            .filter_map(|f| unify(atom, f, &sigma))
            .collect();
        for next in candidates {
            self.run(i + 1, next, true)?;
        }
        self.run(i + 1, sigma, matched)
    }
}

/// Extends `sigma` so that `atom` folds to `fact`, if possible. Variables are bound only
/// through plain variable arguments; compound arguments must already be fully bound.
fn unify(atom: &Atom, fact: &GroundAtom, sigma: &Sigma) -> Option<Sigma> {
    let mut s = sigma.clone();
    for (t, c) in atom.args.iter().zip(&fact.args) {
        if let TermNode::Variable(v) = t {
            match s.get(v) {
                Some(bound) if bound != c => return None,
                Some(_) => {}
                None => {
                    s.insert(v.clone(), c.clone());
                }
            }
        }
    }
    for (t, c) in atom.args.iter().zip(&fact.args) {
        if matches!(t, TermNode::Variable(_)) {
            continue;
        }
        let lookup = |v: &str| s.get(v).cloned();
        match eval_term(&t.substitute(&lookup)) {
            Ok(value) if &value == c => {}
            _ => return None,
        }
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Discourse, DomainObject};
    use crate::esl::parse_spec;
    use crate::interpret::FactSource;
    use crate::logic::Truth;

    fn dod(values: &[&str]) -> DomainOfDiscourse {
        DomainOfDiscourse {
            discourse: Discourse::default(),
            objects: values
                .iter()
                .enumerate()
                .map(|(i, v)| DomainObject {
                    id: format!("o{}", i + 1),
                    value: Constant::from_rendering(v),
                    synthesized: false,
                })
                .collect(),
        }
    }

    fn fact(p: &str, args: &[&str], truth: Truth) -> PerceivedFact {
        PerceivedFact {
            atom: GroundAtom::new(
                p,
                args.iter().map(|a| Constant::from_rendering(a)).collect(),
            ),
            truth,
            source: FactSource::Agent,
        }
    }

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn numeric_rule_has_two_partial_bindings() {
        let spec = parse_spec(
            r#"{"Variables": ["x", "y", "z"],
                "Predicates": ["IsGreater(x, y) := x is greater than y"],
                "Rules": ["IsGreater(x, y) and IsGreater(z, 0) => IsGreater(x * z, y * z)"]}"#,
        )
        .unwrap();
        let facts = [
            fact("IsGreater", &["15.2", "15.12"], Truth::True),
            fact("IsGreater", &["15.12", "15.2"], Truth::False),
        ];
        let b = enumerate_bindings(&spec.rules[0], &dod(&["15.2", "15.12"]), &facts, 100).unwrap();
        assert_eq!(
            b,
            vec![
                Binding {
                    map: map(&[("x", "o1"), ("y", "o2")]),
                    kind: BindingKind::Partial
                },
                Binding {
                    map: map(&[("x", "o2"), ("y", "o1")]),
                    kind: BindingKind::Partial
                },
            ]
        );
    }

    #[test]
    fn gum_rule_has_complete_bindings() {
        let spec = parse_spec(
            r#"{"Variables": ["x"],
                "Predicates": ["InRailway(x) := x is in a railway", "ChewGum(x) := x chews gum"],
                "Rules": ["InRailway(x) => not ChewGum(x)"]}"#,
        )
        .unwrap();
        let facts = [
            fact("InRailway", &["Alex"], Truth::True),
            fact("InRailway", &["stranger"], Truth::True),
            fact("ChewGum", &["Alex"], Truth::True),
            fact("ChewGum", &["stranger"], Truth::Unknown),
        ];
        let b =
            enumerate_bindings(&spec.rules[0], &dod(&["Alex", "stranger"]), &facts, 100).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|b| b.kind == BindingKind::Complete));
        assert!(enumerate_bindings(&spec.rules[0], &dod(&[]), &facts, 100)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn explosion_is_capped() {
        let spec = parse_spec(
            r#"{"Variables": ["x", "y"], "Predicates": ["R(x, y) := x r y"], "Rules": ["R(x, y) => R(y, x)"]}"#,
        )
        .unwrap();
        let names: Vec<String> = (0..20).map(|i| format!("n{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut facts = Vec::new();
        for a in &refs {
            for b in &refs {
                facts.push(fact("R", &[a, b], Truth::True));
            }
        }
        assert_eq!(
            enumerate_bindings(&spec.rules[0], &dod(&refs), &facts, 100),
            Err(TooManyBindings)
        );
        assert_eq!(
            enumerate_bindings(&spec.rules[0], &dod(&refs), &facts, 1000)
                .unwrap()
                .len(),
            400
        );
    }
}
