//! Forward chaining over rule-like implications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{GroundImplication, GroundLiteral, PropositionId, Truth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FcStatus {
    Consistent,
    Inconsistent,
}

/// A node of the chaining graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Node {
    Literal(GroundLiteral),
    /// The body of the implication at `index`, labelled by its canonical text.
    Lhs {
        index: usize,
        label: String,
    },
}

/// A literal derived by chaining, with the implications that produced it in firing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub literal: GroundLiteral,
    pub chain: Vec<GroundImplication>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcOutcome {
    pub status: FcStatus,
    /// Derived literals in order of derivation. Seeds are not repeated here.
    pub derived: Vec<Derivation>,
    /// Positive literal of the proposition that became both true and false.
    pub conflict: Option<GroundLiteral>,
    pub conflict_chain: Vec<GroundImplication>,
    pub lit_up: BTreeSet<GroundLiteral>,
    pub lit_down: BTreeSet<GroundLiteral>,
}

/// Graph of literal and LHS nodes plus the two literal sets used by chaining: `lit_up`
/// holds literals known true, `lit_down` literals known false.
#[derive(Debug, Clone, Default)]
pub struct FcGraph {
    rules: Vec<GroundImplication>,
    literals: BTreeSet<GroundLiteral>,
    lit_up: BTreeSet<GroundLiteral>,
    lit_down: BTreeSet<GroundLiteral>,
    seed_conflict: Option<GroundLiteral>,
}

impl FcGraph {
    pub fn new(rules: impl IntoIterator<Item = GroundImplication>) -> Self {
        let rules: BTreeSet<GroundImplication> = rules.into_iter().collect();
        let mut literals = BTreeSet::new();
        for r in &rules {
            for l in r.body().iter().chain(std::iter::once(r.head())) {
                literals.insert(l.clone());
                literals.insert(l.complement());
            }
        }
        FcGraph {
            rules: rules.into_iter().collect(),
            literals,
            ..Default::default()
        }
    }

    pub fn rules(&self) -> &[GroundImplication] {
        &self.rules
    }

    pub fn propositions(&self) -> BTreeSet<PropositionId> {
        self.literals.iter().map(|l| l.prop.clone()).collect()
    }

    /// Seeds known truth values. `Unknown` entries are ignored and the same proposition may
    /// appear more than once. Propositions that occur in no implication are skipped and
    /// returned.
    pub fn seed<'a>(
        &mut self,
        assignments: impl IntoIterator<Item = (&'a PropositionId, Truth)>,
    ) -> Vec<PropositionId> {
        let mut unused = BTreeSet::new();
        for (prop, truth) in assignments {
            let Some(value) = truth.as_bool() else {
                continue;
            };
            let lit = if value {
                GroundLiteral::pos(prop.clone())
            } else {
                GroundLiteral::neg(prop.clone())
            };
            if !self.literals.contains(&lit) {
                unused.insert(prop.clone());
                continue;
            }
            self.insert(lit);
            if self.seed_conflict.is_none() && self.is_conflicting(prop) {
                self.seed_conflict = Some(GroundLiteral::pos(prop.clone()));
            }
        }
        unused.into_iter().collect()
    }

    fn insert(&mut self, lit: GroundLiteral) {
        self.lit_down.insert(lit.complement());
        self.lit_up.insert(lit);
    }

    fn is_conflicting(&self, prop: &PropositionId) -> bool {
        let pos = GroundLiteral::pos(prop.clone());
        self.lit_up.contains(&pos) && self.lit_down.contains(&pos)
    }

    /// Fires implications pass by pass until nothing new is derived or a proposition
    /// becomes both true and false. Stops at the first conflict.
    pub fn forward_chain(&mut self) -> FcOutcome {
        let mut outcome = FcOutcome {
            status: FcStatus::Consistent,
            derived: Vec::new(),
            conflict: None,
            conflict_chain: Vec::new(),
            lit_up: BTreeSet::new(),
            lit_down: BTreeSet::new(),
        };
        if let Some(c) = self.seed_conflict.clone() {
            outcome.status = FcStatus::Inconsistent;
            outcome.conflict = Some(c);
            return self.finish(outcome);
        }
        // provenance of derived literals, as indices into `fired`
        let mut provenance: BTreeMap<GroundLiteral, BTreeSet<usize>> = BTreeMap::new();
        let mut fired: Vec<usize> = Vec::new();
        loop {
            let mut changed = false;
            for (ri, rule) in self.rules.iter().enumerate() {
                if self.lit_up.contains(rule.head())
                    || !rule.body().iter().all(|l| self.lit_up.contains(l))
                {
                    continue;
                }
                let mut chain: BTreeSet<usize> = BTreeSet::new();
                for l in rule.body() {
                    if let Some(p) = provenance.get(l) {
                        chain.extend(p);
                    }
                }
                chain.insert(fired.len());
                fired.push(ri);
                let head = rule.head().clone();
                let conflict = self.lit_down.contains(&head);
                self.lit_down.insert(head.complement());
                self.lit_up.insert(head.clone());
                provenance.insert(head.clone(), chain.clone());
                outcome.derived.push(Derivation {
                    literal: head.clone(),
                    chain: chain
                        .iter()
                        .map(|&i| self.rules[fired[i]].clone())
                        .collect(),
                });
                changed = true;
                if conflict {
                    if let Some(p) = provenance.get(&head.complement()) {
                        chain.extend(p);
                    }
                    outcome.status = FcStatus::Inconsistent;
                    outcome.conflict = Some(head.positive());
                    outcome.conflict_chain = chain
                        .iter()
                        .map(|&i| self.rules[fired[i]].clone())
                        .collect();
                    return self.finish(outcome);
                }
            }
            if !changed {
                return self.finish(outcome);
            }
        }
    }

    fn finish(&self, mut outcome: FcOutcome) -> FcOutcome {
        outcome.lit_up = self.lit_up.clone();
        outcome.lit_down = self.lit_down.clone();
        outcome
    }

    pub fn nodes(&self) -> Vec<Node> {
        self.literals
            .iter()
            .cloned()
            .map(Node::Literal)
            .chain(self.rules.iter().enumerate().map(|(index, r)| Node::Lhs {
                index,
                label: r.body_label(),
            }))
            .collect()
    }

    /// Graphviz rendering. Literals in `lit_up` are filled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph fc {\n  rankdir=LR;\n");
        let quote = |s: &str| serde_json::to_string(s).expect("string serialization");
        for node in self.nodes() {
            match node {
                Node::Literal(l) => {
                    let style = if self.lit_up.contains(&l) {
                        ", style=filled"
                    } else {
                        ""
                    };
                    let _ = writeln!(out, "  {} [shape=ellipse{style}];", quote(&l.to_string()));
                }
                Node::Lhs { index, label } => {
                    let _ = writeln!(out, "  lhs{index} [shape=box, label={}];", quote(&label));
                }
            }
        }
        for (i, r) in self.rules.iter().enumerate() {
            for l in r.body() {
                let _ = writeln!(out, "  {} -> lhs{i};", quote(&l.to_string()));
            }
            let _ = writeln!(out, "  lhs{i} -> {};", quote(&r.head().to_string()));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> PropositionId {
        PropositionId::new(s)
    }

    fn p(s: &str) -> GroundLiteral {
        GroundLiteral::pos(id(s))
    }

    #[test]
    fn a_and_b_implies_c() {
        let mut g = FcGraph::new([GroundImplication::new([p("a"), p("b")], p("c"))]);
        let (a, b, c) = (id("a"), id("b"), id("c"));
        g.seed([(&a, Truth::True), (&b, Truth::True), (&c, Truth::False)]);
        let out = g.forward_chain();
        assert_eq!(out.status, FcStatus::Inconsistent);
        assert_eq!(out.conflict, Some(p("c")));
        assert_eq!(out.conflict_chain.len(), 1);
    }

    #[test]
    fn chains_accumulate_provenance() {
        let mut g = FcGraph::new([
            GroundImplication::new([p("a")], p("b")),
            GroundImplication::new([p("b")], p("c").complement()),
        ]);
        let a = id("a");
        g.seed([(&a, Truth::True)]);
        let out = g.forward_chain();
        assert_eq!(out.status, FcStatus::Consistent);
        let last = out.derived.last().unwrap();
        assert_eq!(last.literal, p("c").complement());
        let chain: Vec<String> = last.chain.iter().map(ToString::to_string).collect();
        assert_eq!(chain, vec!["a ⇒ b", "b ⇒ ¬c"]);
        assert!(out.lit_down.contains(&p("c")));
    }

    #[test]
    fn seed_conflict() {
        let mut g = FcGraph::new([GroundImplication::new([p("a")], p("c"))]);
        let a = id("a");
        let b = id("b");
        let unused = g.seed([
            (&a, Truth::True),
            (&a, Truth::Unknown),
            (&a, Truth::False),
            (&b, Truth::True),
        ]);
        assert_eq!(unused, vec![b]);
        let out = g.forward_chain();
        assert_eq!(out.status, FcStatus::Inconsistent);
        assert_eq!(out.conflict, Some(p("a")));
        assert!(out.conflict_chain.is_empty());
    }

    #[test]
    fn facts_fire_and_dot_renders() {
        let mut g = FcGraph::new([GroundImplication::fact(p("x"))]);
        let out = g.forward_chain();
        assert_eq!(out.derived.len(), 1);
        let dot = g.to_dot();
        assert!(dot.contains("lhs0 [shape=box, label=\"⊤\"]"));
        assert!(dot.contains("lhs0 -> \"x\""));
        assert!(dot.contains("\"x\" [shape=ellipse, style=filled]"));
    }
}
