use std::collections::BTreeSet;

use super::{GroundDeNF, GroundImplication, GroundLiteral};

/// Splits a DeNF into implications with a conjunctive body and a single head literal.
///
/// For every disjunct `D` of the left side and every clause `l1 ∨ … ∨ lk` of the right
/// side, one implication `D ∧ ¬l1 ∧ … (all but li) ⇒ li` is produced per literal. The
/// conjunction of the result is logically equivalent to the input. Empty clauses are
/// ignored.
pub fn to_rule_like(denf: &GroundDeNF) -> BTreeSet<GroundImplication> {
    let mut out = BTreeSet::new();
    for conj in &denf.lhs {
        for clause in &denf.rhs {
            let mut lits: Vec<&GroundLiteral> = Vec::with_capacity(clause.len());
            for l in clause {
                if !lits.contains(&l) {
                    lits.push(l);
                }
            }
            for (i, head) in lits.iter().enumerate() {
                let body = conj.iter().cloned().chain(
                    lits.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, l)| l.complement()),
                );
                out.insert(GroundImplication::new(body, (*head).clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::PropositionId;

    fn p(s: &str) -> GroundLiteral {
        GroundLiteral::pos(PropositionId::new(s))
    }

    #[test]
    fn single_rule() {
        let d = GroundDeNF {
            lhs: vec![vec![p("a"), p("b")]],
            rhs: vec![vec![p("c")]],
        };
        let rules: Vec<String> = to_rule_like(&d).iter().map(|r| r.to_string()).collect();
        assert_eq!(rules, vec!["a ∧ b ⇒ c"]);
    }

    #[test]
    fn negative_head() {
        let d = GroundDeNF {
            lhs: vec![vec![p("InRailway(Alex)")]],
            rhs: vec![vec![p("ChewGum(Alex)").complement()]],
        };
        let rules: Vec<String> = to_rule_like(&d).iter().map(|r| r.to_string()).collect();
        assert_eq!(rules, vec!["InRailway(Alex) ⇒ ¬ChewGum(Alex)"]);
    }

    #[test]
    fn repeated_clause_literal() {
        let d = GroundDeNF {
            lhs: vec![vec![p("a")]],
            rhs: vec![vec![p("b"), p("b")]],
        };
        assert_eq!(to_rule_like(&d).len(), 1);
    }
}
