use serde::Serialize;
use thiserror::Error;

use crate::esl::{render_ground_atom_text, AtomTable, EslSpec};
use crate::logic::{GroundLiteral, Truth};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnrenderableLiteral {
    #[error("no ground atom recorded for proposition {0}")]
    UnknownProposition(String),
    #[error("predicate `{0}` is not declared")]
    UndeclaredPredicate(String),
}

/// A yes/no question about the positive form of `literal`, built from the predicate
/// description with the folded arguments substituted.
pub fn render_query(
    literal: &GroundLiteral,
    spec: &EslSpec,
    atoms: &AtomTable,
) -> Result<String, UnrenderableLiteral> {
    let atom = atoms
        .get(&literal.prop)
        .ok_or_else(|| UnrenderableLiteral::UnknownProposition(literal.prop.to_string()))?;
    let decl = spec
        .predicate(&atom.predicate)
        .filter(|d| d.arity() == atom.args.len())
        .ok_or_else(|| UnrenderableLiteral::UndeclaredPredicate(atom.predicate.clone()))?;
    Ok(question_from_sentence(&render_ground_atom_text(atom, decl)))
}

/// `"152 is greater than 151.2"` becomes `"Is 152 greater than 151.2?"`; sentences
/// without a copula become `"Is it true that ...?"`.
pub fn question_from_sentence(sentence: &str) -> String {
    let s = sentence
        .trim()
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?') || c.is_whitespace());
    for (copula, verb) in [(" is ", "Is"), (" are ", "Are")] {
        if let Some((subject, rest)) = s.split_once(copula) {
            if !subject.is_empty() && !rest.is_empty() {
                return format!("{verb} {subject} {rest}?");
            }
        }
    }
    format!("Is it true that {s}?")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FollowUpOutcome {
    Consistent,
    Inconsistent,
    /// The answer was Unknown.
    Inconclusive,
}

/// Compares the answer to the positive question with the polarity of the derived literal.
pub fn check_followup(derived: &GroundLiteral, answer: Truth) -> FollowUpOutcome {
    match answer.as_bool() {
        None => FollowUpOutcome::Inconclusive,
        Some(a) if derived.holds(a) => FollowUpOutcome::Consistent,
        Some(_) => FollowUpOutcome::Inconsistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::PropositionId;

    #[test]
    fn questions() {
        assert_eq!(
            question_from_sentence("151.2 is greater than 152"),
            "Is 151.2 greater than 152?"
        );
        assert_eq!(
            question_from_sentence("a person Alex consumes or attempts to consume chewing gum or bubble gum."),
            "Is it true that a person Alex consumes or attempts to consume chewing gum or bubble gum?"
        );
        assert_eq!(
            question_from_sentence("the doors are open"),
            "Are the doors open?"
        );
    }

    #[test]
    fn followup_polarity() {
        let p = GroundLiteral::pos(PropositionId::new("p"));
        assert_eq!(
            check_followup(&p, Truth::False),
            FollowUpOutcome::Inconsistent
        );
        assert_eq!(check_followup(&p, Truth::True), FollowUpOutcome::Consistent);
        assert_eq!(
            check_followup(&p, Truth::Unknown),
            FollowUpOutcome::Inconclusive
        );
        assert_eq!(
            check_followup(&p.complement(), Truth::True),
            FollowUpOutcome::Inconsistent
        );
        assert_eq!(
            check_followup(&p.complement(), Truth::False),
            FollowUpOutcome::Consistent
        );
    }
}
