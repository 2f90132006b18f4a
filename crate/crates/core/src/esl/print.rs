//! Printing specs back to source form. `parse_spec(print_spec(s)) == s` for every valid spec.

use super::term::{Builtin, Constant, TermNode};
use super::{Atom, EslRule, EslSpec, PredLiteral};

pub fn print_spec(spec: &EslSpec) -> String {
    let value = serde_json::json!({
        "Variables": spec.variables.iter().collect::<Vec<_>>(),
        "Predicates": spec.predicates.iter().map(|p| p.source_text()).collect::<Vec<_>>(),
        "Rules": spec.rules.iter().map(print_rule).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&value).expect("spec serialization")
}

pub fn print_rule(rule: &EslRule) -> String {
    let lhs: Vec<String> = rule
        .lhs
        .iter()
        .map(|conj| {
            conj.iter()
                .map(literal_text)
                .collect::<Vec<_>>()
                .join(" and ")
        })
        .collect();
    let rhs: Vec<String> = rule
        .rhs
        .iter()
        .map(|clause| {
            let inner = clause
                .iter()
                .map(literal_text)
                .collect::<Vec<_>>()
                .join(" or ");
            if clause.len() > 1 && rule.rhs.len() > 1 {
                format!("({inner})")
            } else {
                inner
            }
        })
        .collect();
    format!("{} => {}", lhs.join(" or "), rhs.join(" and "))
}

fn literal_text(l: &PredLiteral) -> String {
    if l.negated {
        format!("not {}", atom_text(&l.atom))
    } else {
        atom_text(&l.atom)
    }
}

pub(crate) fn atom_text(a: &Atom) -> String {
    if a.args.is_empty() {
        return a.predicate.clone();
    }
    let args: Vec<String> = a.args.iter().map(term_text).collect();
    format!("{}({})", a.predicate, args.join(", "))
}

pub(crate) fn term_text(t: &TermNode) -> String {
    match t {
        TermNode::Variable(v) => v.clone(),
        TermNode::Constant(c @ Constant::Number(_)) => c.plain(),
        TermNode::Constant(Constant::Text(s)) => {
            let escaped = s.replace('\\', "\\\\").replace('\'', "\\'");
            format!("'{escaped}'")
        }
        TermNode::FuncApp { name, args } => match Builtin::lookup(name) {
            Some(b) if b.is_infix() && args.len() == 2 => {
                // Left operands need parentheses only when they bind looser; right operands
                // also when equal, since the operators associate to the left.
                let left = operand_text(&args[0], b.precedence(), false);
                let right = operand_text(&args[1], b.precedence(), true);
                format!("{left} {name} {right}")
            }
            _ => {
                let args: Vec<String> = args.iter().map(term_text).collect();
                format!("{name}({})", args.join(", "))
            }
        },
    }
}

fn operand_text(t: &TermNode, parent: u8, right: bool) -> String {
    let text = term_text(t);
    let needs_parens = match t {
        TermNode::FuncApp { name, args } => match Builtin::lookup(name) {
            Some(b) if b.is_infix() && args.len() == 2 => {
                b.precedence() < parent || (right && b.precedence() == parent)
            }
            _ => false,
        },
        // negative literals reparse as literals in any operand position
        TermNode::Constant(_) | TermNode::Variable(_) => false,
    };
    if needs_parens {
        format!("({text})")
    } else {
        text
    }
}
