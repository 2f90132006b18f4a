//! Natural-language rendering of atoms from predicate descriptions.

use std::collections::BTreeMap;

use super::lexer::is_ident_continue;
use super::term::EvalError;
use super::{Atom, GroundAtom, PredicateDecl};

/// Renders a ground atom as a sentence: every parameter word of the description is
/// replaced by the plain rendering of the corresponding (folded) argument.
pub fn render_atom_text(atom: &Atom, decl: &PredicateDecl) -> Result<String, EvalError> {
    let ground = atom.ground()?;
    Ok(render_ground_atom_text(&ground, decl))
}

pub fn render_ground_atom_text(atom: &GroundAtom, decl: &PredicateDecl) -> String {
    let values: BTreeMap<&str, String> = decl
        .params
        .iter()
        .map(String::as_str)
        .zip(atom.args.iter().map(|c| c.plain()))
        .collect();
    substitute_words(&decl.description, &values)
}

/// Replaces whole words of `template` found in `values`. Replacement is a single pass,
/// so substituted text is never rewritten again.
pub fn substitute_words(template: &str, values: &BTreeMap<&str, String>) -> String {
    let mut out = String::with_capacity(template.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        match values.get(word.as_str()) {
            Some(v) => out.push_str(v),
            None => out.push_str(word),
        }
        word.clear();
    };
    for c in template.chars() {
        if is_ident_continue(c) {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

pub(crate) fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !is_ident_continue(c))
        .filter(|w| !w.is_empty())
}
