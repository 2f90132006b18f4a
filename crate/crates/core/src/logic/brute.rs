//! Exhaustive model enumeration, used to cross-check chaining on small rule sets.

use std::collections::{BTreeMap, BTreeSet};

use super::{GroundImplication, GroundLiteral, PropositionId, Truth};

pub const MAX_BRUTE_FORCE_PROPOSITIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TooLarge {
    pub propositions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceVerdict {
    /// Whether some total assignment satisfies every rule and every known seed.
    pub consistent: bool,
    /// Literals true in every such assignment (seeds included). Empty when inconsistent.
    pub forced: BTreeSet<GroundLiteral>,
}

pub fn brute_force_check<'a>(
    rules: &[GroundImplication],
    assignments: impl IntoIterator<Item = (&'a PropositionId, Truth)>,
) -> Result<BruteForceVerdict, TooLarge> {
    let mut props: BTreeSet<PropositionId> = BTreeSet::new();
    for r in rules {
        props.extend(r.body().iter().map(|l| l.prop.clone()));
        props.insert(r.head().prop.clone());
    }
    let mut fixed: Vec<(PropositionId, bool)> = Vec::new();
    for (p, t) in assignments {
        if let Some(v) = t.as_bool() {
            props.insert(p.clone());
            fixed.push((p.clone(), v));
        }
    }
    if props.len() > MAX_BRUTE_FORCE_PROPOSITIONS {
        return Err(TooLarge {
            propositions: props.len(),
        });
    }
    let index: BTreeMap<&PropositionId, usize> =
        props.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut always_true = u32::MAX;
    let mut always_false = u32::MAX;
    let mut any = false;
    for mask in 0u32..(1u32 << props.len()) {
        let value = |p: &PropositionId| mask & (1 << index[p]) != 0;
        if fixed.iter().any(|(p, v)| value(p) != *v) || !rules.iter().all(|r| r.holds(&value)) {
            continue;
        }
        any = true;
        always_true &= mask;
        always_false &= !mask;
    }
    let mut forced = BTreeSet::new();
    if any {
        for (p, &i) in &index {
            if always_true & (1 << i) != 0 {
                forced.insert(GroundLiteral::pos((*p).clone()));
            }
            if always_false & (1 << i) != 0 {
                forced.insert(GroundLiteral::neg((*p).clone()));
            }
        }
    }
    Ok(BruteForceVerdict {
        consistent: any,
        forced,
    })
}
