//! Grounding of rules against a domain of discourse: perception, binding enumeration and
//! Level-1 / Level-2 interpretation.

mod bindings;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, Discourse, DomainObject};
use crate::esl::{Atom, AtomTable, Constant, EslRule, EslSpec, EvalError, GroundAtom, PredLiteral};
use crate::logic::{GroundDeNF, GroundLiteral, PropositionId, Truth};

pub use bindings::{enumerate_bindings, Binding, BindingKind, DEFAULT_BINDING_CAP};

/// How partial bindings are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Level {
    /// Only complete bindings are grounded.
    One,
    /// Partial bindings are completed by asking the perception agent for witnesses.
    Two,
}

impl TryFrom<u8> for Level {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Level::One),
            2 => Ok(Level::Two),
            other => Err(format!("level must be 1 or 2, got {other}")),
        }
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        match l {
            Level::One => 1,
            Level::Two => 2,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DomainOfDiscourse {
    #[serde(flatten)]
    pub discourse: Discourse,
    pub objects: Vec<DomainObject>,
}

impl DomainOfDiscourse {
    pub fn object_id(&self, value: &Constant) -> Option<&str> {
        self.objects
            .iter()
            .find(|o| &o.value == value)
            .map(|o| o.id.as_str())
    }

    pub fn object(&self, id: &str) -> Option<&DomainObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Returns the id for `value`, adding a new object when it is not present yet.
    pub fn intern(&mut self, value: &Constant, synthesized: bool) -> (String, bool) {
        if let Some(id) = self.object_id(value) {
            return (id.to_string(), false);
        }
        let id = format!("o{}", self.objects.len() + 1);
        self.objects.push(DomainObject {
            id: id.clone(),
            value: value.clone(),
            synthesized,
        });
        (id, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactSource {
    Agent,
    Instantiation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerceivedFact {
    pub atom: GroundAtom,
    pub truth: Truth,
    pub source: FactSource,
}

/// Objects and facts as seen by the perception agent. Fact arguments missing from the
/// object list are added as objects.
pub fn perceive(
    spec: &EslSpec,
    discourse: &Discourse,
    agent: &Agent,
    notes: &mut Vec<String>,
) -> Result<(DomainOfDiscourse, Vec<PerceivedFact>), AgentError> {
    let objects = agent.extract_objects(spec, discourse, notes)?;
    let mut dod = DomainOfDiscourse {
        discourse: discourse.clone(),
        objects,
    };
    let mut facts = Vec::new();
    if dod.objects.is_empty() {
        return Ok((dod, facts));
    }
    for (atom, truth) in agent.propositionalize(spec, discourse, &dod.objects, notes)? {
        for arg in &atom.args {
            let (id, added) = dod.intern(arg, false);
            if added {
                notes.push(format!(
                    "perception: fact argument {arg} added as object {id}"
                ));
            }
        }
        facts.push(PerceivedFact {
            atom,
            truth,
            source: FactSource::Agent,
        });
    }
    Ok((dod, facts))
}

/// A rule instance after substitution and term folding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundRule {
    pub rule_index: usize,
    pub binding: BTreeMap<String, Constant>,
    pub denf: GroundDeNF,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InterpretationResult {
    pub ground_rules: Vec<GroundRule>,
    pub assignments: BTreeMap<PropositionId, Truth>,
    /// Propositions perceived both True and False.
    pub contradictions: Vec<PropositionId>,
    pub atoms: AtomTable,
    pub objects: Vec<DomainObject>,
    pub diagnostics: Vec<String>,
}

impl InterpretationResult {
    /// Seeds for chaining: every assignment, plus the opposite value of each
    /// contradictory proposition.
    pub fn seeds(&self) -> Vec<(&PropositionId, Truth)> {
        let mut out: Vec<(&PropositionId, Truth)> =
            self.assignments.iter().map(|(p, t)| (p, *t)).collect();
        for p in &self.contradictions {
            if let Some(t) = self.assignments.get(p).and_then(|t| t.as_bool()) {
                out.push((p, Truth::from_bool(!t)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpretError {
    #[error("rule {rule}: more than {limit} variable bindings")]
    BindingExplosion { rule: usize, limit: usize },
    #[error("interpretation failed: {0}")]
    InterpretationFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpretOptions {
    pub binding_cap: usize,
}

impl Default for InterpretOptions {
    fn default() -> Self {
        InterpretOptions {
            binding_cap: DEFAULT_BINDING_CAP,
        }
    }
}

pub fn interpret_level1(
    spec: &EslSpec,
    dod: &DomainOfDiscourse,
    facts: &[PerceivedFact],
    opts: &InterpretOptions,
) -> Result<InterpretationResult, InterpretError> {
    Interpreter::new(spec, dod, facts).run(None, opts)
}

pub fn interpret_level2(
    spec: &EslSpec,
    dod: &DomainOfDiscourse,
    facts: &[PerceivedFact],
    agent: &Agent,
    opts: &InterpretOptions,
) -> Result<InterpretationResult, InterpretError> {
    Interpreter::new(spec, dod, facts).run(Some(agent), opts)
}

pub fn interpret(
    spec: &EslSpec,
    dod: &DomainOfDiscourse,
    facts: &[PerceivedFact],
    level: Level,
    agent: &Agent,
    opts: &InterpretOptions,
) -> Result<InterpretationResult, InterpretError> {
    match level {
        Level::One => interpret_level1(spec, dod, facts, opts),
        Level::Two => interpret_level2(spec, dod, facts, agent, opts),
    }
}

struct Interpreter<'a> {
    spec: &'a EslSpec,
    dod: DomainOfDiscourse,
    facts: &'a [PerceivedFact],
    perceived: BTreeMap<GroundAtom, Truth>,
    out: InterpretationResult,
    instantiated: BTreeMap<GroundAtom, Truth>,
    seen: BTreeSet<(usize, String)>,
}

impl<'a> Interpreter<'a> {
    fn new(spec: &'a EslSpec, dod: &DomainOfDiscourse, facts: &'a [PerceivedFact]) -> Self {
        let mut perceived = BTreeMap::new();
        let mut contradictions = BTreeSet::new();
        for f in facts {
            let previous = perceived.insert(f.atom.clone(), f.truth);
            match previous {
                Some(p) if p.is_known() && f.truth.is_known() && p != f.truth => {
                    contradictions.insert(f.atom.id());
                }
                // a known value is not overwritten by a later Unknown
                Some(p) if p.is_known() && !f.truth.is_known() => {
                    perceived.insert(f.atom.clone(), p);
                }
                _ => {}
            }
        }
        let out = InterpretationResult {
            contradictions: contradictions.into_iter().collect(),
            ..Default::default()
        };
        Interpreter {
            spec,
            dod: dod.clone(),
            facts,
            perceived,
            out,
            instantiated: BTreeMap::new(),
            seen: BTreeSet::new(),
        }
    }

    fn run(
        mut self,
        agent: Option<&Agent>,
        opts: &InterpretOptions,
    ) -> Result<InterpretationResult, InterpretError> {
        let mut calls = 0usize;
        let mut failures: Vec<String> = Vec::new();
        for (ri, rule) in self.spec.rules.iter().enumerate() {
            let bindings = enumerate_bindings(rule, &self.dod, self.facts, opts.binding_cap)
                .map_err(|_| InterpretError::BindingExplosion {
                    rule: ri,
                    limit: opts.binding_cap,
                })?;
            let vars = rule.variables();
            for b in bindings {
                let sigma = self.values(&b);
                let unbound: Vec<String> = vars
                    .iter()
                    .filter(|v| !sigma.contains_key(*v))
                    .cloned()
                    .collect();
                let label = binding_label(&b);
                // At level 2 a partial binding with every variable bound needs no witness;
                // its unperceived atoms are seeded Unknown.
                if unbound.is_empty() && (b.kind == BindingKind::Complete || agent.is_some()) {
                    self.ground(ri, rule, &sigma, &label);
                    continue;
                }
                let Some(agent) = agent else {
                    let why = if b.kind == BindingKind::Partial {
                        "partial binding"
                    } else {
                        "right-hand side variables unbound"
                    };
                    self.note(format!(
                        "rule {ri} {label}: {why} ({}), skipped at level 1",
                        unbound.join(", ")
                    ));
                    continue;
                };
                calls += 1;
                match self.instantiate(agent, ri, rule, sigma, &unbound, &label) {
                    Ok(()) => {}
                    Err(e) => {
                        self.note(format!("rule {ri} {label}: instantiation failed: {e}"));
                        failures.push(e.to_string());
                    }
                }
            }
        }
        if calls > 0 && failures.len() == calls && self.out.ground_rules.is_empty() {
            return Err(InterpretError::InterpretationFailure(format!(
                "all {calls} instantiation request(s) failed; first error: {}",
                failures[0]
            )));
        }
        self.finish()
    }

    fn note(&mut self, message: String) {
        tracing::debug!("{message}");
        self.out.diagnostics.push(message);
    }

    fn values(&self, b: &Binding) -> BTreeMap<String, Constant> {
        b.map
            .iter()
            .filter_map(|(v, id)| self.dod.object(id).map(|o| (v.clone(), o.value.clone())))
            .collect()
    }

    fn instantiate(
        &mut self,
        agent: &Agent,
        ri: usize,
        rule: &EslRule,
        mut sigma: BTreeMap<String, Constant>,
        unbound: &[String],
        label: &str,
    ) -> Result<(), AgentError> {
        let lookup = |s: &BTreeMap<String, Constant>| {
            let s = s.clone();
            move |v: &str| s.get(v).cloned()
        };
        let constraint_atoms: Vec<Atom> = rule
            .lhs_atoms()
            .into_iter()
            .filter(|a| a.variables().iter().any(|v| unbound.contains(v)))
            .cloned()
            .collect();
        let constraints: Vec<String> = constraint_atoms
            .iter()
            .map(|a| substitute_atom(a, &lookup(&sigma)).to_string())
            .collect();
        let mut notes = Vec::new();
        let result = agent.instantiate(
            self.spec,
            &self.dod.discourse,
            &rule.to_string(),
            &sigma,
            unbound,
            &constraints,
            &mut notes,
        );
        for n in notes {
            self.note(format!("rule {ri} {label}: {n}"));
        }
        let Some(witness) = result? else {
            self.note(format!(
                "rule {ri} {label}: instantiation refused for {}, binding dropped",
                constraints.join(" and ")
            ));
            return Ok(());
        };
        for v in unbound {
            let value = witness[v].clone();
            let (id, added) = self.dod.intern(&value, true);
            if added {
                self.note(format!(
                    "rule {ri} {label}: synthesized object {id} = {value} for {v}"
                ));
            }
            sigma.insert(v.clone(), value);
        }
        let mut new_facts = Vec::new();
        for atom in &constraint_atoms {
            let ground = match substitute_atom(atom, &lookup(&sigma)).ground() {
                Ok(g) => g,
                Err(e) => {
                    self.note(format!(
                        "rule {ri} {label}: witness does not fold: {e}, binding dropped"
                    ));
                    return Ok(());
                }
            };
            if self.perceived.get(&ground) == Some(&Truth::False) {
                self.note(format!(
                    "rule {ri} {label}: witness makes {ground} true but it was perceived False, binding dropped"
                ));
                return Ok(());
            }
            new_facts.push(ground);
        }
        if self.ground(ri, rule, &sigma, label) {
            for g in new_facts {
                self.instantiated.insert(g, Truth::True);
            }
        }
        Ok(())
    }

    /// Adds the ground instance of `rule`; false when a term fails to fold.
    fn ground(
        &mut self,
        ri: usize,
        rule: &EslRule,
        sigma: &BTreeMap<String, Constant>,
        label: &str,
    ) -> bool {
        match ground_rule(rule, sigma) {
            Ok((denf, atoms)) => {
                if self.seen.insert((ri, denf.to_string())) {
                    for a in atoms {
                        self.out.atoms.insert(a.id(), a);
                    }
                    self.out.ground_rules.push(GroundRule {
                        rule_index: ri,
                        binding: sigma.clone(),
                        denf,
                    });
                }
                true
            }
            Err(e) => {
                self.note(format!("rule {ri} {label}: cannot ground: {e}"));
                false
            }
        }
    }

    fn finish(mut self) -> Result<InterpretationResult, InterpretError> {
        for (atom, truth) in &self.perceived {
            self.out.assignments.insert(atom.id(), *truth);
            self.out.atoms.insert(atom.id(), atom.clone());
        }
        for (atom, truth) in &self.instantiated {
            self.out.assignments.insert(atom.id(), *truth);
            self.out.atoms.insert(atom.id(), atom.clone());
        }
        for r in &self.out.ground_rules {
            for l in r.denf.literals() {
                self.out
                    .assignments
                    .entry(l.prop.clone())
                    .or_insert(Truth::Unknown);
            }
        }
        self.out.objects = self.dod.objects;
        Ok(self.out)
    }
}

fn binding_label(b: &Binding) -> String {
    let parts: Vec<String> = b.map.iter().map(|(v, o)| format!("{v}↦{o}")).collect();
    format!("{{{}}}", parts.join(", "))
}

pub(crate) fn substitute_atom(atom: &Atom, lookup: &dyn Fn(&str) -> Option<Constant>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|t| t.substitute(lookup)).collect(),
    }
}

/// Substitutes a total binding into a rule and folds every term.
pub fn ground_rule(
    rule: &EslRule,
    sigma: &BTreeMap<String, Constant>,
) -> Result<(GroundDeNF, Vec<GroundAtom>), EvalError> {
    let lookup = |v: &str| sigma.get(v).cloned();
    let mut atoms = Vec::new();
    let mut lit = |l: &PredLiteral| -> Result<GroundLiteral, EvalError> {
        let g = substitute_atom(&l.atom, &lookup).ground()?;
        let id = g.id();
        atoms.push(g);
        Ok(GroundLiteral {
            prop: id,
            negated: l.negated,
        })
    };
    let mut side = |groups: &[Vec<PredLiteral>]| -> Result<Vec<Vec<GroundLiteral>>, EvalError> {
        groups
            .iter()
            .map(|g| g.iter().map(&mut lit).collect())
            .collect()
    };
    let lhs = side(&rule.lhs)?;
    let rhs = side(&rule.rhs)?;
    Ok((GroundDeNF { lhs, rhs }, atoms))
}
