//! The verification pipeline and its verdicts.

mod query;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agents::{Agent, Discourse, DomainObject};
use crate::esl::EslSpec;
use crate::interpret::{interpret, perceive, InterpretOptions, Level};
use crate::logic::{to_rule_like, FcGraph, FcStatus, GroundImplication, GroundLiteral, Truth};

pub use query::{
    check_followup, question_from_sentence, render_query, FollowUpOutcome, UnrenderableLiteral,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Safe,
    Unsafe,
    Correct,
    Incorrect,
}

impl Label {
    /// Unsafe and incorrect cases are the positives of the metrics.
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Unsafe | Label::Incorrect)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationCase {
    pub spec: Arc<EslSpec>,
    pub context: String,
    pub llm_output: String,
    pub level: Level,
    pub label: Option<Label>,
}

impl VerificationCase {
    pub fn discourse(&self) -> Discourse {
        Discourse::new(self.context.clone(), self.llm_output.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictStatus {
    Consistent,
    Inconsistent,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Internal,
    FollowUp,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Evidence {
    /// Internal stage: the proposition found both true and false. Follow-up stage: the
    /// derived literal the answer contradicted.
    pub conflict: Option<GroundLiteral>,
    pub chain: Vec<String>,
    pub question: Option<String>,
    pub answer: Option<Truth>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub interpret_ms: f64,
    pub chain_ms: f64,
    pub followup_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundRuleTrace {
    pub rule: usize,
    pub binding: BTreeMap<String, String>,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FollowUpTrace {
    pub literal: GroundLiteral,
    pub question: String,
    pub answer: Truth,
    pub outcome: FollowUpOutcome,
}

/// Intermediate results, kept for inspection and reports.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Trace {
    pub objects: Vec<DomainObject>,
    pub ground_rules: Vec<GroundRuleTrace>,
    pub implications: Vec<String>,
    pub seeds: BTreeMap<String, Truth>,
    pub derived: Vec<GroundLiteral>,
    pub followups: Vec<FollowUpTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub stage: Option<Stage>,
    pub evidence: Option<Evidence>,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub trace: Trace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Verdict {
    fn new(status: VerdictStatus) -> Self {
        Verdict {
            status,
            stage: None,
            evidence: None,
            diagnostics: Vec::new(),
            reason: None,
            trace: Trace::default(),
            timings: None,
        }
    }

    /// Pretty JSON report. Without timings the report is a deterministic function of the
    /// case and the agent replies.
    pub fn to_report_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serialization")
    }

    /// Canonical texts of the chained implications.
    pub fn implication_texts(&self) -> BTreeSet<&str> {
        self.trace.implications.iter().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    pub interpret: InterpretOptions,
    pub record_timings: bool,
}

pub fn verify(case: &VerificationCase, perception: &Agent, target: &Agent) -> Verdict {
    verify_with(case, perception, target, &VerifyOptions::default())
}

fn ms(since: Instant) -> f64 {
    (since.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

pub fn verify_with(
    case: &VerificationCase,
    perception: &Agent,
    target: &Agent,
    opts: &VerifyOptions,
) -> Verdict {
    let mut timings = Timings {
        interpret_ms: 0.0,
        chain_ms: 0.0,
        followup_ms: 0.0,
    };
    let mut verdict = run(case, perception, target, opts, &mut timings);
    if opts.record_timings {
        verdict.timings = Some(timings);
    }
    tracing::info!(status = ?verdict.status, stage = ?verdict.stage, "verification finished");
    verdict
}

fn fail(mut v: Verdict, reason: String) -> Verdict {
    v.status = VerdictStatus::Fail;
    v.reason = Some(reason);
    v
}

fn run(
    case: &VerificationCase,
    perception: &Agent,
    target: &Agent,
    opts: &VerifyOptions,
    timings: &mut Timings,
) -> Verdict {
    let spec = &*case.spec;
    let discourse = case.discourse();
    let mut v = Verdict::new(VerdictStatus::Consistent);
    if spec.rules.is_empty() {
        v.diagnostics.push("specification has no rules".into());
        return v;
    }
    if discourse.is_blank() {
        v.diagnostics
            .push("zero objects: context and output are empty".into());
        return v;
    }

    // interpretation
    let t = Instant::now();
    let (dod, facts) = match perceive(spec, &discourse, perception, &mut v.diagnostics) {
        Ok(p) => p,
        Err(e) => return fail(v, format!("perception failed: {e}")),
    };
    if dod.objects.is_empty() {
        v.diagnostics.push("zero objects perceived".into());
        timings.interpret_ms = ms(t);
        return v;
    }
    let result = match interpret(spec, &dod, &facts, case.level, perception, &opts.interpret) {
        Ok(r) => r,
        Err(e) => {
            v.trace.objects = dod.objects;
            return fail(v, e.to_string());
        }
    };
    timings.interpret_ms = ms(t);
    v.diagnostics.extend(result.diagnostics.iter().cloned());
    v.trace.objects = result.objects.clone();
    v.trace.ground_rules = result
        .ground_rules
        .iter()
        .map(|r| GroundRuleTrace {
            rule: r.rule_index,
            binding: r
                .binding
                .iter()
                .map(|(k, c)| (k.clone(), c.plain()))
                .collect(),
            formula: r.denf.to_string(),
        })
        .collect();
    v.trace.seeds = result
        .assignments
        .iter()
        .map(|(p, t)| (p.to_string(), *t))
        .collect();
    if result.ground_rules.is_empty() {
        v.diagnostics.push("no ground rules were produced".into());
    }

    // normalization and chaining
    let t = Instant::now();
    let implications: BTreeSet<GroundImplication> = result
        .ground_rules
        .iter()
        .flat_map(|r| to_rule_like(&r.denf))
        .collect();
    v.trace.implications = implications.iter().map(ToString::to_string).collect();
    let mut graph = FcGraph::new(implications);
    graph.seed(result.seeds());
    let outcome = graph.forward_chain();
    timings.chain_ms = ms(t);
    v.trace.derived = outcome.derived.iter().map(|d| d.literal.clone()).collect();
    if outcome.status == FcStatus::Inconsistent {
        v.status = VerdictStatus::Inconsistent;
        v.stage = Some(Stage::Internal);
        v.evidence = Some(Evidence {
            conflict: outcome.conflict.clone(),
            chain: outcome
                .conflict_chain
                .iter()
                .map(ToString::to_string)
                .collect(),
            question: None,
            answer: None,
        });
        return v;
    }

    // follow-up queries
    let t = Instant::now();
    let mut answers: BTreeMap<String, Truth> = BTreeMap::new();
    for d in &outcome.derived {
        if result
            .assignments
            .get(&d.literal.prop)
            .is_some_and(|t| t.is_known())
        {
            continue;
        }
        let question = match render_query(&d.literal, spec, &result.atoms) {
            Ok(q) => q,
            Err(e) => {
                v.diagnostics
                    .push(format!("no follow-up for {}: {e}", d.literal));
                continue;
            }
        };
        let answer = match answers.get(&question) {
            Some(a) => *a,
            None => match target.answer_query(spec, &discourse, &question, &mut v.diagnostics) {
                Ok(a) => {
                    answers.insert(question.clone(), a);
                    a
                }
                Err(e) => {
                    timings.followup_ms = ms(t);
                    return fail(v, format!("follow-up query failed: {e}"));
                }
            },
        };
        let outcome = check_followup(&d.literal, answer);
        if outcome == FollowUpOutcome::Inconsistent && v.evidence.is_none() {
            v.status = VerdictStatus::Inconsistent;
            v.stage = Some(Stage::FollowUp);
            v.evidence = Some(Evidence {
                conflict: Some(d.literal.clone()),
                chain: d.chain.iter().map(ToString::to_string).collect(),
                question: Some(question.clone()),
                answer: Some(answer),
            });
        }
        v.trace.followups.push(FollowUpTrace {
            literal: d.literal.clone(),
            question,
            answer,
            outcome,
        });
    }
    timings.followup_ms = ms(t);
    v
}
