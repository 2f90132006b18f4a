//! Perception and answering agents: the request/response contract, reply parsing with one
//! repair round, and the backends (fixture replay, scripted, live HTTP).

mod backend;
mod live;
mod parse;
mod prompts;
mod script;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::esl::{Constant, EslSpec, GroundAtom};
use crate::logic::Truth;

pub use backend::{ChatBackend, FixtureEntry, MockBackend, RecordingBackend};
pub use live::LiveBackend;
pub use parse::{
    extract_json_block, parse_answer, parse_facts, parse_objects, parse_witness, FactReply,
};
pub use prompts::{PromptKind, Prompts};
pub use script::{CaseScript, FactScript, ScriptBackend, ScriptFile, WitnessScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Perception,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RequestKind {
    ExtractObjects,
    Propositionalize,
    Instantiate,
    AnswerQuery,
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RequestKind::ExtractObjects => "ExtractObjects",
            RequestKind::Propositionalize => "Propositionalize",
            RequestKind::Instantiate => "Instantiate",
            RequestKind::AnswerQuery => "AnswerQuery",
        })
    }
}

/// The text the agents look at: the prompt context and the LLM output under test.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Discourse {
    pub context: String,
    pub llm_output: String,
}

impl Discourse {
    pub fn new(context: impl Into<String>, llm_output: impl Into<String>) -> Self {
        Discourse {
            context: context.into(),
            llm_output: llm_output.into(),
        }
    }

    pub fn is_blank(&self) -> bool {
        self.context.trim().is_empty() && self.llm_output.trim().is_empty()
    }
}

/// One agent call. Its canonical JSON form is what fixtures are keyed by, so prompt
/// templates can change without invalidating recorded sessions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentRequest {
    pub role: AgentRole,
    pub kind: RequestKind,
    pub spec_excerpt: String,
    pub discourse: Discourse,
    pub payload: Value,
    /// 0 for the first try, 1 for the repair round.
    pub attempt: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub previous_reply: Option<String>,
}

impl AgentRequest {
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("request serialization")
    }

    /// Lowercase hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    fn repair(&self, reply: &str) -> AgentRequest {
        AgentRequest {
            attempt: self.attempt + 1,
            previous_reply: Some(reply.to_string()),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendReply {
    pub text: String,
    /// Transport-level retries spent on this reply.
    pub retries: u32,
}

impl BackendReply {
    pub fn new(text: impl Into<String>) -> Self {
        BackendReply {
            text: text.into(),
            retries: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("no agent reply available for {kind} request {hash}")]
    Unavailable { kind: RequestKind, hash: String },
    #[error("agent transport error: {0}")]
    Transport(String),
    #[error("malformed {kind} reply: {reason}")]
    Malformed { kind: RequestKind, reason: String },
    #[error("agent configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub temperature: f64,
    pub seed: Option<u64>,
    pub max_retries: u32,
    pub timeout_secs: u64,
    pub prompt_dir: Option<std::path::PathBuf>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4.1-nano".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            temperature: 0.0,
            seed: Some(0),
            max_retries: 2,
            timeout_secs: 60,
            prompt_dir: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(AgentError::Config(format!(
                "temperature {} is outside [0, 2]",
                self.temperature
            )));
        }
        if self.endpoint.trim().is_empty() || self.model.trim().is_empty() {
            return Err(AgentError::Config("endpoint and model must be set".into()));
        }
        if self.timeout_secs == 0 {
            return Err(AgentError::Config("timeout_secs must be positive".into()));
        }
        Ok(())
    }
}

/// An object of the domain of discourse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainObject {
    pub id: String,
    pub value: Constant,
    /// Created by an instantiation rather than found in the text.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthesized: bool,
}

/// A backend bound to a role. Calls validate replies and re-prompt once on malformed output.
#[derive(Clone)]
pub struct Agent {
    role: AgentRole,
    backend: std::sync::Arc<dyn ChatBackend>,
}

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Agent")
            .field("role", &self.role)
            .finish_non_exhaustive()
    }
}

impl Agent {
    pub fn new(role: AgentRole, backend: std::sync::Arc<dyn ChatBackend>) -> Self {
        Agent { role, backend }
    }

    pub fn role(&self) -> AgentRole {
        self.role
    }

    fn request(
        &self,
        kind: RequestKind,
        spec_excerpt: String,
        d: &Discourse,
        payload: Value,
    ) -> AgentRequest {
        AgentRequest {
            role: self.role,
            kind,
            spec_excerpt,
            discourse: d.clone(),
            payload,
            attempt: 0,
            previous_reply: None,
        }
    }

    /// Sends `request` and parses the reply, with one repair round on malformed output.
    fn call<T>(
        &self,
        request: AgentRequest,
        notes: &mut Vec<String>,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, AgentError> {
        let kind = request.kind;
        let reply = self.send(&request, notes)?;
        let reason = match parse(&reply) {
            Ok(v) => return Ok(v),
            Err(reason) => reason,
        };
        tracing::debug!(%kind, %reason, "malformed agent reply, re-prompting");
        notes.push(format!(
            "{kind}: malformed reply ({reason}), re-prompted once"
        ));
        let repaired = match self.send(&request.repair(&reply), notes) {
            Ok(r) => r,
            Err(e) => {
                return Err(AgentError::Malformed {
                    kind,
                    reason: format!("{reason}; repair round failed: {e}"),
                })
            }
        };
        parse(&repaired).map_err(|reason| AgentError::Malformed { kind, reason })
    }

    fn send(&self, request: &AgentRequest, notes: &mut Vec<String>) -> Result<String, AgentError> {
        let reply = self.backend.complete(request)?;
        if reply.retries > 0 {
            notes.push(format!(
                "{}: {} transport retr{}",
                request.kind,
                reply.retries,
                if reply.retries == 1 { "y" } else { "ies" }
            ));
        }
        Ok(reply.text)
    }

    /// Objects of the discourse, in the order the agent lists them, with ids `o1`, `o2`, ...
    pub fn extract_objects(
        &self,
        spec: &EslSpec,
        d: &Discourse,
        notes: &mut Vec<String>,
    ) -> Result<Vec<DomainObject>, AgentError> {
        let req = self.request(
            RequestKind::ExtractObjects,
            predicate_excerpt(spec),
            d,
            Value::Null,
        );
        let values = self.call(req, notes, parse_objects)?;
        let mut objects: Vec<DomainObject> = Vec::new();
        for value in values {
            if !objects.iter().any(|o| o.value == value) {
                objects.push(DomainObject {
                    id: format!("o{}", objects.len() + 1),
                    value,
                    synthesized: false,
                });
            }
        }
        Ok(objects)
    }

    /// Truth values of ground atoms over the given objects. Facts about undeclared
    /// predicates or with the wrong arity are dropped with a note.
    pub fn propositionalize(
        &self,
        spec: &EslSpec,
        d: &Discourse,
        objects: &[DomainObject],
        notes: &mut Vec<String>,
    ) -> Result<Vec<(GroundAtom, Truth)>, AgentError> {
        let payload =
            json!({ "objects": objects.iter().map(|o| o.value.plain()).collect::<Vec<_>>() });
        let req = self.request(
            RequestKind::Propositionalize,
            predicate_excerpt(spec),
            d,
            payload,
        );
        let replies = self.call(req, notes, parse_facts)?;
        let mut facts = Vec::new();
        for f in replies {
            match spec.predicate(&f.predicate) {
                None => notes.push(format!(
                    "perception: dropped fact about undeclared predicate `{}`",
                    f.predicate
                )),
                Some(decl) if decl.arity() != f.args.len() => notes.push(format!(
                    "perception: dropped fact `{}` with {} argument(s), expected {}",
                    f.predicate,
                    f.args.len(),
                    decl.arity()
                )),
                Some(_) => facts.push((GroundAtom::new(f.predicate, f.args), f.truth)),
            }
        }
        Ok(facts)
    }

    /// Asks for values of `unbound` making every constraint true. `None` means the agent
    /// found no witness.
    #[allow(clippy::too_many_arguments)]
    pub fn instantiate(
        &self,
        spec: &EslSpec,
        d: &Discourse,
        rule_text: &str,
        binding: &BTreeMap<String, Constant>,
        unbound: &[String],
        constraints: &[String],
        notes: &mut Vec<String>,
    ) -> Result<Option<BTreeMap<String, Constant>>, AgentError> {
        let payload = json!({
            "rule": rule_text,
            "binding": binding.iter().map(|(k, v)| (k.clone(), v.plain())).collect::<BTreeMap<_, _>>(),
            "unbound": unbound,
            "constraints": constraints,
        });
        let req = self.request(
            RequestKind::Instantiate,
            predicate_excerpt(spec),
            d,
            payload,
        );
        let unbound = unbound.to_vec();
        self.call(req, notes, move |text| {
            let w = parse_witness(text)?;
            if let Some(w) = &w {
                if let Some(missing) = unbound.iter().find(|v| !w.contains_key(*v)) {
                    return Err(format!("witness does not assign `{missing}`"));
                }
            }
            Ok(w)
        })
    }

    /// A yes/no question put to the agent.
    pub fn answer_query(
        &self,
        spec: &EslSpec,
        d: &Discourse,
        question: &str,
        notes: &mut Vec<String>,
    ) -> Result<Truth, AgentError> {
        self.ask(spec, d, json!({ "question": question }), notes)
    }

    fn ask(
        &self,
        spec: &EslSpec,
        d: &Discourse,
        payload: Value,
        notes: &mut Vec<String>,
    ) -> Result<Truth, AgentError> {
        let req = self.request(
            RequestKind::AnswerQuery,
            predicate_excerpt(spec),
            d,
            payload,
        );
        self.call(req, notes, parse_answer)
    }

    /// Direct question whether the discourse violates the spec's rules, without the
    /// verification pipeline. `True` means a violation was flagged.
    pub fn violation_check(
        &self,
        spec: &EslSpec,
        d: &Discourse,
        prompts: &Prompts,
        notes: &mut Vec<String>,
    ) -> Result<Truth, AgentError> {
        let question = prompts.violation_question(spec, d);
        let payload = json!({ "question": question, "purpose": "violation_check" });
        self.ask(spec, d, payload, notes)
    }
}

/// Predicate declarations in source form, one per line.
pub fn predicate_excerpt(spec: &EslSpec) -> String {
    spec.predicates
        .iter()
        .map(|p| p.source_text())
        .collect::<Vec<_>>()
        .join("\n")
}
