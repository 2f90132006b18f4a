//! A declarative stand-in for a live model. `eslcheck record --script` runs the pipeline
//! against a script to produce fixture files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AgentError, AgentRequest, BackendReply, ChatBackend, Discourse, RequestKind};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactScript {
    pub predicate: String,
    pub args: Vec<Value>,
    pub truth: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WitnessScript {
    /// Constraint atoms joined by ` and `, as sent in the request, or `*` for any.
    pub constraints: String,
    pub witness: Option<BTreeMap<String, Value>>,
}

/// Scripted replies for one verification case.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaseScript {
    pub comment: Option<String>,
    pub objects: Vec<Value>,
    pub facts: Vec<FactScript>,
    pub witnesses: Vec<WitnessScript>,
    /// Follow-up question → reply text (usually a truth token).
    pub answers: BTreeMap<String, String>,
    pub default_answer: Option<String>,
    /// Reply to the standalone violation question.
    pub violation: Option<String>,
}

/// Either a single case script or one script per dataset case id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptFile {
    Cases { cases: BTreeMap<String, CaseScript> },
    Single(CaseScript),
}

impl ScriptFile {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid script: {e}"))
    }
}

fn fenced(value: Value) -> String {
    format!("```json\n{value}\n```")
}

/// Answers requests from case scripts selected by discourse.
#[derive(Debug, Clone, Default)]
pub struct ScriptBackend {
    cases: Vec<(Discourse, CaseScript)>,
    fallback: Option<CaseScript>,
}

impl ScriptBackend {
    pub fn single(script: CaseScript) -> Self {
        ScriptBackend {
            cases: Vec::new(),
            fallback: Some(script),
        }
    }

    pub fn new(cases: Vec<(Discourse, CaseScript)>) -> Self {
        ScriptBackend {
            cases,
            fallback: None,
        }
    }

    fn script_for(&self, d: &Discourse) -> Option<&CaseScript> {
        self.cases
            .iter()
            .find(|(k, _)| k == d)
            .map(|(_, s)| s)
            .or(self.fallback.as_ref())
    }

    fn reply(script: &CaseScript, request: &AgentRequest) -> Option<String> {
        let payload = &request.payload;
        Some(match request.kind {
            RequestKind::ExtractObjects => fenced(json!({ "objects": script.objects })),
            RequestKind::Propositionalize => fenced(json!({ "facts": script.facts })),
            RequestKind::Instantiate => {
                let key = payload["constraints"]
                    .as_array()
                    .map(|cs| {
                        cs.iter()
                            .filter_map(Value::as_str)
                            .collect::<Vec<_>>()
                            .join(" and ")
                    })
                    .unwrap_or_default();
                let entry = script
                    .witnesses
                    .iter()
                    .find(|w| w.constraints == key)
                    .or_else(|| script.witnesses.iter().find(|w| w.constraints == "*"))?;
                fenced(json!({ "witness": entry.witness }))
            }
            RequestKind::AnswerQuery => {
                if payload["purpose"] == "violation_check" {
                    script.violation.clone()?
                } else {
                    let q = payload["question"].as_str().unwrap_or_default();
                    script
                        .answers
                        .get(q)
                        .or(script.default_answer.as_ref())?
                        .clone()
                }
            }
        })
    }
}

impl ChatBackend for ScriptBackend {
    fn complete(&self, request: &AgentRequest) -> Result<BackendReply, AgentError> {
        self.script_for(&request.discourse)
            .and_then(|s| Self::reply(s, request))
            .map(BackendReply::new)
            .ok_or_else(|| AgentError::Unavailable {
                kind: request.kind,
                hash: request.hash(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentRole;

    #[test]
    fn script_file_shapes() {
        let single = ScriptFile::from_json(r#"{"objects": ["Alex"]}"#).unwrap();
        assert!(matches!(single, ScriptFile::Single(_)));
        let many = ScriptFile::from_json(r#"{"cases": {"c1": {"objects": []}}}"#).unwrap();
        assert!(matches!(many, ScriptFile::Cases { .. }));
        assert!(ScriptFile::from_json(r#"{"object": []}"#).is_err());
    }

    #[test]
    fn witness_lookup() {
        let script: CaseScript = serde_json::from_value(json!({
            "witnesses": [{"constraints": "IsGreater(z, 0)", "witness": {"z": "10"}}]
        }))
        .unwrap();
        let backend = ScriptBackend::single(script);
        let mut req = AgentRequest {
            role: AgentRole::Perception,
            kind: RequestKind::Instantiate,
            spec_excerpt: String::new(),
            discourse: Discourse::default(),
            payload: json!({"constraints": ["IsGreater(z, 0)"]}),
            attempt: 0,
            previous_reply: None,
        };
        assert!(backend
            .complete(&req)
            .unwrap()
            .text
            .contains("\"z\":\"10\""));
        req.payload = json!({"constraints": ["Other(z)"]});
        assert!(backend.complete(&req).is_err());
    }
}
