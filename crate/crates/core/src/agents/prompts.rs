//! Prompt templates. Built-in defaults are compiled in; a directory may override any of
//! them file by file.

use std::collections::BTreeMap;
use std::path::Path;

use super::{AgentRequest, AgentRole, Discourse, RequestKind};
use crate::esl::{print_rule, EslSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PromptKind {
    System,
    TargetSystem,
    ExtractObjects,
    Propositionalize,
    Instantiate,
    AnswerQuery,
    ViolationCheck,
    Repair,
}

impl PromptKind {
    pub const ALL: [PromptKind; 8] = [
        PromptKind::System,
        PromptKind::TargetSystem,
        PromptKind::ExtractObjects,
        PromptKind::Propositionalize,
        PromptKind::Instantiate,
        PromptKind::AnswerQuery,
        PromptKind::ViolationCheck,
        PromptKind::Repair,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            PromptKind::System => "system.txt",
            PromptKind::TargetSystem => "target_system.txt",
            PromptKind::ExtractObjects => "extract_objects.txt",
            PromptKind::Propositionalize => "propositionalize.txt",
            PromptKind::Instantiate => "instantiate.txt",
            PromptKind::AnswerQuery => "answer_query.txt",
            PromptKind::ViolationCheck => "violation_check.txt",
            PromptKind::Repair => "repair.txt",
        }
    }

    fn default_text(self) -> &'static str {
        match self {
            PromptKind::System => include_str!("../../prompts/system.txt"),
            PromptKind::TargetSystem => include_str!("../../prompts/target_system.txt"),
            PromptKind::ExtractObjects => include_str!("../../prompts/extract_objects.txt"),
            PromptKind::Propositionalize => include_str!("../../prompts/propositionalize.txt"),
            PromptKind::Instantiate => include_str!("../../prompts/instantiate.txt"),
            PromptKind::AnswerQuery => include_str!("../../prompts/answer_query.txt"),
            PromptKind::ViolationCheck => include_str!("../../prompts/violation_check.txt"),
            PromptKind::Repair => include_str!("../../prompts/repair.txt"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Prompts {
    templates: BTreeMap<PromptKind, String>,
}

impl Default for Prompts {
    fn default() -> Self {
        Prompts {
            templates: PromptKind::ALL
                .into_iter()
                .map(|k| (k, k.default_text().to_string()))
                .collect(),
        }
    }
}

impl Prompts {
    /// Defaults, with every file present in `dir` taking precedence.
    pub fn load(dir: Option<&Path>) -> std::io::Result<Prompts> {
        let mut prompts = Prompts::default();
        if let Some(dir) = dir {
            for kind in PromptKind::ALL {
                let path = dir.join(kind.file_name());
                if path.is_file() {
                    prompts
                        .templates
                        .insert(kind, std::fs::read_to_string(path)?);
                }
            }
        }
        Ok(prompts)
    }

    pub fn template(&self, kind: PromptKind) -> &str {
        &self.templates[&kind]
    }

    pub fn render(&self, kind: PromptKind, values: &[(&str, &str)]) -> String {
        let mut out = self.template(kind).to_string();
        for (key, value) in values {
            out = out.replace(&format!("{{{{{key}}}}}"), value);
        }
        out
    }

    /// Chat messages `(role, content)` for a request.
    pub fn messages(&self, req: &AgentRequest) -> Vec<(&'static str, String)> {
        let system = match req.role {
            AgentRole::Perception => self.template(PromptKind::System).to_string(),
            AgentRole::Target => self.template(PromptKind::TargetSystem).to_string(),
        };
        let kind = match req.kind {
            RequestKind::ExtractObjects => PromptKind::ExtractObjects,
            RequestKind::Propositionalize => PromptKind::Propositionalize,
            RequestKind::Instantiate => PromptKind::Instantiate,
            RequestKind::AnswerQuery => PromptKind::AnswerQuery,
        };
        let payload = serde_json::to_string_pretty(&req.payload).expect("payload serialization");
        let question = req
            .payload
            .get("question")
            .and_then(|q| q.as_str())
            .unwrap_or_default();
        let user = self.render(
            kind,
            &[
                ("spec", &req.spec_excerpt),
                ("context", &req.discourse.context),
                ("llm_output", &req.discourse.llm_output),
                ("payload", &payload),
                ("question", question),
            ],
        );
        let mut messages = vec![("system", system), ("user", user)];
        if let Some(previous) = &req.previous_reply {
            messages.push(("assistant", previous.clone()));
            messages.push((
                "user",
                self.render(PromptKind::Repair, &[("previous_reply", previous)]),
            ));
        }
        messages
    }

    /// The question used for the standalone violation verdict.
    pub fn violation_question(&self, spec: &EslSpec, d: &Discourse) -> String {
        let rules: Vec<String> = spec.rules.iter().map(print_rule).collect();
        self.render(
            PromptKind::ViolationCheck,
            &[
                ("rules", &rules.join("\n")),
                ("spec", &super::predicate_excerpt(spec)),
                ("context", &d.context),
                ("llm_output", &d.llm_output),
            ],
        )
        .trim_end()
        .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_filled() {
        let p = Prompts::default();
        let req = AgentRequest {
            role: AgentRole::Target,
            kind: RequestKind::AnswerQuery,
            spec_excerpt: String::new(),
            discourse: Discourse::new("ctx", "out"),
            payload: serde_json::json!({"question": "Is 152 greater than 151.2?"}),
            attempt: 1,
            previous_reply: Some("maybe?".into()),
        };
        let m = p.messages(&req);
        assert_eq!(m.len(), 4);
        assert!(m[1].1.contains("Question: Is 152 greater than 151.2?"));
        assert!(!m[1].1.contains("{{"));
        assert!(m[3].1.contains("maybe?"));
    }

    #[test]
    fn directory_overrides() {
        let dir = std::env::temp_dir().join(format!("eslcheck-prompts-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("repair.txt"), "again: {{previous_reply}}").unwrap();
        let p = Prompts::load(Some(&dir)).unwrap();
        assert_eq!(
            p.render(PromptKind::Repair, &[("previous_reply", "x")]),
            "again: x"
        );
        assert_eq!(
            p.template(PromptKind::System),
            Prompts::default().template(PromptKind::System)
        );
        std::fs::remove_dir_all(dir).unwrap();
    }
}
