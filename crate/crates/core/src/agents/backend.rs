use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{AgentError, AgentRequest, BackendReply, RequestKind};

/// Something that turns a request into reply text.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &AgentRequest) -> Result<BackendReply, AgentError>;
}

/// One line of a fixture file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub request_hash: String,
    pub request_kind: RequestKind,
    pub response_text: String,
}

/// Replays recorded replies keyed by request hash. Unknown requests are `Unavailable`.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    replies: BTreeMap<String, String>,
}

impl MockBackend {
    pub fn new(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        MockBackend {
            replies: entries
                .into_iter()
                .map(|e| (e.request_hash, e.response_text))
                .collect(),
        }
    }

    /// Parses JSONL; blank lines are ignored. Errors name the 1-based line.
    pub fn from_jsonl(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry =
                serde_json::from_str(line).map_err(|e| format!("fixture line {}: {e}", i + 1))?;
            entries.push(entry);
        }
        Ok(MockBackend::new(entries))
    }

    pub fn from_path(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read fixtures {}: {e}", path.display()))?;
        Self::from_jsonl(&text)
    }

    /// Adds the entries of another fixture set; later entries win.
    pub fn merge(&mut self, other: MockBackend) {
        self.replies.extend(other.replies);
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &AgentRequest) -> Result<BackendReply, AgentError> {
        let hash = request.hash();
        match self.replies.get(&hash) {
            Some(text) => Ok(BackendReply::new(text.clone())),
            None => Err(AgentError::Unavailable {
                kind: request.kind,
                hash,
            }),
        }
    }
}

/// Passes requests through and keeps every successful exchange as a fixture entry.
pub struct RecordingBackend {
    inner: Arc<dyn ChatBackend>,
    entries: Mutex<BTreeMap<String, FixtureEntry>>,
}

impl RecordingBackend {
    pub fn new(inner: Arc<dyn ChatBackend>) -> Self {
        RecordingBackend {
            inner,
            entries: Mutex::new(BTreeMap::new()),
        }
    }

    /// Recorded entries sorted by request hash.
    pub fn entries(&self) -> Vec<FixtureEntry> {
        self.entries
            .lock()
            .expect("recorder lock")
            .values()
            .cloned()
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in self.entries() {
            out.push_str(&serde_json::to_string(&e).expect("fixture serialization"));
            out.push('\n');
        }
        out
    }
}

impl ChatBackend for RecordingBackend {
    fn complete(&self, request: &AgentRequest) -> Result<BackendReply, AgentError> {
        let reply = self.inner.complete(request)?;
        let hash = request.hash();
        self.entries.lock().expect("recorder lock").insert(
            hash.clone(),
            FixtureEntry {
                request_hash: hash,
                request_kind: request.kind,
                response_text: reply.text.clone(),
            },
        );
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentRole, Discourse};

    struct Echo;

    impl ChatBackend for Echo {
        fn complete(&self, request: &AgentRequest) -> Result<BackendReply, AgentError> {
            Ok(BackendReply::new(format!("echo {}", request.attempt)))
        }
    }

    #[test]
    fn record_then_replay() {
        let req = AgentRequest {
            role: AgentRole::Perception,
            kind: RequestKind::ExtractObjects,
            spec_excerpt: "P(x) := x".into(),
            discourse: Discourse::new("a", "b"),
            payload: serde_json::Value::Null,
            attempt: 0,
            previous_reply: None,
        };
        let rec = RecordingBackend::new(Arc::new(Echo));
        assert_eq!(rec.complete(&req).unwrap().text, "echo 0");
        let mock = MockBackend::from_jsonl(&rec.to_jsonl()).unwrap();
        assert_eq!(mock.len(), 1);
        assert_eq!(mock.complete(&req).unwrap().text, "echo 0");
        let mut other = req.clone();
        other.attempt = 1;
        assert!(matches!(
            mock.complete(&other),
            Err(AgentError::Unavailable { .. })
        ));
        assert!(MockBackend::from_jsonl("\n{oops}\n")
            .unwrap_err()
            .contains("line 2"));
    }
}
