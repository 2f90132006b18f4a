//! Client for OpenAI-compatible chat-completion endpoints.

use std::time::Duration;

use serde_json::{json, Value};

use super::{AgentConfig, AgentError, AgentRequest, BackendReply, ChatBackend, Prompts};

pub struct LiveBackend {
    config: AgentConfig,
    prompts: Prompts,
    api_key: String,
    http: ureq::Agent,
}

impl std::fmt::Debug for LiveBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // the key stays out of debug output
        f.debug_struct("LiveBackend")
            .field("endpoint", &self.config.endpoint)
            .field("model", &self.config.model)
            .finish_non_exhaustive()
    }
}

impl LiveBackend {
    /// Reads the API key from the environment variable named in the config.
    pub fn new(config: AgentConfig) -> Result<Self, AgentError> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            AgentError::Config(format!(
                "environment variable {} is not set",
                config.api_key_env
            ))
        })?;
        let prompts = Prompts::load(config.prompt_dir.as_deref())
            .map_err(|e| AgentError::Config(format!("cannot read prompt templates: {e}")))?;
        let http: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(LiveBackend {
            config,
            prompts,
            api_key,
            http,
        })
    }

    fn url(&self) -> String {
        format!(
            "{}/chat/completions",
            self.config.endpoint.trim_end_matches('/')
        )
    }

    fn body(&self, request: &AgentRequest) -> Value {
        let messages: Vec<Value> = self
            .prompts
            .messages(request)
            .into_iter()
            .map(|(role, content)| json!({"role": role, "content": content}))
            .collect();
        let mut body = json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        });
        if let Some(seed) = self.config.seed {
            body["seed"] = json!(seed);
        }
        body
    }

    /// One HTTP exchange. `Err((retryable, message))` on failure.
    fn attempt(&self, body: &Value) -> Result<String, (bool, String)> {
        let mut response = self
            .http
            .post(&self.url())
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| (true, e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| (true, e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err((true, format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err((false, format!("HTTP {status}: {}", truncate(&text, 200))));
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| (false, format!("invalid response JSON: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                (
                    false,
                    "response has no choices[0].message.content".to_string(),
                )
            })
    }
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}

impl ChatBackend for LiveBackend {
    fn complete(&self, request: &AgentRequest) -> Result<BackendReply, AgentError> {
        let body = self.body(request);
        let mut retries = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => return Ok(BackendReply { text, retries }),
                Err((retryable, message)) => {
                    if !retryable || retries >= self.config.max_retries {
                        return Err(AgentError::Transport(format!(
                            "{message} (after {retries} retr{})",
                            if retries == 1 { "y" } else { "ies" }
                        )));
                    }
                    tracing::warn!(kind = %request.kind, %message, retries, "retrying agent request");
                    std::thread::sleep(Duration::from_millis(500 << retries.min(6)));
                    retries += 1;
                }
            }
        }
    }
}
