//! Agent wiring from a TOML file, environment overrides and command-line flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use eslcheck::agents::{
    Agent, AgentConfig, AgentRole, ChatBackend, Discourse, LiveBackend, MockBackend, ScriptBackend,
    ScriptFile,
};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Replay recorded fixtures.
    Mock,
    /// Answer from a declarative script.
    Script,
    /// Call an OpenAI-compatible endpoint.
    Live,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoleConfig {
    pub mode: Mode,
    pub fixtures: Vec<PathBuf>,
    pub script: Option<PathBuf>,
    pub agent: AgentConfig,
}

impl Default for RoleConfig {
    fn default() -> Self {
        RoleConfig {
            mode: Mode::Mock,
            fixtures: Vec::new(),
            script: None,
            agent: AgentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub jobs: usize,
    pub level: Option<u8>,
    pub perception: RoleConfig,
    pub target: RoleConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            jobs: 1,
            level: None,
            perception: RoleConfig::default(),
            target: RoleConfig::default(),
        }
    }
}

const STRING_KEYS: [&str; 5] = ["endpoint", "model", "api_key_env", "prompt_dir", "mode"];
const AGENT_KEYS: [&str; 8] = [
    "endpoint",
    "model",
    "api_key_env",
    "temperature",
    "seed",
    "max_retries",
    "timeout_secs",
    "prompt_dir",
];

impl Config {
    /// Reads the file (if any), then applies `ESLCHECK_*` environment variables.
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?,
            None => String::new(),
        };
        let base = path.and_then(Path::parent).unwrap_or(Path::new("."));
        Self::from_toml(&text, base, |k| std::env::var(k).ok())
    }

    /// `env` looks up override variables; paths in the file are relative to `base`.
    pub fn from_toml(
        text: &str,
        base: &Path,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<Config> {
        let mut table: toml::Table = toml::from_str(text).context("invalid config TOML")?;
        for key in ["jobs", "level"] {
            if let Some(v) = env(&format!("ESLCHECK_{}", key.to_uppercase())) {
                table.insert(key.into(), typed_value(key, &v));
            }
        }
        for role in ["perception", "target"] {
            let entry = table
                .entry(role.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let Some(section) = entry.as_table_mut() else {
                bail!("`{role}` must be a table");
            };
            for key in AGENT_KEYS.iter().chain(&["mode", "fixtures", "script"]) {
                let var = format!("ESLCHECK_{}_{}", role.to_uppercase(), key.to_uppercase());
                if let Some(v) = env(&var) {
                    section.insert(key.to_string(), typed_value(key, &v));
                }
            }
        }
        let mut config = Config::default();
        for (key, value) in table {
            match key.as_str() {
                "jobs" => {
                    let jobs = value
                        .as_integer()
                        .filter(|j| *j >= 1)
                        .context("`jobs` must be a positive integer")?;
                    config.jobs = jobs as usize;
                }
                "level" => {
                    let level = value
                        .as_integer()
                        .filter(|l| *l == 1 || *l == 2)
                        .context("`level` must be 1 or 2")?;
                    config.level = Some(level as u8);
                }
                "perception" => {
                    config.perception = role_config(value, base).context("in [perception]")?
                }
                "target" => config.target = role_config(value, base).context("in [target]")?,
                other => bail!("unknown config key `{other}`"),
            }
        }
        Ok(config)
    }

    /// Points both roles at the given fixture files.
    pub fn use_fixtures(&mut self, paths: &[PathBuf]) {
        for role in [&mut self.perception, &mut self.target] {
            role.mode = Mode::Mock;
            role.fixtures = paths.to_vec();
        }
    }

    pub fn use_script(&mut self, path: &Path) {
        for role in [&mut self.perception, &mut self.target] {
            role.mode = Mode::Script;
            role.script = Some(path.to_path_buf());
        }
    }
}

fn typed_value(key: &str, raw: &str) -> toml::Value {
    if STRING_KEYS.contains(&key) || key == "fixtures" || key == "script" {
        return toml::Value::String(raw.to_string());
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.to_string())
}

fn role_config(value: toml::Value, base: &Path) -> Result<RoleConfig> {
    let toml::Value::Table(mut t) = value else {
        bail!("expected a table");
    };
    let mode = match t.remove("mode") {
        Some(v) => v
            .try_into::<Mode>()
            .context("`mode` must be mock, script or live")?,
        None => Mode::Mock,
    };
    let fixtures = match t.remove("fixtures") {
        None => Vec::new(),
        Some(toml::Value::String(s)) => vec![base.join(s)],
        Some(toml::Value::Array(items)) => items
            .into_iter()
            .map(|v| {
                v.as_str()
                    .map(|s| base.join(s))
                    .context("`fixtures` entries must be strings")
            })
            .collect::<Result<_>>()?,
        Some(_) => bail!("`fixtures` must be a path or a list of paths"),
    };
    let script = match t.remove("script") {
        None => None,
        Some(v) => Some(base.join(v.as_str().context("`script` must be a path")?)),
    };
    let mut agent: AgentConfig = toml::Value::Table(t)
        .try_into()
        .context("invalid agent settings")?;
    if let Some(dir) = agent.prompt_dir.take() {
        agent.prompt_dir = Some(base.join(dir));
    }
    agent.validate()?;
    Ok(RoleConfig {
        mode,
        fixtures,
        script,
        agent,
    })
}

/// Builds the backend for one role. `cases` maps dataset case ids to discourses, for
/// scripts that hold one entry per case.
pub fn backend(role: &RoleConfig, cases: &[(String, Discourse)]) -> Result<Arc<dyn ChatBackend>> {
    Ok(match role.mode {
        Mode::Mock => {
            if role.fixtures.is_empty() {
                tracing::warn!(
                    "no fixture files configured; every agent request will be unavailable"
                );
            }
            let mut mock = MockBackend::default();
            for path in &role.fixtures {
                mock.merge(MockBackend::from_path(path).map_err(anyhow::Error::msg)?);
            }
            Arc::new(mock)
        }
        Mode::Script => {
            let path = role
                .script
                .as_ref()
                .context("script mode needs a script file")?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read script {}", path.display()))?;
            match ScriptFile::from_json(&text).map_err(anyhow::Error::msg)? {
                ScriptFile::Single(s) => Arc::new(ScriptBackend::single(s)),
                ScriptFile::Cases { cases: mut scripts } => {
                    let mut pairs = Vec::new();
                    for (id, d) in cases {
                        if let Some(s) = scripts.remove(id) {
                            pairs.push((d.clone(), s));
                        }
                    }
                    if let Some(id) = scripts.keys().next() {
                        bail!("script has an entry for unknown case `{id}`");
                    }
                    Arc::new(ScriptBackend::new(pairs))
                }
            }
        }
        Mode::Live => Arc::new(LiveBackend::new(role.agent.clone())?),
    })
}

pub fn agents(config: &Config, cases: &[(String, Discourse)]) -> Result<(Agent, Agent)> {
    Ok((
        Agent::new(AgentRole::Perception, backend(&config.perception, cases)?),
        Agent::new(AgentRole::Target, backend(&config.target, cases)?),
    ))
}
