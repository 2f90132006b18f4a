//! Datasets: a JSON manifest naming a spec and a JSONL file of cases.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use eslcheck::agents::Discourse;
use eslcheck::esl::{parse_spec_with, EslSpec, ParseOptions};
use eslcheck::interpret::Level;
use eslcheck::verifier::{Label, VerificationCase};
use serde::{Deserialize, Serialize};

use crate::metrics::LlmVerdict;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRecord {
    pub id: String,
    pub context: String,
    pub llm_output: String,
    #[serde(default)]
    pub label: Option<Label>,
    #[serde(default)]
    pub level: Option<Level>,
    /// Standalone verdict of the LLM, when it was collected outside this tool.
    #[serde(default)]
    pub llm_verdict: Option<LlmVerdict>,
}

impl CaseRecord {
    pub fn discourse(&self) -> Discourse {
        Discourse::new(self.context.clone(), self.llm_output.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub spec: PathBuf,
    pub cases: PathBuf,
    #[serde(default = "default_level")]
    pub level: Level,
    #[serde(default = "default_labels")]
    pub labels: Vec<Label>,
    #[serde(default)]
    pub fixtures: Vec<PathBuf>,
    #[serde(default)]
    pub normalize: bool,
}

fn default_level() -> Level {
    Level::One
}

fn default_labels() -> Vec<Label> {
    vec![Label::Safe, Label::Unsafe]
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub spec: Arc<EslSpec>,
    pub level: Level,
    pub cases: Vec<CaseRecord>,
    /// Fixture paths resolved against the manifest directory.
    pub fixtures: Vec<PathBuf>,
}

impl Dataset {
    pub fn load(manifest_path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(manifest_path)
            .with_context(|| format!("cannot read manifest {}", manifest_path.display()))?;
        let manifest: Manifest = serde_json::from_str(&text).context("invalid manifest")?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let spec = load_spec(&base.join(&manifest.spec), manifest.normalize)?;
        let cases_path = base.join(&manifest.cases);
        let cases_text = std::fs::read_to_string(&cases_path)
            .with_context(|| format!("cannot read cases {}", cases_path.display()))?;
        let cases = parse_cases(&cases_text)?;
        Self::from_parts(
            manifest.name,
            spec,
            manifest.level,
            &manifest.labels,
            cases,
            manifest.fixtures.iter().map(|f| base.join(f)).collect(),
        )
    }

    pub fn from_parts(
        name: String,
        spec: EslSpec,
        level: Level,
        labels: &[Label],
        cases: Vec<CaseRecord>,
        fixtures: Vec<PathBuf>,
    ) -> Result<Dataset> {
        let mut ids = BTreeSet::new();
        for c in &cases {
            if !ids.insert(c.id.as_str()) {
                bail!("duplicate case id `{}`", c.id);
            }
            if let Some(l) = c.label {
                if !labels.contains(&l) {
                    bail!(
                        "case `{}`: label {l:?} is not in the declared label scheme",
                        c.id
                    );
                }
            }
        }
        Ok(Dataset {
            name,
            spec: Arc::new(spec),
            level,
            cases,
            fixtures,
        })
    }

    pub fn verification_case(&self, c: &CaseRecord) -> VerificationCase {
        VerificationCase {
            spec: self.spec.clone(),
            context: c.context.clone(),
            llm_output: c.llm_output.clone(),
            level: c.level.unwrap_or(self.level),
            label: c.label,
        }
    }

    pub fn discourses(&self) -> Vec<(String, Discourse)> {
        self.cases
            .iter()
            .map(|c| (c.id.clone(), c.discourse()))
            .collect()
    }
}

pub fn load_spec(path: &Path, normalize: bool) -> Result<EslSpec> {
    let text =
        std::fs::read(path).with_context(|| format!("cannot read spec {}", path.display()))?;
    let text = String::from_utf8(text).map_err(|e| {
        anyhow::anyhow!(
            "{}: invalid UTF-8 at byte {}",
            path.display(),
            e.utf8_error().valid_up_to()
        )
    })?;
    let opts = ParseOptions {
        normalize,
        ..ParseOptions::default()
    };
    parse_spec_with(&text, &opts).with_context(|| format!("invalid spec {}", path.display()))
}

/// One JSON object per non-blank line.
pub fn parse_cases(text: &str) -> Result<Vec<CaseRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("case line {}", i + 1)))
        .collect()
}
