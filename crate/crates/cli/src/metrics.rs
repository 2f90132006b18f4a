//! Per-case result rows and the aggregate metrics computed from them.

use anyhow::{Context, Result};
use eslcheck::interpret::Level;
use eslcheck::verifier::{Evidence, Label, Stage, VerdictStatus};
use serde::{Deserialize, Serialize};

/// Verdict of the LLM asked directly whether the rules are violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmVerdict {
    Violation,
    Clean,
    /// The question could not be asked or answered.
    Unavailable,
}

impl LlmVerdict {
    pub fn flags(self) -> bool {
        self == LlmVerdict::Violation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub id: String,
    pub label: Option<Label>,
    pub level: Level,
    pub llm_verdict: LlmVerdict,
    pub rv_verdict: VerdictStatus,
    pub stage: Option<Stage>,
    /// Whether the LLM or the verifier flagged the case.
    pub combined: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub wall_us: u64,
}

/// Evidence as plain strings, so rows can be read back without the core types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub conflict: Option<String>,
    pub chain: Vec<String>,
    pub question: Option<String>,
    pub answer: Option<String>,
}

impl From<&Evidence> for EvidenceRow {
    fn from(e: &Evidence) -> Self {
        EvidenceRow {
            conflict: e.conflict.as_ref().map(ToString::to_string),
            chain: e.chain.clone(),
            question: e.question.clone(),
            answer: e.answer.map(|a| a.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub consistent: usize,
    pub inconsistent: usize,
    pub fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cases: usize,
    pub positives: usize,
    pub negatives: usize,
    pub llm: Rates,
    pub rv: Rates,
    pub combined: Rates,
    /// Combined minus standalone LLM.
    pub delta: Rates,
    pub counts: Counts,
    pub mean_wall_ms: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn rates(
    rows: &[CaseRow],
    flagged: impl Fn(&CaseRow) -> bool,
    clean: impl Fn(&CaseRow) -> bool,
) -> Rates {
    let pos: Vec<&CaseRow> = rows
        .iter()
        .filter(|r| r.label.is_some_and(Label::is_positive))
        .collect();
    let neg: Vec<&CaseRow> = rows
        .iter()
        .filter(|r| r.label.is_some_and(|l| !l.is_positive()))
        .collect();
    Rates {
        tpr: ratio(pos.iter().filter(|r| flagged(r)).count(), pos.len()),
        tnr: ratio(neg.iter().filter(|r| clean(r)).count(), neg.len()),
    }
}

/// Aggregates rows. A pure function of its input; unlabeled rows only count towards
/// verdict counts and timing.
pub fn summarize(rows: &[CaseRow]) -> Summary {
    let llm = rates(
        rows,
        |r| r.llm_verdict.flags(),
        |r| r.llm_verdict == LlmVerdict::Clean,
    );
    let rv = rates(
        rows,
        |r| r.rv_verdict == VerdictStatus::Inconsistent,
        |r| r.rv_verdict == VerdictStatus::Consistent,
    );
    let combined = rates(
        rows,
        |r| r.llm_verdict.flags() || r.rv_verdict == VerdictStatus::Inconsistent,
        |r| !r.llm_verdict.flags() && r.rv_verdict == VerdictStatus::Consistent,
    );
    let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a - b);
    let count = |s: VerdictStatus| rows.iter().filter(|r| r.rv_verdict == s).count();
    let total_us: u64 = rows.iter().map(|r| r.wall_us).sum();
    Summary {
        cases: rows.len(),
        positives: rows
            .iter()
            .filter(|r| r.label.is_some_and(Label::is_positive))
            .count(),
        negatives: rows
            .iter()
            .filter(|r| r.label.is_some_and(|l| !l.is_positive()))
            .count(),
        llm,
        rv,
        delta: Rates {
            tpr: diff(combined.tpr, llm.tpr),
            tnr: diff(combined.tnr, llm.tnr),
        },
        combined,
        counts: Counts {
            consistent: count(VerdictStatus::Consistent),
            inconsistent: count(VerdictStatus::Inconsistent),
            fail: count(VerdictStatus::Fail),
        },
        mean_wall_ms: ratio(total_us as usize, rows.len()).map(|us| us / 1000.0),
    }
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialization")
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let pct = |x: Option<f64>| match x {
            Some(v) => format!("{:.1}%", v * 100.0),
            None => "n/a".to_string(),
        };
        let signed = |x: Option<f64>| match x {
            Some(v) => format!("{:+.1}", v * 100.0),
            None => "n/a".to_string(),
        };
        let mut out = String::new();
        out.push_str(&format!(
            "cases {} (positive {}, negative {})\n",
            self.cases, self.positives, self.negatives
        ));
        out.push_str(&format!("{:<10}{:>10}{:>10}\n", "", "TPR", "TNR"));
        for (name, r) in [
            ("llm", self.llm),
            ("rv", self.rv),
            ("combined", self.combined),
        ] {
            out.push_str(&format!(
                "{:<10}{:>10}{:>10}\n",
                name,
                pct(r.tpr),
                pct(r.tnr)
            ));
        }
        out.push_str(&format!(
            "{:<10}{:>10}{:>10}\n",
            "delta",
            signed(self.delta.tpr),
            signed(self.delta.tnr)
        ));
        out.push_str(&format!(
            "Con. {}  Incon. {}  Fail {}\n",
            self.counts.consistent, self.counts.inconsistent, self.counts.fail
        ));
        if let Some(ms) = self.mean_wall_ms {
            out.push_str(&format!("mean wall time {ms:.1} ms\n"));
        }
        out
    }
}

pub fn rows_to_jsonl(rows: &[CaseRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("row serialization"));
        out.push('\n');
    }
    out
}

pub fn rows_from_jsonl(text: &str) -> Result<Vec<CaseRow>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("result line {}", i + 1)))
        .collect()
}
