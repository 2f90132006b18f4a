//! Batch execution of a dataset.

use std::time::Instant;

use anyhow::{Context, Result};
use eslcheck::agents::{Agent, Prompts};
use eslcheck::logic::Truth;
use eslcheck::verifier::{verify_with, Verdict, VerdictStatus, VerifyOptions};
use rayon::prelude::*;

use crate::dataset::{CaseRecord, Dataset};
use crate::metrics::{CaseRow, EvidenceRow, LlmVerdict};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub jobs: usize,
    /// Measure wall time per case; rows carry zero otherwise.
    pub record_timings: bool,
    pub prompts: Prompts,
    pub verify: VerifyOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            record_timings: true,
            prompts: Prompts::default(),
            verify: VerifyOptions::default(),
        }
    }
}

/// Verifies every case. Rows come back in dataset order; a failing case becomes a `Fail`
/// row and never aborts the batch.
pub fn run_dataset(
    dataset: &Dataset,
    perception: &Agent,
    target: &Agent,
    opts: &RunOptions,
) -> Result<Vec<(CaseRow, Verdict)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .context("cannot start worker threads")?;
    Ok(pool.install(|| {
        dataset
            .cases
            .par_iter()
            .map(|c| run_case(dataset, c, perception, target, opts))
            .collect()
    }))
}

pub fn run_case(
    dataset: &Dataset,
    record: &CaseRecord,
    perception: &Agent,
    target: &Agent,
    opts: &RunOptions,
) -> (CaseRow, Verdict) {
    let start = Instant::now();
    let case = dataset.verification_case(record);
    let verify_opts = VerifyOptions {
        record_timings: opts.record_timings,
        ..opts.verify
    };
    let mut verdict = verify_with(&case, perception, target, &verify_opts);
    let llm_verdict = match record.llm_verdict {
        Some(v) => v,
        None => {
            let mut notes = Vec::new();
            let v = match target.violation_check(
                &case.spec,
                &case.discourse(),
                &opts.prompts,
                &mut notes,
            ) {
                Ok(Truth::True) => LlmVerdict::Violation,
                Ok(_) => LlmVerdict::Clean,
                Err(e) => {
                    notes.push(format!("standalone verdict unavailable: {e}"));
                    LlmVerdict::Unavailable
                }
            };
            verdict.diagnostics.extend(notes);
            v
        }
    };
    let wall_us = if opts.record_timings {
        start.elapsed().as_micros() as u64
    } else {
        0
    };
    tracing::info!(id = %record.id, status = ?verdict.status, "case verified");
    let row = CaseRow {
        id: record.id.clone(),
        label: record.label,
        level: case.level,
        llm_verdict,
        rv_verdict: verdict.status,
        stage: verdict.stage,
        combined: llm_verdict.flags() || verdict.status == VerdictStatus::Inconsistent,
        evidence: verdict.evidence.as_ref().map(EvidenceRow::from),
        reason: verdict.reason.clone(),
        wall_us,
    };
    (row, verdict)
}
