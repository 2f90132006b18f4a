//! A hundred generated comparison questions, verified at level 2 with scripted agents.

use std::collections::BTreeMap;
use std::sync::Arc;

use eslcheck::agents::{
    Agent, AgentRole, CaseScript, Discourse, FactScript, ScriptBackend, WitnessScript,
};
use eslcheck::interpret::Level;
use eslcheck::verifier::{Label, Stage};
use eslcheck::{parse_spec, VerdictStatus};
use eslcheck_cli::metrics::summarize;
use eslcheck_cli::{run_dataset, CaseRecord, Dataset, LlmVerdict, RunOptions};
use proptest::prelude::Rng;
use proptest::test_runner::{RngAlgorithm, TestRng};

/// Renders `units / 10^scale` with trailing zeros removed.
fn decimal(units: u64, scale: u32) -> String {
    let d = 10u64.pow(scale);
    let (int, frac) = (units / d, units % d);
    if frac == 0 {
        return int.to_string();
    }
    let frac = format!("{frac:0width$}", width = scale as usize);
    format!("{int}.{}", frac.trim_end_matches('0'))
}

struct Generated {
    record: CaseRecord,
    script: CaseScript,
}

fn generate(i: usize, rng: &mut TestRng) -> Generated {
    let (a, b) = loop {
        let a = 100 + rng.next_u64() % 9_900;
        let b = 100 + rng.next_u64() % 9_900;
        if a != b {
            break (a, b);
        }
    };
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    let wrong = i.is_multiple_of(3);
    let (claimed_big, claimed_small) = if wrong { (small, big) } else { (big, small) };
    let context = format!(
        "Which number is greater, {} or {}?",
        decimal(a, 2),
        decimal(b, 2)
    );
    let output = format!(
        "{} is greater than {}.",
        decimal(claimed_big, 2),
        decimal(claimed_small, 2)
    );
    let fact = |x: u64, y: u64, truth: &str| FactScript {
        predicate: "IsGreater".into(),
        args: vec![decimal(x, 2).into(), decimal(y, 2).into()],
        truth: truth.into(),
    };
    // Scaled by z = 10: units of 1/100 times 10 are units of 1/10.
    let question = format!("Is {} greater than {}?", decimal(big, 1), decimal(small, 1));
    let answer = if wrong { "False" } else { "True" };
    Generated {
        record: CaseRecord {
            id: format!("n{i:03}"),
            context,
            llm_output: output,
            label: Some(if wrong {
                Label::Incorrect
            } else {
                Label::Correct
            }),
            level: None,
            llm_verdict: None,
        },
        script: CaseScript {
            objects: vec![decimal(a, 2).into(), decimal(b, 2).into()],
            facts: vec![fact(big, small, "True"), fact(small, big, "False")],
            witnesses: vec![WitnessScript {
                constraints: "IsGreater(z, 0)".into(),
                witness: Some(BTreeMap::from([("z".to_string(), "10".into())])),
            }],
            answers: BTreeMap::from([(question, answer.to_string())]),
            violation: Some("False".into()),
            ..CaseScript::default()
        },
    }
}

#[test]
fn hundred_comparisons() {
    let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let generated: Vec<Generated> = (0..100).map(|i| generate(i, &mut rng)).collect();
    let spec = parse_spec(
        &std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("../../assets/specs/numeric_multiplication.json"),
        )
        .unwrap(),
    )
    .unwrap();
    let scripts: Vec<(Discourse, CaseScript)> = generated
        .iter()
        .map(|g| (g.record.discourse(), g.script.clone()))
        .collect();
    let dataset = Dataset::from_parts(
        "numeric".into(),
        spec,
        Level::Two,
        &[Label::Correct, Label::Incorrect],
        generated.into_iter().map(|g| g.record).collect(),
        Vec::new(),
    )
    .unwrap();
    let backend = Arc::new(ScriptBackend::new(scripts));
    let opts = RunOptions {
        jobs: 4,
        record_timings: false,
        ..RunOptions::default()
    };
    let results = run_dataset(
        &dataset,
        &Agent::new(AgentRole::Perception, backend.clone()),
        &Agent::new(AgentRole::Target, backend),
        &opts,
    )
    .unwrap();

    for (row, verdict) in &results {
        let wrong = row.label == Some(Label::Incorrect);
        assert_eq!(row.llm_verdict, LlmVerdict::Clean);
        if wrong {
            assert_eq!(
                verdict.status,
                VerdictStatus::Inconsistent,
                "{}: {:?}",
                row.id,
                verdict.reason
            );
            assert_eq!(verdict.stage, Some(Stage::FollowUp));
        } else {
            assert_eq!(
                verdict.status,
                VerdictStatus::Consistent,
                "{}: {:?}",
                row.id,
                verdict.reason
            );
        }
        assert_eq!(verdict.trace.ground_rules.len(), 2, "{}", row.id);
    }
    let summary = summarize(&results.iter().map(|(r, _)| r.clone()).collect::<Vec<_>>());
    assert_eq!((summary.positives, summary.negatives), (34, 66));
    assert_eq!(summary.rv.tpr, Some(1.0));
    assert_eq!(summary.rv.tnr, Some(1.0));
    assert_eq!(summary.llm.tpr, Some(0.0));
}

#[test]
fn decimal_rendering() {
    assert_eq!(decimal(1520, 2), "15.2");
    assert_eq!(decimal(1512, 1), "151.2");
    assert_eq!(decimal(1500, 2), "15");
    assert_eq!(decimal(105, 2), "1.05");
}
