//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero when any
//! criterion fails. Expected values come from oracles written here, not from the library.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use eslcheck::agents::{Agent, AgentRole, MockBackend};
use eslcheck::esl::{parse_spec_bytes, print_spec};
use eslcheck::interpret::Level;
use eslcheck::logic::{to_rule_like, FcGraph, FcStatus, GroundDeNF, GroundImplication};
use eslcheck::verifier::{Label, Stage, Verdict, VerificationCase};
use eslcheck::{parse_spec, verify, GroundLiteral, PropositionId, Truth, VerdictStatus};
use eslcheck_cli::config::agents;
use eslcheck_cli::metrics::{rows_from_jsonl, rows_to_jsonl};
use eslcheck_cli::{run_dataset, summarize, Config, Dataset, LlmVerdict, RunOptions};
use proptest::prelude::Rng;
use proptest::test_runner::{RngAlgorithm, TestRng};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_s), || {
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn rng() -> TestRng {
    TestRng::deterministic_rng(RngAlgorithm::ChaCha)
}

fn below(rng: &mut TestRng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn pid(i: usize) -> PropositionId {
    PropositionId::new(format!("p{i}"))
}

fn lit(prop: PropositionId, negated: bool) -> GroundLiteral {
    GroundLiteral { prop, negated }
}

fn named(s: &str) -> GroundLiteral {
    match s.strip_prefix('¬') {
        Some(n) => lit(PropositionId::new(n), true),
        None => lit(PropositionId::new(s), false),
    }
}

fn holds(l: &GroundLiteral, model: &BTreeMap<PropositionId, bool>) -> bool {
    model[&l.prop] != l.negated
}

/// All total assignments over `props`.
fn models(props: &[PropositionId]) -> impl Iterator<Item = BTreeMap<PropositionId, bool>> + '_ {
    (0u32..1 << props.len()).map(move |mask| {
        props
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), mask >> i & 1 == 1))
            .collect()
    })
}

fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../assets")
        .join(rel)
}

fn text(rel: &str) -> String {
    std::fs::read_to_string(asset(rel))
        .unwrap()
        .trim_end_matches(['\n', '\r'])
        .to_string()
}

fn case(spec: &str, dir: &str, level: Level) -> VerificationCase {
    VerificationCase {
        spec: Arc::new(parse_spec(&text(&format!("specs/{spec}.json"))).unwrap()),
        context: text(&format!("cases/{dir}/context.txt")),
        llm_output: text(&format!("cases/{dir}/output.txt")),
        level,
        label: None,
    }
}

fn replay(c: &VerificationCase, fixture: &str) -> Verdict {
    let backend =
        Arc::new(MockBackend::from_path(&asset(&format!("fixtures/{fixture}.jsonl"))).unwrap());
    verify(
        c,
        &Agent::new(AgentRole::Perception, backend.clone()),
        &Agent::new(AgentRole::Target, backend),
    )
}

fn transformation_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng();
    let mut checked = 0usize;
    for n in 0..1000 {
        // a pool of at most 8 distinct literals
        let pool: Vec<GroundLiteral> = (0..1 + below(&mut rng, 8))
            .map(|_| lit(pid(below(&mut rng, 8)), rng.next_u64() & 1 == 1))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let clauses = |rng: &mut TestRng| -> Vec<Vec<GroundLiteral>> {
            (0..1 + below(rng, 3))
                .map(|_| {
                    (0..1 + below(rng, 3))
                        .map(|_| pool[below(rng, pool.len())].clone())
                        .collect()
                })
                .collect()
        };
        let d = GroundDeNF {
            lhs: clauses(&mut rng),
            rhs: clauses(&mut rng),
        };
        let props: Vec<PropositionId> = pool
            .iter()
            .map(|l| l.prop.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let rules = to_rule_like(&d);
        for m in models(&props) {
            let original = !d.lhs.iter().any(|c| c.iter().all(|l| holds(l, &m)))
                || d.rhs.iter().all(|c| c.iter().any(|l| holds(l, &m)));
            let transformed = rules
                .iter()
                .all(|r| !r.body().iter().all(|l| holds(l, &m)) || holds(r.head(), &m));
            ensure(original == transformed, || {
                format!("DeNF #{n} `{d}` differs under {m:?}")
            })?;
            checked += 1;
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!(
        "1000 DeNFs, {checked} assignments agree ({:.2}s)",
        start.elapsed().as_secs_f64()
    ))
}

fn example_two() -> Outcome {
    let d = GroundDeNF {
        lhs: vec![vec![named("a1"), named("b1")], vec![named("a2")]],
        rhs: vec![vec![named("c1"), named("d1")], vec![named("c2")]],
    };
    let imp = |body: &[&str], head: &str| {
        GroundImplication::new(body.iter().map(|b| named(b)), named(head))
    };
    let want: BTreeSet<GroundImplication> = [
        imp(&["a1", "b1", "¬c1"], "d1"),
        imp(&["a1", "b1", "¬d1"], "c1"),
        imp(&["a1", "b1"], "c2"),
        imp(&["a2", "¬c1"], "d1"),
        imp(&["a2", "¬d1"], "c1"),
        imp(&["a2"], "c2"),
    ]
    .into();
    let got = to_rule_like(&d);
    ensure(got == want, || {
        format!(
            "got {:?}",
            got.iter().map(ToString::to_string).collect::<Vec<_>>()
        )
    })?;
    Ok("exactly the 6 expected implications".into())
}

fn chaining_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = rng();
    let (mut consistent_sets, mut derived_total) = (0, 0);
    for n in 0..1000 {
        let props = 1 + below(&mut rng, 10);
        let rules: Vec<GroundImplication> = (0..1 + below(&mut rng, 15))
            .map(|_| {
                let body: Vec<GroundLiteral> = (0..below(&mut rng, 4))
                    .map(|_| lit(pid(below(&mut rng, props)), rng.next_u64() & 1 == 1))
                    .collect();
                GroundImplication::new(
                    body,
                    lit(pid(below(&mut rng, props)), rng.next_u64() & 1 == 1),
                )
            })
            .collect();
        let seeds: BTreeMap<PropositionId, Truth> = (0..props)
            .filter_map(|i| match below(&mut rng, 5) {
                0 => Some((pid(i), Truth::True)),
                1 => Some((pid(i), Truth::False)),
                _ => None,
            })
            .collect();
        let mut g = FcGraph::new(rules.clone());
        g.seed(seeds.iter().map(|(p, t)| (p, *t)));
        let out = g.forward_chain();

        let all: Vec<PropositionId> = (0..props).map(pid).collect();
        let satisfying: Vec<BTreeMap<PropositionId, bool>> = models(&all)
            .filter(|m| seeds.iter().all(|(p, t)| t.as_bool() == Some(m[p])))
            .filter(|m| {
                rules
                    .iter()
                    .all(|r| !r.body().iter().all(|l| holds(l, m)) || holds(r.head(), m))
            })
            .collect();
        if satisfying.is_empty() {
            continue;
        }
        consistent_sets += 1;
        ensure(out.status == FcStatus::Consistent, || {
            format!(
                "set #{n}: chaining reports {:?} but a model exists",
                out.conflict
            )
        })?;
        for d in &out.derived {
            derived_total += 1;
            ensure(satisfying.iter().all(|m| holds(&d.literal, m)), || {
                format!("set #{n}: derived {} is not forced", d.literal)
            })?;
        }
    }
    within(start.elapsed(), 30)?;
    Ok(format!(
        "1000 rule sets, {consistent_sets} satisfiable, {derived_total} derived literals all forced ({:.2}s)",
        start.elapsed().as_secs_f64()
    ))
}

fn minimal_conflict() -> Outcome {
    let (a, b, c) = (
        PropositionId::new("a"),
        PropositionId::new("b"),
        PropositionId::new("c"),
    );
    let mut g = FcGraph::new([GroundImplication::new([named("a"), named("b")], named("c"))]);
    g.seed([(&a, Truth::True), (&b, Truth::True), (&c, Truth::False)]);
    let out = g.forward_chain();
    ensure(out.status == FcStatus::Inconsistent, || {
        format!("status {:?}", out.status)
    })?;
    ensure(out.conflict == Some(named("c")), || {
        format!("witness {:?}", out.conflict)
    })?;
    Ok("Inconsistent, witness c".into())
}

/// `units / 10^scale` in plain notation.
fn plain(units: u64, scale: u32) -> String {
    let d = 10u64.pow(scale);
    match units % d {
        0 => (units / d).to_string(),
        f => format!(
            "{}.{}",
            units / d,
            format!("{f:0w$}", w = scale as usize).trim_end_matches('0')
        ),
    }
}

fn multiplication_replay() -> Outcome {
    let start = Instant::now();
    let c = case("numeric_multiplication", "numeric_fig2", Level::Two);
    let v = replay(&c, "numeric_fig2");
    // 15.2 = 1520/100, 15.12 = 1512/100, z = 10
    let (x, y, z) = (1520u64, 1512u64, 10u64);
    let atom = |a: String, b: String| format!("IsGreater({a},{b})");
    let p0 = atom(plain(x, 2), plain(y, 2));
    let p1 = atom(plain(y, 2), plain(x, 2));
    let p2 = atom(z.to_string(), "0".into());
    let p3 = atom(plain(x * z, 2), plain(y * z, 2));
    let p4 = atom(plain(y * z, 2), plain(x * z, 2));
    let want: BTreeSet<String> =
        [format!("{p2} ∧ {p0} ⇒ {p3}"), format!("{p2} ∧ {p1} ⇒ {p4}")].into();
    let got: BTreeSet<String> = v.trace.implications.iter().cloned().collect();
    ensure(got == want, || {
        format!("implications {got:?}, expected {want:?}")
    })?;
    ensure(
        v.trace
            .ground_rules
            .iter()
            .all(|g| g.binding.get("z").map(String::as_str) == Some("10")),
        || "witness z is not 10 in every ground rule".into(),
    )?;
    let derived: Vec<String> = v.trace.derived.iter().map(ToString::to_string).collect();
    ensure(derived == [p3.clone()], || format!("derived {derived:?}"))?;
    let question = format!("Is {} greater than {}?", plain(x * z, 2), plain(y * z, 2));
    let asked: Vec<&str> = v
        .trace
        .followups
        .iter()
        .map(|f| f.question.as_str())
        .collect();
    ensure(asked == [question.as_str()], || {
        format!("follow-ups {asked:?}")
    })?;
    ensure(
        v.status == VerdictStatus::Inconsistent && v.stage == Some(Stage::FollowUp),
        || format!("verdict {:?} at {:?}", v.status, v.stage),
    )?;
    let report = v.to_report_json();
    ensure(
        report == replay(&c, "numeric_fig2").to_report_json(),
        || "reports differ between runs".into(),
    )?;
    ensure(report == text("reports/numeric_fig2.json"), || {
        "report differs from the golden file".into()
    })?;
    within(start.elapsed(), 1)?;
    Ok(format!(
        "{question} -> False, Inconsistent at FollowUp ({:.3}s)",
        start.elapsed().as_secs_f64()
    ))
}

fn mrt_replay() -> Outcome {
    let v = replay(&case("mrt_gum", "mrt_alex", Level::One), "mrt_alex");
    ensure(
        v.status == VerdictStatus::Inconsistent && v.stage == Some(Stage::Internal),
        || format!("verdict {:?} at {:?}", v.status, v.stage),
    )?;
    let ev = v.evidence.clone().ok_or("no evidence")?;
    ensure(ev.chain == ["InRailway(Alex) ⇒ ¬ChewGum(Alex)"], || {
        format!("chain {:?}", ev.chain)
    })?;
    ensure(ev.conflict == Some(named("ChewGum(Alex)")), || {
        format!("conflict {:?}", ev.conflict)
    })?;

    // The stranger's instance, chained on its own from the same perceived values.
    let stranger =
        GroundImplication::new([named("InRailway(stranger)")], named("¬ChewGum(stranger)"));
    ensure(v.trace.implications.contains(&stranger.to_string()), || {
        "stranger rule missing".into()
    })?;
    ensure(
        v.trace.seeds.get("ChewGum(stranger)") == Some(&Truth::Unknown),
        || "stranger seed is not Unknown".into(),
    )?;
    let seeds: Vec<(PropositionId, Truth)> = v
        .trace
        .seeds
        .iter()
        .map(|(k, t)| (PropositionId::new(k.as_str()), *t))
        .collect();
    let mut g = FcGraph::new([stranger]);
    g.seed(seeds.iter().map(|(p, t)| (p, *t)));
    let out = g.forward_chain();
    ensure(out.status == FcStatus::Consistent, || {
        format!("stranger instance: {:?}", out.conflict)
    })?;
    let alone = replay(&case("mrt_gum", "mrt_stranger", Level::One), "mrt_stranger");
    ensure(alone.status == VerdictStatus::Consistent, || {
        format!("stranger-only case {:?}", alone.status)
    })?;
    Ok("Inconsistent Internal on ChewGum(Alex); stranger instance consistent".into())
}

fn levels() -> Outcome {
    let one = replay(
        &case("numeric_multiplication", "numeric_fig2", Level::One),
        "numeric_fig2",
    );
    ensure(
        one.status == VerdictStatus::Consistent && one.trace.ground_rules.is_empty(),
        || {
            format!(
                "level 1: {:?} with {} ground rules",
                one.status,
                one.trace.ground_rules.len()
            )
        },
    )?;
    let two = replay(
        &case("numeric_multiplication", "numeric_fig2", Level::Two),
        "numeric_fig2",
    );
    ensure(two.status == VerdictStatus::Inconsistent, || {
        format!("level 2: {:?}", two.status)
    })?;
    Ok("level 1 Consistent with 0 ground rules, level 2 Inconsistent".into())
}

fn metrics() -> Outcome {
    let dataset =
        Dataset::load(&asset("datasets/mrt_gum/manifest.json")).map_err(|e| e.to_string())?;
    let mut config = Config::default();
    config.use_fixtures(&dataset.fixtures);
    let (p, t) = agents(&config, &dataset.discourses()).map_err(|e| e.to_string())?;
    let results =
        run_dataset(&dataset, &p, &t, &RunOptions::default()).map_err(|e| e.to_string())?;
    let rows: Vec<_> = results.iter().map(|(r, _)| r.clone()).collect();

    let (mut rv_caught, mut llm_only, mut missed, mut safe_clean, mut other) = (0, 0, 0, 0, 0);
    for r in &rows {
        let rv = r.rv_verdict == VerdictStatus::Inconsistent;
        let llm = r.llm_verdict == LlmVerdict::Violation;
        match (r.label, rv, llm) {
            (Some(Label::Unsafe), true, _) => rv_caught += 1,
            (Some(Label::Unsafe), false, true) => llm_only += 1,
            (Some(Label::Unsafe), false, false) if r.rv_verdict == VerdictStatus::Consistent => {
                missed += 1
            }
            (Some(Label::Safe), false, false) if r.rv_verdict == VerdictStatus::Consistent => {
                safe_clean += 1
            }
            _ => other += 1,
        }
    }
    ensure(
        (rv_caught, llm_only, missed, safe_clean, other) == (6, 1, 1, 2, 0),
        || {
            format!("categories rv={rv_caught} llm-only={llm_only} missed={missed} safe={safe_clean} other={other}")
        },
    )?;
    // combined TPR = (6 + 1) / 8, TNR = 2 / 2
    let summary = summarize(&rows);
    ensure(
        summary.combined.tpr == Some(7.0 / 8.0) && summary.combined.tnr == Some(1.0),
        || format!("combined {:?}", summary.combined),
    )?;
    let reread = rows_from_jsonl(&rows_to_jsonl(&rows)).map_err(|e| e.to_string())?;
    ensure(summarize(&reread).to_json() == summary.to_json(), || {
        "summary from JSONL differs".into()
    })?;
    Ok("combined TPR 87.5%, TNR 100.0%; JSONL round trip reproduces the summary".into())
}

fn parser_fuzz() -> Outcome {
    let start = Instant::now();
    let mut rng = rng();
    let seeds: Vec<Vec<u8>> = std::fs::read_dir(asset("specs"))
        .unwrap()
        .map(|e| std::fs::read(e.unwrap().path()).unwrap())
        .collect();
    const ALPHABET: &[u8] =
        b"{}[]\",:() \n\\'=>-+*/0123456789.xyzABPQ_notandorVariablesPredicatesRules\xce\xa3";
    let (mut valid, mut rejected) = (0usize, 0usize);
    let previous = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let result = (|| {
        for n in 0..100_000 {
            let bytes: Vec<u8> = match n % 3 {
                0 => (0..below(&mut rng, 256))
                    .map(|_| rng.next_u64() as u8)
                    .collect(),
                1 => (0..below(&mut rng, 256))
                    .map(|_| ALPHABET[below(&mut rng, ALPHABET.len())])
                    .collect(),
                _ => {
                    let mut s = seeds[below(&mut rng, seeds.len())].clone();
                    for _ in 0..1 + below(&mut rng, 4) {
                        let i = below(&mut rng, s.len() + 1);
                        match below(&mut rng, 3) {
                            0 if i < s.len() => s[i] = ALPHABET[below(&mut rng, ALPHABET.len())],
                            1 if i < s.len() => {
                                s.remove(i);
                            }
                            _ => s.insert(i, ALPHABET[below(&mut rng, ALPHABET.len())]),
                        }
                    }
                    s
                }
            };
            let parsed =
                catch_unwind(AssertUnwindSafe(|| parse_spec_bytes(&bytes))).map_err(|_| {
                    format!("panic on input #{n}: {:?}", String::from_utf8_lossy(&bytes))
                })?;
            match parsed {
                Ok(spec) => {
                    ensure(parse_spec(&print_spec(&spec)).as_ref() == Ok(&spec), || {
                        format!("input #{n} parsed but does not round-trip")
                    })?;
                    valid += 1;
                }
                Err(e) => {
                    ensure(!e.position().is_empty(), || {
                        format!("input #{n}: unpositioned error {e}")
                    })?;
                    rejected += 1;
                }
            }
        }
        Ok::<(), String>(())
    })();
    std::panic::set_hook(previous);
    result?;
    within(start.elapsed(), 60)?;
    Ok(format!(
        "100000 inputs, {valid} valid, {rejected} positioned errors, no panics ({:.2}s)",
        start.elapsed().as_secs_f64()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("transformation equivalence", transformation_equivalence),
        ("rule-like form of the two-disjunct example", example_two),
        ("chaining soundness", chaining_soundness),
        ("premise true, conclusion false", minimal_conflict),
        ("multiplication golden replay", multiplication_replay),
        ("railway gum golden replay", mrt_replay),
        ("level 1 versus level 2", levels),
        ("metrics fixture", metrics),
        ("parser fuzz", parser_fuzz),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
