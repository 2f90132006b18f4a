use std::path::PathBuf;
use std::process::{Command, Output};

fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../assets")
        .join(rel)
}

fn eslcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eslcheck"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_spec_summary() {
    let o = eslcheck(&["check-spec", path(&asset("specs/mrt_gum.json"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "1 variable, 2 predicates, 1 rule");
}

#[test]
fn spec_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("nested.json");
    std::fs::write(
        &nested,
        r#"{"Variables": ["x"], "Predicates": ["A(x) := a", "B(x) := b"], "Rules": ["not (A(x) and B(x)) => B(x)"]}"#,
    )
    .unwrap();
    let o = eslcheck(&["check-spec", path(&nested)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("Rules[0]"), "{}", stderr(&o));
    let o = eslcheck(&["check-spec", "--normalize", path(&nested)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&eslcheck(&["check-spec", path(&empty)])), 3);
    assert_eq!(
        code(&eslcheck(&[
            "check-spec",
            path(&dir.path().join("absent.json"))
        ])),
        3
    );
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&eslcheck(&["verify"])), 3);
    assert_eq!(code(&eslcheck(&["no-such-command"])), 3);
    let spec = asset("specs/mrt_gum.json");
    let ctx = asset("cases/mrt_alex/context.txt");
    let o = eslcheck(&[
        "verify",
        "--spec",
        path(&spec),
        "--context",
        path(&ctx),
        "--level",
        "3",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn empty_discourse_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let blank = dir.path().join("blank.txt");
    std::fs::write(&blank, "").unwrap();
    let o = eslcheck(&[
        "verify",
        "--spec",
        path(&asset("specs/mrt_gum.json")),
        "--context",
        path(&blank),
        "--output",
        path(&blank),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("zero objects"));
}

#[test]
fn verify_exit_codes_follow_the_verdict() {
    let spec = asset("specs/mrt_gum.json");
    let args = |dir: &str, fixture: &str| {
        vec![
            "verify".to_string(),
            "--spec".into(),
            path(&spec).into(),
            "--context".into(),
            path(&asset(&format!("cases/{dir}/context.txt"))).into(),
            "--output".into(),
            path(&asset(&format!("cases/{dir}/output.txt"))).into(),
            "--fixtures".into(),
            path(&asset(&format!("fixtures/{fixture}.jsonl"))).into(),
        ]
    };
    let run = |a: Vec<String>| eslcheck(&a.iter().map(String::as_str).collect::<Vec<_>>());

    let o = run(args("mrt_alex", "mrt_alex"));
    assert_eq!(code(&o), 1);
    let golden = std::fs::read_to_string(asset("reports/mrt_alex.json")).unwrap();
    assert_eq!(stdout(&o).trim_end(), golden.trim_end());

    assert_eq!(code(&run(args("mrt_stranger", "mrt_stranger"))), 0);
    // fixtures for another discourse: perception is unavailable
    assert_eq!(code(&run(args("mrt_stranger", "mrt_alex"))), 2);
}

#[test]
fn replay_compares_against_expected_report() {
    let base = |report: &str| {
        eslcheck(&[
            "replay",
            "--spec",
            path(&asset("specs/numeric_multiplication.json")),
            "--context",
            path(&asset("cases/numeric_fig2/context.txt")),
            "--output",
            path(&asset("cases/numeric_fig2/output.txt")),
            "--level",
            "2",
            "--fixtures",
            path(&asset("fixtures/numeric_fig2.jsonl")),
            "--expect",
            path(&asset(&format!("reports/{report}.json"))),
        ])
    };
    assert_eq!(code(&base("numeric_fig2")), 0);
    assert_eq!(code(&base("numeric_fig2_claim")), 1);
}

#[test]
fn record_reproduces_shipped_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fx.jsonl");
    let o = eslcheck(&[
        "record",
        "--spec",
        path(&asset("specs/ineq_interval.json")),
        "--context",
        path(&asset("cases/ineq_interval/context.txt")),
        "--output",
        path(&asset("cases/ineq_interval/output.txt")),
        "--level",
        "2",
        "--script",
        path(&asset("scripts/ineq_interval.json")),
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(asset("fixtures/ineq_interval.jsonl")).unwrap()
    );
}

#[test]
fn run_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = eslcheck(&[
        "run",
        "--manifest",
        path(&asset("datasets/mrt_gum/manifest.json")),
        "--jobs",
        "4",
        "--out",
        path(dir.path()),
        "--no-timings",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("87.5%"));
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let o = eslcheck(&["summarize", path(&dir.path().join("results.jsonl"))]);
    assert_eq!(stdout(&o).trim_end(), summary.trim_end());
    let rows = std::fs::read_to_string(dir.path().join("results.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 10);
    assert!(rows.contains("\"wall_us\":0"));
}

#[test]
fn example_config_loads() {
    let c = eslcheck_cli::Config::load(Some(&asset("config/live.example.toml"))).unwrap();
    assert_eq!(c.jobs, 4);
    assert_eq!(c.level, Some(2));
    assert_eq!(c.perception.mode, eslcheck_cli::Mode::Live);
    assert_eq!(c.target.agent.model, "gpt-4.1-nano");
}
