use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eslcheck::agents::{Agent, AgentRole, ChatBackend, Prompts, RecordingBackend};
use eslcheck::esl::{ParseOptions, SpecError};
use eslcheck::interpret::Level;
use eslcheck::verifier::{verify_with, Verdict, VerdictStatus, VerificationCase, VerifyOptions};
use eslcheck_cli::config::{self, Config};
use eslcheck_cli::dataset::{load_spec, Dataset};
use eslcheck_cli::metrics::{rows_from_jsonl, rows_to_jsonl, summarize};
use eslcheck_cli::runner::{run_dataset, RunOptions};

const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "eslcheck",
    version,
    about = "Check LLM outputs against ESL rule specifications"
)]
struct Cli {
    /// Log pipeline progress and print a readable trace to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a spec file.
    CheckSpec {
        spec: PathBuf,
        /// Rewrite rules into DNF => CNF instead of rejecting other shapes.
        #[arg(long)]
        normalize: bool,
    },
    /// Verify one LLM output; prints a JSON report.
    Verify {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        agents: AgentArgs,
        /// Include stage timings in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Verify every case of a dataset manifest and report metrics.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        agents: AgentArgs,
        #[arg(long)]
        jobs: Option<usize>,
        /// Directory for results.jsonl and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave wall times at zero so that output is reproducible.
        #[arg(long)]
        no_timings: bool,
    },
    /// Run the pipeline against live or scripted agents and save the exchanges as fixtures.
    Record {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        agents: AgentArgs,
        /// Fixture file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run a recorded session from fixtures.
    Replay {
        #[command(flatten)]
        target: Target,
        #[arg(long, required = true, num_args = 1..)]
        fixtures: Vec<PathBuf>,
        /// Expected report (single case) or results JSONL (manifest); exit 1 on any difference.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Recompute the summary from a results JSONL file.
    Summarize { results: PathBuf },
}

#[derive(Args, Clone)]
struct CaseArgs {
    #[arg(long)]
    spec: PathBuf,
    /// File holding the prompt context.
    #[arg(long)]
    context: PathBuf,
    /// File holding the LLM output under test.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    level: Option<u8>,
    #[arg(long)]
    normalize: bool,
}

/// A dataset manifest, or a single case given by spec and context files.
#[derive(Args, Clone)]
struct Target {
    #[arg(long, conflicts_with_all = ["spec", "context", "output", "level"])]
    manifest: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest", requires = "context")]
    spec: Option<PathBuf>,
    /// File holding the prompt context.
    #[arg(long)]
    context: Option<PathBuf>,
    /// File holding the LLM output under test.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    level: Option<u8>,
    #[arg(long)]
    normalize: bool,
}

impl Target {
    fn case(&self) -> Option<CaseArgs> {
        Some(CaseArgs {
            spec: self.spec.clone()?,
            context: self.context.clone()?,
            output: self.output.clone(),
            level: self.level,
            normalize: self.normalize,
        })
    }
}

#[derive(Args, Clone, Default)]
struct AgentArgs {
    /// TOML agent configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replay these fixture files for both roles.
    #[arg(long, num_args = 1.., conflicts_with = "script")]
    fixtures: Vec<PathBuf>,
    /// Answer from a script for both roles.
    #[arg(long)]
    script: Option<PathBuf>,
}

impl AgentArgs {
    fn config(&self) -> Result<Config> {
        let mut c = Config::load(self.config.as_deref())?;
        if !self.fixtures.is_empty() {
            c.use_fixtures(&self.fixtures);
        }
        if let Some(s) = &self.script {
            c.use_script(s);
        }
        Ok(c)
    }
}

/// Errors that map to the usage exit status.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| Usage(e).into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let filter = if cli.verbose {
        "eslcheck=debug,eslcheck_cli=debug"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("ESLCHECK_LOG")
                .unwrap_or_else(|_| filter.into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match dispatch(cli.command, cli.verbose) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush());
}

fn exit_code(status: VerdictStatus) -> u8 {
    match status {
        VerdictStatus::Consistent => 0,
        VerdictStatus::Inconsistent => 1,
        VerdictStatus::Fail => 2,
    }
}

fn dispatch(command: Command, verbose: bool) -> Result<u8> {
    match command {
        Command::CheckSpec { spec, normalize } => check_spec(&spec, normalize),
        Command::Verify {
            case,
            agents,
            timings,
        } => {
            let config = usage(agents.config())?;
            let vc = usage(single_case(&case, &config))?;
            let (p, t) = usage(config::agents(&config, &[]))?;
            let verdict = verify_case(&vc, &p, &t, timings, verbose);
            emit(&format!("{}\n", verdict.to_report_json()));
            Ok(exit_code(verdict.status))
        }
        Command::Run {
            manifest,
            agents,
            jobs,
            out,
            no_timings,
        } => {
            let dataset = usage(Dataset::load(&manifest))?;
            let mut config = usage(agents.config())?;
            if agents.fixtures.is_empty()
                && agents.script.is_none()
                && !dataset.fixtures.is_empty()
                && agents.config.is_none()
            {
                config.use_fixtures(&dataset.fixtures);
            }
            let jobs = jobs.unwrap_or(config.jobs);
            run_manifest(
                &dataset,
                &config,
                jobs,
                !no_timings,
                out.as_deref(),
                verbose,
            )
        }
        Command::Record {
            target,
            agents,
            out,
        } => {
            let config = usage(agents.config())?;
            record(&target, &config, &out, verbose)
        }
        Command::Replay {
            target,
            fixtures,
            expect,
        } => {
            let mut config = Config::default();
            config.use_fixtures(&fixtures);
            replay(&target, &config, expect.as_deref(), verbose)
        }
        Command::Summarize { results } => {
            let text = usage(
                std::fs::read_to_string(&results)
                    .with_context(|| format!("cannot read {}", results.display())),
            )?;
            let rows = usage(rows_from_jsonl(&text))?;
            emit(&format!("{}\n", summarize(&rows).to_json()));
            Ok(0)
        }
    }
}

fn check_spec(path: &Path, normalize: bool) -> Result<u8> {
    let bytes =
        usage(std::fs::read(path).with_context(|| format!("cannot read spec {}", path.display())))?;
    let opts = ParseOptions {
        normalize,
        ..ParseOptions::default()
    };
    let result = match std::str::from_utf8(&bytes) {
        Ok(text) => eslcheck::esl::parse_spec_with(text, &opts),
        Err(e) => Err(SpecError::InvalidUtf8 {
            offset: e.valid_up_to(),
        }),
    };
    match result {
        Ok(spec) => {
            emit(&format!("{}\n", spec.summary()));
            for w in spec.lint() {
                eprintln!("warning: {w}");
            }
            Ok(0)
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            Ok(EXIT_USAGE)
        }
    }
}

/// File contents without the final line break.
fn read_text(path: &Path) -> Result<String> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(text.trim_end_matches(['\n', '\r']).to_string())
}

fn single_case(args: &CaseArgs, config: &Config) -> Result<VerificationCase> {
    let spec = load_spec(&args.spec, args.normalize)?;
    let level = args.level.or(config.level).unwrap_or(1);
    Ok(VerificationCase {
        spec: Arc::new(spec),
        context: read_text(&args.context)?,
        llm_output: match &args.output {
            Some(p) => read_text(p)?,
            None => String::new(),
        },
        level: Level::try_from(level).map_err(anyhow::Error::msg)?,
        label: None,
    })
}

fn verify_case(
    case: &VerificationCase,
    p: &Agent,
    t: &Agent,
    timings: bool,
    verbose: bool,
) -> Verdict {
    let opts = VerifyOptions {
        record_timings: timings,
        ..VerifyOptions::default()
    };
    let verdict = verify_with(case, p, t, &opts);
    if verbose {
        eprint!("{}", readable_trace(&verdict));
    }
    verdict
}

fn readable_trace(v: &Verdict) -> String {
    let mut out = String::new();
    let tr = &v.trace;
    let objects: Vec<String> = tr
        .objects
        .iter()
        .map(|o| format!("{}={}", o.id, o.value))
        .collect();
    out.push_str(&format!("objects: {}\n", objects.join(", ")));
    for g in &tr.ground_rules {
        out.push_str(&format!("ground rule {}: {}\n", g.rule, g.formula));
    }
    for i in &tr.implications {
        out.push_str(&format!("  implication {i}\n"));
    }
    for (p, t) in &tr.seeds {
        out.push_str(&format!("seed {p} = {t}\n"));
    }
    for d in &tr.derived {
        out.push_str(&format!("derived {d}\n"));
    }
    for f in &tr.followups {
        out.push_str(&format!(
            "asked {:?} -> {} ({:?})\n",
            f.question, f.answer, f.outcome
        ));
    }
    for d in &v.diagnostics {
        out.push_str(&format!("note: {d}\n"));
    }
    out.push_str(&format!("verdict: {:?}", v.status));
    if let Some(s) = v.stage {
        out.push_str(&format!(" at {s:?}"));
    }
    out.push('\n');
    out
}

fn run_manifest(
    dataset: &Dataset,
    config: &Config,
    jobs: usize,
    timings: bool,
    out: Option<&Path>,
    verbose: bool,
) -> Result<u8> {
    let (p, t) = usage(config::agents(config, &dataset.discourses()))?;
    let opts = RunOptions {
        jobs,
        record_timings: timings,
        prompts: usage(
            Prompts::load(config.target.agent.prompt_dir.as_deref()).context("cannot read prompts"),
        )?,
        ..RunOptions::default()
    };
    let results = run_dataset(dataset, &p, &t, &opts)?;
    if verbose {
        for (row, verdict) in &results {
            eprintln!("== {}", row.id);
            eprint!("{}", readable_trace(verdict));
        }
    }
    let rows: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
    let summary = summarize(&rows);
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
            std::fs::write(dir.join("results.jsonl"), rows_to_jsonl(&rows))?;
            std::fs::write(dir.join("summary.json"), summary.to_json() + "\n")?;
        }
        None => emit(&rows_to_jsonl(&rows)),
    }
    eprint!("{}: {}", dataset.name, summary.table());
    Ok(0)
}

fn record(target: &Target, config: &Config, out: &Path, verbose: bool) -> Result<u8> {
    let (dataset, case) = usage(load_target(target, config))?;
    let cases = dataset
        .as_ref()
        .map(Dataset::discourses)
        .unwrap_or_default();
    let p_inner = usage(config::backend(&config.perception, &cases))?;
    let t_inner = usage(config::backend(&config.target, &cases))?;
    let p_rec = Arc::new(RecordingBackend::new(p_inner));
    let t_rec = Arc::new(RecordingBackend::new(t_inner));
    let p = Agent::new(AgentRole::Perception, p_rec.clone() as Arc<dyn ChatBackend>);
    let t = Agent::new(AgentRole::Target, t_rec.clone() as Arc<dyn ChatBackend>);
    let code = match (dataset, case) {
        (Some(ds), _) => {
            let opts = RunOptions {
                record_timings: false,
                ..RunOptions::default()
            };
            let results = run_dataset(&ds, &p, &t, &opts)?;
            let rows: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
            eprint!("{}", summarize(&rows).table());
            0
        }
        (None, Some(case)) => {
            let verdict = verify_case(&case, &p, &t, false, verbose);
            emit(&format!("{}\n", verdict.to_report_json()));
            exit_code(verdict.status)
        }
        (None, None) => unreachable!("clap requires a manifest or a case"),
    };
    let mut entries = p_rec.entries();
    entries.extend(t_rec.entries());
    entries.sort_by(|a, b| a.request_hash.cmp(&b.request_hash));
    entries.dedup_by(|a, b| a.request_hash == b.request_hash);
    let mut text = String::new();
    for e in &entries {
        text.push_str(&serde_json::to_string(e)?);
        text.push('\n');
    }
    std::fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))?;
    eprintln!(
        "recorded {} exchange(s) to {}",
        entries.len(),
        out.display()
    );
    Ok(code)
}

fn load_target(
    target: &Target,
    config: &Config,
) -> Result<(Option<Dataset>, Option<VerificationCase>)> {
    match (&target.manifest, target.case()) {
        (Some(m), _) => Ok((Some(Dataset::load(m)?), None)),
        (None, Some(c)) => Ok((None, Some(single_case(&c, config)?))),
        (None, None) => bail!("give --manifest or --spec/--context"),
    }
}

fn replay(target: &Target, config: &Config, expect: Option<&Path>, verbose: bool) -> Result<u8> {
    let (dataset, case) = usage(load_target(target, config))?;
    let (actual, code) = match (dataset, case) {
        (Some(ds), _) => {
            let (p, t) = usage(config::agents(config, &[]))?;
            let opts = RunOptions {
                record_timings: false,
                ..RunOptions::default()
            };
            let rows: Vec<_> = run_dataset(&ds, &p, &t, &opts)?
                .into_iter()
                .map(|(r, _)| r)
                .collect();
            eprint!("{}", summarize(&rows).table());
            (rows_to_jsonl(&rows), 0)
        }
        (None, Some(case)) => {
            let (p, t) = usage(config::agents(config, &[]))?;
            let verdict = verify_case(&case, &p, &t, false, verbose);
            (verdict.to_report_json() + "\n", exit_code(verdict.status))
        }
        (None, None) => unreachable!("clap requires a manifest or a case"),
    };
    emit(&actual);
    if let Some(path) = expect {
        let expected = usage(read_text(path))?;
        if expected.trim_end() != actual.trim_end() {
            eprintln!("replay differs from {}", path.display());
            return Ok(1);
        }
        eprintln!("replay matches {}", path.display());
        return Ok(0);
    }
    Ok(code)
}
