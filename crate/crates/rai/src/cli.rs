//! `rai` subcommands. Output goes to the supplied writers so the whole CLI
//! can be driven in-process.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use rai_core::answer::AnswerValue;
use rai_core::assessment::{
    format_timestamp, Clock, FixedClock, MetricValue, Session, SessionOptions, SessionStore,
    SystemClock,
};
use rai_core::canonical::to_canonical_string;
use rai_core::compliance::{ComplianceLevel, ComplianceReport};
use rai_core::ingest::parse_bank_unchecked;
use rai_core::model::{summarize, validate, Question, Severity};
use rai_core::navigator::{filter, select_profile};
use rai_core::reporting::{export_risk_register, export_traceability_matrix, render_assessment_report, ReportFormat};
use serde::Serialize;

use crate::app::{read_file, AnswerInput, AppError, Engine, RiskInput};
use crate::server::{criteria_from, serve, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "rai", version, about = "Responsible-AI question bank and assessment tool")]
struct Cli {
    /// Question bank document; the built-in seed bank when omitted.
    #[arg(long, env = "RAI_BANK", global = true)]
    bank: Option<PathBuf>,
    /// Extra requirement-set documents.
    #[arg(long = "requirements", global = true)]
    requirements: Vec<PathBuf>,
    /// Session store directory.
    #[arg(long, env = "RAI_STORE", global = true, default_value = ".rai-sessions")]
    store: PathBuf,
    /// Fixed clock (RFC 3339) for reproducible output.
    #[arg(long, env = "RAI_NOW", global = true)]
    now: Option<DateTime<Utc>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a bank against the structural invariants.
    Validate { file: Option<PathBuf> },
    /// Per-principle counts of categories, sub-categories, questions and sources.
    Stats {
        file: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// List sub-questions matching every given criterion.
    Filter(FilterArgs),
    /// List profiles, or the questions of one profile.
    Profiles {
        id: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Create, answer and inspect assessment sessions.
    #[command(subcommand)]
    Session(SessionCommand),
    /// Score answers or a session against a requirement set.
    Score(ScoreArgs),
    /// Render an assessment report for a session.
    Report {
        session: String,
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value = "md")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a traceability matrix or risk register.
    Export {
        #[arg(value_parser = ["traceability", "risks"])]
        what: String,
        session: String,
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "RAI_BIND", default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long)]
        read_only: bool,
    },
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[arg(long)]
    principle: Option<String>,
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    stage: Option<String>,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    text: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum SessionCommand {
    /// Start a session over a profile; prints its id.
    New {
        #[arg(long)]
        profile: String,
        #[arg(long, default_value = "")]
        subject: String,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        threshold: Option<u32>,
        #[arg(long)]
        evidence_required: bool,
    },
    /// Record one answer.
    Answer {
        session: String,
        question: String,
        value: AnswerValue,
        #[arg(long)]
        evidence: Option<String>,
        #[arg(long)]
        metric: Option<f64>,
        #[arg(long)]
        unit: Option<String>,
        #[arg(long, default_value = "cli")]
        by: String,
    },
    /// Print a session's progress and the questions that can be asked next.
    Show {
        session: String,
        #[arg(long)]
        json: bool,
    },
    /// Questions that can be asked now.
    Next {
        session: String,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Ask the remaining questions one at a time on standard input.
    Run {
        session: String,
        #[arg(long, default_value = "cli")]
        by: String,
    },
    /// Add a risk register entry.
    Risk {
        session: String,
        #[arg(long)]
        risk_id: String,
        #[arg(long)]
        category: String,
        #[arg(long)]
        title: String,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long, default_value = "")]
        causes: String,
        #[arg(long, default_value = "")]
        mitigations: String,
        #[arg(long, default_value = "")]
        owner: String,
        #[arg(long = "link")]
        links: Vec<String>,
        #[arg(long, allow_negative_numbers = true)]
        impact: i64,
        #[arg(long, allow_negative_numbers = true)]
        probability: i64,
    },
    /// Close a session to further answers.
    Close { session: String },
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    set: Option<String>,
    /// JSON object mapping question ids to yes/no/na.
    #[arg(long, conflicts_with = "session")]
    answers: Option<PathBuf>,
    #[arg(long)]
    session: Option<String>,
    #[arg(long)]
    threshold: Option<u32>,
    #[arg(long)]
    json: bool,
}

/// Exit status with the error, if any, already reported.
enum Outcome {
    Ok,
    Findings,
}

struct Ctx<'a> {
    cli: &'a Cli,
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn clock(&self) -> Arc<dyn Clock> {
        match self.cli.now {
            Some(t) => Arc::new(FixedClock(t)),
            None => Arc::new(SystemClock),
        }
    }

    fn engine(&self, file: Option<&Path>) -> Result<Engine, AppError> {
        Engine::load(file.or(self.cli.bank.as_deref()), &self.cli.requirements)
    }

    fn store(&self) -> Result<SessionStore, AppError> {
        Ok(SessionStore::open(&self.cli.store)?)
    }

    fn load(&mut self, engine: &Engine, store: &SessionStore, id: &str) -> Result<Session, AppError> {
        let loaded = store.load_checked(id, &engine.bank.version)?;
        if let Some(w) = loaded.warning {
            let _ = writeln!(
                self.err,
                "warning[VERSION_MISMATCH]: session {id} was created against bank {}, active bank is {}",
                w.session_version, w.bank_version
            );
        }
        Ok(loaded.session)
    }
}

/// Runs `rai` with `argv` (including the program name) and returns the exit
/// code: 0 success, 1 validation or scoring findings, 2 usage or I/O errors.
pub fn run_cli<I, S>(argv: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{}", e.render());
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 }
                }
                _ => {
                    let text = e.render().to_string();
                    let text = text.strip_prefix("error: ").unwrap_or(&text);
                    let _ = write!(err, "error[USAGE]: {text}");
                    2
                }
            };
        }
    };
    let mut ctx = Ctx {
        cli: &cli,
        input,
        out,
        err,
    };
    match dispatch(&mut ctx) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Findings) => 1,
        Err(e) => {
            let _ = writeln!(ctx.err, "{e}");
            2
        }
    }
}

fn w(out: &mut dyn Write, text: impl AsRef<str>) -> Result<(), AppError> {
    out.write_all(text.as_ref().as_bytes())
        .map_err(|e| AppError::new("IO", format!("cannot write output: {e}")))
}

fn json_line<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<(), AppError> {
    w(out, to_canonical_string(value).expect("values always serialize"))
}

fn write_target(ctx: &mut Ctx<'_>, path: Option<&Path>, text: &str) -> Result<(), AppError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| AppError::io(p, e)),
        None => w(ctx.out, text),
    }
}

fn dispatch(ctx: &mut Ctx<'_>) -> Result<Outcome, AppError> {
    match &ctx.cli.command {
        Command::Validate { file } => validate_cmd(ctx, file.as_deref()),
        Command::Stats { file, json } => stats_cmd(ctx, file.as_deref(), *json),
        Command::Filter(args) => filter_cmd(ctx, args),
        Command::Profiles { id, json } => profiles_cmd(ctx, id.as_deref(), *json),
        Command::Session(cmd) => session_cmd(ctx, cmd),
        Command::Score(args) => score_cmd(ctx, args),
        Command::Report {
            session,
            set,
            format,
            out,
        } => {
            let engine = ctx.engine(None)?;
            let store = ctx.store()?;
            let s = ctx.load(&engine, &store, session)?;
            let format: ReportFormat = format.parse()?;
            let set = match set {
                Some(id) => Some(engine.set(id)?),
                None => engine.sets.get(&s.profile_id),
            };
            let text = render_assessment_report(&s, &engine.bank, set, format)?;
            write_target(ctx, out.as_deref(), &text)?;
            Ok(Outcome::Ok)
        }
        Command::Export {
            what,
            session,
            set,
            format,
            out,
        } => {
            let engine = ctx.engine(None)?;
            let store = ctx.store()?;
            let s = ctx.load(&engine, &store, session)?;
            let format: ReportFormat = format.parse()?;
            let text = if what == "risks" {
                export_risk_register(&s, format)?
            } else {
                let set = engine.resolve_set(set.as_deref(), Some(&s.profile_id))?;
                export_traceability_matrix(set, &engine.bank, &s, format)?
            };
            write_target(ctx, out.as_deref(), &text)?;
            Ok(Outcome::Ok)
        }
        Command::Serve { bind, read_only } => {
            let config = ServiceConfig {
                bank_path: ctx.cli.bank.clone(),
                requirements_paths: ctx.cli.requirements.clone(),
                store_dir: ctx.cli.store.clone(),
                bind: *bind,
                read_only: *read_only,
            };
            let clock = ctx.clock();
            let runtime = tokio::runtime::Runtime::new().map_err(|e| AppError::new("IO", e.to_string()))?;
            let out = &mut *ctx.out;
            runtime.block_on(serve(config, clock, |addr| {
                let _ = writeln!(out, "listening on http://{addr}");
                let _ = out.flush();
            }))?;
            Ok(Outcome::Ok)
        }
    }
}

fn validate_cmd(ctx: &mut Ctx<'_>, file: Option<&Path>) -> Result<Outcome, AppError> {
    let bank = match file.or(ctx.cli.bank.as_deref()) {
        Some(p) => match parse_bank_unchecked(&read_file(p)?) {
            Ok(b) => b,
            Err(e) => {
                w(ctx.out, format!("{}\n", AppError::from(e)))?;
                return Ok(Outcome::Findings);
            }
        },
        None => rai_core::seed::seed_bank(),
    };
    let report = validate(&bank);
    for v in &report.violations {
        w(ctx.out, format!("{v}\n"))?;
    }
    let errors = report.violations.iter().filter(|v| v.severity == Severity::Error).count();
    let warnings = report.violations.len() - errors;
    w(ctx.err, format!("{errors} errors, {warnings} warnings\n"))?;
    Ok(if errors > 0 { Outcome::Findings } else { Outcome::Ok })
}

fn stats_cmd(ctx: &mut Ctx<'_>, file: Option<&Path>, json: bool) -> Result<Outcome, AppError> {
    let engine = ctx.engine(file)?;
    let summary = summarize(&engine.bank)?;
    if json {
        json_line(ctx.out, &summary)?;
        return Ok(Outcome::Ok);
    }
    let mut text = String::from("principle categories subcategories subquestions sources\n");
    for r in &summary.rows {
        text += &format!(
            "{} {} {} {} {}\n",
            r.principle, r.category_count, r.subcategory_count, r.subquestion_count, r.distinct_source_count
        );
    }
    let t = &summary.totals;
    text += &format!(
        "total {} {} {} {}-{}\n",
        t.category_count, t.subcategory_count, t.subquestion_count, t.min_source_count, t.max_source_count
    );
    w(ctx.out, text)?;
    Ok(Outcome::Ok)
}

fn question_line(q: &Question) -> String {
    format!(
        "{} L{} {} [{}] {}\n",
        q.global_id,
        q.level.get(),
        q.stage,
        q.sources.join(","),
        q.text
    )
}

fn filter_cmd(ctx: &mut Ctx<'_>, a: &FilterArgs) -> Result<Outcome, AppError> {
    let engine = ctx.engine(None)?;
    let criteria = criteria_from(&a.principle, &a.level, &a.stage, &a.source, &a.category, &a.text)?;
    let hits = filter(&engine.bank, &criteria);
    if a.json {
        json_line(ctx.out, &hits)?;
    } else {
        let text: String = hits.iter().map(|q| question_line(q)).collect();
        w(ctx.out, text)?;
    }
    Ok(Outcome::Ok)
}

fn profiles_cmd(ctx: &mut Ctx<'_>, id: Option<&str>, json: bool) -> Result<Outcome, AppError> {
    let engine = ctx.engine(None)?;
    match id {
        None if json => json_line(ctx.out, &engine.bank.profiles)?,
        None => {
            let text: String = engine
                .bank
                .profiles
                .iter()
                .map(|p| format!("{} {} {}\n", p.id, p.question_ids.len(), p.name))
                .collect();
            w(ctx.out, text)?;
        }
        Some(id) => {
            let qs = select_profile(&engine.bank, id)?;
            if json {
                json_line(ctx.out, &qs)?;
            } else {
                let text: String = qs.iter().map(|q| question_line(q)).collect();
                w(ctx.out, text)?;
            }
        }
    }
    Ok(Outcome::Ok)
}

fn progress(engine: &Engine, s: &Session) -> Result<String, AppError> {
    let c = s.completion(&engine.bank).map_err(AppError::from)?;
    Ok(format!("{}/{}", c.answered, c.total))
}

fn session_cmd(ctx: &mut Ctx<'_>, cmd: &SessionCommand) -> Result<Outcome, AppError> {
    let engine = ctx.engine(None)?;
    let store = ctx.store()?;
    let now = ctx.clock().now();
    match cmd {
        SessionCommand::New {
            profile,
            subject,
            id,
            threshold,
            evidence_required,
        } => {
            let options = SessionOptions {
                threshold: *threshold,
                evidence_required: evidence_required.then_some(true),
            };
            let s = engine.create_session(&store, profile, subject, options, id.clone(), now)?;
            w(ctx.out, format!("{}\n", s.session_id))?;
        }
        SessionCommand::Answer {
            session,
            question,
            value,
            evidence,
            metric,
            unit,
            by,
        } => {
            let input = AnswerInput {
                question_id: question.clone(),
                value: *value,
                evidence: evidence.clone(),
                metric_value: metric.map(|v| MetricValue {
                    value: v,
                    unit: unit.clone().unwrap_or_default(),
                }),
                answered_by: Some(by.clone()),
            };
            let s = engine.answer(&store, session, input, by, now)?;
            w(ctx.out, format!("recorded {question} = {value} ({})\n", progress(&engine, &s)?))?;
        }
        SessionCommand::Show { session, json } => {
            let s = ctx.load(&engine, &store, session)?;
            let view = engine.view(s)?;
            if *json {
                json_line(ctx.out, &view)?;
            } else {
                let s = &view.session;
                w(
                    ctx.out,
                    format!(
                        "session {}\nsubject: {}\nprofile: {}\nstatus: {:?}\nupdated: {}\nanswered: {}/{}\nrisks: {}\nnext: {}\n",
                        s.session_id,
                        s.subject,
                        s.profile_id,
                        s.status,
                        format_timestamp(&s.updated_at),
                        view.answered,
                        view.total,
                        s.risk_register.len(),
                        view.next.join(" ")
                    ),
                )?;
            }
        }
        SessionCommand::Next { session, k, json } => {
            let s = ctx.load(&engine, &store, session)?;
            let ids = s.next_question_ids(&engine.bank, *k).map_err(AppError::from)?;
            let qs: Vec<&Question> = ids
                .iter()
                .map(|q| engine.bank.find_question(q))
                .collect::<Result<_, _>>()?;
            if *json {
                json_line(ctx.out, &qs)?;
            } else {
                let text: String = qs.iter().map(|q| question_line(q)).collect();
                w(ctx.out, text)?;
            }
        }
        SessionCommand::Run { session, by } => run_interactive(ctx, &engine, &store, session, by)?,
        SessionCommand::Risk {
            session,
            risk_id,
            category,
            title,
            description,
            causes,
            mitigations,
            owner,
            links,
            impact,
            probability,
        } => {
            let input = RiskInput {
                risk_id: risk_id.clone(),
                category: category.clone(),
                title: title.clone(),
                description: description.clone(),
                causes: causes.clone(),
                existing_mitigations: mitigations.clone(),
                owner: owner.clone(),
                linked_question_ids: links.clone(),
                impact: *impact,
                probability: *probability,
            };
            let s = engine.add_risk(&store, session, input, now)?;
            let r = s.risk_register.last().expect("risk was added");
            w(
                ctx.out,
                format!("added {} score {} {}\n", r.risk_id, r.rating.score, r.rating.level),
            )?;
        }
        SessionCommand::Close { session } => {
            let s = engine.close(&store, session, now)?;
            w(ctx.out, format!("closed {} ({})\n", s.session_id, progress(&engine, &s)?))?;
        }
    }
    Ok(Outcome::Ok)
}

/// One prompt per eligible question. Each input line is `yes|no|na`
/// optionally followed by evidence text; end of input stops the run with
/// progress saved.
fn run_interactive(ctx: &mut Ctx<'_>, engine: &Engine, store: &SessionStore, id: &str, by: &str) -> Result<(), AppError> {
    let clock = ctx.clock();
    loop {
        let s = ctx.load(engine, store, id)?;
        let Some(next) = s.next_question_ids(&engine.bank, 1).map_err(AppError::from)?.pop() else {
            w(ctx.out, format!("session complete ({})\n", progress(engine, &s)?))?;
            return Ok(());
        };
        let q = engine.bank.find_question(&next)?;
        let mut card = format!("[{}] {} (level {}, {})\n{}\n", progress(engine, &s)?, q.global_id, q.level.get(), q.stage, q.text);
        if let Some(m) = &q.metric {
            card += &format!("metric: {} ({})\n", m.name, m.unit);
        }
        w(ctx.out, card)?;
        loop {
            w(ctx.out, "answer [yes/no/na] > ")?;
            let _ = ctx.out.flush();
            let mut line = String::new();
            let n = ctx.input.read_line(&mut line).map_err(|e| AppError::new("IO", e.to_string()))?;
            if n == 0 {
                w(ctx.out, format!("\nstopped ({})\n", progress(engine, &s)?))?;
                return Ok(());
            }
            let line = line.trim();
            let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let value: AnswerValue = match word.parse() {
                Ok(v) => v,
                Err(_) => {
                    w(ctx.out, "please answer yes, no or na\n")?;
                    continue;
                }
            };
            let rest = rest.trim();
            let input = AnswerInput {
                question_id: next.clone(),
                value,
                evidence: (!rest.is_empty()).then(|| rest.to_string()),
                metric_value: None,
                answered_by: Some(by.to_string()),
            };
            match engine.answer(store, id, input, by, clock.now()) {
                Ok(_) => break,
                Err(e) if e.code == "EVIDENCE_REQUIRED" => {
                    w(ctx.out, "evidence required: answer again as `yes <evidence>`\n")?;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

fn score_cmd(ctx: &mut Ctx<'_>, a: &ScoreArgs) -> Result<Outcome, AppError> {
    let engine = ctx.engine(None)?;
    let report: ComplianceReport = match (&a.session, &a.answers) {
        (Some(id), _) => {
            let store = ctx.store()?;
            let s = ctx.load(&engine, &store, id)?;
            engine.score_session(&s, a.set.as_deref(), a.threshold)?
        }
        (None, Some(path)) => {
            let answers: BTreeMap<String, AnswerValue> = serde_json::from_str(&read_file(path)?)
                .map_err(|e| AppError::new("SCHEMA", format!("{}: {e}", path.display())))?;
            engine.score_answers(a.set.as_deref(), a.profile.as_deref(), &answers, a.threshold)?
        }
        (None, None) => return Err(AppError::new("USAGE", "pass --answers FILE or --session ID")),
    };
    if a.json {
        json_line(ctx.out, &report)?;
    } else {
        let r = &report.result;
        let mut text = format!("{}\n", r.headline());
        text += &format!(
            "set: {}\nthreshold: {}\napplicable: {}/{}\n",
            report.set_id, r.threshold, r.n_applicable, r.n_total
        );
        for o in &report.requirements {
            text += &format!("{} {}\n", o.requirement.id, o.status);
        }
        w(ctx.out, text)?;
    }
    Ok(if report.result.level == ComplianceLevel::NonCompliant {
        Outcome::Findings
    } else {
        Outcome::Ok
    })
}
