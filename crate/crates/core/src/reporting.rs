//! Assessment reports, traceability matrices and risk-register exports.
//!
//! Every renderer is a pure function of its inputs; timestamps come from the
//! session itself, so identical sessions render to identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::AnswerValue;
use crate::assessment::{
    format_timestamp, principle_risk_summary, rank_principles, risk_rating, AnswerRecord,
    AssessmentError, Completion, MetricValue, PrincipleRisk, RiskRegisterEntry, Session,
    SessionStatus,
};
use crate::canonical::to_canonical_string;
use crate::compliance::{
    compliance_report, coverage_check, requirement_outcomes, ComplianceError, ComplianceResult,
    RequirementOutcome, RequirementSet, RequirementStatus, Weights,
};
use crate::model::{PrincipleId, QuestionBank};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown format {0:?}")]
    UnknownFormat(String),
    #[error(transparent)]
    Compliance(#[from] ComplianceError),
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::UnknownFormat(_) => "UNKNOWN_FORMAT",
            ReportError::Compliance(e) => e.code(),
            ReportError::Assessment(e) => e.code(),
            ReportError::Csv(_) => "CSV",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerRow {
    pub question_id: String,
    pub text: String,
    pub principle: PrincipleId,
    pub level: u8,
    pub answer: Option<AnswerValue>,
    pub evidence: Option<String>,
    pub metric_value: Option<MetricValue>,
    pub answered_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceSection {
    pub set_id: String,
    pub set_name: String,
    /// Absent until every mapped question is answered.
    pub result: Option<ComplianceResult>,
    pub missing: Vec<String>,
    pub requirements: Vec<RequirementOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentReport {
    pub session_id: String,
    pub subject: String,
    pub profile_id: String,
    pub profile_name: String,
    pub bank_version: String,
    pub status: SessionStatus,
    pub created_at: String,
    pub updated_at: String,
    pub completion: Completion,
    /// Principles ranked by medium plus high risk count.
    pub principle_risks: Vec<PrincipleRisk>,
    pub risks: Vec<RiskRegisterEntry>,
    pub compliance: Option<ComplianceSection>,
    pub answers: Vec<AnswerRow>,
}

fn answer_row(bank: &QuestionBank, id: &str, record: Option<&AnswerRecord>) -> AnswerRow {
    let question = bank.find_question(id).ok();
    AnswerRow {
        question_id: id.to_string(),
        text: question.map(|q| q.text.clone()).unwrap_or_default(),
        principle: question.map(|q| q.principle).unwrap_or(PrincipleId::P1),
        level: question.map(|q| q.level.get()).unwrap_or(1),
        answer: record.map(|r| r.value),
        evidence: record.and_then(|r| r.evidence.clone()),
        metric_value: record.and_then(|r| r.metric_value.clone()),
        answered_by: record.map(|r| r.answered_by.clone()),
    }
}

/// Collects everything an assessment report shows. With a requirement set,
/// the compliance result uses the threshold precedence of
/// [`session_compliance`] without an explicit value.
pub fn build_assessment_report(
    session: &Session,
    bank: &QuestionBank,
    set: Option<&RequirementSet>,
) -> Result<AssessmentReport, ReportError> {
    let completion = session.completion(bank)?;
    let profile = bank.profile(&session.profile_id);
    let answers = profile
        .map(|p| {
            p.question_ids
                .iter()
                .map(|id| answer_row(bank, id, session.answers.get(id)))
                .collect()
        })
        .unwrap_or_default();
    let compliance = match set {
        None => None,
        Some(set) => {
            let scored = session_compliance(set, bank, session, None);
            let (result, missing) = match scored {
                Ok(r) => (Some(r.result), Vec::new()),
                Err(ComplianceError::MissingAnswer(ids)) => (None, ids),
                Err(e) => return Err(e.into()),
            };
            Some(ComplianceSection {
                set_id: set.id.clone(),
                set_name: set.name.clone(),
                result,
                missing,
                requirements: requirement_outcomes(set, bank, session),
            })
        }
    };
    Ok(AssessmentReport {
        session_id: session.session_id.clone(),
        subject: session.subject.clone(),
        profile_id: session.profile_id.clone(),
        profile_name: profile.map(|p| p.name.clone()).unwrap_or_default(),
        bank_version: session.bank_version.clone(),
        status: session.status,
        created_at: format_timestamp(&session.created_at),
        updated_at: format_timestamp(&session.updated_at),
        completion,
        principle_risks: rank_principles(&principle_risk_summary(session, bank)),
        risks: session.risk_register.clone(),
        compliance,
        answers,
    })
}

pub fn render_assessment_report(
    session: &Session,
    bank: &QuestionBank,
    set: Option<&RequirementSet>,
    format: ReportFormat,
) -> Result<String, ReportError> {
    let report = build_assessment_report(session, bank, set)?;
    match format {
        ReportFormat::Markdown => Ok(report_markdown(&report)),
        ReportFormat::Json => Ok(to_canonical_string(&report).expect("reports always serialize")),
        ReportFormat::Csv => Err(ReportError::UnknownFormat("csv".into())),
    }
}

/// Escapes text for a Markdown table cell.
fn cell(text: &str) -> String {
    text.replace('\\', "\\\\")
        .replace('|', "\\|")
        .replace(['\r', '\n'], " ")
}

fn answer_label(answer: Option<AnswerValue>) -> &'static str {
    answer.map(AnswerValue::label).unwrap_or("Pending")
}

fn report_markdown(r: &AssessmentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Assessment report: {}", r.subject);
    out.push('\n');
    let _ = writeln!(out, "- Session: `{}`", r.session_id);
    let profile = if r.profile_name.is_empty() {
        r.profile_id.clone()
    } else {
        format!("{} (`{}`)", r.profile_name, r.profile_id)
    };
    let _ = writeln!(out, "- Profile: {profile}");
    let _ = writeln!(out, "- Bank version: {}", r.bank_version);
    let status = match r.status {
        SessionStatus::Open => "open",
        SessionStatus::Closed => "closed",
    };
    let _ = writeln!(out, "- Status: {status}");
    let _ = writeln!(out, "- Created: {}", r.created_at);
    let _ = writeln!(out, "- Updated: {}", r.updated_at);

    out.push_str("\n## Completion\n\n");
    let _ = writeln!(out, "Completion: {}/{}", r.completion.answered, r.completion.total);
    if r.completion.unanswered.is_empty() {
        out.push_str("\nAll profile questions are answered.\n");
    } else {
        out.push_str("\nUnanswered questions:\n\n");
        for id in &r.completion.unanswered {
            let text = r
                .answers
                .iter()
                .find(|a| &a.question_id == id)
                .map(|a| a.text.as_str())
                .unwrap_or("");
            let _ = writeln!(out, "- `{id}` {text}");
        }
    }

    out.push_str("\n## Principle risk ranking\n\n");
    if r.risks.is_empty() {
        out.push_str("No risks recorded.\n");
    } else {
        out.push_str("| Rank | Principle | High | Medium | Low |\n|---|---|---|---|---|\n");
        for (i, p) in r.principle_risks.iter().enumerate() {
            let _ = writeln!(
                out,
                "| {} | {} {} | {} | {} | {} |",
                i + 1,
                p.principle,
                p.principle.name(),
                p.high,
                p.medium,
                p.low
            );
        }
        out.push_str("\n### Risk register\n\n");
        out.push_str("| Risk | Category | Title | Owner | Impact | Probability | Score | Level |\n");
        out.push_str("|---|---|---|---|---|---|---|---|\n");
        for e in &r.risks {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                cell(&e.risk_id),
                cell(&e.category),
                cell(&e.title),
                cell(&e.owner),
                e.rating.impact,
                e.rating.probability,
                e.rating.score,
                e.rating.level
            );
        }
    }

    if let Some(c) = &r.compliance {
        let _ = write!(out, "\n## Compliance: {}\n\n", c.set_name);
        match &c.result {
            Some(res) => {
                let _ = writeln!(out, "Level: **{}**", res.headline());
                let _ = writeln!(
                    out,
                    "\nScore {} of {} applicable ({} mapped questions), threshold {}.",
                    res.score, res.max_score, res.n_total, res.threshold
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "Not scored: {} mapped question(s) unanswered.",
                    c.missing.len()
                );
            }
        }
        let mut groups: Vec<&str> = Vec::new();
        for o in &c.requirements {
            if !groups.contains(&o.requirement.category.as_str()) {
                groups.push(&o.requirement.category);
            }
        }
        for group in groups {
            let _ = write!(out, "\n### {group}\n\n");
            for o in c.requirements.iter().filter(|o| o.requirement.category == group) {
                let _ = writeln!(
                    out,
                    "- **{}** ({}) {}: {}",
                    o.requirement.id, o.requirement.document_section, o.requirement.description, o.status
                );
                for q in &o.questions {
                    let _ = writeln!(out, "  - `{}` {}: {}", q.question_id, q.text, answer_label(q.answer));
                }
            }
        }
    }

    out.push_str("\n## Answers\n\n");
    out.push_str("| Question | Principle | Level | Text | Answer | Evidence | Metric |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for a in &r.answers {
        let metric = a
            .metric_value
            .as_ref()
            .map(|m| format!("{} {}", m.value, m.unit))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            a.question_id,
            a.principle,
            a.level,
            cell(&a.text),
            answer_label(a.answer),
            cell(a.evidence.as_deref().unwrap_or("")),
            cell(metric.trim())
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceabilityRow {
    pub requirement_id: String,
    pub section: String,
    pub question_id: String,
    pub question_text: String,
    /// `Yes`, `No`, `NA`, or empty when unanswered.
    pub answer: String,
    pub evidence_present: bool,
    pub status: RequirementStatus,
}

pub const TRACEABILITY_HEADER: [&str; 6] = [
    "requirement_id",
    "section",
    "question_id",
    "answer",
    "evidence_present",
    "status",
];

/// One row per (requirement, mapped question), sorted by requirement id then
/// question id. Unanswered questions leave the answer empty and make the
/// requirement `Pending`.
pub fn traceability_rows(
    set: &RequirementSet,
    bank: &QuestionBank,
    session: &Session,
) -> Result<Vec<TraceabilityRow>, ReportError> {
    let coverage = coverage_check(&set.requirements, &set.mapping, bank);
    if !coverage.is_complete() {
        return Err(ComplianceError::CoverageGap {
            uncovered: coverage.uncovered,
            dangling: coverage.dangling,
        }
        .into());
    }
    let mut rows: Vec<TraceabilityRow> = requirement_outcomes(set, bank, session)
        .into_iter()
        .flat_map(|o| {
            let status = o.status;
            let req = o.requirement;
            o.questions.into_iter().map(move |q| TraceabilityRow {
                requirement_id: req.id.clone(),
                section: req.document_section.clone(),
                question_id: q.question_id.clone(),
                question_text: q.text,
                answer: q.answer.map(|a| a.label().to_string()).unwrap_or_default(),
                evidence_present: session
                    .answers
                    .get(&q.question_id)
                    .is_some_and(AnswerRecord::has_evidence),
                status,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.requirement_id, &a.question_id).cmp(&(&b.requirement_id, &b.question_id))
    });
    Ok(rows)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String, ReportError> {
    let bytes = writer.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn export_traceability_matrix(
    set: &RequirementSet,
    bank: &QuestionBank,
    session: &Session,
    format: ReportFormat,
) -> Result<String, ReportError> {
    let rows = traceability_rows(set, bank, session)?;
    match format {
        ReportFormat::Csv => {
            let mut w = csv_writer();
            w.write_record(TRACEABILITY_HEADER)?;
            for r in &rows {
                w.write_record([
                    r.requirement_id.as_str(),
                    r.section.as_str(),
                    r.question_id.as_str(),
                    r.answer.as_str(),
                    if r.evidence_present { "true" } else { "false" },
                    r.status.label(),
                ])?;
            }
            finish(w)
        }
        ReportFormat::Json => Ok(to_canonical_string(&rows).expect("rows always serialize")),
        ReportFormat::Markdown => {
            let mut out = String::from(
                "| Requirement | Section | Question | Text | Answer | Evidence | Status |\n|---|---|---|---|---|---|---|\n",
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    cell(&r.requirement_id),
                    cell(&r.section),
                    r.question_id,
                    cell(&r.question_text),
                    if r.answer.is_empty() { "Pending" } else { &r.answer },
                    if r.evidence_present { "yes" } else { "no" },
                    r.status
                );
            }
            Ok(out)
        }
    }
}

/// Reads a traceability CSV back into (requirement, section, question,
/// answer, evidence, status) tuples.
pub fn parse_traceability_csv(text: &str) -> Result<Vec<[String; 6]>, ReportError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(std::array::from_fn(|i| record.get(i).unwrap_or("").to_string()));
    }
    Ok(rows)
}

pub const RISK_REGISTER_HEADER: [&str; 12] = [
    "risk_id",
    "category",
    "title",
    "description",
    "causes",
    "existing_mitigations",
    "owner",
    "linked_question_ids",
    "impact",
    "probability",
    "score",
    "level",
];

pub fn export_risk_register(session: &Session, format: ReportFormat) -> Result<String, ReportError> {
    let entries = &session.risk_register;
    match format {
        ReportFormat::Csv => {
            let mut w = csv_writer();
            w.write_record(RISK_REGISTER_HEADER)?;
            for e in entries {
                w.write_record([
                    e.risk_id.clone(),
                    e.category.clone(),
                    e.title.clone(),
                    e.description.clone(),
                    e.causes.clone(),
                    e.existing_mitigations.clone(),
                    e.owner.clone(),
                    e.linked_question_ids.join(";"),
                    e.rating.impact.to_string(),
                    e.rating.probability.to_string(),
                    e.rating.score.to_string(),
                    e.rating.level.to_string(),
                ])?;
            }
            finish(w)
        }
        ReportFormat::Json => Ok(to_canonical_string(entries).expect("entries always serialize")),
        ReportFormat::Markdown => {
            let mut out = String::from("| Risk | Category | Title | Description | Causes | Mitigations | Owner | Questions | Impact | Probability | Score | Level |\n|---|---|---|---|---|---|---|---|---|---|---|---|\n");
            for e in entries {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                    cell(&e.risk_id),
                    cell(&e.category),
                    cell(&e.title),
                    cell(&e.description),
                    cell(&e.causes),
                    cell(&e.existing_mitigations),
                    cell(&e.owner),
                    e.linked_question_ids.join(", "),
                    e.rating.impact,
                    e.rating.probability,
                    e.rating.score,
                    e.rating.level
                );
            }
            Ok(out)
        }
    }
}

/// Reads a risk-register CSV back into entries, recomputing each rating.
pub fn parse_risk_register_csv(text: &str) -> Result<Vec<RiskRegisterEntry>, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| e.to_string())?;
        if r.len() != RISK_REGISTER_HEADER.len() {
            return Err(format!("expected {} fields, got {}", RISK_REGISTER_HEADER.len(), r.len()));
        }
        let num = |i: usize| r[i].parse::<i64>().map_err(|e| format!("{}: {e}", RISK_REGISTER_HEADER[i]));
        let rating = risk_rating(num(8)?, num(9)?).map_err(|e| e.to_string())?;
        if rating.score.to_string() != r[10] || rating.level.as_str() != &r[11] {
            return Err(format!("inconsistent rating for {}", &r[0]));
        }
        out.push(RiskRegisterEntry {
            risk_id: r[0].to_string(),
            category: r[1].to_string(),
            title: r[2].to_string(),
            description: r[3].to_string(),
            causes: r[4].to_string(),
            existing_mitigations: r[5].to_string(),
            owner: r[6].to_string(),
            linked_question_ids: if r[7].is_empty() {
                Vec::new()
            } else {
                r[7].split(';').map(str::to_string).collect()
            },
            rating,
        });
    }
    Ok(out)
}

/// Convenience: compliance outcome for a session under the usual threshold
/// precedence (explicit, session, profile, set, 70% default).
pub fn session_compliance(
    set: &RequirementSet,
    bank: &QuestionBank,
    session: &Session,
    explicit_threshold: Option<u32>,
) -> Result<crate::compliance::ComplianceReport, ComplianceError> {
    let profile_default = bank.profile(&session.profile_id).and_then(|p| p.threshold_default);
    compliance_report(
        set,
        bank,
        session,
        &Weights::uniform(),
        explicit_threshold,
        &[session.options.threshold, profile_default],
    )
}
