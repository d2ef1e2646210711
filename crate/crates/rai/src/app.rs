//! Engine state and operations shared by the CLI and the HTTP service.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rai_core::answer::{AnswerLookup, AnswerValue};
use rai_core::assessment::{
    create_session, new_session_id, risk_rating, AnswerRecord, AssessmentError, MetricValue,
    RiskRegisterEntry, Session, SessionOptions, SessionStore, SessionView, StoreError,
};
use rai_core::compliance::{
    compliance_report, parse_requirement_set, ComplianceError, ComplianceReport, RequirementSet,
    Weights,
};
use rai_core::ingest::{parse_bank, IngestError};
use rai_core::model::{ModelError, QuestionBank};
use rai_core::navigator::NavigatorError;
use rai_core::reporting::{session_compliance, ReportError};
use rai_core::seed;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// A failure with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppError {
    pub code: String,
    pub message: String,
    pub details: Value,
}

impl AppError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        AppError::new("IO", format!("{}: {e}", path.display())).with_details(json!({"path": path}))
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.code, self.message)
    }
}

impl std::error::Error for AppError {}

impl From<ComplianceError> for AppError {
    fn from(e: ComplianceError) -> Self {
        let details = match &e {
            ComplianceError::MissingAnswer(ids) => json!({ "missing": ids }),
            ComplianceError::InvalidThreshold { threshold, max } => {
                json!({ "threshold": threshold, "max": max })
            }
            ComplianceError::CoverageGap { uncovered, dangling } => {
                json!({ "uncovered": uncovered, "dangling": dangling })
            }
            _ => Value::Null,
        };
        AppError::new(e.code(), e.to_string()).with_details(details)
    }
}

impl From<AssessmentError> for AppError {
    fn from(e: AssessmentError) -> Self {
        let details = match &e {
            AssessmentError::EvidenceRequired(q) => json!({ "question_id": q }),
            AssessmentError::UnknownQuestion { profile, question } => {
                json!({ "profile": profile, "question_id": question })
            }
            AssessmentError::OutOfRange(r) => {
                json!({ "impact": r.impact, "probability": r.probability })
            }
            _ => Value::Null,
        };
        AppError::new(e.code(), e.to_string()).with_details(details)
    }
}

impl From<NavigatorError> for AppError {
    fn from(e: NavigatorError) -> Self {
        AppError::new(e.code(), e.to_string())
    }
}

impl From<StoreError> for AppError {
    fn from(e: StoreError) -> Self {
        let details = match &e {
            StoreError::NotFound(id) | StoreError::Contention(id) | StoreError::AlreadyExists(id) => {
                json!({ "session_id": id })
            }
            _ => Value::Null,
        };
        AppError::new(e.code(), e.to_string()).with_details(details)
    }
}

impl From<ReportError> for AppError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Compliance(c) => c.into(),
            ReportError::Assessment(a) => a.into(),
            other => AppError::new(other.code(), other.to_string()),
        }
    }
}

impl From<IngestError> for AppError {
    fn from(e: IngestError) -> Self {
        let details = match &e {
            IngestError::Syntax { line, column, .. } => json!({ "line": line, "column": column }),
            IngestError::Integrity(v) => json!({ "violations": v }),
            IngestError::Schema(_) => Value::Null,
        };
        AppError::new(e.code(), e.to_string()).with_details(details)
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        AppError::new(e.code(), e.to_string())
    }
}

pub fn read_file(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

/// An answer as submitted by a client.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerInput {
    pub question_id: String,
    pub value: AnswerValue,
    #[serde(default)]
    pub evidence: Option<String>,
    #[serde(default)]
    pub metric_value: Option<MetricValue>,
    #[serde(default)]
    pub answered_by: Option<String>,
}

/// A register entry as submitted by a client; the rating is computed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskInput {
    pub risk_id: String,
    pub category: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub causes: String,
    #[serde(default)]
    pub existing_mitigations: String,
    #[serde(default)]
    pub owner: String,
    #[serde(default)]
    pub linked_question_ids: Vec<String>,
    pub impact: i64,
    pub probability: i64,
}

impl RiskInput {
    pub fn into_entry(self) -> Result<RiskRegisterEntry, AppError> {
        let rating = risk_rating(self.impact, self.probability).map_err(AssessmentError::from)?;
        Ok(RiskRegisterEntry {
            risk_id: self.risk_id,
            category: self.category,
            title: self.title,
            description: self.description,
            causes: self.causes,
            existing_mitigations: self.existing_mitigations,
            owner: self.owner,
            linked_question_ids: self.linked_question_ids,
            rating,
        })
    }
}

/// The loaded bank and requirement sets. Immutable once built.
#[derive(Debug, Clone)]
pub struct Engine {
    pub bank: QuestionBank,
    pub sets: BTreeMap<String, RequirementSet>,
}

impl Engine {
    /// Loads a bank (the seed bank when `bank_path` is `None`) plus the
    /// requirement sets in `requirement_paths`. Seed requirement sets are
    /// included whenever they resolve against the bank; explicit files win
    /// on id clashes and must resolve.
    pub fn load(bank_path: Option<&Path>, requirement_paths: &[PathBuf]) -> Result<Self, AppError> {
        let bank = match bank_path {
            Some(p) => parse_bank(&read_file(p)?)?,
            None => seed::seed_bank(),
        };
        let mut sets: BTreeMap<String, RequirementSet> = seed::requirement_sets()
            .into_iter()
            .filter(|s| s.problems(&bank).is_empty())
            .map(|s| (s.id.clone(), s))
            .collect();
        for path in requirement_paths {
            let set = parse_requirement_set(&read_file(path)?)?;
            let problems = set.problems(&bank);
            if !problems.is_empty() {
                return Err(AppError::from(ComplianceError::InvalidSet(format!(
                    "{}: {}",
                    path.display(),
                    problems.join("; ")
                ))));
            }
            sets.insert(set.id.clone(), set);
        }
        Ok(Self { bank, sets })
    }

    pub fn seed() -> Self {
        Self::load(None, &[]).expect("seed data loads")
    }

    pub fn set(&self, id: &str) -> Result<&RequirementSet, AppError> {
        self.sets
            .get(id)
            .ok_or_else(|| ComplianceError::UnknownSet(id.to_string()).into())
    }

    /// The named set, or else the set sharing the profile's id.
    pub fn resolve_set(&self, set: Option<&str>, profile: Option<&str>) -> Result<&RequirementSet, AppError> {
        match (set, profile) {
            (Some(id), _) => self.set(id),
            (None, Some(p)) => self.set(p).map_err(|_| {
                AppError::new(
                    "UNKNOWN_SET",
                    format!("no requirement set is attached to profile {p}; pass a set id"),
                )
            }),
            (None, None) => Err(AppError::new("USAGE", "a requirement set or profile is required")),
        }
    }

    pub fn view(&self, session: Session) -> Result<SessionView, AppError> {
        Ok(SessionView::new(session, &self.bank)?)
    }

    pub fn create_session(
        &self,
        store: &SessionStore,
        profile: &str,
        subject: &str,
        options: SessionOptions,
        id: Option<String>,
        now: DateTime<Utc>,
    ) -> Result<Session, AppError> {
        let id = id.unwrap_or_else(new_session_id);
        let session = create_session(&self.bank, profile, subject, options, id, now)?;
        store.create(&session)?;
        Ok(session)
    }

    pub fn answer(
        &self,
        store: &SessionStore,
        id: &str,
        input: AnswerInput,
        default_by: &str,
        now: DateTime<Utc>,
    ) -> Result<Session, AppError> {
        let record = AnswerRecord {
            value: input.value,
            evidence: input.evidence,
            metric_value: input.metric_value,
            answered_by: input.answered_by.unwrap_or_else(|| default_by.to_string()),
            answered_at: now,
        };
        store
            .update(id, |s| {
                s.record_answer(&self.bank, &input.question_id, record)?;
                Ok::<_, AppError>(s.clone())
            })?
    }

    pub fn add_risk(
        &self,
        store: &SessionStore,
        id: &str,
        input: RiskInput,
        now: DateTime<Utc>,
    ) -> Result<Session, AppError> {
        let entry = input.into_entry()?;
        store
            .update(id, |s| {
                s.add_risk(&self.bank, entry, now)?;
                Ok::<_, AppError>(s.clone())
            })?
    }

    pub fn close(&self, store: &SessionStore, id: &str, now: DateTime<Utc>) -> Result<Session, AppError> {
        store
            .update(id, |s| {
                s.close(now)?;
                Ok::<_, AppError>(s.clone())
            })?
    }

    /// Compliance of a stored session. The set defaults to the one sharing
    /// the session's profile id.
    pub fn score_session(
        &self,
        session: &Session,
        set: Option<&str>,
        threshold: Option<u32>,
    ) -> Result<ComplianceReport, AppError> {
        let set = self.resolve_set(set, Some(&session.profile_id))?;
        Ok(session_compliance(set, &self.bank, session, threshold)?)
    }

    /// Compliance of a bare answer map, using the profile's default threshold
    /// when no explicit one is given.
    pub fn score_answers(
        &self,
        set: Option<&str>,
        profile: Option<&str>,
        answers: &impl AnswerLookup,
        threshold: Option<u32>,
    ) -> Result<ComplianceReport, AppError> {
        if let Some(p) = profile {
            if self.bank.profile(p).is_none() {
                return Err(NavigatorError::UnknownProfile(p.to_string()).into());
            }
        }
        let rs = self.resolve_set(set, profile)?;
        let profile_default = profile.and_then(|p| self.bank.profile(p)).and_then(|p| p.threshold_default);
        Ok(compliance_report(
            rs,
            &self.bank,
            answers,
            &Weights::uniform(),
            threshold,
            &[profile_default],
        )?)
    }
}
