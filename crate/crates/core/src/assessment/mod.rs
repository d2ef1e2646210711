//! Assessment sessions: answers with evidence and metric values, the risk
//! register, and an append-only audit log from which the answers can be
//! replayed.

mod risk;
pub mod store;

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::{AnswerLookup, AnswerValue};
use crate::model::QuestionBank;
use crate::navigator::{NavigationCursor, Navigator, NavigatorError, Profile};

pub use risk::{
    principle_risk_summary, rank_principles, risk_rating, OutOfRange, PrincipleRisk, RiskLevel,
    RiskRating, RiskRegisterEntry,
};
pub use store::{LoadedSession, SessionStore, StoreError, VersionMismatch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssessmentError {
    #[error(transparent)]
    Navigator(#[from] NavigatorError),
    #[error("question {question} is not part of profile {profile}")]
    UnknownQuestion { profile: String, question: String },
    #[error("question {0} requires evidence for a Yes answer")]
    EvidenceRequired(String),
    #[error("session {0} is closed")]
    SessionClosed(String),
    #[error("risk id {0} already exists in the register")]
    DuplicateRisk(String),
    #[error("unknown risk category {0}")]
    UnknownCategory(String),
    #[error("risk {risk} links unknown question {question}")]
    UnknownLinkedQuestion { risk: String, question: String },
    #[error(transparent)]
    OutOfRange(#[from] OutOfRange),
    #[error("metric value must be finite")]
    InvalidMetric,
    #[error("session profile {session} does not exist in bank {bank}")]
    ProfileMissing { session: String, bank: String },
}

impl AssessmentError {
    pub fn code(&self) -> &'static str {
        match self {
            AssessmentError::Navigator(e) => e.code(),
            AssessmentError::UnknownQuestion { .. } => "UNKNOWN_QUESTION",
            AssessmentError::EvidenceRequired(_) => "EVIDENCE_REQUIRED",
            AssessmentError::SessionClosed(_) => "SESSION_CLOSED",
            AssessmentError::DuplicateRisk(_) => "DUPLICATE_RISK",
            AssessmentError::UnknownCategory(_) => "UNKNOWN_CATEGORY",
            AssessmentError::UnknownLinkedQuestion { .. } => "UNKNOWN_QUESTION",
            AssessmentError::OutOfRange(_) => "OUT_OF_RANGE",
            AssessmentError::InvalidMetric => "INVALID_METRIC",
            AssessmentError::ProfileMissing { .. } => "UNKNOWN_PROFILE",
        }
    }
}

/// Source of timestamps, injectable for deterministic output.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

/// UTC ISO-8601 with second precision, as used in reports.
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionOptions {
    /// Compliance threshold used when scoring does not pass one explicitly.
    #[serde(default)]
    pub threshold: Option<u32>,
    /// When true, every Yes answer in the session needs evidence.
    #[serde(default)]
    pub evidence_required: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    #[default]
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricValue {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRecord {
    pub value: AnswerValue,
    #[serde(default)]
    pub evidence: Option<String>,
    #[serde(default)]
    pub metric_value: Option<MetricValue>,
    pub answered_by: String,
    pub answered_at: DateTime<Utc>,
}

impl AnswerRecord {
    pub fn new(value: AnswerValue, answered_by: impl Into<String>, answered_at: DateTime<Utc>) -> Self {
        Self {
            value,
            evidence: None,
            metric_value: None,
            answered_by: answered_by.into(),
            answered_at,
        }
    }

    pub fn with_evidence(mut self, evidence: impl Into<String>) -> Self {
        self.evidence = Some(evidence.into());
        self
    }

    pub fn with_metric(mut self, value: f64, unit: impl Into<String>) -> Self {
        self.metric_value = Some(MetricValue {
            value,
            unit: unit.into(),
        });
        self
    }

    pub fn has_evidence(&self) -> bool {
        self.evidence.as_deref().is_some_and(|e| !e.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AuditEvent {
    SessionCreated {
        at: DateTime<Utc>,
        profile_id: String,
        subject: String,
    },
    AnswerRecorded {
        at: DateTime<Utc>,
        question_id: String,
        record: AnswerRecord,
        /// The overwritten answer, if any.
        previous: Option<AnswerRecord>,
    },
    RiskAdded {
        at: DateTime<Utc>,
        risk_id: String,
    },
    SessionClosed {
        at: DateTime<Utc>,
    },
}

impl AuditEvent {
    pub fn at(&self) -> DateTime<Utc> {
        match self {
            AuditEvent::SessionCreated { at, .. }
            | AuditEvent::AnswerRecorded { at, .. }
            | AuditEvent::RiskAdded { at, .. }
            | AuditEvent::SessionClosed { at } => *at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub session_id: String,
    pub bank_version: String,
    pub profile_id: String,
    pub subject: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    #[serde(default)]
    pub options: SessionOptions,
    #[serde(default)]
    pub status: SessionStatus,
    pub answers: BTreeMap<String, AnswerRecord>,
    pub risk_register: Vec<RiskRegisterEntry>,
    pub audit_log: Vec<AuditEvent>,
}

impl AnswerLookup for Session {
    fn answer(&self, question_id: &str) -> Option<AnswerValue> {
        self.answers.get(question_id).map(|r| r.value)
    }
}

impl AnswerLookup for BTreeMap<String, AnswerRecord> {
    fn answer(&self, question_id: &str) -> Option<AnswerValue> {
        self.get(question_id).map(|r| r.value)
    }
}

pub fn new_session_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

/// Starts an empty session over `profile_id`.
pub fn create_session(
    bank: &QuestionBank,
    profile_id: &str,
    subject: &str,
    options: SessionOptions,
    session_id: String,
    now: DateTime<Utc>,
) -> Result<Session, AssessmentError> {
    if bank.profile(profile_id).is_none() {
        return Err(NavigatorError::UnknownProfile(profile_id.to_string()).into());
    }
    Ok(Session {
        session_id,
        bank_version: bank.version.clone(),
        profile_id: profile_id.to_string(),
        subject: subject.to_string(),
        created_at: now,
        updated_at: now,
        options,
        status: SessionStatus::Open,
        answers: BTreeMap::new(),
        risk_register: Vec::new(),
        audit_log: vec![AuditEvent::SessionCreated {
            at: now,
            profile_id: profile_id.to_string(),
            subject: subject.to_string(),
        }],
    })
}

impl Session {
    fn profile<'b>(&self, bank: &'b QuestionBank) -> Result<&'b Profile, AssessmentError> {
        bank.profile(&self.profile_id).ok_or_else(|| AssessmentError::ProfileMissing {
            session: self.profile_id.clone(),
            bank: bank.version.clone(),
        })
    }

    fn ensure_open(&self) -> Result<(), AssessmentError> {
        match self.status {
            SessionStatus::Open => Ok(()),
            SessionStatus::Closed => Err(AssessmentError::SessionClosed(self.session_id.clone())),
        }
    }

    /// Whether a Yes answer to `question_id` needs evidence in this session.
    pub fn evidence_required(&self, bank: &QuestionBank, question_id: &str) -> bool {
        let flag = bank
            .find_question(question_id)
            .map(|q| q.evidence_required)
            .unwrap_or(false);
        let profile = bank
            .profile(&self.profile_id)
            .and_then(|p| p.evidence_required_override)
            .unwrap_or(false);
        flag || profile || self.options.evidence_required.unwrap_or(false)
    }

    /// Records (or overwrites) an answer and appends one audit event.
    pub fn record_answer(
        &mut self,
        bank: &QuestionBank,
        question_id: &str,
        record: AnswerRecord,
    ) -> Result<(), AssessmentError> {
        self.ensure_open()?;
        let profile = self.profile(bank)?;
        if !profile.question_ids.iter().any(|q| q == question_id) {
            return Err(AssessmentError::UnknownQuestion {
                profile: self.profile_id.clone(),
                question: question_id.to_string(),
            });
        }
        if record.metric_value.as_ref().is_some_and(|m| !m.value.is_finite()) {
            return Err(AssessmentError::InvalidMetric);
        }
        if record.value == AnswerValue::Yes
            && !record.has_evidence()
            && self.evidence_required(bank, question_id)
        {
            return Err(AssessmentError::EvidenceRequired(question_id.to_string()));
        }
        let at = record.answered_at;
        let previous = self.answers.insert(question_id.to_string(), record.clone());
        self.audit_log.push(AuditEvent::AnswerRecorded {
            at,
            question_id: question_id.to_string(),
            record,
            previous,
        });
        self.touch(at);
        Ok(())
    }

    /// Appends a register entry after checking its id, category and links.
    pub fn add_risk(
        &mut self,
        bank: &QuestionBank,
        entry: RiskRegisterEntry,
        now: DateTime<Utc>,
    ) -> Result<(), AssessmentError> {
        self.ensure_open()?;
        if self.risk_register.iter().any(|r| r.risk_id == entry.risk_id) {
            return Err(AssessmentError::DuplicateRisk(entry.risk_id));
        }
        if bank.category(&entry.category).is_none() {
            return Err(AssessmentError::UnknownCategory(entry.category));
        }
        if let Some(q) = entry
            .linked_question_ids
            .iter()
            .find(|q| bank.find_question(q).is_err())
        {
            return Err(AssessmentError::UnknownLinkedQuestion {
                risk: entry.risk_id.clone(),
                question: q.clone(),
            });
        }
        self.audit_log.push(AuditEvent::RiskAdded {
            at: now,
            risk_id: entry.risk_id.clone(),
        });
        self.risk_register.push(entry);
        self.touch(now);
        Ok(())
    }

    pub fn close(&mut self, now: DateTime<Utc>) -> Result<(), AssessmentError> {
        self.ensure_open()?;
        self.status = SessionStatus::Closed;
        self.audit_log.push(AuditEvent::SessionClosed { at: now });
        self.touch(now);
        Ok(())
    }

    fn touch(&mut self, at: DateTime<Utc>) {
        if at > self.updated_at {
            self.updated_at = at;
        }
    }

    pub fn completion(&self, bank: &QuestionBank) -> Result<Completion, AssessmentError> {
        let profile = self.profile(bank)?;
        let unanswered: Vec<String> = profile
            .question_ids
            .iter()
            .filter(|q| !self.answers.contains_key(*q))
            .cloned()
            .collect();
        Ok(Completion {
            answered: profile.question_ids.len() - unanswered.len(),
            total: profile.question_ids.len(),
            unanswered,
        })
    }

    pub fn is_complete(&self, bank: &QuestionBank) -> Result<bool, AssessmentError> {
        Ok(self.completion(bank)?.unanswered.is_empty())
    }

    pub fn cursor(&self, bank: &QuestionBank) -> Result<NavigationCursor, AssessmentError> {
        let mut cursor = NavigationCursor::new(self.profile_id.clone());
        cursor.refresh(bank, self)?;
        Ok(cursor)
    }

    /// Up to `k` questions to ask next.
    pub fn next_question_ids(&self, bank: &QuestionBank, k: usize) -> Result<Vec<String>, AssessmentError> {
        let nav = Navigator::new(bank, &self.profile_id)?;
        let answered = self.answers.keys().cloned().collect();
        Ok(nav
            .eligible(self, &answered)
            .into_iter()
            .take(k)
            .map(|q| q.global_id.clone())
            .collect())
    }

    pub fn answer_events(&self) -> usize {
        self.audit_log
            .iter()
            .filter(|e| matches!(e, AuditEvent::AnswerRecorded { .. }))
            .count()
    }
}

/// Rebuilds the answers map from the audit log.
pub fn replay_answers(log: &[AuditEvent]) -> BTreeMap<String, AnswerRecord> {
    let mut answers = BTreeMap::new();
    for event in log {
        if let AuditEvent::AnswerRecorded {
            question_id, record, ..
        } = event
        {
            answers.insert(question_id.clone(), record.clone());
        }
    }
    answers
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub answered: usize,
    pub total: usize,
    /// Profile questions without an answer, in profile order.
    pub unanswered: Vec<String>,
}

impl Completion {
    pub fn is_complete(&self) -> bool {
        self.unanswered.is_empty()
    }
}

/// A session together with its progress figures, as served to clients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    #[serde(flatten)]
    pub session: Session,
    pub open: usize,
    pub answered: usize,
    pub total: usize,
    pub complete: bool,
    /// Questions eligible to ask now.
    pub next: Vec<String>,
}

impl SessionView {
    pub fn new(session: Session, bank: &QuestionBank) -> Result<Self, AssessmentError> {
        let completion = session.completion(bank)?;
        let next = session.next_question_ids(bank, usize::MAX)?;
        Ok(Self {
            open: completion.unanswered.len(),
            answered: completion.answered,
            total: completion.total,
            complete: completion.is_complete(),
            next,
            session,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{format_global_id, Metric, PrincipleId};
    use crate::test_support::{insert, minimal_bank, sub_question};
    use chrono::TimeZone;

    fn t(s: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + s, 0).unwrap()
    }

    fn bank() -> QuestionBank {
        let mut bank = minimal_bank();
        for seq in 1..=3 {
            let mut q = sub_question(PrincipleId::P8, seq, 1);
            if seq == 2 {
                q.evidence_required = true;
                q.metric = Some(Metric {
                    name: "risk metrics".into(),
                    description: "count".into(),
                    unit: "count".into(),
                });
            }
            insert(&mut bank, q);
        }
        bank.profiles.push(Profile {
            id: "p".into(),
            name: "P".into(),
            description: String::new(),
            question_ids: (1..=3).map(|s| format_global_id(PrincipleId::P8, s)).collect(),
            evidence_required_override: None,
            threshold_default: None,
        });
        bank
    }

    fn session(bank: &QuestionBank) -> Session {
        create_session(bank, "p", "demo", SessionOptions::default(), "s1".into(), t(0)).unwrap()
    }

    #[test]
    fn unknown_profile() {
        let err = create_session(&bank(), "x", "demo", SessionOptions::default(), "s".into(), t(0));
        assert_eq!(err.unwrap_err().code(), "UNKNOWN_PROFILE");
    }

    #[test]
    fn evidence_rule() {
        let bank = bank();
        let mut s = session(&bank);
        let yes = AnswerRecord::new(AnswerValue::Yes, "a", t(1));
        let err = s.record_answer(&bank, "QB-P8-002", yes.clone()).unwrap_err();
        assert_eq!(err, AssessmentError::EvidenceRequired("QB-P8-002".into()));
        let blank = yes.clone().with_evidence("   ");
        assert!(s.record_answer(&bank, "QB-P8-002", blank).is_err());
        let ok = yes.with_evidence("risk log v3").with_metric(14.0, "count");
        s.record_answer(&bank, "QB-P8-002", ok).unwrap();
        s.record_answer(&bank, "QB-P8-001", AnswerRecord::new(AnswerValue::Yes, "a", t(2)))
            .unwrap();
        let no = AnswerRecord::new(AnswerValue::No, "a", t(3));
        s.record_answer(&bank, "QB-P8-003", no).unwrap();
    }

    #[test]
    fn overwrite_keeps_previous() {
        let bank = bank();
        let mut s = session(&bank);
        s.record_answer(&bank, "QB-P8-001", AnswerRecord::new(AnswerValue::No, "a", t(1)))
            .unwrap();
        let before = s.audit_log.len();
        s.record_answer(&bank, "QB-P8-001", AnswerRecord::new(AnswerValue::Yes, "b", t(2)))
            .unwrap();
        assert_eq!(s.audit_log.len(), before + 1);
        match s.audit_log.last().unwrap() {
            AuditEvent::AnswerRecorded { previous: Some(p), .. } => assert_eq!(p.value, AnswerValue::No),
            other => panic!("{other:?}"),
        }
        assert_eq!(replay_answers(&s.audit_log), s.answers);
        assert_eq!(s.updated_at, t(2));
    }

    #[test]
    fn profile_and_closure_rules() {
        let bank = bank();
        let mut s = session(&bank);
        let rec = AnswerRecord::new(AnswerValue::No, "a", t(1));
        assert_eq!(
            s.record_answer(&bank, "QB-P1-000", rec.clone()).unwrap_err().code(),
            "UNKNOWN_QUESTION"
        );
        s.close(t(2)).unwrap();
        assert_eq!(
            s.record_answer(&bank, "QB-P8-001", rec).unwrap_err(),
            AssessmentError::SessionClosed("s1".into())
        );
    }

    #[test]
    fn completion_is_monotone() {
        let bank = bank();
        let mut s = session(&bank);
        assert_eq!(s.completion(&bank).unwrap().answered, 0);
        for (i, seq) in [1, 3, 1].iter().enumerate() {
            let id = format_global_id(PrincipleId::P8, *seq);
            s.record_answer(&bank, &id, AnswerRecord::new(AnswerValue::No, "a", t(i as i64)))
                .unwrap();
        }
        let c = s.completion(&bank).unwrap();
        assert_eq!((c.answered, c.total), (2, 3));
        assert_eq!(c.unanswered, vec!["QB-P8-002"]);
        assert!(!s.is_complete(&bank).unwrap());
    }

    #[test]
    fn profile_override_requires_evidence_everywhere() {
        let mut bank = bank();
        bank.profiles[0].evidence_required_override = Some(true);
        let s = session(&bank);
        assert!(s.evidence_required(&bank, "QB-P8-001"));
    }

    #[test]
    fn risk_register_rules() {
        let bank = bank();
        let mut s = session(&bank);
        let entry = RiskRegisterEntry {
            risk_id: "R1".into(),
            category: "p8-cat".into(),
            title: "t".into(),
            description: "d".into(),
            causes: "c".into(),
            existing_mitigations: "m".into(),
            owner: "o".into(),
            linked_question_ids: vec!["QB-P8-001".into()],
            rating: risk_rating(3, 2).unwrap(),
        };
        s.add_risk(&bank, entry.clone(), t(1)).unwrap();
        assert_eq!(s.add_risk(&bank, entry.clone(), t(2)).unwrap_err().code(), "DUPLICATE_RISK");
        let mut other = entry.clone();
        other.risk_id = "R2".into();
        other.category = "nope".into();
        assert_eq!(s.add_risk(&bank, other, t(2)).unwrap_err().code(), "UNKNOWN_CATEGORY");
        let summary = principle_risk_summary(&s, &bank);
        assert_eq!(summary[7].high, 1);
        assert_eq!(summary.iter().map(PrincipleRisk::total).sum::<u32>(), 1);
    }
}
