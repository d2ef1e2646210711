//! Regulation requirements, requirement-to-question mappings and compliance
//! scoring.
//!
//! The score is the weighted count of Yes answers over the distinct mapped
//! questions; No scores 0 and NA drops the question from both the score and
//! the full-compliance target. The level compares the score with a threshold
//! `T`: below `T` is non-compliant, from `T` up to (not including) the
//! applicable maximum is partial, and reaching the maximum is full compliance.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::{AnswerLookup, AnswerValue};
use crate::canonical::to_canonical_string;
use crate::ingest::{from_json, IngestError};
use crate::model::{PrincipleId, QuestionBank};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplianceError {
    #[error("missing answers for {}", .0.join(", "))]
    MissingAnswer(Vec<String>),
    #[error("unknown question {0}")]
    UnknownQuestion(String),
    #[error("threshold {threshold} outside 1..={max}")]
    InvalidThreshold { threshold: u32, max: u32 },
    #[error("weight for {0} must be positive")]
    InvalidWeight(String),
    #[error("coverage gap: uncovered {uncovered:?}, dangling rows {dangling:?}")]
    CoverageGap {
        uncovered: Vec<String>,
        dangling: Vec<MappingRow>,
    },
    #[error("unknown requirement set: {0}")]
    UnknownSet(String),
    #[error("invalid requirement set: {0}")]
    InvalidSet(String),
}

impl ComplianceError {
    pub fn code(&self) -> &'static str {
        match self {
            ComplianceError::MissingAnswer(_) => "MISSING_ANSWER",
            ComplianceError::UnknownQuestion(_) => "UNKNOWN_QUESTION",
            ComplianceError::InvalidThreshold { .. } => "INVALID_THRESHOLD",
            ComplianceError::InvalidWeight(_) => "INVALID_WEIGHT",
            ComplianceError::CoverageGap { .. } => "COVERAGE_GAP",
            ComplianceError::UnknownSet(_) => "UNKNOWN_SET",
            ComplianceError::InvalidSet(_) => "INVALID_SET",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirement {
    pub id: String,
    pub category: String,
    pub description: String,
    #[serde(rename = "section")]
    pub document_section: String,
    pub principle: PrincipleId,
}

/// One (requirement id, question id) link, serialized as a two-element array.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MappingRow(pub String, pub String);

impl MappingRow {
    pub fn new(requirement_id: impl Into<String>, question_id: impl Into<String>) -> Self {
        Self(requirement_id.into(), question_id.into())
    }

    pub fn requirement_id(&self) -> &str {
        &self.0
    }

    pub fn question_id(&self) -> &str {
        &self.1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequirementMapping {
    pub rows: Vec<MappingRow>,
}

impl RequirementMapping {
    pub fn new(rows: Vec<MappingRow>) -> Self {
        Self { rows }
    }

    /// Distinct mapped question ids in first-appearance order.
    pub fn question_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.rows
            .iter()
            .map(MappingRow::question_id)
            .filter(|q| seen.insert(*q))
            .collect()
    }

    pub fn questions_for<'a>(&'a self, requirement_id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.requirement_id() == requirement_id)
            .map(MappingRow::question_id)
    }
}

/// Subsequent-question links: each question has at most one row.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FollowUpMapping {
    pub rows: Vec<(String, String)>,
}

impl FollowUpMapping {
    pub fn subsequent(&self, question_id: &str) -> Option<&str> {
        self.rows
            .iter()
            .find(|(q, _)| q == question_id)
            .map(|(_, next)| next.as_str())
    }
}

/// A regulation (or standard) clause list with its mapping onto the bank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementSet {
    pub id: String,
    pub name: String,
    pub requirements: Vec<Requirement>,
    pub mapping: RequirementMapping,
    pub followups: FollowUpMapping,
    #[serde(default)]
    pub default_threshold: Option<u32>,
}

impl RequirementSet {
    pub fn requirement(&self, id: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    /// Structural problems of the set against a bank: duplicate requirement
    /// ids, unresolved follow-up rows, questions with more than one
    /// subsequent-question row. Coverage is reported by [`coverage_check`].
    pub fn problems(&self, bank: &QuestionBank) -> Vec<String> {
        let mut out = Vec::new();
        let mut ids = HashSet::new();
        for r in &self.requirements {
            if !ids.insert(r.id.as_str()) {
                out.push(format!("duplicate requirement id {}", r.id));
            }
        }
        let index = bank.index();
        let mut sources = HashSet::new();
        for (q, next) in &self.followups.rows {
            for id in [q, next] {
                if !index.contains_key(id.as_str()) {
                    out.push(format!("follow-up row references unknown question {id}"));
                }
            }
            if !sources.insert(q.as_str()) {
                out.push(format!("question {q} has more than one subsequent-question row"));
            }
        }
        out
    }

    /// Restricts the set to the given requirement ids, keeping only their
    /// mapping rows.
    pub fn restrict(&self, requirement_ids: &[&str]) -> RequirementSet {
        let keep: HashSet<&str> = requirement_ids.iter().copied().collect();
        RequirementSet {
            id: self.id.clone(),
            name: self.name.clone(),
            requirements: self
                .requirements
                .iter()
                .filter(|r| keep.contains(r.id.as_str()))
                .cloned()
                .collect(),
            mapping: RequirementMapping::new(
                self.mapping
                    .rows
                    .iter()
                    .filter(|r| keep.contains(r.requirement_id()))
                    .cloned()
                    .collect(),
            ),
            followups: self.followups.clone(),
            default_threshold: self.default_threshold,
        }
    }
}

pub fn parse_requirement_set(document: &str) -> Result<RequirementSet, IngestError> {
    from_json(document)
}

pub fn serialize_requirement_set(set: &RequirementSet) -> String {
    to_canonical_string(set).expect("requirement sets always serialize")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub covered: Vec<String>,
    pub uncovered: Vec<String>,
    pub dangling: Vec<MappingRow>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.uncovered.is_empty() && self.dangling.is_empty()
    }
}

/// Which requirements have at least one mapping row resolving to a bank
/// question, and which rows reference unknown ids.
pub fn coverage_check(
    requirements: &[Requirement],
    mapping: &RequirementMapping,
    bank: &QuestionBank,
) -> CoverageReport {
    let index = bank.index();
    let known: HashSet<&str> = requirements.iter().map(|r| r.id.as_str()).collect();
    let mut resolved: HashSet<&str> = HashSet::new();
    let mut dangling = Vec::new();
    for row in &mapping.rows {
        if known.contains(row.requirement_id()) && index.contains_key(row.question_id()) {
            resolved.insert(row.requirement_id());
        } else {
            dangling.push(row.clone());
        }
    }
    let (covered, uncovered) = requirements
        .iter()
        .map(|r| r.id.clone())
        .partition(|id| resolved.contains(id.as_str()));
    CoverageReport {
        covered,
        uncovered,
        dangling,
    }
}

/// Per-question positive weights; unlisted questions weigh 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(pub BTreeMap<String, u32>);

impl Weights {
    pub fn uniform() -> Self {
        Self::default()
    }

    pub fn weight(&self, question_id: &str) -> u32 {
        self.0.get(question_id).copied().unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTally {
    /// Weighted sum of Yes answers.
    pub score: u32,
    /// Weighted sum over applicable questions; the full-compliance target.
    pub max_score: u32,
    pub n_total: u32,
    pub n_applicable: u32,
}

/// Weighted compliance score over the distinct mapped questions.
pub fn compliance_score(
    mapping: &RequirementMapping,
    answers: &impl AnswerLookup,
    weights: &Weights,
) -> Result<ScoreTally, ComplianceError> {
    let questions = mapping.question_ids();
    let mapped: HashSet<&str> = questions.iter().copied().collect();
    for (qid, w) in &weights.0 {
        if !mapped.contains(qid.as_str()) {
            return Err(ComplianceError::UnknownQuestion(qid.clone()));
        }
        if *w == 0 {
            return Err(ComplianceError::InvalidWeight(qid.clone()));
        }
    }
    let missing: Vec<String> = questions
        .iter()
        .filter(|q| answers.answer(q).is_none())
        .map(|q| q.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ComplianceError::MissingAnswer(missing));
    }

    let mut tally = ScoreTally {
        score: 0,
        max_score: 0,
        n_total: questions.len() as u32,
        n_applicable: 0,
    };
    for q in questions {
        let Some(points) = answers.answer(q).and_then(AnswerValue::score) else {
            continue;
        };
        let w = weights.weight(q);
        tally.n_applicable += 1;
        tally.max_score += w;
        tally.score += w * points;
    }
    Ok(tally)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplianceLevel {
    FullCompliance,
    PartialCompliance,
    NonCompliant,
    NotApplicable,
}

impl ComplianceLevel {
    /// Position in NonCompliant < PartialCompliance < FullCompliance.
    pub fn rank(self) -> Option<u8> {
        match self {
            ComplianceLevel::NonCompliant => Some(0),
            ComplianceLevel::PartialCompliance => Some(1),
            ComplianceLevel::FullCompliance => Some(2),
            ComplianceLevel::NotApplicable => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ComplianceLevel::FullCompliance => "Full Compliance",
            ComplianceLevel::PartialCompliance => "Partial Compliance",
            ComplianceLevel::NonCompliant => "Non-Compliant",
            ComplianceLevel::NotApplicable => "Not Applicable",
        }
    }
}

impl fmt::Display for ComplianceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Maps a score onto a compliance level. `max_score` is the applicable
/// maximum (the applicable question count under unit weights).
pub fn compliance_level(score: u32, threshold: u32, max_score: u32) -> Result<ComplianceLevel, ComplianceError> {
    if max_score == 0 {
        return Ok(ComplianceLevel::NotApplicable);
    }
    if threshold < 1 || threshold > max_score {
        return Err(ComplianceError::InvalidThreshold {
            threshold,
            max: max_score,
        });
    }
    Ok(if score >= max_score {
        ComplianceLevel::FullCompliance
    } else if score >= threshold {
        ComplianceLevel::PartialCompliance
    } else {
        ComplianceLevel::NonCompliant
    })
}

/// `ceil(0.7 * max_score)`.
pub fn default_threshold(max_score: u32) -> u32 {
    (7 * max_score).div_ceil(10)
}

/// Picks the threshold: an explicit value must lie in `1..=max_score`;
/// otherwise the first configured fallback (clamped into range) or the 70%
/// default applies.
pub fn resolve_threshold(
    explicit: Option<u32>,
    fallbacks: &[Option<u32>],
    max_score: u32,
) -> Result<u32, ComplianceError> {
    if let Some(t) = explicit {
        if max_score > 0 && (t < 1 || t > max_score) {
            return Err(ComplianceError::InvalidThreshold {
                threshold: t,
                max: max_score,
            });
        }
        return Ok(t);
    }
    let t = fallbacks
        .iter()
        .flatten()
        .next()
        .copied()
        .unwrap_or_else(|| default_threshold(max_score));
    Ok(t.clamp(1.min(max_score), max_score))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceResult {
    pub score: u32,
    pub max_score: u32,
    pub n_total: u32,
    pub n_applicable: u32,
    pub threshold: u32,
    pub weights: BTreeMap<String, u32>,
    pub level: ComplianceLevel,
}

impl ComplianceResult {
    /// `Full Compliance (21/21)`.
    pub fn headline(&self) -> String {
        format!("{} ({}/{})", self.level, self.score, self.max_score)
    }
}

/// Score and level in one step.
pub fn evaluate(
    mapping: &RequirementMapping,
    answers: &impl AnswerLookup,
    weights: &Weights,
    explicit_threshold: Option<u32>,
    fallback_thresholds: &[Option<u32>],
) -> Result<ComplianceResult, ComplianceError> {
    let tally = compliance_score(mapping, answers, weights)?;
    let threshold = resolve_threshold(explicit_threshold, fallback_thresholds, tally.max_score)?;
    let level = compliance_level(tally.score, threshold, tally.max_score)?;
    Ok(ComplianceResult {
        score: tally.score,
        max_score: tally.max_score,
        n_total: tally.n_total,
        n_applicable: tally.n_applicable,
        threshold,
        weights: mapping
            .question_ids()
            .into_iter()
            .map(|q| (q.to_string(), weights.weight(q)))
            .collect(),
        level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequirementStatus {
    Satisfied,
    Unsatisfied,
    PartiallySatisfied,
    NotApplicable,
    /// At least one mapped question has no answer yet.
    Pending,
}

impl RequirementStatus {
    pub fn label(self) -> &'static str {
        match self {
            RequirementStatus::Satisfied => "Satisfied",
            RequirementStatus::Unsatisfied => "Unsatisfied",
            RequirementStatus::PartiallySatisfied => "PartiallySatisfied",
            RequirementStatus::NotApplicable => "NotApplicable",
            RequirementStatus::Pending => "Pending",
        }
    }
}

impl fmt::Display for RequirementStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Status from the answers of a requirement's mapped questions.
pub fn requirement_status<I>(answers: I) -> RequirementStatus
where
    I: IntoIterator<Item = Option<AnswerValue>>,
{
    let mut yes = 0;
    let mut no = 0;
    let mut any = false;
    for a in answers {
        any = true;
        match a {
            None => return RequirementStatus::Pending,
            Some(AnswerValue::Yes) => yes += 1,
            Some(AnswerValue::No) => no += 1,
            Some(AnswerValue::NotApplicable) => {}
        }
    }
    match (any, yes, no) {
        (false, _, _) => RequirementStatus::Pending,
        (true, 0, 0) => RequirementStatus::NotApplicable,
        (true, _, 0) => RequirementStatus::Satisfied,
        (true, 0, _) => RequirementStatus::Unsatisfied,
        _ => RequirementStatus::PartiallySatisfied,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionOutcome {
    pub question_id: String,
    pub text: String,
    pub answer: Option<AnswerValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementOutcome {
    pub requirement: Requirement,
    pub status: RequirementStatus,
    pub questions: Vec<QuestionOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub set_id: String,
    pub set_name: String,
    pub requirements: Vec<RequirementOutcome>,
    pub result: ComplianceResult,
}

/// Per-requirement outcomes for a set, without requiring completeness.
pub fn requirement_outcomes(
    set: &RequirementSet,
    bank: &QuestionBank,
    answers: &impl AnswerLookup,
) -> Vec<RequirementOutcome> {
    let index = bank.index();
    set.requirements
        .iter()
        .map(|req| {
            let mut seen = BTreeSet::new();
            let questions: Vec<QuestionOutcome> = set
                .mapping
                .questions_for(&req.id)
                .filter(|q| seen.insert(*q))
                .map(|q| QuestionOutcome {
                    question_id: q.to_string(),
                    text: index.get(q).map(|x| x.text.clone()).unwrap_or_default(),
                    answer: answers.answer(q),
                })
                .collect();
            RequirementOutcome {
                requirement: req.clone(),
                status: requirement_status(questions.iter().map(|q| q.answer)),
                questions,
            }
        })
        .collect()
}

/// Scores a session against a requirement set. The set must be fully
/// covered and every mapped question answered.
pub fn compliance_report(
    set: &RequirementSet,
    bank: &QuestionBank,
    answers: &impl AnswerLookup,
    weights: &Weights,
    explicit_threshold: Option<u32>,
    fallback_thresholds: &[Option<u32>],
) -> Result<ComplianceReport, ComplianceError> {
    let coverage = coverage_check(&set.requirements, &set.mapping, bank);
    if !coverage.is_complete() {
        return Err(ComplianceError::CoverageGap {
            uncovered: coverage.uncovered,
            dangling: coverage.dangling,
        });
    }
    let mut fallbacks = fallback_thresholds.to_vec();
    fallbacks.push(set.default_threshold);
    let result = evaluate(&set.mapping, answers, weights, explicit_threshold, &fallbacks)?;
    Ok(ComplianceReport {
        set_id: set.id.clone(),
        set_name: set.name.clone(),
        requirements: requirement_outcomes(set, bank, answers),
        result,
    })
}
