//! Bank interchange documents.
//!
//! The document nests questions under principle, category and sub-category,
//! so the placement fields of [`Question`] are implied by position and do not
//! appear in the text. Serialization is canonical (see [`crate::canonical`]).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::to_canonical_string;
use crate::model::{
    format_global_id, parse_global_id, validate, Gate, InternalId, LifecycleStage, Metric,
    PrincipleEntry, PrincipleId, Question, QuestionBank, QuestionLevel, RiskCategory,
    SourceFramework, SubCategory, Violation,
};
use crate::navigator::Profile;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("integrity error: {}", summarize_violations(.0))]
    Integrity(Vec<Violation>),
}

fn summarize_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.message.as_str()).collect::<Vec<_>>().join("; ")
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::Syntax { .. } => "SYNTAX",
            IngestError::Schema(_) => "SCHEMA",
            IngestError::Integrity(_) => "INTEGRITY",
        }
    }
}

impl From<serde_json::Error> for IngestError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => IngestError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
            Category::Data => IngestError::Schema(e.to_string()),
        }
    }
}

/// Parses JSON text into `T`, mapping failures onto syntax/schema errors.
pub(crate) fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, IngestError> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct QuestionDoc {
    pub global_id: String,
    pub text: String,
    pub level: QuestionLevel,
    pub stage: LifecycleStage,
    pub sources: Vec<String>,
    pub internal_ids: Vec<InternalId>,
    pub metric: Option<Metric>,
    pub evidence_required: bool,
    pub follow_ups: Vec<String>,
    pub gate: Gate,
}

impl QuestionDoc {
    fn from_question(q: &Question) -> Self {
        Self {
            global_id: q.global_id.clone(),
            text: q.text.clone(),
            level: q.level,
            stage: q.stage,
            sources: q.sources.clone(),
            internal_ids: q.internal_ids.clone(),
            metric: q.metric.clone(),
            evidence_required: q.evidence_required,
            follow_ups: q.follow_ups.clone(),
            gate: q.gate,
        }
    }

    fn into_question(self, principle: PrincipleId, category_id: &str, subcategory_id: &str) -> Question {
        Question {
            global_id: self.global_id,
            internal_ids: self.internal_ids,
            text: self.text,
            level: self.level,
            stage: self.stage,
            principle,
            category_id: category_id.to_string(),
            subcategory_id: subcategory_id.to_string(),
            sources: self.sources,
            metric: self.metric,
            evidence_required: self.evidence_required,
            follow_ups: self.follow_ups,
            gate: self.gate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubCategoryDoc {
    id: String,
    name: String,
    questions: Vec<QuestionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryDoc {
    id: String,
    name: String,
    subcategories: Vec<SubCategoryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrincipleDoc {
    id: PrincipleId,
    name: String,
    principle_question: QuestionDoc,
    categories: Vec<CategoryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BankDoc {
    version: String,
    sources: Vec<SourceFramework>,
    principles: Vec<PrincipleDoc>,
    profiles: Vec<Profile>,
}

impl BankDoc {
    fn from_bank(bank: &QuestionBank) -> Self {
        Self {
            version: bank.version.clone(),
            sources: bank.source_registry.clone(),
            principles: bank
                .principles
                .iter()
                .map(|e| PrincipleDoc {
                    id: e.principle,
                    name: e.principle.name().to_string(),
                    principle_question: QuestionDoc::from_question(&e.principle_question),
                    categories: e
                        .categories
                        .iter()
                        .map(|c| CategoryDoc {
                            id: c.id.clone(),
                            name: c.name.clone(),
                            subcategories: c
                                .subcategories
                                .iter()
                                .map(|s| SubCategoryDoc {
                                    id: s.id.clone(),
                                    name: s.name.clone(),
                                    questions: s.questions.iter().map(QuestionDoc::from_question).collect(),
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
            profiles: bank.profiles.clone(),
        }
    }

    fn into_bank(self) -> Result<QuestionBank, IngestError> {
        if let Some(p) = self.principles.iter().find(|p| p.name != p.id.name()) {
            return Err(IngestError::Schema(format!(
                "principle {} must be named {:?}, found {:?}",
                p.id,
                p.id.name(),
                p.name
            )));
        }
        Ok(QuestionBank {
            version: self.version,
            source_registry: self.sources,
            profiles: self.profiles,
            principles: self
                .principles
                .into_iter()
                .map(|p| {
                    let principle = p.id;
                    PrincipleEntry {
                        principle,
                        principle_question: p.principle_question.into_question(principle, "", ""),
                        categories: p
                            .categories
                            .into_iter()
                            .map(|c| {
                                let subcategories = c
                                    .subcategories
                                    .into_iter()
                                    .map(|s| SubCategory {
                                        questions: s
                                            .questions
                                            .into_iter()
                                            .map(|q| q.into_question(principle, &c.id, &s.id))
                                            .collect(),
                                        id: s.id,
                                        name: s.name,
                                    })
                                    .collect();
                                RiskCategory {
                                    id: c.id,
                                    name: c.name,
                                    principle,
                                    subcategories,
                                }
                            })
                            .collect(),
                    }
                })
                .collect(),
        })
    }
}

/// Parses a bank document without running structural validation.
pub fn parse_bank_unchecked(document: &str) -> Result<QuestionBank, IngestError> {
    let doc: BankDoc = from_json(document)?;
    doc.into_bank()
}

/// Parses a bank document; structural errors are rejected.
pub fn parse_bank(document: &str) -> Result<QuestionBank, IngestError> {
    let bank = parse_bank_unchecked(document)?;
    ensure_valid(&bank)?;
    Ok(bank)
}

fn ensure_valid(bank: &QuestionBank) -> Result<(), IngestError> {
    let report = validate(bank);
    if report.is_valid() {
        Ok(())
    } else {
        Err(IngestError::Integrity(report.errors().cloned().collect()))
    }
}

/// Canonical bank document text.
pub fn serialize_bank(bank: &QuestionBank) -> String {
    to_canonical_string(&BankDoc::from_bank(bank)).expect("bank documents always serialize")
}

/// A candidate question contributed by a new source framework.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateQuestion {
    /// Reference of the candidate inside its source, recorded as an internal id.
    #[serde(rename = "ref")]
    pub reference: String,
    pub principle: PrincipleId,
    pub category_id: String,
    pub subcategory_id: String,
    pub text: String,
    pub level: QuestionLevel,
    pub stage: LifecycleStage,
    pub metric: Option<Metric>,
    pub evidence_required: bool,
    pub follow_ups: Vec<String>,
    pub gate: Gate,
}

/// A curator-declared duplicate: the candidate `reference` is already covered
/// by `existing_global_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overlap {
    #[serde(rename = "ref")]
    pub reference: String,
    pub existing_global_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceExtension {
    pub source: SourceFramework,
    pub new_questions: Vec<CandidateQuestion>,
    pub overlap_map: Vec<Overlap>,
}

impl SourceExtension {
    pub fn candidate_count(&self) -> usize {
        self.new_questions.len() + self.overlap_map.len()
    }
}

pub fn parse_extension(document: &str) -> Result<SourceExtension, IngestError> {
    from_json(document)
}

pub fn serialize_extension(extension: &SourceExtension) -> String {
    to_canonical_string(extension).expect("extension documents always serialize")
}

fn integrity(path: &str, message: String) -> IngestError {
    IngestError::Integrity(vec![Violation {
        severity: crate::model::Severity::Error,
        kind: crate::model::ViolationKind::DanglingFollowUp,
        path: path.to_string(),
        message,
    }])
}

/// Adds a source's questions to the bank.
///
/// Overlapped candidates only extend the provenance of the existing question.
/// New candidates get fresh ids continuing their principle's sequence.
/// Candidates whose internal id is already present are skipped, so applying
/// an extension twice is the same as applying it once.
pub fn extend_bank(bank: &QuestionBank, extension: &SourceExtension) -> Result<QuestionBank, IngestError> {
    ensure_valid(bank)?;
    let code = extension.source.code.as_str();

    let mut refs = HashSet::new();
    for r in extension
        .new_questions
        .iter()
        .map(|c| &c.reference)
        .chain(extension.overlap_map.iter().map(|o| &o.reference))
    {
        if !refs.insert(r.as_str()) {
            return Err(IngestError::Schema(format!(
                "candidate {r} appears more than once in the extension"
            )));
        }
    }

    let mut out = bank.clone();
    if !out.source_registry.iter().any(|s| s.code == code) {
        out.source_registry.push(extension.source.clone());
    }

    for overlap in &extension.overlap_map {
        let q = out.find_question_mut(&overlap.existing_global_id).ok_or_else(|| {
            integrity(
                &format!("overlap_map[{}]", overlap.reference),
                format!("overlap target {} does not exist", overlap.existing_global_id),
            )
        })?;
        let iid = InternalId::new(code, &overlap.reference);
        if !q.internal_ids.contains(&iid) {
            q.internal_ids.push(iid);
        }
        if !q.has_source(code) {
            q.sources.push(code.to_string());
        }
    }

    let existing: HashSet<InternalId> = out
        .all_questions()
        .flat_map(|q| q.internal_ids.iter().cloned())
        .collect();
    for cand in &extension.new_questions {
        let iid = InternalId::new(code, &cand.reference);
        if existing.contains(&iid) {
            continue;
        }
        let seq = next_sequence(&out, cand.principle);
        let question = Question {
            global_id: format_global_id(cand.principle, seq),
            internal_ids: vec![iid],
            text: cand.text.clone(),
            level: cand.level,
            stage: cand.stage,
            principle: cand.principle,
            category_id: cand.category_id.clone(),
            subcategory_id: cand.subcategory_id.clone(),
            sources: vec![code.to_string()],
            metric: cand.metric.clone(),
            evidence_required: cand.evidence_required,
            follow_ups: cand.follow_ups.clone(),
            gate: cand.gate,
        };
        let sub = out
            .principles
            .iter_mut()
            .filter(|e| e.principle == cand.principle)
            .flat_map(|e| e.categories.iter_mut())
            .filter(|c| c.id == cand.category_id)
            .flat_map(|c| c.subcategories.iter_mut())
            .find(|s| s.id == cand.subcategory_id)
            .ok_or_else(|| {
                integrity(
                    &format!("new_questions[{}]", cand.reference),
                    format!(
                        "placement {}/{}/{} does not exist",
                        cand.principle, cand.category_id, cand.subcategory_id
                    ),
                )
            })?;
        sub.questions.push(question);
    }

    ensure_valid(&out)?;
    Ok(out)
}

fn next_sequence(bank: &QuestionBank, principle: PrincipleId) -> u32 {
    bank.all_questions()
        .filter_map(|q| parse_global_id(&q.global_id))
        .filter(|(p, _)| *p == principle)
        .map(|(_, seq)| seq)
        .max()
        .map_or(1, |m| m + 1)
}
