//! Question-bank domain model.
//!
//! A bank is a four-level hierarchy: eight ethics principles, each with one
//! principle question and a list of risk categories; categories hold
//! sub-categories; sub-categories hold the sub-questions. Follow-up links
//! between questions form a DAG used for tiered navigation.
//!
//! Banks are plain values. Nothing here enforces the structural rules at
//! construction time; [`validate`] reports violations as data so that broken
//! documents can still be loaded and inspected.

mod summary;
mod validate;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::navigator::Profile;

pub use summary::{summarize, BankSummary, PrincipleRow, SummaryTotals};
pub use validate::{validate, Severity, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("question not found: {0}")]
    NotFound(String),
    #[error("invalid bank: {0} structural error(s)")]
    InvalidBank(usize),
    #[error("unknown principle: {0}")]
    UnknownPrinciple(String),
    #[error("question level must be 1, 2 or 3 (got {0})")]
    InvalidLevel(i64),
    #[error("unknown lifecycle stage: {0}")]
    UnknownStage(String),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::NotFound(_) => "NOT_FOUND",
            ModelError::InvalidBank(_) => "INVALID_BANK",
            ModelError::UnknownPrinciple(_) => "UNKNOWN_PRINCIPLE",
            ModelError::InvalidLevel(_) => "INVALID_LEVEL",
            ModelError::UnknownStage(_) => "UNKNOWN_STAGE",
        }
    }
}

/// One of the eight AI ethics principles, ordered P1..P8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PrincipleId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
}

impl PrincipleId {
    pub const ALL: [PrincipleId; 8] = [
        PrincipleId::P1,
        PrincipleId::P2,
        PrincipleId::P3,
        PrincipleId::P4,
        PrincipleId::P5,
        PrincipleId::P6,
        PrincipleId::P7,
        PrincipleId::P8,
    ];

    /// 1-based principle number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            PrincipleId::P1 => "Human, Societal and Environmental Wellbeing",
            PrincipleId::P2 => "Human-centred Values",
            PrincipleId::P3 => "Fairness",
            PrincipleId::P4 => "Privacy and Security",
            PrincipleId::P5 => "Reliability and Safety",
            PrincipleId::P6 => "Transparency and Explainability",
            PrincipleId::P7 => "Contestability",
            PrincipleId::P8 => "Accountability",
        }
    }

    pub fn as_str(self) -> &'static str {
        ["P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8"][self as usize]
    }
}

impl fmt::Display for PrincipleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrincipleId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        t.strip_prefix(['P', 'p'])
            .and_then(|n| n.parse::<u8>().ok())
            .and_then(PrincipleId::from_number)
            .ok_or_else(|| ModelError::UnknownPrinciple(s.to_string()))
    }
}

/// Question tier: 1 for executives, 2 for managers, 3 for practitioners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct QuestionLevel(u8);

impl QuestionLevel {
    pub const ONE: QuestionLevel = QuestionLevel(1);
    pub const TWO: QuestionLevel = QuestionLevel(2);
    pub const THREE: QuestionLevel = QuestionLevel(3);
    pub const ALL: [QuestionLevel; 3] = [Self::ONE, Self::TWO, Self::THREE];

    pub fn new(level: i64) -> Result<Self, ModelError> {
        match level {
            1..=3 => Ok(QuestionLevel(level as u8)),
            other => Err(ModelError::InvalidLevel(other)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<i64> for QuestionLevel {
    type Error = ModelError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        QuestionLevel::new(v)
    }
}

impl From<QuestionLevel> for u8 {
    fn from(l: QuestionLevel) -> u8 {
        l.0
    }
}

impl fmt::Display for QuestionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// AI system lifecycle stage, ordered as the lifecycle runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifecycleStage {
    Planning,
    Requirements,
    Design,
    Implementation,
    Testing,
    Deployment,
    Operation,
}

impl LifecycleStage {
    pub const ALL: [LifecycleStage; 7] = [
        LifecycleStage::Planning,
        LifecycleStage::Requirements,
        LifecycleStage::Design,
        LifecycleStage::Implementation,
        LifecycleStage::Testing,
        LifecycleStage::Deployment,
        LifecycleStage::Operation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LifecycleStage::Planning => "planning",
            LifecycleStage::Requirements => "requirements",
            LifecycleStage::Design => "design",
            LifecycleStage::Implementation => "implementation",
            LifecycleStage::Testing => "testing",
            LifecycleStage::Deployment => "deployment",
            LifecycleStage::Operation => "operation",
        }
    }
}

impl fmt::Display for LifecycleStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LifecycleStage {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        LifecycleStage::ALL
            .into_iter()
            .find(|st| st.as_str() == lower)
            .ok_or_else(|| ModelError::UnknownStage(s.to_string()))
    }
}

/// A reference framework a question was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceFramework {
    pub code: String,
    pub name: String,
}

impl SourceFramework {
    pub fn new(code: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            name: name.into(),
        }
    }

    /// The seven frameworks the bank was built from.
    pub fn seed_registry() -> Vec<SourceFramework> {
        vec![
            Self::new("NIST", "NIST AI Risk Management Framework"),
            Self::new("EU", "EU Trustworthy AI Assessment List"),
            Self::new("AIA", "Canada Algorithmic Impact Assessment"),
            Self::new("NSW", "NSW AI Assurance Framework"),
            Self::new("MS", "Microsoft Responsible AI Impact Assessment Guide"),
            Self::new("EU-Act", "EU AI Act"),
            Self::new("ISO", "ISO/IEC 42001:2023 AI management system"),
        ]
    }
}

/// Provenance of a question in one source framework.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InternalId {
    pub source: String,
    #[serde(rename = "ref")]
    pub reference: String,
}

impl InternalId {
    pub fn new(source: impl Into<String>, reference: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            reference: reference.into(),
        }
    }
}

/// Formats the bank-wide identifier `QB-P<n>-<seq>`.
pub fn format_global_id(principle: PrincipleId, seq: u32) -> String {
    format!("QB-P{}-{:03}", principle.number(), seq)
}

/// Splits `QB-P<n>-<seq>` into its principle and sequence number.
pub fn parse_global_id(id: &str) -> Option<(PrincipleId, u32)> {
    let rest = id.strip_prefix("QB-P")?;
    let (p, seq) = rest.split_once('-')?;
    if p.len() != 1 || seq.len() < 3 || !seq.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let principle = PrincipleId::from_number(p.parse().ok()?)?;
    Some((principle, seq.parse().ok()?))
}

/// Quantitative indicator attached to a question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    pub name: String,
    pub description: String,
    pub unit: String,
}

/// When a follow-up becomes eligible, relative to its parent's answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    #[default]
    Always,
    OnNo,
    OnYes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub global_id: String,
    pub internal_ids: Vec<InternalId>,
    pub text: String,
    pub level: QuestionLevel,
    pub stage: LifecycleStage,
    pub principle: PrincipleId,
    /// Empty for principle questions.
    pub category_id: String,
    /// Empty for principle questions.
    pub subcategory_id: String,
    pub sources: Vec<String>,
    pub metric: Option<Metric>,
    pub evidence_required: bool,
    pub follow_ups: Vec<String>,
    pub gate: Gate,
}

impl Question {
    pub fn is_principle_question(&self) -> bool {
        self.category_id.is_empty() && self.subcategory_id.is_empty()
    }

    pub fn has_source(&self, code: &str) -> bool {
        self.sources.iter().any(|s| s == code)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCategory {
    pub id: String,
    pub name: String,
    pub questions: Vec<Question>,
}

impl SubCategory {
    pub fn question_ids(&self) -> impl Iterator<Item = &str> {
        self.questions.iter().map(|q| q.global_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCategory {
    pub id: String,
    pub name: String,
    pub principle: PrincipleId,
    pub subcategories: Vec<SubCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipleEntry {
    pub principle: PrincipleId,
    pub principle_question: Question,
    pub categories: Vec<RiskCategory>,
}

impl PrincipleEntry {
    pub fn subquestions(&self) -> impl Iterator<Item = &Question> {
        self.categories
            .iter()
            .flat_map(|c| c.subcategories.iter())
            .flat_map(|s| s.questions.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionBank {
    pub version: String,
    pub principles: Vec<PrincipleEntry>,
    pub profiles: Vec<Profile>,
    pub source_registry: Vec<SourceFramework>,
}

impl QuestionBank {
    /// Every sub-question in hierarchy order (principle, category, sub-category).
    pub fn subquestions(&self) -> impl Iterator<Item = &Question> {
        self.principles.iter().flat_map(|p| p.subquestions())
    }

    /// Principle questions followed by all sub-questions.
    pub fn all_questions(&self) -> impl Iterator<Item = &Question> {
        self.principles
            .iter()
            .map(|p| &p.principle_question)
            .chain(self.subquestions())
    }

    pub fn find_question(&self, global_id: &str) -> Result<&Question, ModelError> {
        self.all_questions()
            .find(|q| q.global_id == global_id)
            .ok_or_else(|| ModelError::NotFound(global_id.to_string()))
    }

    pub(crate) fn find_question_mut(&mut self, global_id: &str) -> Option<&mut Question> {
        for entry in &mut self.principles {
            if entry.principle_question.global_id == global_id {
                return Some(&mut entry.principle_question);
            }
            for q in entry
                .categories
                .iter_mut()
                .flat_map(|c| c.subcategories.iter_mut())
                .flat_map(|s| s.questions.iter_mut())
            {
                if q.global_id == global_id {
                    return Some(q);
                }
            }
        }
        None
    }

    pub fn entry(&self, principle: PrincipleId) -> Option<&PrincipleEntry> {
        self.principles.iter().find(|e| e.principle == principle)
    }

    /// The principle question of `principle`.
    ///
    /// Panics if the bank has no entry for the principle; call only on banks
    /// that passed [`validate`].
    pub fn principle_question(&self, principle: PrincipleId) -> &Question {
        &self
            .entry(principle)
            .unwrap_or_else(|| panic!("bank has no entry for {principle}"))
            .principle_question
    }

    pub fn category(&self, category_id: &str) -> Option<&RiskCategory> {
        self.principles
            .iter()
            .flat_map(|p| p.categories.iter())
            .find(|c| c.id == category_id)
    }

    pub fn profile(&self, id: &str) -> Option<&Profile> {
        self.profiles.iter().find(|p| p.id == id)
    }

    /// Lookup table over every question in the bank. Later duplicates are
    /// ignored.
    pub fn index(&self) -> HashMap<&str, &Question> {
        let mut map = HashMap::new();
        for q in self.all_questions() {
            map.entry(q.global_id.as_str()).or_insert(q);
        }
        map
    }

    pub fn subquestion_count(&self) -> usize {
        self.subquestions().count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principle_ids_are_ordered_and_named() {
        assert_eq!(PrincipleId::ALL.len(), 8);
        assert!(PrincipleId::ALL.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(PrincipleId::P7.name(), "Contestability");
        assert_eq!("p3".parse::<PrincipleId>().unwrap(), PrincipleId::P3);
        assert!("P9".parse::<PrincipleId>().is_err());
        assert!("P0".parse::<PrincipleId>().is_err());
    }

    #[test]
    fn level_rejects_out_of_range() {
        assert!(QuestionLevel::new(0).is_err());
        assert!(QuestionLevel::new(4).is_err());
        assert_eq!(QuestionLevel::new(2).unwrap().get(), 2);
        let parsed: Result<QuestionLevel, _> = serde_json::from_str("5");
        assert!(parsed.is_err());
    }

    #[test]
    fn stages_follow_lifecycle() {
        assert!(LifecycleStage::ALL.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            "Deployment".parse::<LifecycleStage>().unwrap(),
            LifecycleStage::Deployment
        );
    }

    #[test]
    fn global_id_format_round_trips() {
        let id = format_global_id(PrincipleId::P4, 7);
        assert_eq!(id, "QB-P4-007");
        assert_eq!(parse_global_id(&id), Some((PrincipleId::P4, 7)));
        assert_eq!(parse_global_id("QB-P9-001"), None);
        assert_eq!(parse_global_id("QB-P1-1"), None);
        assert_eq!(parse_global_id("QB-P1-1234"), Some((PrincipleId::P1, 1234)));
    }
}
