//! Question filtering, assessment profiles and tiered follow-up navigation.
//!
//! A profile is an ordered subset of bank questions. Within a profile, a
//! question that some other profile question lists as a follow-up waits until
//! every such parent is answered and its gate accepts each parent's answer.
//! Profile questions without an in-profile parent are eligible at once.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::{AnswerLookup, AnswerValue};
use crate::model::{Gate, LifecycleStage, PrincipleId, Question, QuestionBank, QuestionLevel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NavigatorError {
    #[error("unknown profile: {0}")]
    UnknownProfile(String),
    #[error("profile {profile} references unknown question {question}")]
    DanglingQuestion { profile: String, question: String },
}

impl NavigatorError {
    pub fn code(&self) -> &'static str {
        match self {
            NavigatorError::UnknownProfile(_) => "UNKNOWN_PROFILE",
            NavigatorError::DanglingQuestion { .. } => "INTEGRITY",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub id: String,
    pub name: String,
    pub description: String,
    pub question_ids: Vec<String>,
    #[serde(default)]
    pub evidence_required_override: Option<bool>,
    #[serde(default)]
    pub threshold_default: Option<u32>,
}

/// Conjunction of optional constraints. An empty set or `None` leaves that
/// dimension unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCriteria {
    #[serde(default)]
    pub principles: BTreeSet<PrincipleId>,
    #[serde(default)]
    pub levels: BTreeSet<QuestionLevel>,
    #[serde(default)]
    pub stages: BTreeSet<LifecycleStage>,
    #[serde(default)]
    pub category_ids: BTreeSet<String>,
    #[serde(default)]
    pub sources: BTreeSet<String>,
    /// Case-insensitive substring over question text.
    #[serde(default)]
    pub text: Option<String>,
}

impl FilterCriteria {
    pub fn matches(&self, q: &Question) -> bool {
        (self.principles.is_empty() || self.principles.contains(&q.principle))
            && (self.levels.is_empty() || self.levels.contains(&q.level))
            && (self.stages.is_empty() || self.stages.contains(&q.stage))
            && (self.category_ids.is_empty() || self.category_ids.contains(&q.category_id))
            && (self.sources.is_empty() || q.sources.iter().any(|s| self.sources.contains(s)))
            && self.text.as_ref().is_none_or(|needle| {
                q.text.to_lowercase().contains(&needle.to_lowercase())
            })
    }
}

fn filter_key(q: &Question) -> (PrincipleId, QuestionLevel, LifecycleStage, &str) {
    (q.principle, q.level, q.stage, q.global_id.as_str())
}

/// Sub-questions matching every criterion, ordered by principle, level,
/// lifecycle stage and global id.
pub fn filter<'b>(bank: &'b QuestionBank, criteria: &FilterCriteria) -> Vec<&'b Question> {
    let mut out: Vec<&Question> = bank.subquestions().filter(|q| criteria.matches(q)).collect();
    out.sort_by(|a, b| filter_key(a).cmp(&filter_key(b)));
    out
}

/// Questions of a profile in profile order.
pub fn select_profile<'b>(
    bank: &'b QuestionBank,
    profile_id: &str,
) -> Result<Vec<&'b Question>, NavigatorError> {
    let profile = bank
        .profile(profile_id)
        .ok_or_else(|| NavigatorError::UnknownProfile(profile_id.to_string()))?;
    let index = bank.index();
    profile
        .question_ids
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| NavigatorError::DanglingQuestion {
                    profile: profile_id.to_string(),
                    question: id.clone(),
                })
        })
        .collect()
}

pub fn gate_accepts(gate: Gate, parent_answer: Option<AnswerValue>) -> bool {
    matches!(
        (gate, parent_answer),
        (Gate::Always, _) | (Gate::OnNo, Some(AnswerValue::No)) | (Gate::OnYes, Some(AnswerValue::Yes))
    )
}

/// Navigation state over one profile.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavigationCursor {
    pub profile_id: String,
    pub answered: BTreeSet<String>,
    /// Questions eligible to ask next, in surfacing order.
    pub frontier: Vec<String>,
}

impl NavigationCursor {
    pub fn new(profile_id: impl Into<String>) -> Self {
        Self {
            profile_id: profile_id.into(),
            ..Self::default()
        }
    }

    /// Recomputes the answered set and frontier from `answers`.
    pub fn refresh(
        &mut self,
        bank: &QuestionBank,
        answers: &impl AnswerLookup,
    ) -> Result<(), NavigatorError> {
        let nav = Navigator::new(bank, &self.profile_id)?;
        self.answered = nav
            .questions
            .iter()
            .filter(|q| answers.answer(&q.global_id).is_some())
            .map(|q| q.global_id.clone())
            .collect();
        self.frontier = nav
            .eligible(answers, &self.answered)
            .into_iter()
            .map(|q| q.global_id.clone())
            .collect();
        Ok(())
    }
}

/// Precomputed parent links among a profile's questions.
pub struct Navigator<'b> {
    questions: Vec<&'b Question>,
    parents: HashMap<&'b str, Vec<&'b str>>,
}

impl<'b> Navigator<'b> {
    pub fn new(bank: &'b QuestionBank, profile_id: &str) -> Result<Self, NavigatorError> {
        let questions = select_profile(bank, profile_id)?;
        let members: BTreeSet<&str> = questions.iter().map(|q| q.global_id.as_str()).collect();
        let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
        for q in &questions {
            for child in &q.follow_ups {
                if let Some(&child) = members.get(child.as_str()) {
                    parents.entry(child).or_default().push(q.global_id.as_str());
                }
            }
        }
        Ok(Self { questions, parents })
    }

    pub fn questions(&self) -> &[&'b Question] {
        &self.questions
    }

    /// In-profile parents of `question_id`.
    pub fn parents(&self, question_id: &str) -> &[&'b str] {
        self.parents.get(question_id).map(Vec::as_slice).unwrap_or(&[])
    }

    fn is_eligible(
        &self,
        q: &Question,
        answers: &impl AnswerLookup,
        answered: &BTreeSet<String>,
    ) -> bool {
        let is_answered = |id: &str| answered.contains(id) || answers.answer(id).is_some();
        if is_answered(&q.global_id) {
            return false;
        }
        self.parents(&q.global_id)
            .iter()
            .all(|p| is_answered(p) && gate_accepts(q.gate, answers.answer(p)))
    }

    /// All unanswered eligible questions ordered by level, profile order and
    /// global id.
    pub fn eligible(
        &self,
        answers: &impl AnswerLookup,
        answered: &BTreeSet<String>,
    ) -> Vec<&'b Question> {
        let mut out: Vec<(usize, &Question)> = self
            .questions
            .iter()
            .enumerate()
            .filter(|(_, q)| self.is_eligible(q, answers, answered))
            .map(|(i, q)| (i, *q))
            .collect();
        out.sort_by(|(ia, a), (ib, b)| {
            (a.level, *ia, a.global_id.as_str()).cmp(&(b.level, *ib, b.global_id.as_str()))
        });
        out.into_iter().map(|(_, q)| q).collect()
    }
}

/// Up to `k` questions to ask next.
pub fn next_questions<'b>(
    bank: &'b QuestionBank,
    cursor: &NavigationCursor,
    answers: &impl AnswerLookup,
    k: usize,
) -> Result<Vec<&'b Question>, NavigatorError> {
    let nav = Navigator::new(bank, &cursor.profile_id)?;
    let mut out = nav.eligible(answers, &cursor.answered);
    out.truncate(k);
    Ok(out)
}
