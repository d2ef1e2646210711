//! Answer vocabulary shared by navigation, scoring and sessions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerValue {
    Yes,
    No,
    #[serde(rename = "na", alias = "n/a", alias = "not_applicable")]
    NotApplicable,
}

impl AnswerValue {
    pub const ALL: [AnswerValue; 3] = [AnswerValue::Yes, AnswerValue::No, AnswerValue::NotApplicable];

    /// 1 for Yes, 0 for No, `None` when the answer is exempt from scoring.
    pub fn score(self) -> Option<u32> {
        match self {
            AnswerValue::Yes => Some(1),
            AnswerValue::No => Some(0),
            AnswerValue::NotApplicable => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AnswerValue::Yes => "Yes",
            AnswerValue::No => "No",
            AnswerValue::NotApplicable => "NA",
        }
    }
}

impl fmt::Display for AnswerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown answer {0:?} (expected yes, no or na)")]
pub struct UnknownAnswer(pub String);

impl FromStr for AnswerValue {
    type Err = UnknownAnswer;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" | "y" => Ok(AnswerValue::Yes),
            "no" | "n" => Ok(AnswerValue::No),
            "na" | "n/a" | "not_applicable" | "not applicable" => Ok(AnswerValue::NotApplicable),
            _ => Err(UnknownAnswer(s.to_string())),
        }
    }
}

/// Anything that can report the recorded answer for a question.
pub trait AnswerLookup {
    fn answer(&self, question_id: &str) -> Option<AnswerValue>;
}

impl AnswerLookup for HashMap<String, AnswerValue> {
    fn answer(&self, question_id: &str) -> Option<AnswerValue> {
        self.get(question_id).copied()
    }
}

impl AnswerLookup for BTreeMap<String, AnswerValue> {
    fn answer(&self, question_id: &str) -> Option<AnswerValue> {
        self.get(question_id).copied()
    }
}

impl<T: AnswerLookup + ?Sized> AnswerLookup for &T {
    fn answer(&self, question_id: &str) -> Option<AnswerValue> {
        (**self).answer(question_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_names() {
        assert_eq!(serde_json::to_string(&AnswerValue::NotApplicable).unwrap(), "\"na\"");
        let v: AnswerValue = serde_json::from_str("\"n/a\"").unwrap();
        assert_eq!(v, AnswerValue::NotApplicable);
        assert_eq!("YES".parse::<AnswerValue>().unwrap(), AnswerValue::Yes);
        assert!("maybe".parse::<AnswerValue>().is_err());
    }

    #[test]
    fn scores() {
        assert_eq!(AnswerValue::Yes.score(), Some(1));
        assert_eq!(AnswerValue::No.score(), Some(0));
        assert_eq!(AnswerValue::NotApplicable.score(), None);
    }
}
