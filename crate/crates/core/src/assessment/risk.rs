use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{PrincipleId, QuestionBank};

use super::Session;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("impact {impact} and probability {probability} must both lie in 1..=3")]
pub struct OutOfRange {
    pub impact: i64,
    pub probability: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskLevel {
    Low,
    Medium,
    High,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 3] = [RiskLevel::Low, RiskLevel::Medium, RiskLevel::High];

    /// Banding of the 3x3 matrix product.
    pub fn from_score(score: u8) -> RiskLevel {
        match score {
            0..=2 => RiskLevel::Low,
            3..=4 => RiskLevel::Medium,
            _ => RiskLevel::High,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RiskLevel::Low => "Low",
            RiskLevel::Medium => "Medium",
            RiskLevel::High => "High",
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RiskLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown risk level {s:?}"))
    }
}

/// A cell of the 3x3 impact/probability matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RatingDoc")]
pub struct RiskRating {
    pub impact: u8,
    pub probability: u8,
    pub score: u8,
    pub level: RiskLevel,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingDoc {
    impact: i64,
    probability: i64,
    score: i64,
    level: RiskLevel,
}

impl TryFrom<RatingDoc> for RiskRating {
    type Error = String;

    fn try_from(doc: RatingDoc) -> Result<Self, Self::Error> {
        let rating = risk_rating(doc.impact, doc.probability).map_err(|e| e.to_string())?;
        if i64::from(rating.score) != doc.score || rating.level != doc.level {
            return Err(format!(
                "rating ({}, {}) must have score {} and level {}",
                rating.impact, rating.probability, rating.score, rating.level
            ));
        }
        Ok(rating)
    }
}

pub fn risk_rating(impact: i64, probability: i64) -> Result<RiskRating, OutOfRange> {
    let in_range = |v: i64| (1..=3).contains(&v);
    if !in_range(impact) || !in_range(probability) {
        return Err(OutOfRange { impact, probability });
    }
    let score = (impact * probability) as u8;
    Ok(RiskRating {
        impact: impact as u8,
        probability: probability as u8,
        score,
        level: RiskLevel::from_score(score),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskRegisterEntry {
    pub risk_id: String,
    /// Id of a risk category in the bank.
    pub category: String,
    pub title: String,
    pub description: String,
    pub causes: String,
    pub existing_mitigations: String,
    pub owner: String,
    #[serde(default)]
    pub linked_question_ids: Vec<String>,
    pub rating: RiskRating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleRisk {
    pub principle: PrincipleId,
    pub low: u32,
    pub medium: u32,
    pub high: u32,
}

impl PrincipleRisk {
    pub fn elevated(&self) -> u32 {
        self.medium + self.high
    }

    pub fn total(&self) -> u32 {
        self.low + self.medium + self.high
    }
}

/// Register entry counts by level for all eight principles, in P1..P8 order.
/// Entries whose category is not in the bank are not counted.
pub fn principle_risk_summary(session: &Session, bank: &QuestionBank) -> Vec<PrincipleRisk> {
    let mut rows: Vec<PrincipleRisk> = PrincipleId::ALL
        .iter()
        .map(|&principle| PrincipleRisk {
            principle,
            low: 0,
            medium: 0,
            high: 0,
        })
        .collect();
    for entry in &session.risk_register {
        let Some(cat) = bank.category(&entry.category) else {
            continue;
        };
        let row = &mut rows[cat.principle.number() as usize - 1];
        match entry.rating.level {
            RiskLevel::Low => row.low += 1,
            RiskLevel::Medium => row.medium += 1,
            RiskLevel::High => row.high += 1,
        }
    }
    rows
}

/// Principles ordered by medium+high count, then high count, descending;
/// ties keep principle order.
pub fn rank_principles(summary: &[PrincipleRisk]) -> Vec<PrincipleRisk> {
    let mut ranked = summary.to_vec();
    ranked.sort_by(|a, b| {
        b.elevated()
            .cmp(&a.elevated())
            .then(b.high.cmp(&a.high))
            .then(a.principle.cmp(&b.principle))
    });
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_cells() {
        let r = risk_rating(1, 1).unwrap();
        assert_eq!((r.score, r.level), (1, RiskLevel::Low));
        let r = risk_rating(3, 3).unwrap();
        assert_eq!((r.score, r.level), (9, RiskLevel::High));
        assert_eq!(risk_rating(3, 2).unwrap().level, RiskLevel::High);
        assert_eq!(risk_rating(2, 2).unwrap().level, RiskLevel::Medium);
        assert_eq!(risk_rating(1, 2).unwrap().level, RiskLevel::Low);
    }

    #[test]
    fn grid_banding() {
        let mut counts = [0; 3];
        for i in 1..=3 {
            for p in 1..=3 {
                let r = risk_rating(i, p).unwrap();
                assert!([1, 2, 3, 4, 6, 9].contains(&r.score));
                counts[r.level as usize] += 1;
            }
        }
        assert_eq!(counts, [3, 3, 3]);
    }

    #[test]
    fn out_of_range() {
        for (i, p) in [(0, 1), (1, 4), (-1, 2), (3, 0)] {
            assert_eq!(risk_rating(i, p), Err(OutOfRange { impact: i, probability: p }));
        }
    }

    #[test]
    fn rating_serde_checks_consistency() {
        let r = risk_rating(3, 2).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RiskRating>(&text).unwrap(), r);
        let forged = r#"{"impact":3,"probability":2,"score":9,"level":"High"}"#;
        assert!(serde_json::from_str::<RiskRating>(forged).is_err());
        let wide = r#"{"impact":4,"probability":2,"score":8,"level":"High"}"#;
        assert!(serde_json::from_str::<RiskRating>(wide).is_err());
    }
}
