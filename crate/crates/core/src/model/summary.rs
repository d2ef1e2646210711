use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{validate, ModelError, PrincipleId, QuestionBank};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleRow {
    pub principle: PrincipleId,
    pub category_count: usize,
    pub subcategory_count: usize,
    pub subquestion_count: usize,
    pub distinct_source_count: usize,
}

/// Column sums over the principle rows. Source counts do not add up across
/// principles, so the totals carry their range and the bank-wide union instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryTotals {
    pub category_count: usize,
    pub subcategory_count: usize,
    pub subquestion_count: usize,
    pub min_source_count: usize,
    pub max_source_count: usize,
    pub distinct_source_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankSummary {
    pub rows: Vec<PrincipleRow>,
    pub totals: SummaryTotals,
}

impl BankSummary {
    pub fn row(&self, principle: PrincipleId) -> Option<&PrincipleRow> {
        self.rows.iter().find(|r| r.principle == principle)
    }
}

/// Per-principle counts over sub-questions. Principle questions are not
/// counted.
pub fn summarize(bank: &QuestionBank) -> Result<BankSummary, ModelError> {
    let report = validate(bank);
    if !report.is_valid() {
        return Err(ModelError::InvalidBank(report.error_count()));
    }

    let mut all_sources = BTreeSet::new();
    let rows: Vec<PrincipleRow> = bank
        .principles
        .iter()
        .map(|entry| {
            let sources: BTreeSet<&str> = entry
                .subquestions()
                .flat_map(|q| q.sources.iter().map(String::as_str))
                .collect();
            all_sources.extend(sources.iter().copied());
            PrincipleRow {
                principle: entry.principle,
                category_count: entry.categories.len(),
                subcategory_count: entry.categories.iter().map(|c| c.subcategories.len()).sum(),
                subquestion_count: entry.subquestions().count(),
                distinct_source_count: sources.len(),
            }
        })
        .collect();

    let totals = SummaryTotals {
        category_count: rows.iter().map(|r| r.category_count).sum(),
        subcategory_count: rows.iter().map(|r| r.subcategory_count).sum(),
        subquestion_count: rows.iter().map(|r| r.subquestion_count).sum(),
        min_source_count: rows.iter().map(|r| r.distinct_source_count).min().unwrap_or(0),
        max_source_count: rows.iter().map(|r| r.distinct_source_count).max().unwrap_or(0),
        distinct_source_count: all_sources.len(),
    };
    Ok(BankSummary { rows, totals })
}
