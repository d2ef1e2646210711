//! Seed data shipped with the crate.
//!
//! The files under `data/` are produced by `examples/gen_fixtures.rs` and
//! committed in canonical form.

use std::collections::BTreeMap;

use crate::answer::AnswerValue;
use crate::compliance::{parse_requirement_set, RequirementSet};
use crate::ingest::{parse_bank, parse_extension, SourceExtension};
use crate::model::QuestionBank;

pub const SEED_BANK_JSON: &str = include_str!("../data/seed_bank.json");
pub const TABLE1_MIRROR_JSON: &str = include_str!("../data/table1_mirror.json");
pub const EU_ACT_EXTENSION_JSON: &str = include_str!("../data/extensions/eu-act.json");
pub const ISO_EXTENSION_JSON: &str = include_str!("../data/extensions/iso-42001.json");
pub const EU_HIGH_RISK_ALL_YES_JSON: &str = include_str!("../data/answers/eu-high-risk-all-yes.json");

const REQUIREMENT_SETS: [(&str, &str); 4] = [
    ("eu-high-risk", include_str!("../data/requirements/eu-high-risk.json")),
    ("eu-table4", include_str!("../data/requirements/eu-table4.json")),
    ("agent-rai-plugins", include_str!("../data/requirements/agent-rai-plugins.json")),
    ("foundation-model", include_str!("../data/requirements/foundation-model.json")),
];

pub fn seed_bank() -> QuestionBank {
    parse_bank(SEED_BANK_JSON).expect("seed bank is valid")
}

/// Synthetic bank whose shape mirrors the published per-principle counts.
pub fn table1_mirror() -> QuestionBank {
    parse_bank(TABLE1_MIRROR_JSON).expect("table1 mirror is valid")
}

pub fn eu_act_extension() -> SourceExtension {
    parse_extension(EU_ACT_EXTENSION_JSON).expect("EU-Act extension parses")
}

pub fn iso_extension() -> SourceExtension {
    parse_extension(ISO_EXTENSION_JSON).expect("ISO extension parses")
}

pub fn requirement_set_ids() -> impl Iterator<Item = &'static str> {
    REQUIREMENT_SETS.iter().map(|(id, _)| *id)
}

pub fn requirement_set(id: &str) -> Option<RequirementSet> {
    REQUIREMENT_SETS
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, text)| parse_requirement_set(text).expect("seed requirement set parses"))
}

pub fn requirement_sets() -> Vec<RequirementSet> {
    requirement_set_ids().filter_map(requirement_set).collect()
}

/// Every eu-high-risk question answered Yes.
pub fn eu_high_risk_all_yes() -> BTreeMap<String, AnswerValue> {
    serde_json::from_str(EU_HIGH_RISK_ALL_YES_JSON).expect("answers parse")
}
