use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use rai_core::answer::AnswerValue;
use rai_core::assessment::{create_session, risk_rating, AnswerRecord, RiskRegisterEntry, Session, SessionOptions};
use rai_core::compliance::{RequirementMapping, RequirementSet};
use rai_core::model::QuestionBank;
use rai_core::reporting::{
    export_risk_register, export_traceability_matrix, parse_risk_register_csv, parse_traceability_csv,
    render_assessment_report, ReportFormat,
};
use rai_core::seed;

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 5, 4, 10, 0, 0).unwrap()
}

fn answered(bank: &QuestionBank, profile: &str, value: impl Fn(usize) -> AnswerValue) -> Session {
    let mut s = create_session(bank, profile, "demo", SessionOptions::default(), "s-1".into(), t0()).unwrap();
    let ids = bank.profile(profile).unwrap().question_ids.clone();
    for (i, q) in ids.iter().enumerate() {
        s.record_answer(bank, q, AnswerRecord::new(value(i), "auditor", t0()).with_evidence(format!("doc {i}"))).unwrap();
    }
    s
}

fn entry(id: &str, impact: i64, probability: i64) -> RiskRegisterEntry {
    RiskRegisterEntry {
        risk_id: id.into(),
        category: "p8-management".into(),
        title: "Unlogged \"tool\" calls, with commas".into(),
        description: "line one\nline two".into(),
        causes: "c".into(),
        existing_mitigations: "m".into(),
        owner: "o".into(),
        linked_question_ids: vec!["QB-P8-001".into(), "QB-P8-002".into()],
        rating: risk_rating(impact, probability).unwrap(),
    }
}

#[test]
fn agent_report_names_every_component() {
    let bank = seed::seed_bank();
    let set = seed::requirement_set("agent-rai-plugins").unwrap();
    let s = answered(&bank, "agent-rai-plugins", |i| if i % 4 == 3 { AnswerValue::No } else { AnswerValue::Yes });
    let md = render_assessment_report(&s, &bank, Some(&set), ReportFormat::Markdown).unwrap();
    for c in ["Continuous risk assessor", "Black box recorder", "Explainer", "Multimodal guardrail", "AIBOM registry"] {
        assert!(md.contains(&format!("### {c}")), "{c}");
    }
    assert!(md.contains("Completion: 13/13"));
    for q in select_texts(&bank, "agent-rai-plugins") {
        assert!(md.contains(&q), "{q}");
    }
    assert_eq!(md, render_assessment_report(&s, &bank, Some(&set), ReportFormat::Markdown).unwrap());
    let json = render_assessment_report(&s, &bank, Some(&set), ReportFormat::Json).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&json).is_ok());
}

fn select_texts(bank: &QuestionBank, profile: &str) -> Vec<String> {
    rai_core::navigator::select_profile(bank, profile).unwrap().iter().map(|q| q.text.clone()).collect()
}

#[test]
fn empty_session_report() {
    let bank = seed::seed_bank();
    let s = create_session(&bank, "agent-rai-plugins", "demo", SessionOptions::default(), "s-1".into(), t0()).unwrap();
    let md = render_assessment_report(&s, &bank, None, ReportFormat::Markdown).unwrap();
    assert!(md.contains("Completion: 0/13"));
    assert!(md.contains("No risks recorded."));
    assert!(render_assessment_report(&s, &bank, None, ReportFormat::Csv).is_err());
}

#[test]
fn section_order() {
    let bank = seed::seed_bank();
    let set = seed::requirement_set("agent-rai-plugins").unwrap();
    let s = answered(&bank, "agent-rai-plugins", |_| AnswerValue::Yes);
    let md = render_assessment_report(&s, &bank, Some(&set), ReportFormat::Markdown).unwrap();
    let pos = |h: &str| md.find(h).unwrap_or_else(|| panic!("{h}"));
    assert!(pos("# Assessment report") < pos("## Completion"));
    assert!(pos("## Completion") < pos("## Principle risk ranking"));
    assert!(pos("## Principle risk ranking") < pos("## Compliance"));
    assert!(pos("## Compliance") < pos("## Answers"));
    assert!(md.contains("Full Compliance (13/13)"));
}

#[test]
fn traceability_matrix() {
    let bank = seed::seed_bank();
    let set = seed::requirement_set("eu-table4").unwrap();
    let mut s = answered(&bank, "eu-high-risk", |_| AnswerValue::Yes);
    let csv = export_traceability_matrix(&set, &bank, &s, ReportFormat::Csv).unwrap();
    let rows = parse_traceability_csv(&csv).unwrap();
    assert_eq!(rows.len(), 10);
    let ids: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ids, ["E01", "E02", "E03", "E04", "E05", "E06", "E07", "E08", "E09", "E10"]);
    assert!(rows.iter().all(|r| r[3] == "Yes" && r[4] == "true" && r[5] == "Satisfied"));
    assert!(csv.starts_with("requirement_id,section,question_id,answer,evidence_present,status\r\n"));

    let q = set.mapping.rows[1].question_id().to_string();
    s.record_answer(&bank, &q, AnswerRecord::new(AnswerValue::NotApplicable, "a", t0())).unwrap();
    let rows = parse_traceability_csv(&export_traceability_matrix(&set, &bank, &s, ReportFormat::Csv).unwrap()).unwrap();
    assert_eq!((rows[1][3].as_str(), rows[1][5].as_str()), ("NA", "NotApplicable"));

    let empty = RequirementSet {
        id: "none".into(),
        name: "none".into(),
        requirements: vec![],
        mapping: RequirementMapping::default(),
        followups: Default::default(),
        default_threshold: None,
    };
    let csv = export_traceability_matrix(&empty, &bank, &s, ReportFormat::Csv).unwrap();
    assert_eq!(csv, "requirement_id,section,question_id,answer,evidence_present,status\r\n");
}

#[test]
fn traceability_csv_multiset_law() {
    let bank = seed::seed_bank();
    let set = seed::requirement_set("eu-high-risk").unwrap();
    let s = answered(&bank, "eu-high-risk", |i| AnswerValue::ALL[i % 3]);
    let rows = rai_core::reporting::traceability_rows(&set, &bank, &s).unwrap();
    let mut expected: BTreeMap<[String; 6], usize> = BTreeMap::new();
    for r in &rows {
        let key = [
            r.requirement_id.clone(),
            r.section.clone(),
            r.question_id.clone(),
            r.answer.clone(),
            r.evidence_present.to_string(),
            r.status.label().to_string(),
        ];
        *expected.entry(key).or_default() += 1;
    }
    let mut parsed: BTreeMap<[String; 6], usize> = BTreeMap::new();
    let csv = export_traceability_matrix(&set, &bank, &s, ReportFormat::Csv).unwrap();
    for r in parse_traceability_csv(&csv).unwrap() {
        *parsed.entry(r).or_default() += 1;
    }
    assert_eq!(parsed, expected);
}

#[test]
fn risk_register_exports() {
    let bank = seed::seed_bank();
    let mut s = create_session(&bank, "agent-rai-plugins", "demo", SessionOptions::default(), "s-1".into(), t0()).unwrap();
    let header = "risk_id,category,title,description,causes,existing_mitigations,owner,linked_question_ids,impact,probability,score,level\r\n";
    assert_eq!(export_risk_register(&s, ReportFormat::Csv).unwrap(), header);
    s.add_risk(&bank, entry("R1", 3, 2), t0()).unwrap();
    s.add_risk(&bank, entry("R2", 1, 2), t0()).unwrap();
    let csv = export_risk_register(&s, ReportFormat::Csv).unwrap();
    let back = parse_risk_register_csv(&csv).unwrap();
    assert_eq!(back, s.risk_register);
    assert_eq!(back[0].rating.level.as_str(), "High");
    assert!(csv.contains(",3,2,6,High\r\n"));
    assert!(csv.contains("\"Unlogged \"\"tool\"\" calls, with commas\""));
    let json = export_risk_register(&s, ReportFormat::Json).unwrap();
    assert_eq!(serde_json::from_str::<Vec<RiskRegisterEntry>>(&json).unwrap(), s.risk_register);
}
