mod common;

use std::collections::BTreeSet;

use rai_core::ingest::{extend_bank, parse_bank, serialize_bank, IngestError, SourceExtension};
use rai_core::model::{summarize, validate, ModelError, PrincipleId, SourceFramework, ViolationKind};
use rai_core::navigator::{filter, FilterCriteria};
use rai_core::seed;

use common::{empty_bank, question};

const TABLE1: [(PrincipleId, [usize; 4]); 8] = [
    (PrincipleId::P1, [3, 7, 14, 4]),
    (PrincipleId::P2, [3, 5, 17, 3]),
    (PrincipleId::P3, [2, 6, 32, 4]),
    (PrincipleId::P4, [3, 9, 47, 6]),
    (PrincipleId::P5, [5, 11, 42, 6]),
    (PrincipleId::P6, [3, 9, 32, 4]),
    (PrincipleId::P7, [2, 4, 4, 2]),
    (PrincipleId::P8, [5, 14, 57, 6]),
];

fn row(s: &rai_core::model::BankSummary, p: PrincipleId) -> [usize; 4] {
    let r = s.row(p).unwrap();
    [r.category_count, r.subcategory_count, r.subquestion_count, r.distinct_source_count]
}

#[test]
fn table1_mirror_matches_every_row() {
    let s = summarize(&seed::table1_mirror()).unwrap();
    for (p, expected) in TABLE1 {
        assert_eq!(row(&s, p), expected, "{p}");
    }
    let t = &s.totals;
    assert_eq!((t.category_count, t.subcategory_count, t.subquestion_count), (26, 65, 245));
    assert_eq!((t.min_source_count, t.max_source_count, t.distinct_source_count), (2, 6, 7));
}

#[test]
fn p5_subtree_alone() {
    let mut bank = seed::table1_mirror();
    for entry in &mut bank.principles {
        if entry.principle != PrincipleId::P5 {
            entry.categories.clear();
        }
    }
    let s = summarize(&bank).unwrap();
    assert_eq!(row(&s, PrincipleId::P5), [5, 11, 42, 6]);
    assert_eq!(row(&s, PrincipleId::P1), [0, 0, 0, 0]);
    assert_eq!(s.totals.subquestion_count, 42);
}

#[test]
fn principle_questions_only() {
    let s = summarize(&empty_bank()).unwrap();
    for p in PrincipleId::ALL {
        assert_eq!(row(&s, p), [0, 0, 0, 0]);
    }
}

#[test]
fn seed_bank_is_clean() {
    let report = validate(&seed::seed_bank());
    assert_eq!((report.error_count(), report.warning_count()), (0, 0), "{:#?}", report.violations);
    assert!(validate(&seed::table1_mirror()).is_valid());
}

#[test]
fn seed_lookups() {
    let bank = seed::seed_bank();
    assert_eq!(
        bank.find_question("QB-P1-001").unwrap().text,
        "Do you assess and document environmental impact and sustainability of AI model training and management activities?"
    );
    assert!(matches!(bank.find_question("QB-P9-001"), Err(ModelError::NotFound(_))));
    assert_eq!(
        bank.principle_question(PrincipleId::P1).text,
        "Does the AI system benefit human, society and environment?"
    );
    assert_eq!(
        bank.principle_question(PrincipleId::P2).text,
        "Does the AI system respect human rights, diversity and autonomy of individuals?"
    );
    for p in PrincipleId::ALL {
        assert_eq!(bank.principle_question(p).level.get(), 1);
    }
}

#[test]
fn dangling_follow_up_and_duplicate_id() {
    let mut bank = empty_bank();
    let mut broken = question(PrincipleId::P1, 1, 1, "c", "s");
    broken.follow_ups.push("QB-P1-099".into());
    bank.principles[0].categories.push(rai_core::model::RiskCategory {
        id: "c".into(),
        name: "c".into(),
        principle: PrincipleId::P1,
        subcategories: vec![rai_core::model::SubCategory {
            id: "s".into(),
            name: "s".into(),
            questions: vec![broken],
        }],
    });
    let report = validate(&bank);
    let errors: Vec<_> = report.errors().collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].kind, ViolationKind::DanglingFollowUp);

    let sub = &mut bank.principles[0].categories[0].subcategories[0];
    sub.questions[0].follow_ups.clear();
    let dup = sub.questions[0].clone();
    sub.questions.push(dup);
    let report = validate(&bank);
    let errors: Vec<_> = report.errors().collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].kind, ViolationKind::DuplicateGlobalId);

    match parse_bank(&serialize_bank(&bank)) {
        Err(IngestError::Integrity(v)) => {
            assert!(v.iter().any(|x| x.kind == ViolationKind::DuplicateGlobalId))
        }
        other => panic!("expected integrity error, got {other:?}"),
    }
}

#[test]
fn minimal_document_parses() {
    let mut bank = empty_bank();
    bank.principles[0].categories.push(rai_core::model::RiskCategory {
        id: "c".into(),
        name: "c".into(),
        principle: PrincipleId::P1,
        subcategories: vec![rai_core::model::SubCategory {
            id: "s".into(),
            name: "s".into(),
            questions: vec![question(PrincipleId::P1, 1, 1, "c", "s")],
        }],
    });
    let parsed = parse_bank(&serialize_bank(&bank)).unwrap();
    let t = summarize(&parsed).unwrap().totals;
    assert_eq!(
        (t.category_count, t.subcategory_count, t.subquestion_count, t.distinct_source_count),
        (1, 1, 1, 0)
    );
}

#[test]
fn malformed_documents() {
    assert!(matches!(parse_bank("{ not json"), Err(IngestError::Syntax { line: 1, .. })));
    assert!(matches!(parse_bank(r#"{"version": 3}"#), Err(IngestError::Schema(_))));
}

#[test]
fn golden_documents_are_fixed_points() {
    let bank = seed::seed_bank();
    assert_eq!(serialize_bank(&bank), seed::SEED_BANK_JSON);
    assert_eq!(parse_bank(seed::SEED_BANK_JSON).unwrap(), bank);
    assert_eq!(serialize_bank(&bank), serialize_bank(&bank.clone()));
    assert_eq!(serialize_bank(&seed::table1_mirror()), seed::TABLE1_MIRROR_JSON);
    for set in seed::requirement_sets() {
        let text = rai_core::compliance::serialize_requirement_set(&set);
        assert_eq!(rai_core::compliance::parse_requirement_set(&text).unwrap(), set);
    }
    assert_eq!(
        rai_core::ingest::serialize_extension(&seed::eu_act_extension()),
        seed::EU_ACT_EXTENSION_JSON
    );
}

#[test]
fn extension_counts_and_idempotence() {
    let bank = seed::seed_bank();
    let before = bank.subquestion_count();
    let cases = [
        (seed::eu_act_extension(), 25, 15, 10),
        (seed::iso_extension(), 30, 8, 22),
    ];
    for (ext, candidates, overlaps, added) in cases {
        assert_eq!(ext.candidate_count(), candidates);
        assert_eq!(ext.overlap_map.len(), overlaps);
        let once = extend_bank(&bank, &ext).unwrap();
        assert_eq!(once.subquestion_count(), before + added);
        assert!(validate(&once).is_valid());
        assert_eq!(extend_bank(&once, &ext).unwrap(), once);
        assert_eq!(once.version, bank.version);
    }
    let both = extend_bank(&extend_bank(&bank, &seed::eu_act_extension()).unwrap(), &seed::iso_extension()).unwrap();
    assert_eq!(both.subquestion_count(), before + 32);
}

#[test]
fn overlaps_record_provenance_without_new_questions() {
    let bank = seed::seed_bank();
    let ext = seed::eu_act_extension();
    let out = extend_bank(&bank, &ext).unwrap();
    for o in &ext.overlap_map {
        let q = out.find_question(&o.existing_global_id).unwrap();
        assert!(q.internal_ids.iter().any(|i| i.reference == o.reference), "{}", o.reference);
        assert!(q.has_source("EU-Act"));
    }
}

#[test]
fn empty_extension_is_identity() {
    let bank = seed::seed_bank();
    let ext = SourceExtension {
        source: SourceFramework::new("EU-Act", "EU AI Act"),
        new_questions: vec![],
        overlap_map: vec![],
    };
    assert_eq!(extend_bank(&bank, &ext).unwrap(), bank);
}

#[test]
fn filters() {
    let mirror = seed::table1_mirror();
    let p7 = FilterCriteria {
        principles: BTreeSet::from([PrincipleId::P7]),
        ..Default::default()
    };
    assert_eq!(filter(&mirror, &p7).len(), 4);

    let bank = seed::seed_bank();
    let iso = FilterCriteria {
        sources: BTreeSet::from(["ISO".to_string()]),
        ..Default::default()
    };
    let hits = filter(&bank, &iso);
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|q| q.has_source("ISO")));
    assert_eq!(filter(&bank, &FilterCriteria::default()).len(), bank.subquestion_count());
}
