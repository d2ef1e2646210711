use chrono::{DateTime, Duration, TimeZone, Utc};
use proptest::prelude::*;
use rai_core::answer::AnswerValue;
use rai_core::assessment::{
    create_session, rank_principles, principle_risk_summary, replay_answers, risk_rating,
    AnswerRecord, AssessmentError, AuditEvent, RiskLevel, RiskRegisterEntry, Session,
    SessionOptions, SessionStore, StoreError,
};
use rai_core::model::{PrincipleId, QuestionBank};
use rai_core::seed;

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 5, 4, 10, 0, 0).unwrap()
}

fn session(bank: &QuestionBank, profile: &str) -> Session {
    create_session(bank, profile, "demo", SessionOptions::default(), "s-1".into(), t0()).unwrap()
}

fn risk(id: &str, category: &str, impact: i64, probability: i64) -> RiskRegisterEntry {
    RiskRegisterEntry {
        risk_id: id.into(),
        category: category.into(),
        title: format!("{id} title"),
        description: "d".into(),
        causes: "c".into(),
        existing_mitigations: "m".into(),
        owner: "o".into(),
        linked_question_ids: vec![],
        rating: risk_rating(impact, probability).unwrap(),
    }
}

fn metric_question(bank: &QuestionBank) -> String {
    bank.subquestions()
        .find(|q| q.metric.as_ref().is_some_and(|m| m.name == "Number of AI risk metrics"))
        .unwrap()
        .global_id
        .clone()
}

#[test]
fn evidence_rules_on_metric_question() {
    let bank = seed::seed_bank();
    let q = metric_question(&bank);
    assert!(bank.find_question(&q).unwrap().evidence_required);
    let mut s = session(&bank, "esg-deep-dive");
    let bare = AnswerRecord::new(AnswerValue::Yes, "auditor", t0());
    assert!(matches!(s.record_answer(&bank, &q, bare), Err(AssessmentError::EvidenceRequired(_))));
    assert!(s.answers.is_empty());
    let backed = AnswerRecord::new(AnswerValue::Yes, "auditor", t0())
        .with_evidence("risk register v3")
        .with_metric(4.0, "count");
    s.record_answer(&bank, &q, backed).unwrap();
    assert_eq!(s.answers[&q].metric_value.as_ref().unwrap().value, 4.0);
    // No needs no evidence.
    let mut s = session(&bank, "esg-deep-dive");
    s.record_answer(&bank, &q, AnswerRecord::new(AnswerValue::No, "a", t0())).unwrap();
}

#[test]
fn overwrite_keeps_history() {
    let bank = seed::seed_bank();
    let mut s = session(&bank, "agent-rai-plugins");
    let q = bank.profile("agent-rai-plugins").unwrap().question_ids[0].clone();
    s.record_answer(&bank, &q, AnswerRecord::new(AnswerValue::No, "a", t0())).unwrap();
    let before = s.audit_log.len();
    let later = t0() + Duration::minutes(5);
    s.record_answer(&bank, &q, AnswerRecord::new(AnswerValue::Yes, "a", later)).unwrap();
    assert_eq!(s.audit_log.len(), before + 1);
    match s.audit_log.last().unwrap() {
        AuditEvent::AnswerRecorded { previous: Some(p), record, .. } => {
            assert_eq!((p.value, record.value), (AnswerValue::No, AnswerValue::Yes));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(s.updated_at, later);
    assert_eq!(replay_answers(&s.audit_log), s.answers);
}

#[test]
fn answers_outside_profile_or_after_close() {
    let bank = seed::seed_bank();
    let mut s = session(&bank, "foundation-model");
    let outsider = bank.profile("agent-rai-plugins").unwrap().question_ids[0].clone();
    assert!(matches!(
        s.record_answer(&bank, &outsider, AnswerRecord::new(AnswerValue::Yes, "a", t0())),
        Err(AssessmentError::UnknownQuestion { .. })
    ));
    s.close(t0()).unwrap();
    let q = bank.profile("foundation-model").unwrap().question_ids[0].clone();
    assert!(matches!(
        s.record_answer(&bank, &q, AnswerRecord::new(AnswerValue::Yes, "a", t0())),
        Err(AssessmentError::SessionClosed(_))
    ));
}

#[test]
fn risk_register_validation() {
    let bank = seed::seed_bank();
    let mut s = session(&bank, "agent-rai-plugins");
    s.add_risk(&bank, risk("R1", "p8-management", 3, 3), t0()).unwrap();
    assert!(matches!(s.add_risk(&bank, risk("R1", "p8-management", 1, 1), t0()), Err(AssessmentError::DuplicateRisk(_))));
    assert!(matches!(s.add_risk(&bank, risk("R2", "nowhere", 1, 1), t0()), Err(AssessmentError::UnknownCategory(_))));
    let mut linked = risk("R3", "p8-management", 1, 1);
    linked.linked_question_ids.push("QB-P8-999".into());
    assert!(matches!(s.add_risk(&bank, linked, t0()), Err(AssessmentError::UnknownLinkedQuestion { .. })));
    assert_eq!(s.risk_register.len(), 1);
}

#[test]
fn risk_matrix_monotone() {
    let cells: Vec<_> = (1..=3).flat_map(|i| (1..=3).map(move |p| risk_rating(i, p).unwrap())).collect();
    for a in &cells {
        for b in &cells {
            if a.impact <= b.impact && a.probability <= b.probability {
                assert!(a.score <= b.score && a.level <= b.level);
            }
        }
    }
    assert_eq!(risk_rating(3, 2).unwrap().level, RiskLevel::High);
}

#[test]
fn principle_ranking() {
    let bank = seed::seed_bank();
    let mut s = session(&bank, "agent-rai-plugins");
    assert!(principle_risk_summary(&s, &bank).iter().all(|r| r.total() == 0));
    s.add_risk(&bank, risk("R1", "p8-management", 3, 3), t0()).unwrap();
    s.add_risk(&bank, risk("R2", "p8-auditability", 2, 3), t0()).unwrap();
    s.add_risk(&bank, risk("R3", "p2-oversight", 1, 1), t0()).unwrap();
    s.add_risk(&bank, risk("R4", "p5-test", 2, 2), t0()).unwrap();
    let summary = principle_risk_summary(&s, &bank);
    assert_eq!(summary.len(), 8);
    let p8 = summary[7];
    assert_eq!((p8.low, p8.medium, p8.high), (0, 0, 2));
    assert_eq!(summary[1].low, 1);
    assert_eq!(summary[4].medium, 1);
    let ranked = rank_principles(&summary);
    assert_eq!(ranked[0].principle, PrincipleId::P8);
    assert_eq!(ranked[1].principle, PrincipleId::P5);
}

#[test]
fn store_round_trip_and_errors() {
    let bank = seed::seed_bank();
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let mut s = session(&bank, "agent-rai-plugins");
    s.add_risk(&bank, risk("R1", "p8-management", 3, 2), t0()).unwrap();
    store.create(&s).unwrap();
    assert_eq!(store.load("s-1").unwrap(), s);
    assert!(matches!(store.load("nope"), Err(StoreError::NotFound(_))));
    let mut v2 = bank.clone();
    v2.version = "2.0.0".into();
    assert!(store.load_checked("s-1", &v2.version).unwrap().warning.is_some());
    assert!(store.load_checked("s-1", &bank.version).unwrap().warning.is_none());

    let q = bank.profile("agent-rai-plugins").unwrap().question_ids[0].clone();
    let r = store
        .update("s-1", |x| x.record_answer(&bank, &q, AnswerRecord::new(AnswerValue::Yes, "a", t0())))
        .unwrap();
    assert!(r.is_ok());
    let failed = store
        .update("s-1", |x| x.record_answer(&bank, "QB-P9-001", AnswerRecord::new(AnswerValue::Yes, "a", t0())))
        .unwrap();
    assert!(failed.is_err());
    assert_eq!(store.load("s-1").unwrap().answers.len(), 1);
}

fn arb_session() -> impl Strategy<Value = Session> {
    let profiles = ["agent-rai-plugins", "foundation-model", "eu-high-risk", "esg-deep-dive"];
    (
        0..profiles.len(),
        proptest::collection::vec((0usize..64, 0usize..3, any::<bool>(), proptest::option::of(-1e6f64..1e6), 0i64..100_000), 0..40),
        proptest::collection::vec((1i64..=3, 1i64..=3, 0usize..26, "[ -~]{0,12}"), 0..5),
        "[ -~]{0,20}",
        any::<bool>(),
    )
        .prop_map(move |(pi, answers, risks, subject, close)| {
            let bank = seed::seed_bank();
            let profile = profiles[pi];
            let mut s = create_session(&bank, profile, &subject, SessionOptions::default(), "prop".into(), Utc.timestamp_opt(1_700_000_000, 0).unwrap()).unwrap();
            let ids = bank.profile(profile).unwrap().question_ids.clone();
            for (qi, vi, ev, metric, secs) in answers {
                let mut r = AnswerRecord::new(AnswerValue::ALL[vi], "who", Utc.timestamp_opt(1_700_000_000 + secs, 123_456_789).unwrap());
                if ev {
                    r = r.with_evidence("doc");
                }
                if let Some(m) = metric {
                    r = r.with_metric(m, "count");
                }
                let _ = s.record_answer(&bank, &ids[qi % ids.len()], r);
            }
            let cats: Vec<String> = bank.principles.iter().flat_map(|e| e.categories.iter().map(|c| c.id.clone())).collect();
            for (n, (i, p, ci, title)) in risks.into_iter().enumerate() {
                let mut e = risk(&format!("R{n}"), &cats[ci % cats.len()], i, p);
                e.title = title;
                s.add_risk(&bank, e, s.updated_at).unwrap();
            }
            if close {
                s.close(s.updated_at).unwrap();
            }
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn sessions_survive_the_store(s in arb_session()) {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        store.create(&s).unwrap();
        let back = store.load(&s.session_id).unwrap();
        prop_assert_eq!(&back, &s);
        store.save(&back).unwrap();
        prop_assert_eq!(
            std::fs::read_to_string(store.path_of(&s.session_id)).unwrap(),
            rai_core::canonical::to_canonical_string(&s).unwrap()
        );
    }
}
