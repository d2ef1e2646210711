mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rai_core::assessment::{create_session, AssessmentError, SessionOptions};
use rai_core::model::QuestionBank;
use rai_core::navigator::{select_profile, NavigatorError};
use rai_core::seed;
use chrono::{TimeZone, Utc};

fn categories_of(bank: &QuestionBank, profile: &str) -> BTreeSet<String> {
    let set = seed::requirement_set(profile).unwrap();
    let qs: BTreeSet<String> = select_profile(bank, profile)
        .unwrap()
        .iter()
        .map(|q| q.global_id.clone())
        .collect();
    set.requirements
        .iter()
        .filter(|r| set.mapping.questions_for(&r.id).any(|q| qs.contains(q)))
        .map(|r| r.category.clone())
        .collect()
}

#[test]
fn seed_profiles() {
    let bank = seed::seed_bank();
    assert_eq!(select_profile(&bank, "agent-rai-plugins").unwrap().len(), 13);
    assert_eq!(
        categories_of(&bank, "agent-rai-plugins"),
        BTreeSet::from(
            ["Continuous risk assessor", "Black box recorder", "Explainer", "Multimodal guardrail", "AIBOM registry"]
                .map(String::from)
        )
    );
    assert_eq!(select_profile(&bank, "foundation-model").unwrap().len(), 8);
    assert_eq!(
        categories_of(&bank, "foundation-model"),
        BTreeSet::from(
            ["Risk management", "Data governance", "Documentation", "Environmental impact", "Quality management"]
                .map(String::from)
        )
    );
    let esg = select_profile(&bank, "esg-deep-dive").unwrap();
    assert_eq!(esg.len(), 42);
    let texts: Vec<&str> = esg.iter().map(|q| q.text.as_str()).collect();
    assert!(texts.contains(&"Does the company establish methods and metrics to quantify and measure the risks associated with its AI systems?"));
    assert_eq!(esg.iter().filter(|q| q.metric.is_some()).count(), 3);
    assert_eq!(esg.iter().filter(|q| q.text.starts_with("[placeholder]")).count(), 39);
    assert_eq!(select_profile(&bank, "eu-high-risk").unwrap().len(), 21);
    assert_eq!(
        select_profile(&bank, "x").unwrap_err(),
        NavigatorError::UnknownProfile("x".into())
    );
}

#[test]
fn fresh_sessions_open_counts() {
    let bank = seed::seed_bank();
    let now = Utc.with_ymd_and_hms(2026, 3, 1, 9, 0, 0).unwrap();
    for (profile, subject, open) in [("agent-rai-plugins", "demo-agent", 13), ("foundation-model", "demo-fm", 8)] {
        let s = create_session(&bank, profile, subject, SessionOptions::default(), "s1".into(), now).unwrap();
        let c = s.completion(&bank).unwrap();
        assert_eq!((c.answered, c.total, c.unanswered.len()), (0, open, open));
    }
    assert!(matches!(
        create_session(&bank, "x", "demo", SessionOptions::default(), "s1".into(), now),
        Err(AssessmentError::Navigator(NavigatorError::UnknownProfile(_)))
    ));
}

#[test]
fn agent_follow_ups_wait_for_parents() {
    let bank = seed::seed_bank();
    let now = Utc.with_ymd_and_hms(2026, 3, 1, 9, 0, 0).unwrap();
    let s = create_session(&bank, "agent-rai-plugins", "demo", SessionOptions::default(), "s1".into(), now).unwrap();
    let first = s.next_question_ids(&bank, 20).unwrap();
    let profile = &bank.profile("agent-rai-plugins").unwrap().question_ids;
    // Roots only: Q1, Q4, Q7, Q9, Q10, Q11, Q12 of the table.
    let roots: BTreeSet<&String> = [0, 3, 6, 8, 9, 10, 11].iter().map(|&i| &profile[i]).collect();
    assert_eq!(first.iter().collect::<BTreeSet<_>>(), roots);
}

#[test]
fn random_dags_drive_to_exhaustion() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = Vec::new();
    for trial in 0..1000 {
        let n = rng.gen_range(1..=50);
        let bank = common::random_bank(&mut rng, n);
        for v in common::drive_to_exhaustion(&bank, &mut rng) {
            failures.push(format!("trial {trial}: {v}"));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
