#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rai_core::answer::AnswerValue;
use rai_core::model::{
    format_global_id, Gate, LifecycleStage, PrincipleEntry, PrincipleId, Question, QuestionBank,
    QuestionLevel, RiskCategory, SourceFramework, SubCategory,
};
use rai_core::navigator::Profile;

pub fn question(p: PrincipleId, seq: u32, level: u8, cat: &str, sub: &str) -> Question {
    Question {
        global_id: format_global_id(p, seq),
        internal_ids: vec![],
        text: format!("probe {p} {seq}"),
        level: QuestionLevel::new(level as i64).unwrap(),
        stage: LifecycleStage::Planning,
        principle: p,
        category_id: cat.into(),
        subcategory_id: sub.into(),
        sources: vec![],
        metric: None,
        evidence_required: false,
        follow_ups: vec![],
        gate: Gate::Always,
    }
}

/// Eight principle questions and nothing else.
pub fn empty_bank() -> QuestionBank {
    QuestionBank {
        version: "test".into(),
        principles: PrincipleId::ALL
            .iter()
            .map(|&p| PrincipleEntry {
                principle: p,
                principle_question: {
                    let mut q = question(p, 0, 1, "", "");
                    q.text = format!("{p} principle");
                    q
                },
                categories: vec![],
            })
            .collect(),
        profiles: vec![],
        source_registry: SourceFramework::seed_registry(),
    }
}

pub fn profile(id: &str, ids: Vec<String>) -> Profile {
    Profile {
        id: id.into(),
        name: id.into(),
        description: String::new(),
        question_ids: ids,
        evidence_required_override: None,
        threshold_default: None,
    }
}

/// A P1-only bank of `n` questions with random levels, a random follow-up
/// DAG and random gates, plus profile "all" listing every question in a
/// shuffled order.
pub fn random_bank(rng: &mut impl Rng, n: usize) -> QuestionBank {
    let mut levels: Vec<u8> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    levels.sort();
    let density: f64 = rng.gen_range(0.0..0.3);
    let mut questions: Vec<Question> = (0..n)
        .map(|i| {
            let mut q = question(PrincipleId::P1, i as u32 + 1, levels[i], "c", "s");
            q.gate = [Gate::Always, Gate::OnNo, Gate::OnYes][rng.gen_range(0..3)];
            q
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let child = questions[j].global_id.clone();
                questions[i].follow_ups.push(child);
            }
        }
    }
    let mut ids: Vec<String> = questions.iter().map(|q| q.global_id.clone()).collect();
    ids.shuffle(rng);
    let mut bank = empty_bank();
    bank.principles[0].categories.push(RiskCategory {
        id: "c".into(),
        name: "c".into(),
        principle: PrincipleId::P1,
        subcategories: vec![SubCategory {
            id: "s".into(),
            name: "s".into(),
            questions,
        }],
    });
    bank.profiles.push(profile("all", ids));
    bank
}

pub fn random_answer(rng: &mut impl Rng) -> AnswerValue {
    AnswerValue::ALL[rng.gen_range(0..3)]
}

/// Parent lists computed straight from the follow-up edges.
pub fn parents_of(bank: &QuestionBank) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for q in bank.subquestions() {
        for c in &q.follow_ups {
            out.entry(c.clone()).or_default().push(q.global_id.clone());
        }
    }
    out
}

pub fn gate_ok(gate: Gate, parent: Option<AnswerValue>) -> bool {
    match gate {
        Gate::Always => parent.is_some(),
        Gate::OnNo => parent == Some(AnswerValue::No),
        Gate::OnYes => parent == Some(AnswerValue::Yes),
    }
}

pub fn ancestors(parents: &BTreeMap<String, Vec<String>>, id: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![id.to_string()];
    while let Some(x) = stack.pop() {
        for p in parents.get(&x).into_iter().flatten() {
            if out.insert(p.clone()) {
                stack.push(p.clone());
            }
        }
    }
    out
}

/// Violations found while driving one random session to exhaustion, each
/// step asking for up to `k` questions and answering one at random.
pub fn drive_to_exhaustion(bank: &QuestionBank, rng: &mut impl Rng) -> Vec<String> {
    use rai_core::navigator::Navigator;
    let nav = Navigator::new(bank, "all").unwrap();
    let parents = parents_of(bank);
    let gates: BTreeMap<String, Gate> = bank.subquestions().map(|q| (q.global_id.clone(), q.gate)).collect();
    let mut answers: BTreeMap<String, AnswerValue> = BTreeMap::new();
    let mut violations = Vec::new();
    let oracle_eligible = |answers: &BTreeMap<String, AnswerValue>, id: &str| {
        !answers.contains_key(id)
            && parents
                .get(id)
                .into_iter()
                .flatten()
                .all(|p| gate_ok(gates[id], answers.get(p).copied()))
    };
    loop {
        let k = rng.gen_range(1..=4);
        let answered: BTreeSet<String> = answers.keys().cloned().collect();
        let next: Vec<String> = nav
            .eligible(&answers, &answered)
            .into_iter()
            .take(k)
            .map(|q| q.global_id.clone())
            .collect();
        if next.is_empty() {
            break;
        }
        for id in &next {
            if answers.contains_key(id) {
                violations.push(format!("{id} surfaced after being answered"));
            }
            if let Some(a) = ancestors(&parents, id).iter().find(|a| !answers.contains_key(*a)) {
                violations.push(format!("{id} surfaced before ancestor {a}"));
            }
            if !oracle_eligible(&answers, id) {
                violations.push(format!("{id} surfaced while ineligible"));
            }
        }
        let pick = next.choose(rng).unwrap().clone();
        answers.insert(pick, random_answer(rng));
    }
    for q in bank.subquestions() {
        if oracle_eligible(&answers, &q.global_id) {
            violations.push(format!("{} eligible but never surfaced", q.global_id));
        }
    }
    violations
}
