use crate::model::{
    format_global_id, LifecycleStage, PrincipleEntry, PrincipleId, Question, QuestionBank,
    QuestionLevel, RiskCategory, SourceFramework, SubCategory,
};

fn question(id: String, principle: PrincipleId, level: u8) -> Question {
    Question {
        global_id: id,
        internal_ids: Vec::new(),
        text: format!("{principle} probe"),
        level: QuestionLevel::new(level as i64).unwrap(),
        stage: LifecycleStage::Planning,
        principle,
        category_id: String::new(),
        subcategory_id: String::new(),
        sources: Vec::new(),
        metric: None,
        evidence_required: false,
        follow_ups: Vec::new(),
        gate: Default::default(),
    }
}

/// Eight principle questions and nothing else.
pub fn minimal_bank() -> QuestionBank {
    QuestionBank {
        version: "test".into(),
        principles: PrincipleId::ALL
            .iter()
            .map(|&p| PrincipleEntry {
                principle: p,
                principle_question: question(format_global_id(p, 0), p, 1),
                categories: Vec::new(),
            })
            .collect(),
        profiles: Vec::new(),
        source_registry: SourceFramework::seed_registry(),
    }
}

/// A sub-question placed in `p<n>-cat` / `p<n>-sub`.
pub fn sub_question(principle: PrincipleId, seq: u32, level: u8) -> Question {
    let mut q = question(format_global_id(principle, seq), principle, level);
    q.text = format!("probe {}", q.global_id);
    q.category_id = format!("p{}-cat", principle.number());
    q.subcategory_id = format!("p{}-sub", principle.number());
    q
}

/// Appends `q` under its category and sub-category, creating them if needed.
pub fn insert(bank: &mut QuestionBank, q: Question) {
    let entry = bank
        .principles
        .iter_mut()
        .find(|e| e.principle == q.principle)
        .unwrap();
    let cat = match entry.categories.iter().position(|c| c.id == q.category_id) {
        Some(i) => &mut entry.categories[i],
        None => {
            entry.categories.push(RiskCategory {
                id: q.category_id.clone(),
                name: q.category_id.clone(),
                principle: q.principle,
                subcategories: Vec::new(),
            });
            entry.categories.last_mut().unwrap()
        }
    };
    let sub = match cat.subcategories.iter().position(|s| s.id == q.subcategory_id) {
        Some(i) => &mut cat.subcategories[i],
        None => {
            cat.subcategories.push(SubCategory {
                id: q.subcategory_id.clone(),
                name: q.subcategory_id.clone(),
                questions: Vec::new(),
            });
            cat.subcategories.last_mut().unwrap()
        }
    };
    sub.questions.push(q);
}
