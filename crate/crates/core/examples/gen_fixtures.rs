//! Regenerates the committed data files under `crates/core/data/`.
//!
//! ```text
//! cargo run -p rai-core --example gen_fixtures
//! ```
//!
//! Question texts quoted from the published bank are reproduced verbatim.
//! Everything prefixed `[placeholder]` or `[synthetic]` is filler that only
//! exists to reach documented counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rai_core::canonical::to_canonical_string;
use rai_core::compliance::{
    serialize_requirement_set, FollowUpMapping, MappingRow, Requirement, RequirementMapping,
    RequirementSet,
};
use rai_core::ingest::{serialize_bank, serialize_extension, CandidateQuestion, Overlap, SourceExtension};
use rai_core::model::{
    format_global_id, validate, Gate, InternalId, LifecycleStage, Metric, PrincipleEntry,
    PrincipleId, Question, QuestionBank, QuestionLevel, RiskCategory, SourceFramework, SubCategory,
};
use rai_core::navigator::Profile;

use LifecycleStage::*;
use PrincipleId::*;

const PRINCIPLE_QUESTIONS: [&str; 8] = [
    "Does the AI system benefit human, society and environment?",
    "Does the AI system respect human rights, diversity and autonomy of individuals?",
    "Is the AI system inclusive and accessible, and free from unfair discrimination against individuals, communities or groups?",
    "Is the AI system designed to protect privacy and to secure the data it uses?",
    "Does the AI system operate reliably and safely in accordance with its intended purpose?",
    "Is the AI system transparent, explainable and effectively communicated to its users and stakeholders?",
    "Can users and affected parties challenge the outcomes of the AI system and have them reviewed?",
    "Is there clear accountability for the AI system and its outcomes?",
];

struct Builder {
    bank: QuestionBank,
    next_seq: BTreeMap<PrincipleId, u32>,
    next_ref: BTreeMap<String, u32>,
}

struct Spec<'a> {
    sub: &'a str,
    level: u8,
    stage: LifecycleStage,
    text: &'a str,
    sources: &'a [&'a str],
}

fn spec<'a>(sub: &'a str, level: u8, stage: LifecycleStage, text: &'a str, sources: &'a [&'a str]) -> Spec<'a> {
    Spec {
        sub,
        level,
        stage,
        text,
        sources,
    }
}

impl Builder {
    fn new(version: &str) -> Self {
        let principles = PrincipleId::ALL
            .iter()
            .map(|&p| PrincipleEntry {
                principle: p,
                principle_question: Question {
                    global_id: format_global_id(p, 0),
                    internal_ids: vec![],
                    text: PRINCIPLE_QUESTIONS[p.number() as usize - 1].to_string(),
                    level: QuestionLevel::ONE,
                    stage: Planning,
                    principle: p,
                    category_id: String::new(),
                    subcategory_id: String::new(),
                    sources: vec![],
                    metric: None,
                    evidence_required: false,
                    follow_ups: vec![],
                    gate: Gate::Always,
                },
                categories: vec![],
            })
            .collect();
        Self {
            bank: QuestionBank {
                version: version.to_string(),
                principles,
                profiles: vec![],
                source_registry: SourceFramework::seed_registry(),
            },
            next_seq: BTreeMap::new(),
            next_ref: BTreeMap::new(),
        }
    }

    fn category(&mut self, p: PrincipleId, id: &str, name: &str, subs: &[(&str, &str)]) {
        let entry = &mut self.bank.principles[p.number() as usize - 1];
        entry.categories.push(RiskCategory {
            id: id.to_string(),
            name: name.to_string(),
            principle: p,
            subcategories: subs
                .iter()
                .map(|(id, name)| SubCategory {
                    id: id.to_string(),
                    name: name.to_string(),
                    questions: vec![],
                })
                .collect(),
        });
    }

    fn internal_ref(&mut self, code: &str, scheme: &str) -> String {
        let n = self.next_ref.entry(format!("{scheme}{code}")).or_insert(0);
        *n += 1;
        format!("{code}-{scheme}{:03}", *n)
    }

    /// Adds a question to sub-category `s.sub` and returns its global id.
    fn add(&mut self, p: PrincipleId, s: Spec<'_>) -> String {
        self.add_with_refs(p, s, "")
    }

    fn add_with_refs(&mut self, p: PrincipleId, s: Spec<'_>, scheme: &str) -> String {
        let seq = self.next_seq.entry(p).or_insert(0);
        *seq += 1;
        let global_id = format_global_id(p, *seq);
        let internal_ids = s
            .sources
            .iter()
            .map(|code| InternalId::new(*code, self.internal_ref(code, scheme)))
            .collect();
        let entry = &mut self.bank.principles[p.number() as usize - 1];
        let (cat, sub) = entry
            .categories
            .iter_mut()
            .find_map(|c| {
                let cid = c.id.clone();
                c.subcategories
                    .iter_mut()
                    .find(|x| x.id == s.sub)
                    .map(|sub| (cid, sub))
            })
            .unwrap_or_else(|| panic!("no sub-category {} under {p}", s.sub));
        sub.questions.push(Question {
            global_id: global_id.clone(),
            internal_ids,
            text: s.text.to_string(),
            level: QuestionLevel::new(s.level as i64).unwrap(),
            stage: s.stage,
            principle: p,
            category_id: cat,
            subcategory_id: s.sub.to_string(),
            sources: s.sources.iter().map(|c| c.to_string()).collect(),
            metric: None,
            evidence_required: false,
            follow_ups: vec![],
            gate: Gate::Always,
        });
        global_id
    }

    fn question_mut(&mut self, id: &str) -> &mut Question {
        self.bank
            .principles
            .iter_mut()
            .flat_map(|e| e.categories.iter_mut())
            .flat_map(|c| c.subcategories.iter_mut())
            .flat_map(|s| s.questions.iter_mut())
            .find(|q| q.global_id == id)
            .unwrap()
    }

    fn follow(&mut self, parent: &str, children: &[&String]) {
        let q = self.question_mut(parent);
        q.follow_ups.extend(children.iter().map(|c| c.to_string()));
    }

    fn metric(&mut self, id: &str, name: &str, description: &str, unit: &str) {
        let q = self.question_mut(id);
        q.metric = Some(Metric {
            name: name.into(),
            description: description.into(),
            unit: unit.into(),
        });
        q.evidence_required = true;
    }

    fn profile(&mut self, id: &str, name: &str, description: &str, ids: &[String], evidence: Option<bool>) {
        self.bank.profiles.push(Profile {
            id: id.into(),
            name: name.into(),
            description: description.into(),
            question_ids: ids.to_vec(),
            evidence_required_override: evidence,
            threshold_default: None,
        });
    }

    fn finish(self) -> QuestionBank {
        let report = validate(&self.bank);
        assert!(report.violations.is_empty(), "{:#?}", report.violations);
        self.bank
    }
}

const STAGES: [LifecycleStage; 7] = LifecycleStage::ALL;

struct Seed {
    bank: QuestionBank,
    /// Question ids mapped to E01..E21, in requirement order.
    eu: Vec<String>,
    agent: Vec<String>,
    fm: Vec<String>,
    key: String,
    metrics: [String; 3],
}

fn seed_categories(b: &mut Builder) {
    b.category(P1, "p1-environmental", "Environmental impact", &[("p1-env-assessment", "Impact assessment")]);
    b.category(P1, "p1-social", "Social impact", &[("p1-soc-assessment", "Impact assessment")]);
    b.category(P1, "p1-human", "Human impact", &[("p1-hum-assessment", "Impact assessment")]);

    b.category(P2, "p2-rights", "Human rights", &[("p2-rights-regulatory", "Regulatory requirements")]);
    b.category(P2, "p2-oversight", "Human oversight", &[("p2-oversight-mechanisms", "Oversight mechanisms")]);
    b.category(P2, "p2-agency", "Human agency", &[("p2-agency-task", "Task allocation")]);

    b.category(P3, "p3-bias", "Bias identification", &[("p3-bias-data", "Data and model bias")]);
    b.category(
        P3,
        "p3-impact",
        "Impact assessment",
        &[("p3-diversity", "Diversity and inclusion"), ("p3-stakeholder", "Stakeholder impact")],
    );

    b.category(P4, "p4-privacy", "Privacy protection", &[("p4-privacy-policy", "Privacy policy")]);
    b.category(
        P4,
        "p4-data-protection",
        "Data protection",
        &[("p4-data-access", "Access control"), ("p4-data-definition", "Data definition")],
    );
    b.category(
        P4,
        "p4-data-quality",
        "Data quality management",
        &[("p4-data-source", "Data source management"), ("p4-data-processing", "Data processing")],
    );

    b.category(P5, "p5-performance", "System performance", &[("p5-accuracy", "Accuracy")]);
    b.category(P5, "p5-test", "System test", &[("p5-evaluation", "Model evaluation")]);
    b.category(P5, "p5-reliability", "System reliability", &[("p5-consistency", "Consistency")]);
    b.category(P5, "p5-resilience", "System resilience", &[("p5-fault-tolerance", "Fault tolerance")]);
    b.category(P5, "p5-adverse", "Adverse impact", &[("p5-harm-prevention", "Harm prevention")]);

    b.category(
        P6,
        "p6-transparency",
        "Transparency",
        &[("p6-technical-spec", "Technical specification"), ("p6-registration", "Registration")],
    );
    b.category(P6, "p6-explainability", "Explainability", &[("p6-interpretability", "Interpretability")]);
    b.category(P6, "p6-communication", "Communication", &[("p6-user-information", "User information")]);

    b.category(P7, "p7-interface", "Human interface", &[("p7-contest-channel", "Contest channel")]);
    b.category(P7, "p7-appeal", "Right to appeal", &[("p7-review", "Decision review")]);

    b.category(
        P8,
        "p8-auditability",
        "Auditability",
        &[("p8-audit-mechanisms", "Audit mechanisms"), ("p8-record-keeping", "Record keeping")],
    );
    b.category(P8, "p8-tradeoffs", "Trade-offs analysis", &[("p8-tradeoff-values", "Interests and values")]);
    b.category(P8, "p8-redress", "Redressibility", &[("p8-redress-process", "Redress process")]);
    b.category(P8, "p8-framework", "Accountability framework", &[("p8-roles", "Roles and responsibilities")]);
    b.category(
        P8,
        "p8-management",
        "AI management",
        &[
            ("p8-project-mgmt", "AI project management"),
            ("p8-risk-mgmt", "Risk management"),
            ("p8-incident-mgmt", "Incident management"),
            ("p8-competency", "Competency management"),
            ("p8-leadership", "Leadership management"),
            ("p8-supply-chain", "Supply chain"),
        ],
    );
}

fn placeholder_eu(n: u32) -> String {
    format!("[placeholder] Risk question mapped to requirement E{n:02} (non-normative)")
}

fn seed() -> Seed {
    let mut b = Builder::new("1.0.0-seed");
    seed_categories(&mut b);

    // Environmental impact pair, with the follow-up surfacing after the parent.
    let env = b.add(P1, spec("p1-env-assessment", 1, Planning,
        "Do you assess and document environmental impact and sustainability of AI model training and management activities?",
        &["NIST", "EU"]));
    let env_reduce = b.add(P1, spec("p1-env-assessment", 2, Operation,
        "Do you ensure measures to reduce the environmental impact of your AI system’s life cycle?", &["EU"]));
    b.follow(&env, &[&env_reduce]);
    let fm7 = b.add(P1, spec("p1-env-assessment", 1, Operation,
        "Does the model provider assess and document environmental impact and sustainability of AI model training and management activities?",
        &["EU-Act"]));

    // Requirement-mapped questions. E01 and E04 use published wording; the
    // rest paraphrase the requirement they cover.
    let e01 = b.add(P8, spec("p8-risk-mgmt", 1, Planning,
        "Do you establish an AI risk management system to conduct ongoing risk assessment and treatment?", &["EU-Act"]));
    let e02 = b.add(P4, spec("p4-data-processing", 2, Requirements,
        "Do you examine your datasets through relevant data preparation, prior quality assessment and examination of possible biases, data gaps or shortcomings?",
        &["EU-Act"]));
    let e03 = b.add(P6, spec("p6-technical-spec", 1, Design,
        "Do you document a general description of the AI system, including its intended purpose, and a detailed description of its design specification and architecture?",
        &["EU-Act"]));
    let e04 = b.add(P8, spec("p8-audit-mechanisms", 1, Design,
        "Do you establish mechanisms that facilitate the system’s auditability?", &["EU-Act"]));
    let e05 = b.add(P6, spec("p6-user-information", 2, Deployment,
        "Do you provide user instructions covering provider details, capabilities and limitations, intended purposes, performance and specifications of the AI system?",
        &["EU-Act"]));
    let e06 = b.add(P6, spec("p6-user-information", 1, Deployment,
        "Do you inform users that they are interacting with an AI system and when content has been artificially generated or manipulated?",
        &["EU-Act"]));
    let e07 = b.add(P2, spec("p2-oversight-mechanisms", 1, Design,
        "Can people overseeing the AI system monitor its operation, consider over-reliance, override or reverse its output and interrupt the system, for example through a stop button?",
        &["EU-Act"]));
    let e08 = b.add(P4, spec("p4-data-access", 1, Implementation,
        "Do you implement cybersecurity and resilience measures to prevent and control attacks on the AI system?", &["EU-Act"]));
    let e09 = b.add(P6, spec("p6-registration", 2, Deployment,
        "Do you register the AI system in the EU-wide database before placing it on the market or putting it into service?",
        &["EU-Act"]));
    let e10 = b.add(P8, spec("p8-project-mgmt", 1, Testing,
        "Do you carry out a conformity assessment and maintain a process for managing the conformity of the AI system?", &["EU-Act"]));
    let placeholders: [(PrincipleId, &str); 11] = [
        (P1, "p1-soc-assessment"),
        (P3, "p3-bias-data"),
        (P3, "p3-bias-data"),
        (P5, "p5-consistency"),
        (P5, "p5-fault-tolerance"),
        (P5, "p5-harm-prevention"),
        (P7, "p7-review"),
        (P8, "p8-tradeoff-values"),
        (P4, "p4-privacy-policy"),
        (P2, "p2-agency-task"),
        (P6, "p6-user-information"),
    ];
    let mut eu = vec![e01.clone(), e02, e03, e04, e05, e06, e07, e08, e09, e10.clone()];
    for (i, (p, sub)) in placeholders.iter().enumerate() {
        let text = placeholder_eu(11 + i as u32);
        eu.push(b.add(*p, spec(sub, 1, STAGES[i % 7], &text, &[])));
    }

    // Level examples for explainability, chained parent to child.
    let l1 = b.add(P6, spec("p6-interpretability", 1, Design,
        "Does the outcome result in something that all users can understand?", &["EU"]));
    let l2 = b.add(P6, spec("p6-interpretability", 2, Design,
        "Do you design the AI system with interpretability in mind from the start?", &["EU"]));
    let l3 = b.add(P6, spec("p6-interpretability", 3, Implementation,
        "Do you research and try to use the simplest and most interpretable model possible for the AI system?", &[]));
    b.follow(&l1, &[&l2]);
    b.follow(&l2, &[&l3]);

    // AI agent RAI plugins.
    let a1 = b.add(P8, spec("p8-risk-mgmt", 1, Operation,
        "Does the agent have risk management mechanisms to conduct ongoing risk assessment and treatment?", &["ISO"]));
    let a2 = b.add(P8, spec("p8-risk-mgmt", 2, Operation, "Does the agent conduct AI risk assessment?", &["ISO"]));
    let a3 = b.add(P8, spec("p8-risk-mgmt", 2, Operation, "Does the agent implement the AI risk treatment plan?", &["ISO"]));
    let a4 = b.add(P8, spec("p8-record-keeping", 1, Implementation,
        "Does the agent have a logging function to record interactions or data?", &["EU"]));
    let a5 = b.add(P8, spec("p8-record-keeping", 2, Operation,
        "Does the agent record all the recommendations or decisions made by the system?", &["AIA"]));
    let a6 = b.add(P8, spec("p8-record-keeping", 2, Operation,
        "Does the agent share the records with stakeholders when required?", &["AIA"]));
    let a7 = b.add(P6, spec("p6-interpretability", 1, Design,
        "Can the agent produce outcomes that all users can understand?", &["EU"]));
    let a8 = b.add(P6, spec("p6-interpretability", 2, Design,
        "Is the agent designed with interpretability in mind from the start?", &["EU"]));
    let a9 = b.add(P6, spec("p6-technical-spec", 2, Design,
        "Do you document and provide technical specification including the intended purposes, potentially beneficial uses, limitations and outputs of the agent?",
        &["NIST"]));
    let a10 = b.add(P2, spec("p2-oversight-mechanisms", 1, Design,
        "Is the agent designed to have an appropriate level of oversight and control for foundation models?", &["EU"]));
    let a11 = b.add(P5, spec("p5-harm-prevention", 2, Operation,
        "Does the agent monitor and control adversarial inputs, harmful or undesirable outputs to users and other components?",
        &["EU"]));
    let a12 = b.add(P8, spec("p8-supply-chain", 1, Implementation,
        "Do you register all components including external tools, agents and models?", &[]));
    let a13 = b.add(P8, spec("p8-supply-chain", 2, Operation,
        "Does the AI agent verify the provenance of the components and manage their execution?", &[]));
    b.follow(&a1, &[&a2, &a3]);
    b.follow(&a4, &[&a5, &a6]);
    b.follow(&a7, &[&a8]);
    b.follow(&a12, &[&a13]);
    let agent = vec![a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11, a12, a13];

    // Foundation models from the agent developer's side.
    let f1 = b.add(P8, spec("p8-risk-mgmt", 1, Operation,
        "Does the model provider conduct ongoing risk assessment and treatment?", &["EU-Act"]));
    let f2 = b.add(P8, spec("p8-risk-mgmt", 2, Operation,
        "Does the model provider involve external experts in risk management?", &["EU-Act"]));
    let f3 = b.add(P4, spec("p4-data-source", 1, Requirements,
        "Does the model provider assess the quality of the data sources used for training?", &["EU-Act"]));
    let f4 = b.add(P4, spec("p4-data-definition", 2, Requirements,
        "Does the model provider document detailed summary of the use of training data protected under copyright law?",
        &["EU-Act"]));
    let f5 = b.add(P6, spec("p6-technical-spec", 1, Deployment,
        "Does the model provider document and provide technical specification?", &["EU-Act"]));
    let f6 = b.add(P6, spec("p6-user-information", 2, Deployment,
        "Does the model provider provide intelligible instructions for use?", &["EU-Act"]));
    let f8 = b.add(P5, spec("p5-evaluation", 1, Testing,
        "Does the model provider conduct and document model evaluation through its lifecycle?", &["EU-Act"]));
    b.follow(&f1, &[&f2]);
    let fm = vec![f1, f2, f3, f4, f5, f6, fm7, f8];

    // Accountability deep dive: key question with three metric sub-questions.
    let key = b.add(P8, spec("p8-roles", 1, Planning,
        "Does the company have designated responsibility for AI and RAI within the organisation?", &[]));
    let m1 = b.add(P8, spec("p8-risk-mgmt", 2, Operation,
        "Does the company establish methods and metrics to quantify and measure the risks associated with its AI systems?", &[]));
    let m2 = b.add(P8, spec("p8-incident-mgmt", 2, Operation,
        "Does the company have a clear reporting system or process in place for serious AI incidents to inform external stakeholders (e.g., market surveillance authorities, communities) beyond the company?",
        &[]));
    let m3 = b.add(P8, spec("p8-roles", 2, Planning,
        "Does the company have an accountability framework to ensure that AI related roles and responsibilities are clearly defined?", &[]));
    b.metric(&m1, "Number of AI risk metrics", "e.g., risk exposure index, risk severity score", "count");
    b.metric(&m2, "Number of AI incidents informed to external stakeholders", "Serious AI incidents reported beyond the company", "count");
    b.metric(&m3, "Percentage of defined AI roles and responsibilities", "Share of AI related roles with defined responsibilities", "percentage");
    b.follow(&key, &[&m1, &m2, &m3]);
    b.follow(&e01, &[&m1]);

    // ESG deep-dive filler up to the documented 42 sub-questions.
    let esg_subs: [(PrincipleId, &[&str]); 8] = [
        (P1, &["p1-soc-assessment", "p1-hum-assessment", "p1-env-assessment", "p1-soc-assessment", "p1-hum-assessment"]),
        (P2, &["p2-rights-regulatory", "p2-rights-regulatory", "p2-oversight-mechanisms", "p2-agency-task", "p2-agency-task"]),
        (P3, &["p3-diversity", "p3-diversity", "p3-stakeholder", "p3-stakeholder", "p3-bias-data"]),
        (P4, &["p4-privacy-policy", "p4-privacy-policy", "p4-data-access", "p4-data-definition", "p4-data-source", "p4-data-processing"]),
        (P5, &["p5-accuracy", "p5-accuracy", "p5-consistency", "p5-fault-tolerance", "p5-harm-prevention"]),
        (P6, &["p6-technical-spec", "p6-registration", "p6-interpretability", "p6-user-information", "p6-user-information"]),
        (P7, &["p7-contest-channel", "p7-contest-channel", "p7-contest-channel", "p7-review", "p7-review"]),
        (P8, &["p8-redress-process", "p8-competency", "p8-leadership"]),
    ];
    let mut esg = Vec::new();
    let mut n = 0;
    for (p, subs) in esg_subs {
        if p == P8 {
            esg.extend([m1.clone(), m2.clone(), m3.clone()]);
        }
        for sub in subs {
            n += 1;
            let text = format!("[placeholder] ESG deep-dive question {n:02} for {} (non-normative)", p.name());
            esg.push(b.add(p, spec(sub, 2, STAGES[n % 7], &text, &[])));
        }
    }
    assert_eq!(n, 39);
    assert_eq!(esg.len(), 42);

    b.profile(
        "agent-rai-plugins",
        "AI agent RAI plugins",
        "Risk questions for the five RAI plugin components of a foundation-model based AI agent",
        &agent,
        None,
    );
    b.profile(
        "foundation-model",
        "Foundation model",
        "Verifying a foundation model from the AI agent developer perspective",
        &fm,
        None,
    );
    b.profile(
        "esg-deep-dive",
        "ESG RAI deep dive",
        "Deep-dive assessment for investors; every Yes answer needs supporting evidence",
        &esg,
        Some(true),
    );
    b.profile(
        "eu-high-risk",
        "EU AI Act high-risk",
        "Questions mapped to the key requirements for high-risk AI systems",
        &eu,
        None,
    );

    Seed {
        bank: b.finish(),
        eu,
        agent,
        fm,
        key,
        metrics: [m1, m2, m3],
    }
}

fn table1_mirror() -> QuestionBank {
    // (category, [(sub-categories, questions)]) per principle, and sources.
    type Layout = (PrincipleId, &'static [(&'static str, usize, usize)], &'static [&'static str]);
    let layout: [Layout; 8] = [
        (P1, &[("Environmental impact", 3, 5), ("Social impact", 2, 5), ("Human impact", 2, 4)], &["NIST", "EU", "NSW", "MS"]),
        (P2, &[("Human rights", 2, 5), ("Human oversight", 2, 9), ("Human agency", 1, 3)], &["NIST", "EU", "MS"]),
        (P3, &[("Bias identification", 4, 12), ("Impact assessment", 2, 20)], &["NIST", "EU", "NSW", "MS"]),
        (P4, &[("Privacy protection", 3, 15), ("Data protection", 3, 16), ("Data quality management", 3, 16)],
            &["NIST", "EU", "AIA", "NSW", "MS", "EU-Act"]),
        (P5, &[("System performance", 2, 8), ("System test", 3, 10), ("System reliability", 2, 8),
               ("System resilience", 2, 8), ("Adverse impact", 2, 8)],
            &["NIST", "EU", "AIA", "NSW", "MS", "EU-Act"]),
        (P6, &[("Transparency", 3, 12), ("Explainability", 3, 11), ("Communication", 3, 9)], &["NIST", "EU", "AIA", "MS"]),
        (P7, &[("Human interface", 2, 2), ("Right to appeal", 2, 2)], &["AIA", "NIST"]),
        (P8, &[("Auditability", 3, 11), ("Trade-offs analysis", 1, 1), ("Redressibility", 1, 2),
               ("Accountability framework", 1, 3), ("AI management", 8, 40)],
            &["NIST", "EU", "AIA", "MS", "EU-Act", "ISO"]),
    ];
    let mut b = Builder::new("table1-mirror");
    for (p, cats, sources) in layout {
        let mut k = 0usize;
        for (ci, (cat, subs, questions)) in cats.iter().enumerate() {
            let cat_id = format!("p{}-c{}", p.number(), ci + 1);
            let sub_ids: Vec<(String, String)> = (0..*subs)
                .map(|si| (format!("{cat_id}-s{}", si + 1), format!("{cat} {}", si + 1)))
                .collect();
            let sub_refs: Vec<(&str, &str)> = sub_ids.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            b.category(p, &cat_id, cat, &sub_refs);
            for qi in 0..*questions {
                let (sub, sub_name) = &sub_ids[qi % subs];
                let text = format!("[synthetic] {sub_name} question {}", qi / subs + 1);
                let source = [sources[k % sources.len()]];
                b.add_with_refs(p, spec(sub, (k % 3 + 1) as u8, STAGES[k % 7], &text, &source), "T");
                k += 1;
            }
        }
    }
    b.finish()
}

fn requirement(id: &str, category: &str, description: &str, section: &str, principle: PrincipleId) -> Requirement {
    Requirement {
        id: id.into(),
        category: category.into(),
        description: description.into(),
        document_section: section.into(),
        principle,
    }
}

fn table4() -> Vec<Requirement> {
    vec![
        requirement("E01", "Risk management", "Risk management system shall be established, implemented, documented and maintained.", "Art. 9", P8),
        requirement("E02", "Data governance and management", "For datasets, should consider relevant data preparation, prior quality assessment, examination (e.g., biases), possible data gaps or shortcoming.", "Art. 10", P4),
        requirement("E03", "Technical specification", "General description (e.g., intended purpose) and detailed description (e.g., design specification, architecture).", "Art. 11", P6),
        requirement("E04", "Record keeping", "Record keeping of all relevant documentation and information for traceability.", "Art. 12", P8),
        requirement("E05", "Transparency", "User instructions including provider details, capabilities and limitations, purposes, performance, specifications, etc.", "Art. 13", P6),
        requirement("E06", "Transparency", "If the AI system is interacting with humans, the users should be informed that they are interacting with an AI system and the content has been artificially generated or manipulated.", "Art. 52", P6),
        requirement("E07", "Human oversight", "Monitor its operation, consider over-reliance, override or reverse the output and intervene on the operation or interupt the system (e.g., through a “stop” button).", "Art. 14", P2),
        requirement("E08", "Cybersecurity", "Cybersecurity and resilience to prevent and control for attacks.", "Art. 15", P4),
        requirement("E09", "Register", "Register their systems in an EU-wide database in any external AI database (e.g., EU-wide database).", "Art. 51", P6),
        requirement("E10", "Compliance", "Conformity assessment and management process.", "Art. 43", P8),
    ]
}

fn one_to_one(reqs: &[Requirement], questions: &[String]) -> RequirementMapping {
    RequirementMapping::new(
        reqs.iter()
            .zip(questions)
            .map(|(r, q)| MappingRow::new(&r.id, q))
            .collect(),
    )
}

fn requirement_sets(seed: &Seed) -> Vec<RequirementSet> {
    let mut eu = table4();
    let principles = [P1, P3, P3, P5, P5, P5, P7, P8, P4, P2, P6];
    for (i, p) in principles.iter().enumerate() {
        let id = format!("E{:02}", 11 + i);
        eu.push(requirement(
            &id,
            "Placeholder",
            &format!("[placeholder] Requirement {id} (non-normative; not enumerated in the published list)"),
            "n/a",
            *p,
        ));
    }
    let followups = FollowUpMapping {
        rows: vec![(seed.eu[0].clone(), seed.metrics[0].clone())],
    };
    let eu_full = RequirementSet {
        id: "eu-high-risk".into(),
        name: "EU AI Act high-risk requirements".into(),
        mapping: one_to_one(&eu, &seed.eu),
        requirements: eu,
        followups: followups.clone(),
        default_threshold: None,
    };
    let t4 = table4();
    let eu_table4 = RequirementSet {
        id: "eu-table4".into(),
        name: "EU AI Act high-risk requirements (published examples)".into(),
        mapping: one_to_one(&t4, &seed.eu[..10]),
        requirements: t4,
        followups,
        default_threshold: None,
    };

    let components: [(&str, &str, PrincipleId, std::ops::Range<usize>); 5] = [
        ("Continuous risk assessor", "Monitor and assess AI risks", P8, 0..3),
        ("Black box recorder", "Record and share the runtime data", P8, 3..6),
        ("Explainer", "Articulate the agent’s roles, capabilities, limitations, the rationale behind its intermediate or final outputs.", P6, 6..9),
        ("Multimodal guardrail", "Control the inputs and outputs of foundation models to meet specific requirements.", P5, 9..11),
        ("AIBOM registry", "Records their supply chain details including AI risk metrics or verifiable RAI credentials.", P8, 11..13),
    ];
    let mut agent_reqs = Vec::new();
    let mut agent_rows = Vec::new();
    for (i, (name, role, p, range)) in components.iter().enumerate() {
        let id = format!("A{:02}", i + 1);
        agent_reqs.push(requirement(&id, name, role, "RAI plugins", *p));
        for q in &seed.agent[range.clone()] {
            agent_rows.push(MappingRow::new(&id, q));
        }
    }
    let agent = RequirementSet {
        id: "agent-rai-plugins".into(),
        name: "AI agent RAI plugins".into(),
        requirements: agent_reqs,
        mapping: RequirementMapping::new(agent_rows),
        followups: FollowUpMapping {
            rows: vec![
                (seed.agent[0].clone(), seed.agent[1].clone()),
                (seed.agent[3].clone(), seed.agent[4].clone()),
                (seed.agent[6].clone(), seed.agent[7].clone()),
                (seed.agent[11].clone(), seed.agent[12].clone()),
            ],
        },
        default_threshold: None,
    };

    let fm_reqs: [(&str, &str, PrincipleId, std::ops::Range<usize>); 5] = [
        ("Risk management", "Risk management and involve external experts. Disclosure: risk assessment and mitigation report.", P8, 0..2),
        ("Data governance", "Suitability of the data sources, possible biases and appropriate mitigation. Disclosure: summaries of training data used.", P4, 2..4),
        ("Documentation", "Documentation for downstream providers. Disclosure: technical specification and user instructions.", P6, 4..6),
        ("Environmental impact", "Measurement of environmental impact. Disclosure: energy usage, carbon emission, tones of waste.", P1, 6..7),
        ("Quality management", "Model evaluation with documented analysis and extensive testing. Disclosure: testing report.", P5, 7..8),
    ];
    let mut reqs = Vec::new();
    let mut rows = Vec::new();
    for (i, (cat, desc, p, range)) in fm_reqs.iter().enumerate() {
        let id = format!("F{:02}", i + 1);
        reqs.push(requirement(&id, cat, desc, "Art. 28b", *p));
        for q in &seed.fm[range.clone()] {
            rows.push(MappingRow::new(&id, q));
        }
    }
    let fm = RequirementSet {
        id: "foundation-model".into(),
        name: "Foundation model verification".into(),
        requirements: reqs,
        mapping: RequirementMapping::new(rows),
        followups: FollowUpMapping {
            rows: vec![(seed.fm[0].clone(), seed.fm[1].clone())],
        },
        default_threshold: None,
    };
    vec![eu_full, eu_table4, agent, fm]
}

fn candidate(reference: String, p: PrincipleId, sub: &str, level: u8, stage: LifecycleStage, text: &str, bank: &QuestionBank) -> CandidateQuestion {
    let category_id = bank
        .principles
        .iter()
        .flat_map(|e| e.categories.iter())
        .find(|c| c.subcategories.iter().any(|s| s.id == sub))
        .unwrap_or_else(|| panic!("no sub-category {sub}"))
        .id
        .clone();
    CandidateQuestion {
        reference,
        principle: p,
        category_id,
        subcategory_id: sub.into(),
        text: text.into(),
        level: QuestionLevel::new(level as i64).unwrap(),
        stage,
        metric: None,
        evidence_required: false,
        follow_ups: vec![],
        gate: Gate::Always,
    }
}

fn eu_act_extension(seed: &Seed) -> SourceExtension {
    let targets: Vec<&String> = seed.eu[..10].iter().chain([0, 2, 3, 4, 7].map(|i| &seed.fm[i])).collect();
    let overlap_map = targets
        .iter()
        .enumerate()
        .map(|(i, id)| Overlap {
            reference: format!("EU-Act-R{:02}", i + 1),
            existing_global_id: id.to_string(),
        })
        .collect();
    let new: [(PrincipleId, &str, u8, LifecycleStage, &str); 10] = [
        (P6, "p6-technical-spec", 2, Implementation, "Do you keep the technical documentation of the general-purpose AI model up to date, including its training and testing process and the results of its evaluation?"),
        (P6, "p6-user-information", 2, Deployment, "Do you make information and documentation available to downstream providers that integrate the general-purpose AI model into their AI systems?"),
        (P4, "p4-data-definition", 1, Requirements, "Do you put in place a policy to respect copyright law when training the model?"),
        (P4, "p4-data-definition", 2, Deployment, "Do you make publicly available a sufficiently detailed summary of the content used for training the model?"),
        (P5, "p5-evaluation", 2, Testing, "Do you perform and document adversarial testing of the model to identify and mitigate systemic risks?"),
        (P8, "p8-incident-mgmt", 1, Operation, "Do you track, document and report serious incidents and possible corrective measures to the relevant authorities?"),
        (P4, "p4-data-access", 2, Operation, "Do you ensure an adequate level of cybersecurity protection for the model and its physical infrastructure?"),
        (P1, "p1-env-assessment", 2, Implementation, "Do you document the known or estimated energy consumption of the model?"),
        (P8, "p8-project-mgmt", 2, Operation, "Do you maintain a post-market monitoring system to collect and review experience gained from the use of the AI system?"),
        (P2, "p2-oversight-mechanisms", 2, Planning, "Do you assign human oversight to natural persons who have the necessary competence, training and authority?"),
    ];
    let new_questions = new
        .iter()
        .enumerate()
        .map(|(i, (p, sub, level, stage, text))| {
            candidate(format!("EU-Act-R{:02}", 16 + i), *p, sub, *level, *stage, text, &seed.bank)
        })
        .collect();
    SourceExtension {
        source: SourceFramework::new("EU-Act", "EU AI Act"),
        new_questions,
        overlap_map,
    }
}

fn iso_extension(seed: &Seed) -> SourceExtension {
    let targets = [
        &seed.agent[0],
        &seed.agent[1],
        &seed.agent[2],
        &seed.eu[0],
        &seed.eu[9],
        &seed.key,
        &seed.metrics[0],
        &seed.metrics[2],
    ];
    let overlap_map = targets
        .iter()
        .enumerate()
        .map(|(i, id)| Overlap {
            reference: format!("ISO-R{:02}", i + 1),
            existing_global_id: id.to_string(),
        })
        .collect();
    let new: [(&str, u8, LifecycleStage, &str); 22] = [
        ("p8-project-mgmt", 1, Planning, "Do you define objectives for the AI system and plan how to achieve them?"),
        ("p8-project-mgmt", 2, Planning, "Do you document the life cycle processes of the AI system for each project?"),
        ("p8-project-mgmt", 2, Planning, "Do you determine the resources needed for developing and operating the AI system?"),
        ("p8-project-mgmt", 2, Operation, "Do you control planned changes to the AI system and review the consequences of unintended changes?"),
        ("p8-project-mgmt", 2, Operation, "Do you evaluate the performance of the AI management system at planned intervals?"),
        ("p8-project-mgmt", 3, Operation, "Do you conduct internal audits of the AI management system?"),
        ("p8-risk-mgmt", 1, Planning, "Do you define criteria for accepting AI risks?"),
        ("p8-risk-mgmt", 2, Design, "Do you conduct an impact assessment of the AI system on individuals, groups and societies?"),
        ("p8-risk-mgmt", 2, Operation, "Do you retain documented results of AI risk assessments?"),
        ("p8-risk-mgmt", 3, Operation, "Do you verify that the controls selected for AI risk treatment are effective?"),
        ("p8-risk-mgmt", 2, Operation, "Do you repeat the AI risk assessment when significant changes are proposed or occur?"),
        ("p8-risk-mgmt", 3, Operation, "Do you record nonconformities and take corrective actions to address them?"),
        ("p8-competency", 1, Planning, "Do you determine the competence required of people doing work on AI systems?"),
        ("p8-competency", 2, Planning, "Do you ensure that people doing work on AI systems are competent on the basis of education, training or experience?"),
        ("p8-competency", 2, Implementation, "Do you take actions to acquire the necessary competence and evaluate their effectiveness?"),
        ("p8-competency", 3, Operation, "Do you retain documented information as evidence of competence?"),
        ("p8-competency", 2, Deployment, "Are people made aware of the AI policy and of their contribution to the AI management system?"),
        ("p8-leadership", 1, Planning, "Does top management establish an AI policy that is appropriate to the purpose of the organisation?"),
        ("p8-leadership", 1, Planning, "Does top management assign responsibilities and authorities for relevant AI roles?"),
        ("p8-leadership", 2, Planning, "Does top management ensure that AI management system requirements are integrated into business processes?"),
        ("p8-leadership", 2, Planning, "Does top management ensure that the resources needed for the AI management system are available?"),
        ("p8-leadership", 2, Deployment, "Do you communicate the AI policy within the organisation and to interested parties as appropriate?"),
    ];
    let new_questions = new
        .iter()
        .enumerate()
        .map(|(i, (sub, level, stage, text))| {
            candidate(format!("ISO-R{:02}", 9 + i), P8, sub, *level, *stage, text, &seed.bank)
        })
        .collect();
    SourceExtension {
        source: SourceFramework::new("ISO", "ISO/IEC 42001:2023 AI management system"),
        new_questions,
        overlap_map,
    }
}

fn write(path: PathBuf, text: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, text).unwrap();
    println!("wrote {}", path.display());
}

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let seed = seed();
    write(data.join("seed_bank.json"), &serialize_bank(&seed.bank));
    write(data.join("table1_mirror.json"), &serialize_bank(&table1_mirror()));
    write(data.join("extensions/eu-act.json"), &serialize_extension(&eu_act_extension(&seed)));
    write(data.join("extensions/iso-42001.json"), &serialize_extension(&iso_extension(&seed)));
    for set in requirement_sets(&seed) {
        write(data.join(format!("requirements/{}.json", set.id)), &serialize_requirement_set(&set));
    }
    let all_yes: BTreeMap<&str, &str> = seed.eu.iter().map(|q| (q.as_str(), "yes")).collect();
    write(
        data.join("answers/eu-high-risk-all-yes.json"),
        &to_canonical_string(&all_yes).unwrap(),
    );
}
