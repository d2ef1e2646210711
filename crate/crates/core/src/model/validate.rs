use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{parse_global_id, PrincipleId, Question, QuestionBank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    PrincipleSet,
    PrincipleQuestion,
    EmptyText,
    MalformedGlobalId,
    DuplicateGlobalId,
    DuplicateCategory,
    DuplicateSubcategory,
    EmptyCategory,
    MisplacedQuestion,
    DanglingFollowUp,
    DuplicateFollowUp,
    CrossPrincipleFollowUp,
    LevelRegression,
    FollowUpCycle,
    UnknownSource,
    DuplicateSource,
    MissingInternalId,
    EmptyMetricName,
    DuplicateProfile,
    DanglingProfileQuestion,
    DuplicateProfileQuestion,
    EmptyPrinciple,
    EmptySubcategory,
}

impl ViolationKind {
    pub fn code(self) -> &'static str {
        use ViolationKind::*;
        match self {
            PrincipleSet => "principle-set",
            PrincipleQuestion => "principle-question",
            EmptyText => "empty-text",
            MalformedGlobalId => "malformed-global-id",
            DuplicateGlobalId => "duplicate-global-id",
            DuplicateCategory => "duplicate-category",
            DuplicateSubcategory => "duplicate-subcategory",
            EmptyCategory => "empty-category",
            MisplacedQuestion => "misplaced-question",
            DanglingFollowUp => "dangling-follow-up",
            DuplicateFollowUp => "duplicate-follow-up",
            CrossPrincipleFollowUp => "cross-principle-follow-up",
            LevelRegression => "level-regression",
            FollowUpCycle => "follow-up-cycle",
            UnknownSource => "unknown-source",
            DuplicateSource => "duplicate-source",
            MissingInternalId => "missing-internal-id",
            EmptyMetricName => "empty-metric-name",
            DuplicateProfile => "duplicate-profile",
            DanglingProfileQuestion => "dangling-profile-question",
            DuplicateProfileQuestion => "duplicate-profile-question",
            EmptyPrinciple => "empty-principle",
            EmptySubcategory => "empty-subcategory",
        }
    }

    fn severity(self) -> Severity {
        match self {
            ViolationKind::EmptyPrinciple | ViolationKind::EmptySubcategory => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] {}: {}", self.kind.code(), self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }

    pub fn is_valid(&self) -> bool {
        self.error_count() == 0
    }
}

struct Checker {
    report: ValidationReport,
}

impl Checker {
    fn push(&mut self, kind: ViolationKind, path: impl Into<String>, message: impl Into<String>) {
        self.report.violations.push(Violation {
            severity: kind.severity(),
            kind,
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Checks every structural rule of the bank and returns the findings.
pub fn validate(bank: &QuestionBank) -> ValidationReport {
    let mut ck = Checker {
        report: ValidationReport::default(),
    };

    // source registry
    let mut codes = HashSet::new();
    for (i, src) in bank.source_registry.iter().enumerate() {
        if !codes.insert(src.code.as_str()) {
            ck.push(
                ViolationKind::DuplicateSource,
                format!("sources[{i}]"),
                format!("duplicate source code {}", src.code),
            );
        }
    }

    // principle set
    if bank.principles.len() != PrincipleId::ALL.len() {
        ck.push(
            ViolationKind::PrincipleSet,
            "principles",
            format!("expected 8 principles, found {}", bank.principles.len()),
        );
    }
    for (i, entry) in bank.principles.iter().enumerate() {
        if PrincipleId::ALL.get(i) != Some(&entry.principle) {
            ck.push(
                ViolationKind::PrincipleSet,
                format!("principles[{i}]"),
                format!("expected {} at position {i}, found {}", expected(i), entry.principle),
            );
        }
    }

    // hierarchy, placement and per-question fields
    let mut seen_ids: HashSet<&str> = HashSet::new();
    let mut category_ids = HashSet::new();
    let mut subcategory_ids = HashSet::new();
    for entry in &bank.principles {
        let p = entry.principle;
        let pq = &entry.principle_question;
        let pq_path = format!("{p}.principle_question");
        if pq.level.get() != 1 {
            ck.push(
                ViolationKind::PrincipleQuestion,
                &pq_path,
                format!("principle question must be level 1, found {}", pq.level),
            );
        }
        if !pq.is_principle_question() {
            ck.push(
                ViolationKind::PrincipleQuestion,
                &pq_path,
                "principle question must not bind a category",
            );
        }
        if pq.principle != p {
            ck.push(
                ViolationKind::MisplacedQuestion,
                &pq_path,
                format!("question declares {} but sits under {p}", pq.principle),
            );
        }
        check_question(&mut ck, bank, &codes, &mut seen_ids, pq, p, &pq_path);

        if entry.categories.is_empty() {
            ck.push(
                ViolationKind::EmptyPrinciple,
                format!("{p}.categories"),
                format!("principle {p} has no categories"),
            );
        }
        for cat in &entry.categories {
            let cpath = format!("{p}/{}", cat.id);
            if !category_ids.insert(cat.id.as_str()) {
                ck.push(
                    ViolationKind::DuplicateCategory,
                    &cpath,
                    format!("category id {} appears more than once", cat.id),
                );
            }
            if cat.principle != p {
                ck.push(
                    ViolationKind::MisplacedQuestion,
                    &cpath,
                    format!("category declares {} but sits under {p}", cat.principle),
                );
            }
            if cat.subcategories.is_empty() {
                ck.push(
                    ViolationKind::EmptyCategory,
                    &cpath,
                    "category has no sub-categories",
                );
            }
            for sub in &cat.subcategories {
                let spath = format!("{cpath}/{}", sub.id);
                if !subcategory_ids.insert(sub.id.as_str()) {
                    ck.push(
                        ViolationKind::DuplicateSubcategory,
                        &spath,
                        format!("sub-category id {} appears more than once", sub.id),
                    );
                }
                if sub.questions.is_empty() {
                    ck.push(
                        ViolationKind::EmptySubcategory,
                        &spath,
                        "sub-category has no questions",
                    );
                }
                for q in &sub.questions {
                    let qpath = format!("{spath}/{}", q.global_id);
                    if q.principle != p || q.category_id != cat.id || q.subcategory_id != sub.id {
                        ck.push(
                            ViolationKind::MisplacedQuestion,
                            &qpath,
                            format!(
                                "question binds {}/{}/{} but sits under {p}/{}/{}",
                                q.principle, q.category_id, q.subcategory_id, cat.id, sub.id
                            ),
                        );
                    }
                    check_question(&mut ck, bank, &codes, &mut seen_ids, q, p, &qpath);
                }
            }
        }
    }

    check_cycles(&mut ck, bank);
    check_profiles(&mut ck, bank);
    ck.report
}

fn expected(i: usize) -> String {
    PrincipleId::ALL
        .get(i)
        .map(|p| p.to_string())
        .unwrap_or_else(|| "nothing".to_string())
}

fn check_question<'b>(
    ck: &mut Checker,
    bank: &QuestionBank,
    codes: &HashSet<&str>,
    seen_ids: &mut HashSet<&'b str>,
    q: &'b Question,
    principle: PrincipleId,
    path: &str,
) {
    if !seen_ids.insert(q.global_id.as_str()) {
        ck.push(
            ViolationKind::DuplicateGlobalId,
            path,
            format!("duplicate global id {}", q.global_id),
        );
    }
    match parse_global_id(&q.global_id) {
        None => ck.push(
            ViolationKind::MalformedGlobalId,
            path,
            format!("global id {:?} does not match QB-P<n>-<seq>", q.global_id),
        ),
        Some((p, _)) if p != principle => ck.push(
            ViolationKind::MalformedGlobalId,
            path,
            format!("global id {} names {p} but question sits under {principle}", q.global_id),
        ),
        Some(_) => {}
    }
    if q.text.trim().is_empty() {
        ck.push(ViolationKind::EmptyText, path, "question text is empty");
    }
    for code in &q.sources {
        if !codes.contains(code.as_str()) {
            ck.push(
                ViolationKind::UnknownSource,
                format!("{path}.sources"),
                format!("source {code} is not in the registry"),
            );
        }
    }
    for iid in &q.internal_ids {
        if !q.has_source(&iid.source) {
            ck.push(
                ViolationKind::UnknownSource,
                format!("{path}.internal_ids"),
                format!("internal id {} names source {} not listed on the question", iid.reference, iid.source),
            );
        }
    }
    if !q.sources.is_empty() && q.internal_ids.is_empty() {
        ck.push(
            ViolationKind::MissingInternalId,
            path,
            "question derived from a source carries no internal id",
        );
    }
    if let Some(m) = &q.metric {
        if m.name.trim().is_empty() {
            ck.push(ViolationKind::EmptyMetricName, format!("{path}.metric"), "metric name is empty");
        }
    }

    let mut targets = HashSet::new();
    for (i, target) in q.follow_ups.iter().enumerate() {
        let fpath = format!("{path}.follow_ups[{i}]");
        if !targets.insert(target.as_str()) {
            ck.push(
                ViolationKind::DuplicateFollowUp,
                &fpath,
                format!("follow-up {target} listed twice"),
            );
            continue;
        }
        let Ok(child) = bank.find_question(target) else {
            ck.push(
                ViolationKind::DanglingFollowUp,
                &fpath,
                format!("dangling follow-up {target}"),
            );
            continue;
        };
        if child.principle != q.principle {
            ck.push(
                ViolationKind::CrossPrincipleFollowUp,
                &fpath,
                format!("follow-up {target} belongs to {} not {}", child.principle, q.principle),
            );
        }
        if child.level < q.level {
            ck.push(
                ViolationKind::LevelRegression,
                &fpath,
                format!(
                    "follow-up {target} is level {} below parent level {}",
                    child.level, q.level
                ),
            );
        }
    }
}

fn check_cycles(ck: &mut Checker, bank: &QuestionBank) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }

    let index = bank.index();
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    let mut ids: Vec<&str> = index.keys().copied().collect();
    ids.sort_unstable();

    for &root in &ids {
        if marks.contains_key(root) {
            continue;
        }
        // iterative DFS: (node, next child position)
        let mut stack: Vec<(&str, usize)> = vec![(root, 0)];
        marks.insert(root, Mark::Open);
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            let children = &index[node].follow_ups;
            if *pos < children.len() {
                let child = children[*pos].as_str();
                *pos += 1;
                let Some((&child, _)) = index.get_key_value(child) else {
                    continue;
                };
                match marks.get(child) {
                    None => {
                        marks.insert(child, Mark::Open);
                        stack.push((child, 0));
                    }
                    Some(Mark::Open) => {
                        let start = stack.iter().position(|(n, _)| *n == child).unwrap_or(0);
                        let cycle: Vec<&str> = stack[start..].iter().map(|(n, _)| *n).collect();
                        ck.push(
                            ViolationKind::FollowUpCycle,
                            node.to_string(),
                            format!("follow-up cycle {} -> {child}", cycle.join(" -> ")),
                        );
                    }
                    Some(Mark::Done) => {}
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
}

fn check_profiles(ck: &mut Checker, bank: &QuestionBank) {
    let index = bank.index();
    let mut profile_ids = HashSet::new();
    for profile in &bank.profiles {
        let path = format!("profiles[{}]", profile.id);
        if !profile_ids.insert(profile.id.as_str()) {
            ck.push(
                ViolationKind::DuplicateProfile,
                &path,
                format!("profile id {} appears more than once", profile.id),
            );
        }
        let mut seen = HashSet::new();
        for qid in &profile.question_ids {
            if !index.contains_key(qid.as_str()) {
                ck.push(
                    ViolationKind::DanglingProfileQuestion,
                    &path,
                    format!("profile references unknown question {qid}"),
                );
            } else if !seen.insert(qid.as_str()) {
                ck.push(
                    ViolationKind::DuplicateProfileQuestion,
                    &path,
                    format!("profile lists {qid} twice"),
                );
            }
        }
    }
}
