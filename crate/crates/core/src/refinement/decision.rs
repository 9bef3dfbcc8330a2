use serde::{Deserialize, Serialize};

use super::oracle::{OracleFailure, OracleResponse, RequestKind, Verdict};
use crate::ids::{is_pid, is_qid, Ident};
use crate::ingest::{LabelLookup, SampleInstance};
use crate::schema::{GateAddition, IndicatorEdit, ModuleEdit, SchemaConfig, SchemaDiff};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewState {
    #[default]
    Pending,
    Accepted,
    Rejected,
    Annotated,
}

/// Facts shown alongside a decision. Taken from the label store and the
/// classified output only, never from oracle text.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub subject_label: Option<String>,
    pub unclassified_count: u64,
    pub inbound_refs: u64,
    pub samples: Vec<SampleInstance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleDecision {
    /// `r<round>-<n>`, unique within a run.
    pub id: String,
    pub round: usize,
    pub kind: RequestKind,
    pub subject: String,
    /// `None` when the oracle failed to answer.
    pub verdict: Option<Verdict>,
    pub rationale: String,
    pub evidence: Evidence,
    /// Reasons this decision cannot enter a diff.
    pub issues: Vec<String>,
    pub review: ReviewState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Edits this decision contributes when accepted.
    pub diff: SchemaDiff,
}

impl OracleDecision {
    /// Turn an oracle answer into a decision, checking it against the
    /// current schema and label store.
    #[allow(clippy::too_many_arguments)]
    pub fn intake(
        id: String,
        round: usize,
        kind: RequestKind,
        subject: &str,
        answer: Result<OracleResponse, OracleFailure>,
        evidence: Evidence,
        schema: &SchemaConfig,
        labels: &dyn LabelLookup,
    ) -> Self {
        let mut d = OracleDecision {
            id,
            round,
            kind,
            subject: subject.to_string(),
            verdict: None,
            rationale: String::new(),
            evidence,
            issues: Vec::new(),
            review: ReviewState::Pending,
            note: None,
            diff: SchemaDiff::default(),
        };
        match answer {
            Err(f) => d.issues.push(format!("undecided: {f}")),
            Ok(r) => {
                d.rationale = r.rationale;
                let (diff, issues) = derive_diff(kind, subject, &r.verdict, schema, labels);
                d.diff = diff;
                d.issues = issues;
                d.verdict = Some(r.verdict);
            }
        }
        d
    }

    pub fn is_decline(&self) -> bool {
        matches!(self.verdict, Some(Verdict::Decline))
    }

    /// Valid, non-empty, and not a decline.
    pub fn is_actionable(&self) -> bool {
        self.issues.is_empty() && !self.diff.is_empty()
    }

    pub fn enters_diff(&self) -> bool {
        self.review == ReviewState::Accepted && self.is_actionable()
    }
}

/// Union of the diffs of accepted, actionable decisions, in order.
pub fn accepted_diff<'a>(decisions: impl IntoIterator<Item = &'a OracleDecision>) -> SchemaDiff {
    let mut diff = SchemaDiff::default();
    for d in decisions.into_iter().filter(|d| d.enters_diff()) {
        diff.extend(d.diff.clone());
    }
    diff
}

struct Grounding<'a> {
    labels: &'a dyn LabelLookup,
    diff_labels: std::collections::BTreeMap<String, String>,
    issues: Vec<String>,
}

impl Grounding<'_> {
    fn check(&mut self, id: &str) {
        let ident = if is_qid(id) || is_pid(id) { id.parse::<Ident>().ok() } else { None };
        match ident.and_then(|i| self.labels.label(i)) {
            Some(label) => {
                self.diff_labels.insert(id.to_string(), label);
            }
            None => self.issues.push(format!("invalid-identifier: {id}")),
        }
    }
}

fn derive_diff(
    kind: RequestKind,
    subject: &str,
    verdict: &Verdict,
    schema: &SchemaConfig,
    labels: &dyn LabelLookup,
) -> (SchemaDiff, Vec<String>) {
    let mut g = Grounding { labels, diff_labels: Default::default(), issues: Vec::new() };
    let mut diff = SchemaDiff::default();
    match verdict {
        Verdict::Decline => {}
        Verdict::Assign { category, module } => {
            if kind != RequestKind::Category {
                g.issues.push(format!("assign verdict answers a {kind} request"));
            }
            g.check(subject);
            match schema.category(category) {
                None => g.issues.push(format!("unknown-reference: category {category}")),
                Some(c) => {
                    if let Some(m) = module {
                        if c.module(m).is_none() {
                            g.issues.push(format!("unknown-reference: module {category}/{m}"));
                        }
                    } else if !c.indicates(subject) {
                        g.issues.push("unsynchronized-gate: no module given".to_string());
                    }
                }
            }
            if let Some(owner) = schema.categories.iter().find(|c| c.gate_values.contains(subject)) {
                g.issues.push(format!("gate-conflict: {subject} already gates {}", owner.id));
            }
            diff.added_gates.push(GateAddition {
                category: category.clone(),
                type_id: subject.to_string(),
                module: module.clone(),
            });
        }
        Verdict::Indicator { category, module, property, values } => {
            let category = category.clone().unwrap_or_else(|| subject.to_string());
            match schema.category(&category) {
                None => g.issues.push(format!("unknown-reference: category {category}")),
                Some(c) if c.module(module).is_none() => {
                    g.issues.push(format!("unknown-reference: module {category}/{module}"))
                }
                Some(_) => {}
            }
            g.check(property);
            for v in values {
                g.check(v);
            }
            diff.indicator_edits.push(IndicatorEdit {
                category,
                module: module.clone(),
                property: property.clone(),
                values: values.clone(),
            });
        }
        Verdict::ModuleEdit { edits } => {
            for e in edits {
                match e {
                    ModuleEdit::Create { category, module } => {
                        match schema.category(category) {
                            None => g.issues.push(format!("unknown-reference: category {category}")),
                            Some(c) if c.module(&module.name).is_some() => {
                                let created = edits.iter().any(|o| {
                                    matches!(o, ModuleEdit::Delete { category: dc, module: dm } if dc == category && dm == &module.name)
                                });
                                if !created {
                                    g.issues.push(format!("module {category}/{} already exists", module.name));
                                }
                            }
                            Some(_) => {}
                        }
                        for ind in &module.indicators {
                            g.check(&ind.property);
                            for v in &ind.values {
                                g.check(v);
                            }
                        }
                        for p in &module.value_props {
                            g.check(p);
                        }
                    }
                    ModuleEdit::Delete { category, module } => {
                        if schema.category(category).and_then(|c| c.module(module)).is_none() {
                            g.issues.push(format!("unknown-reference: module {category}/{module}"));
                        }
                    }
                }
            }
            diff.module_edits = edits.clone();
        }
    }
    g.issues.dedup();
    diff.labels = g.diff_labels;
    (diff, g.issues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{Pid, Qid};
    use crate::ingest::MemoryLabels;
    use crate::schema::{CategoryDef, Indicator, ModuleDef, ModuleKind};

    fn schema() -> SchemaConfig {
        SchemaConfig {
            version: "t".into(),
            categories: vec![CategoryDef {
                id: "places".into(),
                gate_values: ["Q515".to_string()].into_iter().collect(),
                core_properties: vec![],
                modules: vec![ModuleDef {
                    name: "nature".into(),
                    kind: ModuleKind::Intrinsic,
                    indicators: vec![Indicator::values("P31", ["Q515"])],
                    value_props: vec!["P2044".into()],
                }],
            }],
            ..Default::default()
        }
    }

    fn labels() -> MemoryLabels {
        let mut l = MemoryLabels::new();
        l.insert(Qid(8502), "mountain");
        l.insert(Qid(515), "city");
        l.insert(Pid(2044), "elevation above sea level");
        l
    }

    fn decide(subject: &str, kind: RequestKind, verdict: Verdict) -> OracleDecision {
        let answer = Ok(OracleResponse { verdict, rationale: "why".into() });
        OracleDecision::intake("r0-0".into(), 0, kind, subject, answer, Evidence::default(), &schema(), &labels())
    }

    #[test]
    fn grounded_assign_is_actionable() {
        let d = decide(
            "Q8502",
            RequestKind::Category,
            Verdict::Assign { category: "places".into(), module: Some("nature".into()) },
        );
        assert!(d.is_actionable(), "{:?}", d.issues);
        assert_eq!(d.diff.labels["Q8502"], "mountain");
        assert!(!d.enters_diff());
    }

    #[test]
    fn fabricated_ids_are_flagged() {
        let d = decide(
            "places",
            RequestKind::Module,
            Verdict::Indicator { category: None, module: "nature".into(), property: "P99999".into(), values: vec![] },
        );
        assert_eq!(d.issues, ["invalid-identifier: P99999"]);
        let d = decide("Q77777", RequestKind::Category, Verdict::Assign { category: "places".into(), module: Some("nature".into()) });
        assert!(!d.is_actionable());
    }

    #[test]
    fn already_gated_type_conflicts() {
        let d = decide("Q515", RequestKind::Category, Verdict::Assign { category: "places".into(), module: Some("nature".into()) });
        assert!(d.issues.iter().any(|i| i.starts_with("gate-conflict")));
    }

    #[test]
    fn decline_and_failure_carry_no_edits() {
        let d = decide("Q8502", RequestKind::Category, Verdict::Decline);
        assert!(d.diff.is_empty() && d.is_decline() && !d.is_actionable());
        let f = OracleDecision::intake(
            "x".into(),
            0,
            RequestKind::Category,
            "Q8502",
            Err(OracleFailure::Timeout),
            Evidence::default(),
            &schema(),
            &labels(),
        );
        assert_eq!(f.verdict, None);
        assert_eq!(f.issues, ["undecided: timeout"]);
    }
}
