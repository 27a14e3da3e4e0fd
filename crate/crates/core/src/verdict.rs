//! Claim-status evaluation and propagation.
//!
//! Solutions are evaluated against the store through their evidence
//! bindings, counterclaim states follow from their mitigating solutions,
//! and claim statuses propagate bottom-up over the SupportedBy DAG. The
//! algebra is conservative: an active (unmitigated) counterclaim defeats
//! the node it challenges outright, any defeated or violated child defeats
//! its parent, and missing evidence makes a claim inconclusive rather than
//! silently satisfied.
//!
//! Reports are value objects with a canonical JSON form (keys sorted,
//! numbers in canonical lexical form) so two runs over equal inputs are
//! byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::aql::{evaluate_aggregate, AggregateOutcome, Comparator, EvalError};
use crate::gsn::{
    validate_case, AssuranceCase, CaseDiagnostic, EvidenceBinding, NodeId, NodeKind, StatusOverlay,
};
use crate::store::{Graph, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionState {
    Satisfied,
    Violated,
    Unknown,
}

impl SolutionState {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolutionState::Satisfied => "Satisfied",
            SolutionState::Violated => "Violated",
            SolutionState::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for SolutionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a bound solution was evaluated: the query, the predicate, and the
/// observed aggregate (absent when the store held no evidence).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalDetail {
    pub query_text: String,
    pub comparator: Comparator,
    pub threshold: Literal,
    pub observed: Option<Literal>,
}

/// Evaluation result for one solution. `detail` is `None` for solutions
/// without an evidence binding; those are always `Unknown`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionStatus {
    pub state: SolutionState,
    pub detail: Option<EvalDetail>,
}

impl SolutionStatus {
    pub fn unbound() -> SolutionStatus {
        SolutionStatus {
            state: SolutionState::Unknown,
            detail: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimStatus {
    Supported,
    Defeated,
    Inconclusive,
    Undeveloped,
}

impl ClaimStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimStatus::Supported => "Supported",
            ClaimStatus::Defeated => "Defeated",
            ClaimStatus::Inconclusive => "Inconclusive",
            ClaimStatus::Undeveloped => "Undeveloped",
        }
    }
}

impl fmt::Display for ClaimStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterclaimState {
    Active,
    Mitigated,
}

impl CounterclaimState {
    pub fn as_str(&self) -> &'static str {
        match self {
            CounterclaimState::Active => "Active",
            CounterclaimState::Mitigated => "Mitigated",
        }
    }
}

impl fmt::Display for CounterclaimState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Statuses for every evaluable node of a case at one point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusReport {
    pub case_title: String,
    pub evaluated_at: String,
    pub root: ClaimStatus,
    pub claims: BTreeMap<NodeId, ClaimStatus>,
    pub solutions: BTreeMap<NodeId, SolutionStatus>,
    pub counterclaims: BTreeMap<NodeId, CounterclaimState>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerdictError {
    #[error("case is not valid ({} diagnostics)", .0.len())]
    InvalidCase(Vec<CaseDiagnostic>),
    #[error("evaluating solution `{solution}`: {source}")]
    Eval {
        solution: NodeId,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffError {
    #[error("reports cover different node sets (e.g. `{0}` is not in both)")]
    NodeSetMismatch(String),
}

/// Runs a binding's query and compares the aggregate against the threshold.
/// No evidence yields `Unknown`; a query type error propagates as an error,
/// which is a different outcome than missing evidence.
pub fn evaluate_solution(binding: &EvidenceBinding, graph: &Graph) -> Result<SolutionStatus, EvalError> {
    let outcome = evaluate_aggregate(graph, &binding.query)?;
    let (state, observed) = match outcome {
        AggregateOutcome::NoEvidence => (SolutionState::Unknown, None),
        AggregateOutcome::Value(value) => {
            let ordering = value
                .numeric_cmp(&binding.threshold)
                .expect("aggregate values and thresholds are numeric");
            let satisfied = binding.comparator.apply(ordering);
            (
                if satisfied {
                    SolutionState::Satisfied
                } else {
                    SolutionState::Violated
                },
                Some(value),
            )
        }
    };
    Ok(SolutionStatus {
        state,
        detail: Some(EvalDetail {
            query_text: binding.query_text.clone(),
            comparator: binding.comparator,
            threshold: binding.threshold.clone(),
            observed,
        }),
    })
}

/// Propagates statuses through a valid case given the solution evaluations.
/// Missing solution entries are treated as unbound (Unknown).
///
/// Claim rules, in precedence order: an active challenger defeats; no
/// children means undeveloped; a defeated or violated child defeats; an
/// inconclusive, undeveloped, or unknown child makes it inconclusive;
/// otherwise supported. A solution challenged by an active counterclaim
/// contributes as violated regardless of its own evidence.
pub fn propagate(
    case: &AssuranceCase,
    solution_statuses: &BTreeMap<NodeId, SolutionStatus>,
    evaluated_at: &str,
) -> StatusReport {
    let mut solutions = BTreeMap::new();
    for node in case.nodes() {
        if node.kind == NodeKind::Solution {
            let status = solution_statuses
                .get(&node.id)
                .cloned()
                .unwrap_or_else(SolutionStatus::unbound);
            solutions.insert(node.id.clone(), status);
        }
    }

    let mut counterclaims = BTreeMap::new();
    for node in case.nodes() {
        if node.kind == NodeKind::Counterclaim {
            let mitigators = case.mitigators(&node.id);
            let mitigated = !mitigators.is_empty()
                && mitigators.iter().all(|m| {
                    solutions
                        .get(*m)
                        .map(|s| s.state == SolutionState::Satisfied)
                        .unwrap_or(false)
                });
            counterclaims.insert(
                node.id.clone(),
                if mitigated {
                    CounterclaimState::Mitigated
                } else {
                    CounterclaimState::Active
                },
            );
        }
    }

    let has_active_challenger = |id: &NodeId| {
        case.challengers(id)
            .iter()
            .any(|cc| counterclaims.get(*cc) == Some(&CounterclaimState::Active))
    };

    // What a child contributes to its parent's verdict.
    enum Contribution {
        Ok,
        Defeating,
        Inconclusive,
    }

    fn claim_status(
        case: &AssuranceCase,
        id: &NodeId,
        solutions: &BTreeMap<NodeId, SolutionStatus>,
        has_active_challenger: &impl Fn(&NodeId) -> bool,
        memo: &mut BTreeMap<NodeId, ClaimStatus>,
        visiting: &mut BTreeSet<NodeId>,
    ) -> ClaimStatus {
        if let Some(status) = memo.get(id) {
            return *status;
        }
        // Cycles are a validation error; bail out so the walk terminates.
        if !visiting.insert(id.clone()) {
            return ClaimStatus::Inconclusive;
        }
        let status = compute_claim(case, id, solutions, has_active_challenger, memo, visiting);
        visiting.remove(id);
        memo.insert(id.clone(), status);
        status
    }

    fn compute_claim(
        case: &AssuranceCase,
        id: &NodeId,
        solutions: &BTreeMap<NodeId, SolutionStatus>,
        has_active_challenger: &impl Fn(&NodeId) -> bool,
        memo: &mut BTreeMap<NodeId, ClaimStatus>,
        visiting: &mut BTreeSet<NodeId>,
    ) -> ClaimStatus {
        if has_active_challenger(id) {
            return ClaimStatus::Defeated;
        }
        let children = case.supported_by_children(id);
        if children.is_empty() {
            return ClaimStatus::Undeveloped;
        }
        let mut any_defeating = false;
        let mut any_inconclusive = false;
        for child in children {
            let contribution = match case.node(child).map(|n| n.kind) {
                Some(NodeKind::Solution) => {
                    let state = if has_active_challenger(child) {
                        SolutionState::Violated
                    } else {
                        solutions
                            .get(child)
                            .map(|s| s.state)
                            .unwrap_or(SolutionState::Unknown)
                    };
                    match state {
                        SolutionState::Satisfied => Contribution::Ok,
                        SolutionState::Violated => Contribution::Defeating,
                        SolutionState::Unknown => Contribution::Inconclusive,
                    }
                }
                Some(NodeKind::Goal) | Some(NodeKind::Strategy) => {
                    match claim_status(case, child, solutions, has_active_challenger, memo, visiting) {
                        ClaimStatus::Supported => Contribution::Ok,
                        ClaimStatus::Defeated => Contribution::Defeating,
                        ClaimStatus::Inconclusive | ClaimStatus::Undeveloped => {
                            Contribution::Inconclusive
                        }
                    }
                }
                // Other kinds as SupportedBy children are a validation
                // error; count them as inconclusive to stay total.
                _ => Contribution::Inconclusive,
            };
            match contribution {
                Contribution::Ok => {}
                Contribution::Defeating => any_defeating = true,
                Contribution::Inconclusive => any_inconclusive = true,
            }
        }
        if any_defeating {
            ClaimStatus::Defeated
        } else if any_inconclusive {
            ClaimStatus::Inconclusive
        } else {
            ClaimStatus::Supported
        }
    }

    let mut memo = BTreeMap::new();
    let mut claims = BTreeMap::new();
    for node in case.nodes() {
        if matches!(node.kind, NodeKind::Goal | NodeKind::Strategy) {
            let mut visiting = BTreeSet::new();
            let status = claim_status(
                case,
                &node.id,
                &solutions,
                &has_active_challenger,
                &mut memo,
                &mut visiting,
            );
            claims.insert(node.id.clone(), status);
        }
    }

    let root = case
        .root_goals()
        .first()
        .and_then(|id| claims.get(*id))
        .copied()
        .unwrap_or(ClaimStatus::Undeveloped);

    StatusReport {
        case_title: case.title.clone(),
        evaluated_at: evaluated_at.to_string(),
        root,
        claims,
        solutions,
        counterclaims,
    }
}

/// Validates the case, evaluates every bound solution against the store,
/// and propagates. Unbound solutions evaluate to Unknown.
pub fn evaluate_case(
    case: &AssuranceCase,
    graph: &Graph,
    evaluated_at: &str,
) -> Result<StatusReport, VerdictError> {
    let diagnostics = validate_case(case);
    if !diagnostics.is_empty() {
        return Err(VerdictError::InvalidCase(diagnostics));
    }
    let mut solution_statuses = BTreeMap::new();
    for node in case.nodes() {
        if node.kind != NodeKind::Solution {
            continue;
        }
        let status = match &node.binding {
            Some(binding) => evaluate_solution(binding, graph).map_err(|source| {
                VerdictError::Eval {
                    solution: node.id.clone(),
                    source,
                }
            })?,
            None => SolutionStatus::unbound(),
        };
        solution_statuses.insert(node.id.clone(), status);
    }
    Ok(propagate(case, &solution_statuses, evaluated_at))
}

impl StatusReport {
    /// Flat id -> status-name view covering claims, solutions, and
    /// counterclaims (ids are unique across the sections).
    pub fn status_map(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        for (id, status) in &self.claims {
            map.insert(id.to_string(), status.as_str().to_string());
        }
        for (id, status) in &self.solutions {
            map.insert(id.to_string(), status.state.as_str().to_string());
        }
        for (id, state) in &self.counterclaims {
            map.insert(id.to_string(), state.as_str().to_string());
        }
        map
    }

    /// Rendering overlay with the same contents as [`Self::status_map`].
    pub fn overlay(&self) -> StatusOverlay {
        self.status_map()
    }

    /// Canonical JSON: keys sorted lexicographically at every level,
    /// numbers in canonical lexical form, two-space indentation.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"case\": {},\n", json_str(&self.case_title)));
        out.push_str("  \"claims\": {");
        let mut first = true;
        for (id, status) in &self.claims {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!(
                "\n    {}: {}",
                json_str(id.as_str()),
                json_str(status.as_str())
            ));
        }
        out.push_str(if first { "},\n" } else { "\n  },\n" });
        out.push_str("  \"counterclaims\": {");
        first = true;
        for (id, state) in &self.counterclaims {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!(
                "\n    {}: {}",
                json_str(id.as_str()),
                json_str(state.as_str())
            ));
        }
        out.push_str(if first { "},\n" } else { "\n  },\n" });
        out.push_str(&format!("  \"evaluated_at\": {},\n", json_str(&self.evaluated_at)));
        out.push_str(&format!("  \"root\": {},\n", json_str(self.root.as_str())));
        out.push_str("  \"solutions\": {");
        first = true;
        for (id, status) in &self.solutions {
            if !first {
                out.push(',');
            }
            first = false;
            let (query, cmp, threshold, observed) = match &status.detail {
                Some(detail) => (
                    detail.query_text.clone(),
                    detail.comparator.to_string(),
                    detail.threshold.lexical(),
                    detail
                        .observed
                        .as_ref()
                        .map(|lit| lit.lexical())
                        .unwrap_or_else(|| "null".to_string()),
                ),
                None => (String::new(), String::new(), "0".to_string(), "null".to_string()),
            };
            out.push_str(&format!(
                "\n    {}: {{\"cmp\": {}, \"observed\": {}, \"query\": {}, \"status\": {}, \"threshold\": {}}}",
                json_str(id.as_str()),
                json_str(&cmp),
                observed,
                json_str(&query),
                json_str(status.state.as_str()),
                threshold
            ));
        }
        out.push_str(if first { "}\n" } else { "\n  }\n" });
        out.push_str("}\n");
        out
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// One node whose status differs between two reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Change {
    pub id: String,
    pub old: String,
    pub new: String,
}

/// Compares two reports over the same case; errors when the node sets
/// differ. Changes come back sorted by id; empty means identical statuses.
pub fn diff_reports(old: &StatusReport, new: &StatusReport) -> Result<Vec<Change>, DiffError> {
    diff_status_maps(&old.status_map(), &new.status_map())
}

pub fn diff_status_maps(
    old: &BTreeMap<String, String>,
    new: &BTreeMap<String, String>,
) -> Result<Vec<Change>, DiffError> {
    if let Some(id) = old.keys().find(|id| !new.contains_key(*id)) {
        return Err(DiffError::NodeSetMismatch(id.clone()));
    }
    if let Some(id) = new.keys().find(|id| !old.contains_key(*id)) {
        return Err(DiffError::NodeSetMismatch(id.clone()));
    }
    let mut changes = Vec::new();
    for (id, old_status) in old {
        let new_status = &new[id];
        if old_status != new_status {
            changes.push(Change {
                id: id.clone(),
                old: old_status.clone(),
                new: new_status.clone(),
            });
        }
    }
    Ok(changes)
}

/// Canonical JSON for a change list: `[{"id", "old", "new"}]`, one entry
/// per line, sorted by id.
pub fn changes_to_json(changes: &[Change]) -> String {
    if changes.is_empty() {
        return "[]\n".to_string();
    }
    let mut out = String::from("[\n");
    for (i, change) in changes.iter().enumerate() {
        out.push_str(&format!(
            "  {{\"id\": {}, \"old\": {}, \"new\": {}}}{}\n",
            json_str(&change.id),
            json_str(&change.old),
            json_str(&change.new),
            if i + 1 < changes.len() { "," } else { "" }
        ));
    }
    out.push_str("]\n");
    out
}

/// The parts of a report JSON that downstream commands need: title, root,
/// and the flat status map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportSummary {
    pub case_title: String,
    pub root: String,
    pub statuses: BTreeMap<String, String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportParseError {
    #[error("report is not valid JSON: {0}")]
    Json(String),
    #[error("report is missing key `{0}`")]
    MissingKey(&'static str),
    #[error("report key `{0}` has the wrong shape")]
    WrongShape(&'static str),
}

/// Reads a previously written report JSON back into a summary.
pub fn parse_report_json(text: &str) -> Result<ReportSummary, ReportParseError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ReportParseError::Json(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or(ReportParseError::WrongShape("report"))?;
    let case_title = obj
        .get("case")
        .and_then(|v| v.as_str())
        .ok_or(ReportParseError::MissingKey("case"))?
        .to_string();
    let root = obj
        .get("root")
        .and_then(|v| v.as_str())
        .ok_or(ReportParseError::MissingKey("root"))?
        .to_string();
    let mut statuses = BTreeMap::new();
    for section in ["claims", "counterclaims"] {
        let map = obj
            .get(section)
            .and_then(|v| v.as_object())
            .ok_or(ReportParseError::MissingKey("claims"))?;
        for (id, status) in map {
            let status = status
                .as_str()
                .ok_or(ReportParseError::WrongShape("status"))?;
            statuses.insert(id.clone(), status.to_string());
        }
    }
    let solutions = obj
        .get("solutions")
        .and_then(|v| v.as_object())
        .ok_or(ReportParseError::MissingKey("solutions"))?;
    for (id, entry) in solutions {
        let status = entry
            .get("status")
            .and_then(|v| v.as_str())
            .ok_or(ReportParseError::WrongShape("solutions"))?;
        statuses.insert(id.clone(), status.to_string());
    }
    Ok(ReportSummary {
        case_title,
        root,
        statuses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsn::parse_case;
    use crate::store::parse_turtle;

    fn fixture_graph() -> Graph {
        parse_turtle(
            "@prefix : <urn:argus:> .\n\
             :String1 a :ExtractionAttack .\n\
             :String1 :targetsModel :LLaMa-2-7B-chat .\n\
             :String1 :attackSuccessRate 0.5 .\n",
        )
        .unwrap()
    }

    fn one_goal_case(threshold: &str) -> AssuranceCase {
        parse_case(&format!(
            "case \"fixture a\"\n\
             goal G1 \"attacks stay below the bar\"\n\
             solution Sn1 \"measured asr is low\"\n\
             \x20 supports G1\n\
             \x20 evidence PREFIX : <urn:argus:> SELECT MAX(?asr) WHERE {{ ?a :attackSuccessRate ?asr }} expect <= {threshold}\n"
        ))
        .unwrap()
    }

    fn binding(case: &AssuranceCase) -> EvidenceBinding {
        case.node(&NodeId::new("Sn1").unwrap())
            .unwrap()
            .binding
            .clone()
            .unwrap()
    }

    #[test]
    fn solution_satisfied_when_threshold_met() {
        let status = evaluate_solution(&binding(&one_goal_case("0.6")), &fixture_graph()).unwrap();
        assert_eq!(status.state, SolutionState::Satisfied);
        let detail = status.detail.unwrap();
        assert_eq!(detail.observed.unwrap().lexical(), "0.5");
    }

    #[test]
    fn solution_violated_when_threshold_exceeded() {
        let status = evaluate_solution(&binding(&one_goal_case("0.1")), &fixture_graph()).unwrap();
        assert_eq!(status.state, SolutionState::Violated);
        assert_eq!(status.detail.unwrap().observed.unwrap().lexical(), "0.5");
    }

    #[test]
    fn solution_unknown_over_empty_graph() {
        let status = evaluate_solution(&binding(&one_goal_case("0.1")), &Graph::new()).unwrap();
        assert_eq!(status.state, SolutionState::Unknown);
        assert_eq!(status.detail.unwrap().observed, None);
    }

    #[test]
    fn end_to_end_fixture_a_defeated_on_strict_threshold() {
        let report = evaluate_case(&one_goal_case("0.1"), &fixture_graph(), "t0").unwrap();
        assert_eq!(report.root, ClaimStatus::Defeated);
        let report = evaluate_case(&one_goal_case("0.6"), &fixture_graph(), "t0").unwrap();
        assert_eq!(report.root, ClaimStatus::Supported);
    }

    #[test]
    fn empty_store_makes_root_inconclusive() {
        let report = evaluate_case(&one_goal_case("0.1"), &Graph::new(), "t0").unwrap();
        assert_eq!(report.root, ClaimStatus::Inconclusive);
    }

    #[test]
    fn goal_without_supports_is_undeveloped() {
        let case = parse_case("case \"t\"\ngoal G1 \"alone\"\n").unwrap();
        let report = evaluate_case(&case, &Graph::new(), "t0").unwrap();
        assert_eq!(report.root, ClaimStatus::Undeveloped);
    }

    #[test]
    fn invalid_case_is_refused_with_diagnostics() {
        let case = parse_case("case \"t\"\ngoal G1 \"a\"\ngoal G2 \"b\"\n").unwrap();
        match evaluate_case(&case, &Graph::new(), "t0") {
            Err(VerdictError::InvalidCase(diags)) => assert!(!diags.is_empty()),
            other => panic!("expected invalid-case error, got {other:?}"),
        }
    }

    fn cc_case() -> AssuranceCase {
        parse_case(
            "case \"cc\"\n\
             goal G1 \"root\"\n\
             goal G2 \"guarded\"\n\
             \x20 supports G1\n\
             solution Sn1 \"direct evidence\"\n\
             \x20 supports G2\n\
             \x20 evidence PREFIX : <urn:a:> SELECT COUNT(?a) WHERE { ?a :p ?v } expect >= 0\n\
             solution Sn2 \"mitigation evidence\"\n\
             \x20 supports G2\n\
             \x20 evidence PREFIX : <urn:a:> SELECT MAX(?v) WHERE { ?a :p ?v } expect <= 1\n\
             counterclaim CC1 \"doubt\"\n\
             \x20 challenges G2\n\
             \x20 mitigated-by Sn2\n",
        )
        .unwrap()
    }

    fn states(
        pairs: &[(&str, SolutionState)],
    ) -> BTreeMap<NodeId, SolutionStatus> {
        pairs
            .iter()
            .map(|(id, state)| {
                (
                    NodeId::new(*id).unwrap(),
                    SolutionStatus {
                        state: *state,
                        detail: None,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn mitigated_counterclaim_does_not_defeat() {
        let report = propagate(
            &cc_case(),
            &states(&[
                ("Sn1", SolutionState::Satisfied),
                ("Sn2", SolutionState::Satisfied),
            ]),
            "t0",
        );
        let cc = NodeId::new("CC1").unwrap();
        assert_eq!(report.counterclaims[&cc], CounterclaimState::Mitigated);
        assert_eq!(report.root, ClaimStatus::Supported);
    }

    #[test]
    fn unmitigated_counterclaim_defeats_challenged_goal_and_ancestors() {
        let report = propagate(
            &cc_case(),
            &states(&[
                ("Sn1", SolutionState::Satisfied),
                ("Sn2", SolutionState::Unknown),
            ]),
            "t0",
        );
        let cc = NodeId::new("CC1").unwrap();
        assert_eq!(report.counterclaims[&cc], CounterclaimState::Active);
        assert_eq!(report.claims[&NodeId::new("G2").unwrap()], ClaimStatus::Defeated);
        assert_eq!(report.root, ClaimStatus::Defeated);
    }

    #[test]
    fn counterclaim_without_mitigators_is_active() {
        let case = parse_case(
            "case \"t\"\ngoal G1 \"r\"\nsolution Sn1 \"s\"\n  supports G1\ncounterclaim CC1 \"d\"\n  challenges G1\n",
        )
        .unwrap();
        let report = propagate(&case, &states(&[("Sn1", SolutionState::Satisfied)]), "t0");
        assert_eq!(
            report.counterclaims[&NodeId::new("CC1").unwrap()],
            CounterclaimState::Active
        );
        assert_eq!(report.root, ClaimStatus::Defeated);
    }

    #[test]
    fn challenged_solution_contributes_as_violated() {
        let case = parse_case(
            "case \"t\"\n\
             goal G1 \"r\"\n\
             solution Sn1 \"s\"\n\
             \x20 supports G1\n\
             counterclaim CC1 \"d\"\n\
             \x20 challenges Sn1\n",
        )
        .unwrap();
        let report = propagate(&case, &states(&[("Sn1", SolutionState::Satisfied)]), "t0");
        // Raw solution status stays Satisfied; its contribution defeats G1.
        assert_eq!(
            report.solutions[&NodeId::new("Sn1").unwrap()].state,
            SolutionState::Satisfied
        );
        assert_eq!(report.root, ClaimStatus::Defeated);
    }

    #[test]
    fn report_json_is_canonical() {
        let report = evaluate_case(&one_goal_case("0.6"), &fixture_graph(), "2024-01-02T00:00:00Z")
            .unwrap();
        let json = report.to_json();
        let expected = "{\n  \"case\": \"fixture a\",\n  \"claims\": {\n    \"G1\": \"Supported\"\n  },\n  \"counterclaims\": {},\n  \"evaluated_at\": \"2024-01-02T00:00:00Z\",\n  \"root\": \"Supported\",\n  \"solutions\": {\n    \"Sn1\": {\"cmp\": \"<=\", \"observed\": 0.5, \"query\": \"PREFIX : <urn:argus:> SELECT MAX(?asr) WHERE { ?a :attackSuccessRate ?asr }\", \"status\": \"Satisfied\", \"threshold\": 0.6}\n  }\n}\n";
        assert_eq!(json, expected);
        let summary = parse_report_json(&json).unwrap();
        assert_eq!(summary.root, "Supported");
        assert_eq!(summary.statuses["Sn1"], "Satisfied");
    }

    #[test]
    fn diff_of_identical_reports_is_empty() {
        let report = evaluate_case(&one_goal_case("0.6"), &fixture_graph(), "t0").unwrap();
        assert!(diff_reports(&report, &report).unwrap().is_empty());
    }

    #[test]
    fn diff_lists_changed_nodes_sorted() {
        let old = evaluate_case(&one_goal_case("0.1"), &fixture_graph(), "t0").unwrap();
        let new = evaluate_case(&one_goal_case("0.1"), &Graph::new(), "t1").unwrap();
        let changes = diff_reports(&old, &new).unwrap();
        assert_eq!(changes.len(), 2);
        assert_eq!(changes[0].id, "G1");
        assert_eq!(changes[0].old, "Defeated");
        assert_eq!(changes[0].new, "Inconclusive");
        assert_eq!(changes[1].id, "Sn1");
    }

    #[test]
    fn diff_rejects_different_cases() {
        let a = evaluate_case(&one_goal_case("0.1"), &fixture_graph(), "t0").unwrap();
        let other = parse_case("case \"x\"\ngoal G9 \"different\"\n").unwrap();
        let b = evaluate_case(&other, &Graph::new(), "t0").unwrap();
        assert!(matches!(diff_reports(&a, &b), Err(DiffError::NodeSetMismatch(_))));
    }

    #[test]
    fn changes_json_shape() {
        let changes = vec![Change {
            id: "G1".into(),
            old: "Defeated".into(),
            new: "Supported".into(),
        }];
        assert_eq!(
            changes_to_json(&changes),
            "[\n  {\"id\": \"G1\", \"old\": \"Defeated\", \"new\": \"Supported\"}\n]\n"
        );
        assert_eq!(changes_to_json(&[]), "[]\n");
    }
}
