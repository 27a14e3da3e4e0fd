//! Goal Structuring Notation assurance cases.
//!
//! A case is a typed node/edge graph: Goals decompose through Strategies
//! into further Goals and eventually Solutions (the evidence leaves);
//! Contexts and Justifications annotate; Counterclaims challenge Goals or
//! Solutions and are neutralized by MitigatedBy edges to Solutions. The
//! SupportedBy relation must form a DAG with exactly one root Goal.
//!
//! Parsing and validation are deliberately separate steps so an audit pass
//! reports every problem at once instead of stopping at the first.

mod parser;
mod render;

pub use parser::{parse_case, CaseParseError};
pub use render::{render_dot, serialize_case, StatusOverlay};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::aql::{Comparator, Query};
use crate::store::Literal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Goal,
    Strategy,
    Solution,
    Context,
    Justification,
    Counterclaim,
}

impl NodeKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            NodeKind::Goal => "goal",
            NodeKind::Strategy => "strategy",
            NodeKind::Solution => "solution",
            NodeKind::Context => "context",
            NodeKind::Justification => "justification",
            NodeKind::Counterclaim => "counterclaim",
        }
    }

    pub fn from_keyword(word: &str) -> Option<NodeKind> {
        match word {
            "goal" => Some(NodeKind::Goal),
            "strategy" => Some(NodeKind::Strategy),
            "solution" => Some(NodeKind::Solution),
            "context" => Some(NodeKind::Context),
            "justification" => Some(NodeKind::Justification),
            "counterclaim" => Some(NodeKind::Counterclaim),
            _ => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Node identifier; `[A-Za-z][A-Za-z0-9_.]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<NodeId, CaseError> {
        let id = id.into();
        let mut chars = id.chars();
        let valid = match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => {
                chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.'))
            }
            _ => false,
        };
        if valid {
            Ok(NodeId(id))
        } else {
            Err(CaseError::InvalidId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A query over the evidence store plus a pass predicate on its aggregate
/// result, attached to a Solution node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceBinding {
    /// Verbatim query text as written in the case file.
    pub query_text: String,
    pub query: Query,
    pub comparator: Comparator,
    pub threshold: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub statement: String,
    pub binding: Option<EvidenceBinding>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    SupportedBy,
    InContextOf,
    Challenges,
    MitigatedBy,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub kind: EdgeKind,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaseError {
    #[error("invalid node id `{0}`")]
    InvalidId(String),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("evidence binding on non-solution node `{0}`")]
    BindingOnNonSolution(String),
    #[error("evidence binding query must be an aggregate (COUNT/MIN/MAX/AVG)")]
    NonAggregateBinding,
    #[error("evidence threshold must be numeric, got `{0}`")]
    NonNumericThreshold(String),
}

/// A GSN assurance case: title, nodes, and edges. Immutable once built
/// except for evidence-binding edits, which model the "evidence withdrawn"
/// maintenance scenario.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssuranceCase {
    pub title: String,
    nodes: BTreeMap<NodeId, CaseNode>,
    edges: BTreeSet<Edge>,
}

impl AssuranceCase {
    pub fn new(title: impl Into<String>) -> AssuranceCase {
        AssuranceCase {
            title: title.into(),
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn add_node(&mut self, node: CaseNode) -> Result<(), CaseError> {
        if self.nodes.contains_key(&node.id) {
            return Err(CaseError::DuplicateId(node.id.to_string()));
        }
        if node.binding.is_some() && node.kind != NodeKind::Solution {
            return Err(CaseError::BindingOnNonSolution(node.id.to_string()));
        }
        if let Some(binding) = &node.binding {
            if !binding.query.is_aggregate() {
                return Err(CaseError::NonAggregateBinding);
            }
            if !binding.threshold.is_numeric() {
                return Err(CaseError::NonNumericThreshold(binding.threshold.lexical()));
            }
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn add_edge(&mut self, edge: Edge) {
        self.edges.insert(edge);
    }

    pub fn node(&self, id: &NodeId) -> Option<&CaseNode> {
        self.nodes.get(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &CaseNode> {
        self.nodes.values()
    }

    /// Edges in (kind, from, to) order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Removes the evidence binding from a solution, if present.
    pub fn clear_binding(&mut self, id: &NodeId) -> bool {
        match self.nodes.get_mut(id) {
            Some(node) if node.binding.is_some() => {
                node.binding = None;
                true
            }
            _ => false,
        }
    }

    /// SupportedBy children of a claim (edge targets), in id order.
    pub fn supported_by_children(&self, id: &NodeId) -> Vec<&NodeId> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::SupportedBy && &e.from == id)
            .map(|e| &e.to)
            .collect()
    }

    /// Counterclaims challenging a node, in id order.
    pub fn challengers(&self, id: &NodeId) -> Vec<&NodeId> {
        let mut result: Vec<&NodeId> = self
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Challenges && &e.to == id)
            .map(|e| &e.from)
            .collect();
        result.sort();
        result
    }

    /// Solutions a counterclaim is mitigated by, in id order.
    pub fn mitigators(&self, id: &NodeId) -> Vec<&NodeId> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::MitigatedBy && &e.from == id)
            .map(|e| &e.to)
            .collect()
    }

    /// Goals that are not the target of any SupportedBy edge.
    pub fn root_goals(&self) -> Vec<&NodeId> {
        let targets: BTreeSet<&NodeId> = self
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::SupportedBy)
            .map(|e| &e.to)
            .collect();
        self.nodes
            .values()
            .filter(|n| n.kind == NodeKind::Goal && !targets.contains(&n.id))
            .map(|n| &n.id)
            .collect()
    }
}

/// The well-formedness rule a diagnostic reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseRule {
    MissingEndpoint,
    EdgeKind,
    Cycle,
    RootCount,
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseDiagnostic {
    pub rule: CaseRule,
    pub message: String,
}

impl fmt::Display for CaseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every well-formedness rule and reports one diagnostic per
/// violation; an empty result means the case is valid.
pub fn validate_case(case: &AssuranceCase) -> Vec<CaseDiagnostic> {
    let mut diagnostics = Vec::new();

    for edge in case.edges() {
        let (from, to) = (case.node(&edge.from), case.node(&edge.to));
        if from.is_none() || to.is_none() {
            let missing = if from.is_none() { &edge.from } else { &edge.to };
            diagnostics.push(CaseDiagnostic {
                rule: CaseRule::MissingEndpoint,
                message: format!("edge references unknown node `{missing}`"),
            });
            continue;
        }
        let (from, to) = (from.expect("checked"), to.expect("checked"));
        let allowed = match edge.kind {
            EdgeKind::SupportedBy => match from.kind {
                NodeKind::Goal => matches!(
                    to.kind,
                    NodeKind::Goal | NodeKind::Strategy | NodeKind::Solution
                ),
                NodeKind::Strategy => matches!(to.kind, NodeKind::Goal | NodeKind::Solution),
                _ => false,
            },
            EdgeKind::InContextOf => {
                matches!(from.kind, NodeKind::Goal | NodeKind::Strategy)
                    && matches!(to.kind, NodeKind::Context | NodeKind::Justification)
            }
            EdgeKind::Challenges => {
                from.kind == NodeKind::Counterclaim
                    && matches!(to.kind, NodeKind::Goal | NodeKind::Solution)
            }
            EdgeKind::MitigatedBy => {
                from.kind == NodeKind::Counterclaim && to.kind == NodeKind::Solution
            }
        };
        if !allowed {
            diagnostics.push(CaseDiagnostic {
                rule: CaseRule::EdgeKind,
                message: format!(
                    "{:?} edge from {} `{}` to {} `{}` violates the kind rules",
                    edge.kind, from.kind, from.id, to.kind, to.id
                ),
            });
        }
    }

    if let Some(cycle) = find_supported_by_cycle(case) {
        let path = cycle
            .iter()
            .map(NodeId::as_str)
            .collect::<Vec<_>>()
            .join(" -> ");
        diagnostics.push(CaseDiagnostic {
            rule: CaseRule::Cycle,
            message: format!("SupportedBy edges form a cycle: {path}"),
        });
    }

    let roots = case.root_goals();
    match roots.len() {
        1 => {}
        0 => diagnostics.push(CaseDiagnostic {
            rule: CaseRule::RootCount,
            message: "case has no root goal (every goal is supported by something)".to_string(),
        }),
        _ => diagnostics.push(CaseDiagnostic {
            rule: CaseRule::RootCount,
            message: format!(
                "case has {} root goals: {}",
                roots.len(),
                roots.iter().map(|id| id.as_str()).collect::<Vec<_>>().join(", ")
            ),
        }),
    }

    // Connectivity is only meaningful for a well-rooted acyclic argument.
    if roots.len() == 1 && find_supported_by_cycle(case).is_none() {
        let mut reachable = BTreeSet::new();
        let mut stack = vec![roots[0].clone()];
        while let Some(id) = stack.pop() {
            if !reachable.insert(id.clone()) {
                continue;
            }
            for child in case.supported_by_children(&id) {
                stack.push(child.clone());
            }
        }
        for node in case.nodes() {
            let needs_reach = matches!(
                node.kind,
                NodeKind::Goal | NodeKind::Strategy | NodeKind::Solution
            );
            if needs_reach && !reachable.contains(&node.id) {
                diagnostics.push(CaseDiagnostic {
                    rule: CaseRule::Disconnected,
                    message: format!(
                        "{} `{}` is not reachable from the root goal via SupportedBy",
                        node.kind, node.id
                    ),
                });
            }
        }
    }

    diagnostics
}

/// Finds one cycle in the SupportedBy relation, if any, as a node path
/// ending where it started.
fn find_supported_by_cycle(case: &AssuranceCase) -> Option<Vec<NodeId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Visiting,
        Done,
    }

    fn visit<'a>(
        case: &'a AssuranceCase,
        id: &'a NodeId,
        states: &mut BTreeMap<&'a NodeId, State>,
        path: &mut Vec<&'a NodeId>,
    ) -> Option<Vec<NodeId>> {
        match states.get(id) {
            Some(State::Done) => return None,
            Some(State::Visiting) => {
                let start = path.iter().position(|p| *p == id).expect("on path");
                let mut cycle: Vec<NodeId> = path[start..].iter().map(|p| (*p).clone()).collect();
                cycle.push(id.clone());
                return Some(cycle);
            }
            None => {}
        }
        states.insert(id, State::Visiting);
        path.push(id);
        for child in case.supported_by_children(id) {
            if let Some(cycle) = visit(case, child, states, path) {
                return Some(cycle);
            }
        }
        path.pop();
        states.insert(id, State::Done);
        None
    }

    let mut states: BTreeMap<&NodeId, State> = BTreeMap::new();
    let ids: Vec<&NodeId> = case.nodes().map(|n| &n.id).collect();
    for id in ids {
        let mut path = Vec::new();
        if let Some(cycle) = visit(case, id, &mut states, &mut path) {
            return Some(cycle);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(kind: NodeKind, id: &str) -> CaseNode {
        CaseNode {
            id: NodeId::new(id).unwrap(),
            kind,
            statement: format!("statement for {id}"),
            binding: None,
        }
    }

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn edge(kind: EdgeKind, from: &str, to: &str) -> Edge {
        Edge {
            kind,
            from: id(from),
            to: id(to),
        }
    }

    fn valid_case() -> AssuranceCase {
        let mut case = AssuranceCase::new("t");
        case.add_node(node(NodeKind::Goal, "G1")).unwrap();
        case.add_node(node(NodeKind::Strategy, "S1")).unwrap();
        case.add_node(node(NodeKind::Goal, "G2")).unwrap();
        case.add_node(node(NodeKind::Solution, "Sn1")).unwrap();
        case.add_node(node(NodeKind::Context, "C1")).unwrap();
        case.add_edge(edge(EdgeKind::SupportedBy, "G1", "S1"));
        case.add_edge(edge(EdgeKind::SupportedBy, "S1", "G2"));
        case.add_edge(edge(EdgeKind::SupportedBy, "G2", "Sn1"));
        case.add_edge(edge(EdgeKind::InContextOf, "G1", "C1"));
        case
    }

    #[test]
    fn valid_case_has_no_diagnostics() {
        assert!(validate_case(&valid_case()).is_empty());
    }

    #[test]
    fn node_id_pattern_is_enforced() {
        assert!(NodeId::new("G1.5.1").is_ok());
        assert!(NodeId::new("Sn1_5").is_ok());
        assert!(NodeId::new("1G").is_err());
        assert!(NodeId::new("").is_err());
        assert!(NodeId::new("G 1").is_err());
    }

    #[test]
    fn duplicate_id_is_rejected_at_construction() {
        let mut case = AssuranceCase::new("t");
        case.add_node(node(NodeKind::Goal, "G1")).unwrap();
        assert!(matches!(
            case.add_node(node(NodeKind::Goal, "G1")),
            Err(CaseError::DuplicateId(_))
        ));
    }

    #[test]
    fn cycle_is_diagnosed_with_a_path() {
        let mut case = AssuranceCase::new("t");
        case.add_node(node(NodeKind::Goal, "G1")).unwrap();
        case.add_node(node(NodeKind::Goal, "G2")).unwrap();
        case.add_edge(edge(EdgeKind::SupportedBy, "G1", "G2"));
        case.add_edge(edge(EdgeKind::SupportedBy, "G2", "G1"));
        let diags = validate_case(&case);
        let cycle = diags.iter().find(|d| d.rule == CaseRule::Cycle).unwrap();
        assert!(cycle.message.contains("G1"));
        assert!(cycle.message.contains("G2"));
    }

    #[test]
    fn solution_with_outgoing_supported_by_is_a_kind_violation() {
        let mut case = valid_case();
        case.add_node(node(NodeKind::Goal, "G3")).unwrap();
        case.add_edge(edge(EdgeKind::SupportedBy, "Sn1", "G3"));
        let diags = validate_case(&case);
        assert!(diags.iter().any(|d| d.rule == CaseRule::EdgeKind));
    }

    #[test]
    fn strategy_to_strategy_support_is_rejected() {
        let mut case = valid_case();
        case.add_node(node(NodeKind::Strategy, "S2")).unwrap();
        case.add_edge(edge(EdgeKind::SupportedBy, "S1", "S2"));
        let diags = validate_case(&case);
        assert!(diags.iter().any(|d| d.rule == CaseRule::EdgeKind));
    }

    #[test]
    fn challenges_must_come_from_counterclaims() {
        let mut case = valid_case();
        case.add_edge(edge(EdgeKind::Challenges, "G2", "G1"));
        let diags = validate_case(&case);
        assert!(diags.iter().any(|d| d.rule == CaseRule::EdgeKind));
    }

    #[test]
    fn missing_endpoint_is_diagnosed() {
        let mut case = valid_case();
        case.add_edge(edge(EdgeKind::SupportedBy, "G1", "Ghost"));
        let diags = validate_case(&case);
        assert!(diags.iter().any(|d| d.rule == CaseRule::MissingEndpoint));
    }

    #[test]
    fn zero_and_multiple_roots_are_diagnosed() {
        let mut case = AssuranceCase::new("t");
        case.add_node(node(NodeKind::Goal, "G1")).unwrap();
        case.add_node(node(NodeKind::Goal, "G2")).unwrap();
        let diags = validate_case(&case);
        assert!(diags.iter().any(|d| d.rule == CaseRule::RootCount));

        let mut cyclic = AssuranceCase::new("t");
        cyclic.add_node(node(NodeKind::Goal, "G1")).unwrap();
        cyclic.add_node(node(NodeKind::Goal, "G2")).unwrap();
        cyclic.add_edge(edge(EdgeKind::SupportedBy, "G1", "G2"));
        cyclic.add_edge(edge(EdgeKind::SupportedBy, "G2", "G1"));
        let diags = validate_case(&cyclic);
        assert!(diags.iter().any(|d| d.rule == CaseRule::RootCount));
    }

    #[test]
    fn disconnected_fragment_is_diagnosed() {
        let mut case = valid_case();
        case.add_node(node(NodeKind::Goal, "Gx")).unwrap();
        case.add_node(node(NodeKind::Solution, "Snx")).unwrap();
        case.add_edge(edge(EdgeKind::SupportedBy, "Gx", "Snx"));
        let diags = validate_case(&case);
        // Gx becomes a second root; its fragment is also unreachable.
        assert!(diags.iter().any(|d| d.rule == CaseRule::RootCount));
    }

    #[test]
    fn unreachable_solution_is_diagnosed() {
        let mut case = valid_case();
        case.add_node(node(NodeKind::Solution, "Snx")).unwrap();
        let diags = validate_case(&case);
        let disconnected: Vec<_> = diags
            .iter()
            .filter(|d| d.rule == CaseRule::Disconnected)
            .collect();
        assert_eq!(disconnected.len(), 1);
        assert!(disconnected[0].message.contains("Snx"));
    }

    #[test]
    fn contexts_are_exempt_from_reachability() {
        let mut case = valid_case();
        case.add_node(node(NodeKind::Context, "C9")).unwrap();
        case.add_edge(edge(EdgeKind::InContextOf, "G2", "C9"));
        assert!(validate_case(&case).is_empty());
    }
}
