//! Canonical `.gsn` writer and Graphviz DOT renderer.

use std::collections::BTreeMap;

use super::{AssuranceCase, EdgeKind, NodeKind};

/// Optional node statuses for rendering: node id -> status name
/// (`Supported`, `Defeated`, `Inconclusive`, `Undeveloped`, `Satisfied`,
/// `Violated`, `Unknown`, `Active`, `Mitigated`).
pub type StatusOverlay = BTreeMap<String, String>;

/// Writes the canonical case text: `case` header, then node blocks in id
/// order, each with its edge properties and evidence. Parsing the output
/// reproduces the case exactly, and serializing again is byte-stable.
pub fn serialize_case(case: &AssuranceCase) -> String {
    let mut out = String::new();
    out.push_str(&format!("case {}\n", quote(&case.title)));
    for node in case.nodes() {
        out.push_str(&format!(
            "{} {} {}\n",
            node.kind.keyword(),
            node.id,
            quote(&node.statement)
        ));
        // Property order is fixed: supports, context-of, challenges,
        // mitigated-by, evidence. Edge iteration is already sorted.
        for edge in case.edges() {
            let line = match edge.kind {
                EdgeKind::SupportedBy if edge.to == node.id => {
                    format!("  supports {}\n", edge.from)
                }
                EdgeKind::InContextOf if edge.to == node.id => {
                    format!("  context-of {}\n", edge.from)
                }
                EdgeKind::Challenges if edge.from == node.id => {
                    format!("  challenges {}\n", edge.to)
                }
                EdgeKind::MitigatedBy if edge.from == node.id => {
                    format!("  mitigated-by {}\n", edge.to)
                }
                _ => continue,
            };
            out.push_str(&line);
        }
        if let Some(binding) = &node.binding {
            out.push_str(&format!(
                "  evidence {} expect {} {}\n",
                binding.query_text,
                binding.comparator,
                binding.threshold.lexical()
            ));
        }
    }
    out
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders the case as a Graphviz digraph. Shapes by node kind, line styles
/// by edge kind; with an overlay, claim/solution/counterclaim nodes are
/// filled by status (green = holding, red = defeated, orange = inconclusive,
/// gray = undeveloped).
pub fn render_dot(case: &AssuranceCase, statuses: Option<&StatusOverlay>) -> String {
    let mut out = String::new();
    out.push_str("digraph assurance_case {\n");
    out.push_str(&format!("  label={};\n", quote(&case.title)));
    out.push_str("  labelloc=\"t\";\n");
    out.push_str("  rankdir=TB;\n");
    for node in case.nodes() {
        let shape = match node.kind {
            NodeKind::Goal => "shape=box",
            NodeKind::Strategy => "shape=parallelogram",
            NodeKind::Solution => "shape=circle",
            NodeKind::Context => "shape=box, style=rounded",
            NodeKind::Justification => "shape=ellipse",
            NodeKind::Counterclaim => "shape=octagon",
        };
        let mut label = format!("{}\n{}", node.id, node.statement);
        if node.kind == NodeKind::Justification {
            label.push_str("\nJ");
        }
        let fill = statuses
            .and_then(|overlay| overlay.get(node.id.as_str()))
            .and_then(|status| status_color(status));
        let mut attrs = format!("{shape}, label={}", quote(&label));
        if let Some(color) = fill {
            if node.kind == NodeKind::Context {
                attrs = format!("shape=box, style=\"rounded,filled\", label={}, fillcolor={color}", quote(&label));
            } else {
                attrs.push_str(&format!(", style=filled, fillcolor={color}"));
            }
        }
        out.push_str(&format!("  \"{}\" [{attrs}];\n", node.id));
    }
    for edge in case.edges() {
        let style = match edge.kind {
            EdgeKind::SupportedBy => "style=solid",
            EdgeKind::InContextOf => "style=dashed",
            EdgeKind::Challenges => "style=bold, color=red",
            EdgeKind::MitigatedBy => "style=dotted",
        };
        out.push_str(&format!("  \"{}\" -> \"{}\" [{style}];\n", edge.from, edge.to));
    }
    out.push_str("}\n");
    out
}

fn status_color(status: &str) -> Option<&'static str> {
    match status {
        "Supported" | "Satisfied" | "Mitigated" => Some("green"),
        "Defeated" | "Violated" | "Active" => Some("red"),
        "Inconclusive" | "Unknown" => Some("orange"),
        "Undeveloped" => Some("gray"),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsn::parse_case;

    const CASE: &str = "case \"t\"\ngoal G1 \"root\"\nsolution Sn1 \"ev\"\n  supports G1\n  evidence PREFIX : <urn:a:> SELECT MAX(?v) WHERE { ?a :p ?v } expect <= 0.1\n";

    #[test]
    fn canonical_text_round_trips_to_identity() {
        let case = parse_case(CASE).unwrap();
        let text = serialize_case(&case);
        let reparsed = parse_case(&text).unwrap();
        assert_eq!(case, reparsed);
        assert_eq!(serialize_case(&reparsed), text);
    }

    #[test]
    fn header_only_case_serializes_to_header_line() {
        let case = parse_case("case \"empty\"\n").unwrap();
        assert_eq!(serialize_case(&case), "case \"empty\"\n");
    }

    #[test]
    fn context_emits_context_of_property() {
        let case = parse_case("case \"t\"\ngoal G1 \"r\"\ncontext C1 \"env\"\n  context-of G1\n").unwrap();
        let expected = "case \"t\"\ncontext C1 \"env\"\n  context-of G1\ngoal G1 \"r\"\n";
        assert_eq!(serialize_case(&case), expected);
    }

    #[test]
    fn statements_with_quotes_round_trip() {
        let case = parse_case("case \"t\"\ngoal G1 \"say \\\"hi\\\"\\nthen stop\"\n").unwrap();
        let text = serialize_case(&case);
        assert_eq!(parse_case(&text).unwrap(), case);
    }

    #[test]
    fn dot_contains_one_box_for_single_goal() {
        let case = parse_case("case \"t\"\ngoal G1 \"root\"\n").unwrap();
        let dot = render_dot(&case, None);
        assert!(dot.starts_with("digraph assurance_case {"));
        assert!(dot.contains("\"G1\" [shape=box, label=\"G1\\nroot\"];"));
        assert!(!dot.contains("fillcolor"));
    }

    #[test]
    fn dot_fills_by_status() {
        let case = parse_case(CASE).unwrap();
        let mut overlay = StatusOverlay::new();
        overlay.insert("G1".into(), "Supported".into());
        overlay.insert("Sn1".into(), "Satisfied".into());
        let dot = render_dot(&case, Some(&overlay));
        assert!(dot.contains("\"G1\" [shape=box, label=\"G1\\nroot\", style=filled, fillcolor=green];"));
        assert!(dot.contains("fillcolor=green];\n  \"Sn1\""));
    }

    #[test]
    fn dot_is_deterministic() {
        let case = parse_case(CASE).unwrap();
        assert_eq!(render_dot(&case, None), render_dot(&case, None));
    }

    #[test]
    fn edge_styles_by_kind() {
        let text = "case \"t\"\ngoal G1 \"r\"\nsolution Sn1 \"s\"\n  supports G1\ncontext C1 \"c\"\n  context-of G1\ncounterclaim CC1 \"d\"\n  challenges G1\n  mitigated-by Sn1\n";
        let case = parse_case(text).unwrap();
        let dot = render_dot(&case, None);
        assert!(dot.contains("\"G1\" -> \"Sn1\" [style=solid];"));
        assert!(dot.contains("\"G1\" -> \"C1\" [style=dashed];"));
        assert!(dot.contains("\"CC1\" -> \"G1\" [style=bold, color=red];"));
        assert!(dot.contains("\"CC1\" -> \"Sn1\" [style=dotted];"));
    }
}
