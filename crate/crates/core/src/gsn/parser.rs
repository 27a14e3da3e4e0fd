//! Line-oriented reader for the `.gsn` case format.
//!
//! ```text
//! case "title"
//! goal G1 "statement"
//! solution Sn1 "statement"
//!   supports G1
//!   evidence PREFIX : <urn:argus:> SELECT MAX(?v) WHERE { ?a :p ?v } expect <= 0.1
//! ```
//!
//! Node lines start at column one; property lines are indented exactly two
//! spaces and attach to the node above. `#` starts a comment. Edges may
//! reference nodes declared later; existence is checked by validation, not
//! here.

use thiserror::Error;

use crate::aql::{parse_query, Comparator};
use crate::store::{Decimal, Literal};

use super::{AssuranceCase, CaseError, CaseNode, Edge, EdgeKind, EvidenceBinding, NodeId, NodeKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct CaseParseError {
    pub line: u32,
    pub message: String,
}

fn err(line: u32, message: impl Into<String>) -> CaseParseError {
    CaseParseError {
        line,
        message: message.into(),
    }
}

/// Parses case text. Structural well-formedness (edge kinds, acyclicity,
/// rooting) is left to [`super::validate_case`]; this rejects only what
/// cannot be represented: bad syntax, duplicate ids, bindings on
/// non-solutions, non-aggregate evidence queries.
pub fn parse_case(text: &str) -> Result<AssuranceCase, CaseParseError> {
    let mut case: Option<AssuranceCase> = None;
    let mut current: Option<CaseNode> = None;

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = (index + 1) as u32;
        let line = strip_comment(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with("  ");
        if !indented && line.starts_with(char::is_whitespace) {
            return Err(err(
                line_no,
                "bad indentation: property lines are indented exactly two spaces",
            ));
        }

        if case.is_none() {
            let rest = line
                .strip_prefix("case")
                .ok_or_else(|| err(line_no, "expected `case \"title\"` as the first line"))?;
            let (title, leftover) = parse_quoted(rest.trim_start(), line_no)?;
            if !leftover.trim().is_empty() {
                return Err(err(line_no, "unexpected text after case title"));
            }
            case = Some(AssuranceCase::new(title));
            continue;
        }
        let case_ref = case.as_mut().expect("case header parsed");

        if indented {
            let node = current
                .as_mut()
                .ok_or_else(|| err(line_no, "property line without a preceding node"))?;
            parse_property(line.trim_start(), line_no, node, case_ref)?;
            continue;
        }

        // New node line: commit the previous node first.
        if let Some(done) = current.take() {
            push_node(case_ref, done, line_no)?;
        }
        current = Some(parse_node_line(line, line_no)?);
    }

    let mut case = case.ok_or_else(|| err(1, "empty case file"))?;
    if let Some(done) = current.take() {
        let last_line = text.lines().count() as u32;
        push_node(&mut case, done, last_line)?;
    }
    Ok(case)
}

fn push_node(case: &mut AssuranceCase, node: CaseNode, line: u32) -> Result<(), CaseParseError> {
    case.add_node(node).map_err(|e| match e {
        CaseError::DuplicateId(id) => err(line, format!("duplicate node id `{id}`")),
        other => err(line, other.to_string()),
    })
}

fn parse_node_line(line: &str, line_no: u32) -> Result<CaseNode, CaseParseError> {
    let mut parts = line.splitn(2, char::is_whitespace);
    let keyword = parts.next().expect("non-empty line");
    let kind = NodeKind::from_keyword(keyword)
        .ok_or_else(|| err(line_no, format!("unknown node kind `{keyword}`")))?;
    let rest = parts.next().unwrap_or("").trim_start();
    let mut id_parts = rest.splitn(2, char::is_whitespace);
    let id_text = id_parts.next().unwrap_or("");
    let id = NodeId::new(id_text)
        .map_err(|_| err(line_no, format!("invalid node id `{id_text}`")))?;
    let statement_part = id_parts.next().unwrap_or("").trim_start();
    let (statement, leftover) = parse_quoted(statement_part, line_no)?;
    if !leftover.trim().is_empty() {
        return Err(err(line_no, "unexpected text after node statement"));
    }
    Ok(CaseNode {
        id,
        kind,
        statement,
        binding: None,
    })
}

fn parse_property(
    line: &str,
    line_no: u32,
    node: &mut CaseNode,
    case: &mut AssuranceCase,
) -> Result<(), CaseParseError> {
    let mut parts = line.splitn(2, char::is_whitespace);
    let keyword = parts.next().expect("non-empty line");
    let rest = parts.next().unwrap_or("").trim();
    match keyword {
        "supports" | "context-of" => {
            let target = parse_id(rest, line_no)?;
            // `X supports P` makes X the SupportedBy child of P, so the
            // edge runs from the parent P to X. Same shape for contexts.
            let kind = if keyword == "supports" {
                EdgeKind::SupportedBy
            } else {
                EdgeKind::InContextOf
            };
            case.add_edge(Edge {
                kind,
                from: target,
                to: node.id.clone(),
            });
            Ok(())
        }
        "challenges" | "mitigated-by" => {
            let target = parse_id(rest, line_no)?;
            let kind = if keyword == "challenges" {
                EdgeKind::Challenges
            } else {
                EdgeKind::MitigatedBy
            };
            case.add_edge(Edge {
                kind,
                from: node.id.clone(),
                to: target,
            });
            Ok(())
        }
        "evidence" => {
            if node.kind != NodeKind::Solution {
                return Err(err(
                    line_no,
                    format!("evidence is only allowed on solution nodes, `{}` is a {}", node.id, node.kind),
                ));
            }
            if node.binding.is_some() {
                return Err(err(line_no, format!("duplicate evidence on `{}`", node.id)));
            }
            node.binding = Some(parse_evidence(rest, line_no)?);
            Ok(())
        }
        other => Err(err(line_no, format!("unknown property `{other}`"))),
    }
}

fn parse_id(text: &str, line_no: u32) -> Result<NodeId, CaseParseError> {
    if text.split_whitespace().count() != 1 {
        return Err(err(line_no, "expected exactly one node id"));
    }
    NodeId::new(text).map_err(|_| err(line_no, format!("invalid node id `{text}`")))
}

/// `evidence <query> expect <cmp> <number>`; the expect clause is anchored
/// at the last ` expect ` so query text is free to contain the word.
fn parse_evidence(text: &str, line_no: u32) -> Result<EvidenceBinding, CaseParseError> {
    let split_at = text
        .rfind(" expect ")
        .ok_or_else(|| err(line_no, "evidence needs an `expect <cmp> <number>` clause"))?;
    let query_text = text[..split_at].trim().to_string();
    let clause = text[split_at + " expect ".len()..].trim();
    let mut parts = clause.split_whitespace();
    let cmp_text = parts
        .next()
        .ok_or_else(|| err(line_no, "expected comparator after `expect`"))?;
    let comparator = Comparator::parse(cmp_text)
        .ok_or_else(|| err(line_no, format!("unknown comparator `{cmp_text}`")))?;
    let number = parts
        .next()
        .ok_or_else(|| err(line_no, "expected threshold number"))?;
    if parts.next().is_some() {
        return Err(err(line_no, "unexpected text after threshold"));
    }
    let threshold = if number.contains('.') {
        Literal::Decimal(
            Decimal::parse(number).map_err(|e| err(line_no, e.to_string()))?,
        )
    } else {
        Literal::Integer(
            number
                .parse::<i64>()
                .map_err(|_| err(line_no, format!("invalid threshold `{number}`")))?,
        )
    };
    let query = parse_query(&query_text)
        .map_err(|e| err(line_no, format!("evidence query: {}", e.message)))?;
    if !query.is_aggregate() {
        return Err(err(
            line_no,
            "evidence query must use a COUNT/MIN/MAX/AVG aggregate",
        ));
    }
    Ok(EvidenceBinding {
        query_text,
        query,
        comparator,
        threshold,
    })
}

/// Parses a leading quoted string, returning (content, remainder).
fn parse_quoted(text: &str, line_no: u32) -> Result<(String, &str), CaseParseError> {
    let rest = text
        .strip_prefix('"')
        .ok_or_else(|| err(line_no, "expected a quoted string"))?;
    let mut out = String::new();
    let mut chars = rest.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Ok((out, &rest[i + 1..])),
            '\\' => match chars.next() {
                Some((_, '\\')) => out.push('\\'),
                Some((_, '"')) => out.push('"'),
                Some((_, 'n')) => out.push('\n'),
                Some((_, 'r')) => out.push('\r'),
                Some((_, 't')) => out.push('\t'),
                Some((_, other)) => {
                    return Err(err(line_no, format!("unknown escape `\\{other}`")));
                }
                None => return Err(err(line_no, "unterminated string")),
            },
            c => out.push(c),
        }
    }
    Err(err(line_no, "unterminated string"))
}

/// Drops a `#` comment, respecting quoted strings.
fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_string => escaped = true,
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_goal_case() {
        let case = parse_case("case \"t\"\ngoal G1 \"root\"\n").unwrap();
        assert_eq!(case.len(), 1);
        let id = NodeId::new("G1").unwrap();
        assert_eq!(case.node(&id).unwrap().kind, NodeKind::Goal);
        assert_eq!(case.node(&id).unwrap().statement, "root");
    }

    #[test]
    fn supports_builds_parent_to_child_edge() {
        let case = parse_case(
            "case \"t\"\ngoal G1 \"root\"\nsolution Sn1 \"ev\"\n  supports G1\n",
        )
        .unwrap();
        let edges: Vec<&Edge> = case.edges().collect();
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].kind, EdgeKind::SupportedBy);
        assert_eq!(edges[0].from.as_str(), "G1");
        assert_eq!(edges[0].to.as_str(), "Sn1");
    }

    #[test]
    fn evidence_on_goal_is_rejected() {
        let text = "case \"t\"\ngoal G1 \"root\"\n  evidence PREFIX : <urn:a:> SELECT COUNT(?a) WHERE { ?a :p ?v } expect >= 1\n";
        let e = parse_case(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("only allowed on solution"));
    }

    #[test]
    fn evidence_parses_query_comparator_and_threshold() {
        let text = "case \"t\"\ngoal G1 \"r\"\nsolution Sn1 \"s\"\n  supports G1\n  evidence PREFIX : <urn:a:> SELECT MAX(?v) WHERE { ?a :p ?v } expect <= 0.1\n";
        let case = parse_case(text).unwrap();
        let sn = case.node(&NodeId::new("Sn1").unwrap()).unwrap();
        let binding = sn.binding.as_ref().unwrap();
        assert_eq!(binding.comparator, Comparator::Le);
        assert_eq!(binding.threshold, Literal::Decimal(Decimal::parse("0.1").unwrap()));
        assert!(binding.query.is_aggregate());
        assert_eq!(binding.query_text, "PREFIX : <urn:a:> SELECT MAX(?v) WHERE { ?a :p ?v }");
    }

    #[test]
    fn non_aggregate_evidence_is_rejected() {
        let text = "case \"t\"\nsolution Sn1 \"s\"\n  evidence PREFIX : <urn:a:> SELECT ?v WHERE { ?a :p ?v } expect <= 0.1\n";
        let e = parse_case(text).unwrap_err();
        assert!(e.message.contains("aggregate"));
    }

    #[test]
    fn duplicate_id_is_a_parse_error() {
        let e = parse_case("case \"t\"\ngoal G1 \"a\"\ngoal G1 \"b\"\n").unwrap_err();
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn property_without_node_is_an_error() {
        let e = parse_case("case \"t\"\n  supports G1\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn unknown_kind_is_an_error_with_line_number() {
        let e = parse_case("case \"t\"\ngaol G1 \"oops\"\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("gaol"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\ncase \"t\"\n\n# a goal\ngoal G1 \"root # not a comment\" # trailing\n";
        let case = parse_case(text).unwrap();
        let node = case.node(&NodeId::new("G1").unwrap()).unwrap();
        assert_eq!(node.statement, "root # not a comment");
    }

    #[test]
    fn challenges_and_mitigated_by_run_from_the_counterclaim() {
        let text = "case \"t\"\ngoal G1 \"r\"\nsolution Sn1 \"s\"\n  supports G1\ncounterclaim CC1 \"doubt\"\n  challenges G1\n  mitigated-by Sn1\n";
        let case = parse_case(text).unwrap();
        let challengers = case.challengers(&NodeId::new("G1").unwrap());
        assert_eq!(challengers.len(), 1);
        assert_eq!(challengers[0].as_str(), "CC1");
        let mitigators = case.mitigators(&NodeId::new("CC1").unwrap());
        assert_eq!(mitigators.len(), 1);
        assert_eq!(mitigators[0].as_str(), "Sn1");
    }
}
