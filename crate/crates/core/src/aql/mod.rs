//! Conjunctive query language over the triple store.
//!
//! A query is a SPARQL-inspired subset: `PREFIX` declarations, a `SELECT`
//! projection (variables or a single COUNT/MIN/MAX/AVG aggregate), a `WHERE`
//! block of triple patterns, and `FILTER` comparisons. Evaluation is a
//! left-to-right natural join with set semantics: the solution set is
//! independent of pattern order, and rows come out sorted by their canonical
//! term tokens so results are reproducible.
//!
//! An aggregate over an empty solution set is a first-class "no evidence"
//! outcome, distinct from zero and from errors; claim evaluation maps it to
//! an Unknown status rather than letting absent experiments satisfy claims.

mod parser;

pub use parser::{parse_query, AqlError};

use std::fmt;

use thiserror::Error;

use crate::store::{Bindings, Graph, Literal, Term, TriplePattern, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateKind {
    Count,
    Min,
    Max,
    Avg,
}

impl fmt::Display for AggregateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AggregateKind::Count => "COUNT",
            AggregateKind::Min => "MIN",
            AggregateKind::Max => "MAX",
            AggregateKind::Avg => "AVG",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    pub fn parse(text: &str) -> Option<Comparator> {
        match text {
            "=" => Some(Comparator::Eq),
            "!=" => Some(Comparator::Ne),
            "<" => Some(Comparator::Lt),
            "<=" => Some(Comparator::Le),
            ">" => Some(Comparator::Gt),
            ">=" => Some(Comparator::Ge),
            _ => None,
        }
    }

    pub fn apply(&self, ordering: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Eq => ordering == Equal,
            Comparator::Ne => ordering != Equal,
            Comparator::Lt => ordering == Less,
            Comparator::Le => ordering != Greater,
            Comparator::Gt => ordering == Greater,
            Comparator::Ge => ordering != Less,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Vars(Vec<Variable>),
    Aggregate(AggregateKind, Variable),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub var: Variable,
    pub comparator: Comparator,
    pub constant: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub projection: Projection,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl Query {
    pub fn is_aggregate(&self) -> bool {
        matches!(self.projection, Projection::Aggregate(..))
    }
}

/// Tabular query result with a deterministic row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

/// Result of an aggregate: a value, or "no evidence" when the solution set
/// was empty (COUNT yields 0 instead).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregateOutcome {
    Value(Literal),
    NoEvidence,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("{kind} over ?{var} encountered non-numeric value {value}")]
    NonNumericAggregate {
        kind: AggregateKind,
        var: String,
        value: String,
    },
    #[error("aggregate arithmetic overflow")]
    Overflow,
    #[error("query does not have an aggregate projection")]
    NotAggregate,
}

/// Evaluates a query: natural join of the patterns (left to right), filters,
/// then projection or aggregation.
pub fn evaluate_query(graph: &Graph, query: &Query) -> Result<ResultTable, EvalError> {
    let solutions = solve(graph, query);
    match &query.projection {
        Projection::Vars(vars) => {
            let columns = vars.iter().map(|v| v.to_string()).collect();
            let mut rows: Vec<Vec<Term>> = solutions
                .iter()
                .map(|b| vars.iter().map(|v| b[v].clone()).collect())
                .collect();
            rows.sort();
            Ok(ResultTable { columns, rows })
        }
        Projection::Aggregate(kind, var) => {
            let values = collect_aggregate_input(&solutions, *kind, var)?;
            let columns = vec![format!("{kind}({var})")];
            let rows = match apply_aggregate(&values, *kind)? {
                AggregateOutcome::Value(lit) => vec![vec![Term::Literal(lit)]],
                AggregateOutcome::NoEvidence => Vec::new(),
            };
            Ok(ResultTable { columns, rows })
        }
    }
}

/// Evaluates an aggregate query directly to its outcome.
pub fn evaluate_aggregate(graph: &Graph, query: &Query) -> Result<AggregateOutcome, EvalError> {
    let Projection::Aggregate(kind, var) = &query.projection else {
        return Err(EvalError::NotAggregate);
    };
    let solutions = solve(graph, query);
    let values = collect_aggregate_input(&solutions, *kind, var)?;
    apply_aggregate(&values, *kind)
}

/// The distinct full solution set, filtered, in a deterministic order.
fn solve(graph: &Graph, query: &Query) -> Vec<Bindings> {
    let mut solutions = vec![Bindings::new()];
    for pattern in &query.patterns {
        let mut extended = Vec::new();
        for binding in &solutions {
            let ground = substitute(pattern, binding);
            for found in graph.match_pattern(&ground) {
                let mut merged = binding.clone();
                merged.extend(found);
                extended.push(merged);
            }
        }
        solutions = extended;
        if solutions.is_empty() {
            break;
        }
    }
    solutions.retain(|b| query.filters.iter().all(|f| filter_satisfied(f, b)));
    solutions.sort();
    solutions
}

/// Replaces variables already bound in `binding` with their ground terms.
fn substitute(pattern: &TriplePattern, binding: &Bindings) -> TriplePattern {
    use crate::store::{IriOrVar, TermOrVar};
    let subst_iri = |slot: &IriOrVar| match slot {
        IriOrVar::Var(v) => match binding.get(v) {
            Some(Term::Iri(iri)) => IriOrVar::Iri(iri.clone()),
            // A variable bound to a literal can never match a subject or
            // predicate; keep it symbolic and let the consistency check in
            // match_triple reject the row.
            _ => slot.clone(),
        },
        ground => ground.clone(),
    };
    let subst_term = |slot: &TermOrVar| match slot {
        TermOrVar::Var(v) => match binding.get(v) {
            Some(term) => TermOrVar::Term(term.clone()),
            None => slot.clone(),
        },
        ground => ground.clone(),
    };
    TriplePattern {
        subject: subst_iri(&pattern.subject),
        predicate: subst_iri(&pattern.predicate),
        object: subst_term(&pattern.object),
    }
}

/// A row satisfies a filter iff the bound term is a literal comparable with
/// the constant and the comparison holds. Numerics compare across
/// integer/decimal; non-numerics support `=`/`!=` on equal datatypes only.
/// Incomparable pairs (including IRIs) never satisfy.
fn filter_satisfied(filter: &Filter, binding: &Bindings) -> bool {
    let Some(term) = binding.get(&filter.var) else {
        return false;
    };
    let Term::Literal(lit) = term else {
        return false;
    };
    if let Some(ordering) = lit.numeric_cmp(&filter.constant) {
        return filter.comparator.apply(ordering);
    }
    if lit.datatype() == filter.constant.datatype()
        && matches!(filter.comparator, Comparator::Eq | Comparator::Ne)
    {
        let equal = lit == &filter.constant;
        return match filter.comparator {
            Comparator::Eq => equal,
            Comparator::Ne => !equal,
            _ => unreachable!(),
        };
    }
    false
}

fn collect_aggregate_input(
    solutions: &[Bindings],
    kind: AggregateKind,
    var: &Variable,
) -> Result<Vec<Literal>, EvalError> {
    let mut values = Vec::with_capacity(solutions.len());
    for binding in solutions {
        let term = &binding[var];
        match term {
            Term::Literal(lit) => values.push(lit.clone()),
            Term::Iri(iri) if kind == AggregateKind::Count => {
                // COUNT does not inspect values; keep a placeholder literal.
                values.push(Literal::String(iri.as_str().to_string()));
            }
            Term::Iri(iri) => {
                return Err(EvalError::NonNumericAggregate {
                    kind,
                    var: var.0.clone(),
                    value: format!("<{iri}>"),
                });
            }
        }
    }
    Ok(values)
}

/// Applies an aggregate to a value bag. COUNT yields an integer and never
/// errors; MIN/MAX/AVG demand numeric input and report "no evidence" on an
/// empty bag. AVG is an exact rational mean rendered as a canonical decimal.
pub fn apply_aggregate(values: &[Literal], kind: AggregateKind) -> Result<AggregateOutcome, EvalError> {
    if kind == AggregateKind::Count {
        return Ok(AggregateOutcome::Value(Literal::Integer(values.len() as i64)));
    }
    if values.is_empty() {
        return Ok(AggregateOutcome::NoEvidence);
    }
    for v in values {
        if !v.is_numeric() {
            return Err(EvalError::NonNumericAggregate {
                kind,
                var: String::new(),
                value: v.lexical(),
            });
        }
    }
    match kind {
        AggregateKind::Count => unreachable!(),
        AggregateKind::Min | AggregateKind::Max => {
            let mut sorted: Vec<&Literal> = values.iter().collect();
            sorted.sort_by_key(|l| l.lexical());
            let mut best = sorted[0];
            for cand in &sorted[1..] {
                let ordering = cand.numeric_cmp(best).expect("numeric values");
                let better = match kind {
                    AggregateKind::Min => ordering == std::cmp::Ordering::Less,
                    AggregateKind::Max => ordering == std::cmp::Ordering::Greater,
                    _ => unreachable!(),
                };
                if better {
                    best = cand;
                }
            }
            Ok(AggregateOutcome::Value(best.clone()))
        }
        AggregateKind::Avg => {
            let mut max_den: i128 = 1;
            let ratios: Vec<(i128, i128)> = values
                .iter()
                .map(|v| match v {
                    Literal::Integer(i) => (*i as i128, 1),
                    Literal::Decimal(d) => d.as_ratio(),
                    _ => unreachable!("checked numeric"),
                })
                .collect();
            for (_, den) in &ratios {
                max_den = max_den.max(*den);
            }
            let mut sum: i128 = 0;
            for (num, den) in &ratios {
                let scaled = num
                    .checked_mul(max_den / den)
                    .ok_or(EvalError::Overflow)?;
                sum = sum.checked_add(scaled).ok_or(EvalError::Overflow)?;
            }
            let count = values.len() as i128;
            let denominator = max_den.checked_mul(count).ok_or(EvalError::Overflow)?;
            let mean = crate::store::Decimal::from_ratio(sum, denominator)
                .map_err(|_| EvalError::Overflow)?;
            Ok(AggregateOutcome::Value(Literal::Decimal(mean)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{parse_turtle, Decimal};

    fn fixture() -> Graph {
        parse_turtle(
            "@prefix : <urn:argus:> .\n\
             :String1 a :ExtractionAttack .\n\
             :String1 :targetsModel :LLaMa-2-7B-chat .\n\
             :String1 :attackSuccessRate 0.5 .\n",
        )
        .unwrap()
    }

    fn q(text: &str) -> Query {
        parse_query(text).unwrap()
    }

    const P: &str = "PREFIX : <urn:argus:> ";

    #[test]
    fn max_aggregate_over_fixture() {
        let query = q(&format!(
            "{P}SELECT MAX(?asr) WHERE {{ ?a :targetsModel :LLaMa-2-7B-chat . ?a :attackSuccessRate ?asr }}"
        ));
        let outcome = evaluate_aggregate(&fixture(), &query).unwrap();
        assert_eq!(
            outcome,
            AggregateOutcome::Value(Literal::Decimal(Decimal::parse("0.5").unwrap()))
        );
    }

    #[test]
    fn projection_query_over_type() {
        let query = q(&format!("{P}SELECT ?a WHERE {{ ?a a :ExtractionAttack }}"));
        let table = evaluate_query(&fixture(), &query).unwrap();
        assert_eq!(table.columns, vec!["?a"]);
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0][0], Term::iri("urn:argus:String1").unwrap());
    }

    #[test]
    fn count_over_empty_graph_is_zero() {
        let query = q(&format!("{P}SELECT COUNT(?a) WHERE {{ ?a a :ExtractionAttack }}"));
        let outcome = evaluate_aggregate(&Graph::new(), &query).unwrap();
        assert_eq!(outcome, AggregateOutcome::Value(Literal::Integer(0)));
    }

    #[test]
    fn min_max_avg_over_empty_graph_is_no_evidence() {
        let query = q(&format!("{P}SELECT AVG(?v) WHERE {{ ?a :p ?v }}"));
        let outcome = evaluate_aggregate(&Graph::new(), &query).unwrap();
        assert_eq!(outcome, AggregateOutcome::NoEvidence);
    }

    #[test]
    fn avg_is_exact_mean() {
        let g = parse_turtle(
            "@prefix : <urn:a:> .\n:x :asr 0.2 .\n:y :asr 0.4 .\n",
        )
        .unwrap();
        let query = q("PREFIX : <urn:a:> SELECT AVG(?v) WHERE { ?a :asr ?v }");
        let outcome = evaluate_aggregate(&g, &query).unwrap();
        assert_eq!(
            outcome,
            AggregateOutcome::Value(Literal::Decimal(Decimal::parse("0.3").unwrap()))
        );
    }

    #[test]
    fn avg_over_integers_renders_decimal() {
        assert_eq!(
            apply_aggregate(&[Literal::Integer(1), Literal::Integer(2)], AggregateKind::Avg).unwrap(),
            AggregateOutcome::Value(Literal::Decimal(Decimal::parse("1.5").unwrap()))
        );
    }

    #[test]
    fn max_over_single_value() {
        assert_eq!(
            apply_aggregate(
                &[Literal::Decimal(Decimal::parse("0.5").unwrap())],
                AggregateKind::Max
            )
            .unwrap(),
            AggregateOutcome::Value(Literal::Decimal(Decimal::parse("0.5").unwrap()))
        );
    }

    #[test]
    fn count_over_empty_list_is_zero() {
        assert_eq!(
            apply_aggregate(&[], AggregateKind::Count).unwrap(),
            AggregateOutcome::Value(Literal::Integer(0))
        );
    }

    #[test]
    fn non_numeric_aggregate_is_a_type_error() {
        let err = apply_aggregate(&[Literal::string("high")], AggregateKind::Max).unwrap_err();
        assert!(matches!(err, EvalError::NonNumericAggregate { .. }));
    }

    #[test]
    fn filters_drop_unsatisfying_rows() {
        let g = parse_turtle("@prefix : <urn:a:> .\n:x :v 1 .\n:y :v 5 .\n").unwrap();
        let query = q("PREFIX : <urn:a:> SELECT ?a WHERE { ?a :v ?v } FILTER(?v >= 2)");
        let table = evaluate_query(&g, &query).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0][0], Term::iri("urn:a:y").unwrap());
    }

    #[test]
    fn filter_on_iri_binding_never_satisfies() {
        let g = parse_turtle("@prefix : <urn:a:> .\n:x :p :y .\n").unwrap();
        let query = q("PREFIX : <urn:a:> SELECT ?o WHERE { ?s :p ?o } FILTER(?o = 1)");
        assert!(evaluate_query(&g, &query).unwrap().rows.is_empty());
    }

    #[test]
    fn pattern_order_does_not_change_results() {
        let g = parse_turtle(
            "@prefix : <urn:a:> .\n:x :p :y .\n:y :q 2 .\n:z :q 3 .\n",
        )
        .unwrap();
        let a = q("PREFIX : <urn:a:> SELECT ?s ?v WHERE { ?s :p ?m . ?m :q ?v }");
        let b = q("PREFIX : <urn:a:> SELECT ?s ?v WHERE { ?m :q ?v . ?s :p ?m }");
        assert_eq!(
            evaluate_query(&g, &a).unwrap().rows,
            evaluate_query(&g, &b).unwrap().rows
        );
    }

    #[test]
    fn count_matches_projection_row_count() {
        let g = parse_turtle(
            "@prefix : <urn:a:> .\n:x :v 1 .\n:y :v 1 .\n:z :v 2 .\n",
        )
        .unwrap();
        let proj = q("PREFIX : <urn:a:> SELECT ?v WHERE { ?a :v ?v }");
        let count = q("PREFIX : <urn:a:> SELECT COUNT(?v) WHERE { ?a :v ?v }");
        let rows = evaluate_query(&g, &proj).unwrap().rows;
        let outcome = evaluate_aggregate(&g, &count).unwrap();
        assert_eq!(outcome, AggregateOutcome::Value(Literal::Integer(rows.len() as i64)));
        // duplicates in the projected bag are kept
        assert_eq!(rows.len(), 3);
    }
}
