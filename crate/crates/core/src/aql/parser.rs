//! Query text parser.
//!
//! Grammar: `PREFIX name: <iri>`* `SELECT` (var-list | aggregate) `WHERE {`
//! (term term term `.`)+ `}` (`FILTER(` var cmp literal `)`)*. Terms follow
//! the Turtle subset plus `?var` variables; prefixed names resolve against
//! the query-local PREFIX declarations only.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::store::lexer::{lex, Mode, Pos, Token};
use crate::store::{
    vocab, Datatype, Iri, IriOrVar, Literal, Term, TermOrVar, TriplePattern, Variable,
};

use super::{AggregateKind, Comparator, Filter, Projection, Query};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct AqlError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl AqlError {
    fn at(pos: Pos, message: impl Into<String>) -> AqlError {
        AqlError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

struct QueryParser {
    tokens: Vec<(Token, Pos)>,
    index: usize,
    prefixes: BTreeMap<String, String>,
    end: Pos,
}

/// Parses a query and checks that every projected, aggregated, and filtered
/// variable occurs in at least one pattern.
pub fn parse_query(text: &str) -> Result<Query, AqlError> {
    let tokens = lex(text, Mode::Query).map_err(|e| AqlError::at(e.pos, e.message))?;
    let end = Pos {
        line: text.lines().count().max(1) as u32,
        col: 1,
    };
    let mut parser = QueryParser {
        tokens,
        index: 0,
        prefixes: BTreeMap::new(),
        end,
    };
    parser.query()
}

impl QueryParser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.tokens
            .get(self.index)
            .map(|(_, p)| *p)
            .unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<(Token, Pos)> {
        let item = self.tokens.get(self.index).cloned();
        self.index += 1;
        item
    }

    fn expect_ident(&mut self, keyword: &str) -> Result<(), AqlError> {
        match self.next() {
            Some((Token::Ident(w), _)) if w == keyword => Ok(()),
            Some((t, p)) => Err(AqlError::at(
                p,
                format!("expected `{keyword}`, found {}", t.describe()),
            )),
            None => Err(AqlError::at(self.end, format!("expected `{keyword}`"))),
        }
    }

    fn expect(&mut self, token: Token) -> Result<(), AqlError> {
        match self.next() {
            Some((t, _)) if t == token => Ok(()),
            Some((t, p)) => Err(AqlError::at(
                p,
                format!("expected {}, found {}", token.describe(), t.describe()),
            )),
            None => Err(AqlError::at(
                self.end,
                format!("expected {}", token.describe()),
            )),
        }
    }

    fn query(&mut self) -> Result<Query, AqlError> {
        while matches!(self.peek(), Some(Token::Ident(w)) if w == "PREFIX") {
            self.prefix_declaration()?;
        }
        self.expect_ident("SELECT")?;
        let projection = self.projection()?;
        self.expect_ident("WHERE")?;
        self.expect(Token::LBrace)?;
        let mut patterns = Vec::new();
        loop {
            patterns.push(self.pattern()?);
            match self.peek() {
                Some(Token::Dot) => {
                    self.next();
                    if matches!(self.peek(), Some(Token::RBrace)) {
                        self.next();
                        break;
                    }
                }
                Some(Token::RBrace) => {
                    self.next();
                    break;
                }
                Some(t) => {
                    let msg = format!("expected `.` or `}}`, found {}", t.describe());
                    return Err(AqlError::at(self.pos(), msg));
                }
                None => return Err(AqlError::at(self.end, "unterminated WHERE block")),
            }
        }
        let mut filters = Vec::new();
        while matches!(self.peek(), Some(Token::Ident(w)) if w == "FILTER") {
            filters.push(self.filter()?);
        }
        if let Some((t, p)) = self.next() {
            return Err(AqlError::at(
                p,
                format!("unexpected {} after query", t.describe()),
            ));
        }
        let query = Query {
            projection,
            patterns,
            filters,
        };
        self.check_variables(&query)?;
        Ok(query)
    }

    fn prefix_declaration(&mut self) -> Result<(), AqlError> {
        self.next(); // PREFIX
        let name = match self.next() {
            Some((Token::PrefixedName { prefix, local }, pos)) => {
                if !local.is_empty() {
                    return Err(AqlError::at(pos, "prefix name must end with `:`"));
                }
                prefix
            }
            Some((t, p)) => {
                return Err(AqlError::at(
                    p,
                    format!("expected prefix name, found {}", t.describe()),
                ));
            }
            None => return Err(AqlError::at(self.end, "expected prefix name")),
        };
        match self.next() {
            Some((Token::IriRef(iri), pos)) => {
                Iri::new(iri.clone()).map_err(|e| AqlError::at(pos, e.to_string()))?;
                self.prefixes.insert(name, iri);
                Ok(())
            }
            Some((t, p)) => Err(AqlError::at(
                p,
                format!("expected IRI, found {}", t.describe()),
            )),
            None => Err(AqlError::at(self.end, "expected IRI")),
        }
    }

    fn projection(&mut self) -> Result<Projection, AqlError> {
        let aggregate = match self.peek() {
            Some(Token::Ident(w)) => match w.as_str() {
                "COUNT" => Some(AggregateKind::Count),
                "MIN" => Some(AggregateKind::Min),
                "MAX" => Some(AggregateKind::Max),
                "AVG" => Some(AggregateKind::Avg),
                _ => None,
            },
            _ => None,
        };
        if let Some(kind) = aggregate {
            self.next();
            self.expect(Token::LParen)?;
            let var = self.variable()?;
            self.expect(Token::RParen)?;
            return Ok(Projection::Aggregate(kind, var));
        }
        let mut vars = Vec::new();
        while matches!(self.peek(), Some(Token::Var(_))) {
            vars.push(self.variable()?);
        }
        if vars.is_empty() {
            return Err(AqlError::at(
                self.pos(),
                "SELECT needs variables or one COUNT/MIN/MAX/AVG aggregate",
            ));
        }
        Ok(Projection::Vars(vars))
    }

    fn variable(&mut self) -> Result<Variable, AqlError> {
        match self.next() {
            Some((Token::Var(name), _)) => Ok(Variable(name)),
            Some((t, p)) => Err(AqlError::at(
                p,
                format!("expected variable, found {}", t.describe()),
            )),
            None => Err(AqlError::at(self.end, "expected variable")),
        }
    }

    fn pattern(&mut self) -> Result<TriplePattern, AqlError> {
        let subject = self.iri_or_var("subject")?;
        let predicate = self.predicate_slot()?;
        let object = self.object_slot()?;
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    fn iri_or_var(&mut self, role: &str) -> Result<IriOrVar, AqlError> {
        let pos = self.pos();
        match self.object_slot()? {
            TermOrVar::Var(v) => Ok(IriOrVar::Var(v)),
            TermOrVar::Term(Term::Iri(iri)) => Ok(IriOrVar::Iri(iri)),
            TermOrVar::Term(Term::Literal(_)) => {
                Err(AqlError::at(pos, format!("{role} must be an IRI or variable")))
            }
        }
    }

    fn predicate_slot(&mut self) -> Result<IriOrVar, AqlError> {
        if matches!(self.peek(), Some(Token::Ident(w)) if w == "a") {
            self.next();
            return Ok(IriOrVar::Iri(Iri::new(vocab::RDF_TYPE).expect("constant IRI")));
        }
        self.iri_or_var("predicate")
    }

    fn object_slot(&mut self) -> Result<TermOrVar, AqlError> {
        let (token, pos) = self
            .next()
            .ok_or_else(|| AqlError::at(self.end, "unexpected end of query"))?;
        let term = match token {
            Token::Var(name) => return Ok(TermOrVar::Var(Variable(name))),
            Token::IriRef(iri) => {
                Term::Iri(Iri::new(iri).map_err(|e| AqlError::at(pos, e.to_string()))?)
            }
            Token::PrefixedName { prefix, local } => Term::Iri(self.resolve(&prefix, &local, pos)?),
            Token::IntegerLit(text) => Term::Literal(
                text.parse::<i64>()
                    .map(Literal::Integer)
                    .map_err(|_| AqlError::at(pos, format!("integer `{text}` out of range")))?,
            ),
            Token::DecimalLit(text) => Term::Literal(
                crate::store::Decimal::parse(&text)
                    .map(Literal::Decimal)
                    .map_err(|e| AqlError::at(pos, e.to_string()))?,
            ),
            Token::StringLit(value) => {
                if matches!(self.peek(), Some(Token::CaretCaret)) {
                    self.next();
                    let (dt_token, dt_pos) = self
                        .next()
                        .ok_or_else(|| AqlError::at(self.end, "expected datatype after `^^`"))?;
                    let dt_iri = match dt_token {
                        Token::IriRef(iri) => {
                            Iri::new(iri).map_err(|e| AqlError::at(dt_pos, e.to_string()))?
                        }
                        Token::PrefixedName { prefix, local } => {
                            self.resolve(&prefix, &local, dt_pos)?
                        }
                        other => {
                            return Err(AqlError::at(
                                dt_pos,
                                format!("expected datatype IRI, found {}", other.describe()),
                            ));
                        }
                    };
                    let datatype = Datatype::from_iri(dt_iri.as_str()).ok_or_else(|| {
                        AqlError::at(dt_pos, format!("unknown datatype <{dt_iri}>"))
                    })?;
                    Term::Literal(
                        Literal::from_lexical(&value, datatype)
                            .map_err(|e| AqlError::at(pos, e.to_string()))?,
                    )
                } else {
                    Term::Literal(Literal::String(value))
                }
            }
            Token::Ident(word) => match word.as_str() {
                "true" => Term::Literal(Literal::Boolean(true)),
                "false" => Term::Literal(Literal::Boolean(false)),
                other => {
                    return Err(AqlError::at(pos, format!("unexpected word `{other}`")));
                }
            },
            other => {
                return Err(AqlError::at(
                    pos,
                    format!("unexpected {}", other.describe()),
                ));
            }
        };
        Ok(TermOrVar::Term(term))
    }

    fn filter(&mut self) -> Result<Filter, AqlError> {
        self.next(); // FILTER
        self.expect(Token::LParen)?;
        let var = self.variable()?;
        let comparator = match self.next() {
            Some((Token::Cmp(op), pos)) => Comparator::parse(&op)
                .ok_or_else(|| AqlError::at(pos, format!("unknown comparator `{op}`")))?,
            Some((t, p)) => {
                return Err(AqlError::at(
                    p,
                    format!("expected comparator, found {}", t.describe()),
                ));
            }
            None => return Err(AqlError::at(self.end, "expected comparator")),
        };
        let pos = self.pos();
        let constant = match self.object_slot()? {
            TermOrVar::Term(Term::Literal(lit)) => lit,
            _ => {
                return Err(AqlError::at(pos, "filter constant must be a literal"));
            }
        };
        self.expect(Token::RParen)?;
        Ok(Filter {
            var,
            comparator,
            constant,
        })
    }

    fn resolve(&self, prefix: &str, local: &str, pos: Pos) -> Result<Iri, AqlError> {
        let base = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| AqlError::at(pos, format!("undeclared prefix `{prefix}:`")))?;
        Iri::new(format!("{base}{local}")).map_err(|e| AqlError::at(pos, e.to_string()))
    }

    fn check_variables(&self, query: &Query) -> Result<(), AqlError> {
        let mut pattern_vars = BTreeSet::new();
        for pattern in &query.patterns {
            for slot in [&pattern.subject, &pattern.predicate] {
                if let IriOrVar::Var(v) = slot {
                    pattern_vars.insert(v.clone());
                }
            }
            if let TermOrVar::Var(v) = &pattern.object {
                pattern_vars.insert(v.clone());
            }
        }
        let mut used: Vec<&Variable> = Vec::new();
        match &query.projection {
            Projection::Vars(vars) => used.extend(vars.iter()),
            Projection::Aggregate(_, var) => used.push(var),
        }
        for filter in &query.filters {
            used.push(&filter.var);
        }
        for var in used {
            if !pattern_vars.contains(var) {
                return Err(AqlError {
                    line: self.end.line,
                    col: self.end.col,
                    message: format!("variable {var} is not bound by any pattern"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_aggregate_query() {
        let q = parse_query(
            "PREFIX : <urn:argus:> SELECT MAX(?asr) WHERE { ?a :targetsModel :LLaMa-2-7B-chat . ?a :attackSuccessRate ?asr }",
        )
        .unwrap();
        assert!(matches!(
            q.projection,
            Projection::Aggregate(AggregateKind::Max, Variable(ref v)) if v == "asr"
        ));
        assert_eq!(q.patterns.len(), 2);
        assert!(q.filters.is_empty());
    }

    #[test]
    fn parses_projection_with_a_keyword() {
        let q = parse_query("PREFIX : <urn:argus:> SELECT ?a WHERE { ?a a :ExtractionAttack }").unwrap();
        assert!(matches!(q.projection, Projection::Vars(ref v) if v.len() == 1));
        match &q.patterns[0].predicate {
            IriOrVar::Iri(iri) => assert_eq!(iri.as_str(), vocab::RDF_TYPE),
            other => panic!("unexpected predicate {other:?}"),
        }
    }

    #[test]
    fn unbound_projection_variable_is_rejected() {
        let err = parse_query("PREFIX : <urn:x:> SELECT MAX(?x) WHERE { ?a :p ?y }").unwrap_err();
        assert!(err.message.contains("?x"));
    }

    #[test]
    fn unbound_filter_variable_is_rejected() {
        let err =
            parse_query("PREFIX : <urn:x:> SELECT ?a WHERE { ?a :p ?y } FILTER(?z > 1)").unwrap_err();
        assert!(err.message.contains("?z"));
    }

    #[test]
    fn filters_parse_with_all_comparators() {
        for op in ["=", "!=", "<", "<=", ">", ">="] {
            let text = format!("PREFIX : <urn:x:> SELECT ?a WHERE {{ ?a :p ?v }} FILTER(?v {op} 0.5)");
            let q = parse_query(&text).unwrap();
            assert_eq!(q.filters.len(), 1, "comparator {op}");
        }
    }

    #[test]
    fn empty_where_block_is_rejected() {
        assert!(parse_query("SELECT ?a WHERE { }").is_err());
    }

    #[test]
    fn literal_subject_is_rejected() {
        let err = parse_query("PREFIX : <urn:x:> SELECT ?a WHERE { 5 :p ?a }").unwrap_err();
        assert!(err.message.contains("subject"));
    }

    #[test]
    fn undeclared_prefix_is_rejected() {
        let err = parse_query("SELECT ?a WHERE { ?a x:p 1 }").unwrap_err();
        assert!(err.message.contains("undeclared prefix"));
    }

    #[test]
    fn trailing_dot_before_brace_is_accepted() {
        let q = parse_query("PREFIX : <urn:x:> SELECT ?a WHERE { ?a :p 1 . }").unwrap();
        assert_eq!(q.patterns.len(), 1);
    }
}
