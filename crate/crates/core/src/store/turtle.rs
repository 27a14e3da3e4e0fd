//! Turtle-subset reader and canonical writer.
//!
//! Supported: `@prefix` declarations, `subject predicate object .` statements
//! with `;` and `,` continuations, the `a` keyword, comments, quoted strings,
//! bare integers/decimals/booleans, prefixed names, `<absolute-iri>` refs, and
//! typed literals `"lex"^^dt` for the four known datatypes. Blank nodes,
//! collections, language tags, `@base`, and multiline strings are rejected
//! with an explicit error.
//!
//! The writer is canonical: prefix block sorted by name, one triple per line
//! in graph order, `a` for rdf:type, literals in canonical lexical form.
//! Parsing a serialized graph yields an equal graph (set equality).

use std::fmt;

use thiserror::Error;

use super::lexer::{lex, Mode, Pos, Token};
use super::{vocab, Datatype, Graph, Iri, Literal, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct TurtleError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl TurtleError {
    fn at(pos: Pos, message: impl Into<String>) -> TurtleError {
        TurtleError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

struct Parser {
    tokens: Vec<(Token, Pos)>,
    index: usize,
    graph: Graph,
    end: Pos,
}

/// Parses a Turtle-subset document into a graph.
pub fn parse_turtle(text: &str) -> Result<Graph, TurtleError> {
    let tokens = lex(text, Mode::Turtle).map_err(|e| TurtleError::at(e.pos, e.message))?;
    let end = Pos {
        line: text.lines().count().max(1) as u32,
        col: 1,
    };
    let mut parser = Parser {
        tokens,
        index: 0,
        graph: Graph::new(),
        end,
    };
    parser.document()?;
    Ok(parser.graph)
}

impl Parser {
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

    fn expect(&mut self, token: Token) -> Result<(), TurtleError> {
        match self.next() {
            Some((t, _)) if t == token => Ok(()),
            Some((t, p)) => Err(TurtleError::at(
                p,
                format!("expected {}, found {}", token.describe(), t.describe()),
            )),
            None => Err(TurtleError::at(
                self.end,
                format!("expected {}, found end of input", token.describe()),
            )),
        }
    }

    fn document(&mut self) -> Result<(), TurtleError> {
        while let Some(token) = self.peek() {
            match token {
                Token::PrefixDirective => self.prefix_declaration()?,
                _ => self.statement()?,
            }
        }
        Ok(())
    }

    fn prefix_declaration(&mut self) -> Result<(), TurtleError> {
        self.next(); // @prefix
        let name = match self.next() {
            Some((Token::PrefixedName { prefix, local }, pos)) => {
                if !local.is_empty() {
                    return Err(TurtleError::at(pos, "prefix name must end with `:`"));
                }
                prefix
            }
            Some((t, p)) => {
                return Err(TurtleError::at(
                    p,
                    format!("expected prefix name, found {}", t.describe()),
                ));
            }
            None => return Err(TurtleError::at(self.end, "expected prefix name")),
        };
        let base = match self.next() {
            Some((Token::IriRef(iri), pos)) => {
                Iri::new(iri).map_err(|e| TurtleError::at(pos, e.to_string()))?
            }
            Some((t, p)) => {
                return Err(TurtleError::at(
                    p,
                    format!("expected IRI, found {}", t.describe()),
                ));
            }
            None => return Err(TurtleError::at(self.end, "expected IRI")),
        };
        self.expect(Token::Dot)?;
        self.graph.declare_prefix(name, base.as_str());
        Ok(())
    }

    fn statement(&mut self) -> Result<(), TurtleError> {
        let subject_pos = self.pos();
        let subject = match self.term()? {
            Term::Iri(iri) => iri,
            Term::Literal(_) => {
                return Err(TurtleError::at(subject_pos, "subject must be an IRI"));
            }
        };
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.term()?;
                self.graph
                    .insert(Triple::new(subject.clone(), predicate.clone(), object));
                match self.peek() {
                    Some(Token::Comma) => {
                        self.next();
                    }
                    _ => break,
                }
            }
            match self.next() {
                Some((Token::Semicolon, _)) => continue,
                Some((Token::Dot, _)) => return Ok(()),
                Some((t, p)) => {
                    return Err(TurtleError::at(
                        p,
                        format!("expected `.`, `;`, or `,`, found {}", t.describe()),
                    ));
                }
                None => {
                    return Err(TurtleError::at(self.end, "statement not terminated with `.`"));
                }
            }
        }
    }

    fn predicate(&mut self) -> Result<Iri, TurtleError> {
        let pos = self.pos();
        if matches!(self.peek(), Some(Token::Ident(w)) if w == "a") {
            self.next();
            return Ok(Iri::new(vocab::RDF_TYPE).expect("constant IRI"));
        }
        match self.term()? {
            Term::Iri(iri) => Ok(iri),
            Term::Literal(_) => Err(TurtleError::at(pos, "predicate must be an IRI")),
        }
    }

    fn term(&mut self) -> Result<Term, TurtleError> {
        let (token, pos) = match self.next() {
            Some(item) => item,
            None => return Err(TurtleError::at(self.end, "unexpected end of input")),
        };
        match token {
            Token::IriRef(iri) => Iri::new(iri)
                .map(Term::Iri)
                .map_err(|e| TurtleError::at(pos, e.to_string())),
            Token::PrefixedName { prefix, local } => {
                self.resolve(&prefix, &local, pos).map(Term::Iri)
            }
            Token::IntegerLit(text) => text
                .parse::<i64>()
                .map(|i| Term::Literal(Literal::Integer(i)))
                .map_err(|_| TurtleError::at(pos, format!("integer `{text}` out of range"))),
            Token::DecimalLit(text) => super::Decimal::parse(&text)
                .map(|d| Term::Literal(Literal::Decimal(d)))
                .map_err(|e| TurtleError::at(pos, e.to_string())),
            Token::StringLit(value) => {
                if matches!(self.peek(), Some(Token::CaretCaret)) {
                    self.next();
                    let (dt_token, dt_pos) = self
                        .next()
                        .ok_or_else(|| TurtleError::at(self.end, "expected datatype after `^^`"))?;
                    let dt_iri = match dt_token {
                        Token::IriRef(iri) => {
                            Iri::new(iri).map_err(|e| TurtleError::at(dt_pos, e.to_string()))?
                        }
                        Token::PrefixedName { prefix, local } => self.resolve(&prefix, &local, dt_pos)?,
                        other => {
                            return Err(TurtleError::at(
                                dt_pos,
                                format!("expected datatype IRI, found {}", other.describe()),
                            ));
                        }
                    };
                    let datatype = Datatype::from_iri(dt_iri.as_str()).ok_or_else(|| {
                        TurtleError::at(dt_pos, format!("unknown datatype <{dt_iri}>"))
                    })?;
                    Literal::from_lexical(&value, datatype)
                        .map(Term::Literal)
                        .map_err(|e| TurtleError::at(pos, e.to_string()))
                } else {
                    Ok(Term::Literal(Literal::String(value)))
                }
            }
            Token::Ident(word) => match word.as_str() {
                "true" => Ok(Term::Literal(Literal::Boolean(true))),
                "false" => Ok(Term::Literal(Literal::Boolean(false))),
                "a" => Err(TurtleError::at(pos, "keyword `a` is only valid as a predicate")),
                other => Err(TurtleError::at(pos, format!("unexpected word `{other}`"))),
            },
            other => Err(TurtleError::at(
                pos,
                format!("unexpected {}", other.describe()),
            )),
        }
    }

    fn resolve(&self, prefix: &str, local: &str, pos: Pos) -> Result<Iri, TurtleError> {
        let base = self.graph.prefixes().get(prefix).ok_or_else(|| {
            TurtleError::at(pos, format!("undeclared prefix `{prefix}:`"))
        })?;
        Iri::new(format!("{base}{local}")).map_err(|e| TurtleError::at(pos, e.to_string()))
    }
}

/// Serializes a graph to the canonical Turtle-subset form.
pub fn serialize_turtle(graph: &Graph) -> String {
    let mut out = String::new();
    for (name, base) in graph.prefixes() {
        out.push_str(&format!("@prefix {name}: <{base}> .\n"));
    }
    if !graph.prefixes().is_empty() && !graph.is_empty() {
        out.push('\n');
    }
    for triple in graph.iter() {
        let subject = render_iri(graph, &triple.subject);
        let predicate = if triple.predicate.as_str() == vocab::RDF_TYPE {
            "a".to_string()
        } else {
            render_iri(graph, &triple.predicate)
        };
        let object = render_term(graph, &triple.object);
        out.push_str(&format!("{subject} {predicate} {object} .\n"));
    }
    out
}

fn render_term(graph: &Graph, term: &Term) -> String {
    match term {
        Term::Iri(iri) => render_iri(graph, iri),
        Term::Literal(lit) => render_literal(lit),
    }
}

fn render_literal(lit: &Literal) -> String {
    match lit {
        Literal::String(s) => super::quote_string(s),
        other => other.lexical(),
    }
}

/// Contract an IRI against the longest matching declared prefix whose
/// remainder survives re-lexing; otherwise emit the absolute form.
fn render_iri(graph: &Graph, iri: &Iri) -> String {
    let mut best: Option<(usize, &str, &str)> = None;
    for (name, base) in graph.prefixes() {
        if let Some(local) = iri.as_str().strip_prefix(base.as_str()) {
            if !local_is_lexable(local) {
                continue;
            }
            let better = match best {
                Some((len, _, _)) => base.len() > len,
                None => true,
            };
            if better {
                best = Some((base.len(), name, local));
            }
        }
    }
    match best {
        Some((_, name, local)) => format!("{name}:{local}"),
        None => format!("<{iri}>"),
    }
}

fn local_is_lexable(local: &str) -> bool {
    if local.ends_with('.') {
        return false;
    }
    local
        .chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_turtle(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Decimal;

    const HEADER: &str = "@prefix : <urn:argus:> .\n";

    #[test]
    fn parses_single_decimal_statement() {
        let g = parse_turtle(&format!("{HEADER}:String1 :attackSuccessRate 0.5 .\n")).unwrap();
        assert_eq!(g.len(), 1);
        let triple = g.iter().next().unwrap();
        assert_eq!(triple.subject.as_str(), "urn:argus:String1");
        assert_eq!(
            triple.object,
            Term::Literal(Literal::Decimal(Decimal::parse("0.5").unwrap()))
        );
    }

    #[test]
    fn prefix_only_document_is_empty_graph() {
        let g = parse_turtle("@prefix : <urn:argus:> .\n@prefix x: <urn:x:> .\n").unwrap();
        assert!(g.is_empty());
        assert_eq!(g.prefixes().len(), 2);
    }

    #[test]
    fn a_expands_to_rdf_type() {
        let g = parse_turtle(&format!("{HEADER}:String1 a :ExtractionAttack .\n")).unwrap();
        assert_eq!(g.len(), 1);
        let triple = g.iter().next().unwrap();
        assert_eq!(triple.predicate.as_str(), vocab::RDF_TYPE);
    }

    #[test]
    fn undeclared_prefix_is_an_error() {
        let err = parse_turtle(":s :p 1 .").unwrap_err();
        assert!(err.message.contains("undeclared prefix"));
        assert_eq!(err.line, 1);
    }

    #[test]
    fn semicolon_and_comma_continuations() {
        let g = parse_turtle(&format!(
            "{HEADER}:s a :Attack , :ExtractionAttack ; :trials 6 ; :observedAt \"t0\" .\n"
        ))
        .unwrap();
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn typed_literal_with_known_datatype() {
        let g = parse_turtle(
            "@prefix : <urn:argus:> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
             :s :asr \"0.50\"^^xsd:decimal .\n",
        )
        .unwrap();
        let triple = g.iter().next().unwrap();
        assert_eq!(
            triple.object,
            Term::Literal(Literal::Decimal(Decimal::parse("0.5").unwrap()))
        );
    }

    #[test]
    fn unknown_datatype_is_an_error() {
        let err = parse_turtle(
            "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n@prefix : <urn:a:> .\n\
             :s :p \"2024\"^^xsd:date .\n",
        )
        .unwrap_err();
        assert!(err.message.contains("unknown datatype"));
    }

    #[test]
    fn literal_subject_is_an_error() {
        let err = parse_turtle(&format!("{HEADER}\"x\" :p 1 .")).unwrap_err();
        assert!(err.message.contains("subject must be an IRI"));
    }

    #[test]
    fn duplicate_statement_keeps_set_semantics() {
        let g = parse_turtle(&format!("{HEADER}:s :p 1 .\n:s :p 1 .\n")).unwrap();
        assert_eq!(g.len(), 1);
        let text = serialize_turtle(&g);
        assert_eq!(text.matches(":s :p 1 .").count(), 1);
    }

    #[test]
    fn serializes_canonically_and_round_trips() {
        let input = format!(
            "{HEADER}# fixture\n:b :p 2 ; :q \"x\" .\n:a a :C .\n:a :p 0.50 .\n:a :flag true .\n"
        );
        let g = parse_turtle(&input).unwrap();
        let text = serialize_turtle(&g);
        let expected = "@prefix : <urn:argus:> .\n\n\
                        :a a :C .\n\
                        :a :flag true .\n\
                        :a :p 0.5 .\n\
                        :b :p 2 .\n\
                        :b :q \"x\" .\n";
        assert_eq!(text, expected);
        assert_eq!(parse_turtle(&text).unwrap(), g);
    }

    #[test]
    fn empty_graph_serializes_to_prefix_block_only() {
        let mut g = Graph::new();
        assert_eq!(serialize_turtle(&g), "");
        g.declare_prefix("", "urn:argus:");
        assert_eq!(serialize_turtle(&g), "@prefix : <urn:argus:> .\n");
    }

    #[test]
    fn uncontractible_iris_render_absolute() {
        let mut g = Graph::new();
        g.declare_prefix("", "urn:argus:");
        g.insert(Triple::new(
            Iri::new("urn:other:s").unwrap(),
            Iri::new("urn:argus:ends.").unwrap(),
            Term::iri("urn:argus:ok").unwrap(),
        ));
        let text = serialize_turtle(&g);
        assert!(text.contains("<urn:other:s> <urn:argus:ends.> :ok ."));
        assert_eq!(parse_turtle(&text).unwrap(), g);
    }

    #[test]
    fn error_positions_are_line_accurate() {
        let err = parse_turtle(&format!("{HEADER}:s :p 1 .\n:s :p .\n")).unwrap_err();
        assert_eq!(err.line, 3);
    }
}
