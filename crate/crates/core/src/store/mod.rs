//! In-memory triple store over IRIs and typed literals.
//!
//! Triples are subject–predicate–object assertions; subjects and predicates
//! are always IRIs and blank nodes do not exist anywhere in the system, so
//! every entity has a stable, auditable identity. Graphs are deduplicated
//! sets with a deterministic iteration order (lexicographic by subject,
//! predicate, then the object's canonical token), which makes serialization
//! and query results reproducible byte for byte.

mod decimal;
pub(crate) mod lexer;
pub mod schema;
pub mod turtle;

pub use decimal::{Decimal, DecimalError};
pub use schema::{OntologySchema, SchemaDiagnostic, SchemaError};
pub use turtle::{parse_turtle, serialize_turtle, TurtleError};

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Well-known IRIs used across the engine.
pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("IRI must be non-empty")]
    EmptyIri,
    #[error("IRI `{0}` contains whitespace or a forbidden character")]
    ForbiddenIriChar(String),
    #[error("subject must be an IRI, got literal `{0}`")]
    LiteralSubject(String),
    #[error("predicate must be an IRI, got literal `{0}`")]
    LiteralPredicate(String),
    #[error("invalid {datatype} literal `{lexical}`")]
    InvalidLexical { datatype: Datatype, lexical: String },
    #[error(transparent)]
    Decimal(#[from] DecimalError),
}

/// An absolute IRI. Non-empty, no whitespace, no characters that would break
/// the `<...>` serialization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Iri, TermError> {
        let value = value.into();
        if value.is_empty() {
            return Err(TermError::EmptyIri);
        }
        let forbidden = |c: char| {
            c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        };
        if value.chars().any(forbidden) {
            return Err(TermError::ForbiddenIriChar(value));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The literal datatypes supported by the store. All values occurring in the
/// attack/defense domain (rates, counts, names, flags) fit these four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
}

impl Datatype {
    pub fn iri(&self) -> &'static str {
        match self {
            Datatype::String => vocab::XSD_STRING,
            Datatype::Integer => vocab::XSD_INTEGER,
            Datatype::Decimal => vocab::XSD_DECIMAL,
            Datatype::Boolean => vocab::XSD_BOOLEAN,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Datatype> {
        match iri {
            vocab::XSD_STRING => Some(Datatype::String),
            vocab::XSD_INTEGER => Some(Datatype::Integer),
            vocab::XSD_DECIMAL => Some(Datatype::Decimal),
            vocab::XSD_BOOLEAN => Some(Datatype::Boolean),
            _ => None,
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
        };
        f.write_str(name)
    }
}

/// A typed literal, stored in canonical lexical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    String(String),
    Integer(i64),
    Decimal(Decimal),
    Boolean(bool),
}

impl Literal {
    pub fn string(value: impl Into<String>) -> Literal {
        Literal::String(value.into())
    }

    pub fn integer(value: i64) -> Literal {
        Literal::Integer(value)
    }

    pub fn decimal(value: Decimal) -> Literal {
        Literal::Decimal(value)
    }

    pub fn boolean(value: bool) -> Literal {
        Literal::Boolean(value)
    }

    /// Builds a literal from a lexical form and an explicit datatype,
    /// canonicalizing numeric forms.
    pub fn from_lexical(lexical: &str, datatype: Datatype) -> Result<Literal, TermError> {
        let invalid = || TermError::InvalidLexical {
            datatype,
            lexical: lexical.to_string(),
        };
        match datatype {
            Datatype::String => Ok(Literal::String(lexical.to_string())),
            Datatype::Integer => lexical
                .parse::<i64>()
                .map(Literal::Integer)
                .map_err(|_| invalid()),
            Datatype::Decimal => Decimal::parse(lexical).map(Literal::Decimal).map_err(|_| invalid()),
            Datatype::Boolean => match lexical {
                "true" => Ok(Literal::Boolean(true)),
                "false" => Ok(Literal::Boolean(false)),
                _ => Err(invalid()),
            },
        }
    }

    pub fn datatype(&self) -> Datatype {
        match self {
            Literal::String(_) => Datatype::String,
            Literal::Integer(_) => Datatype::Integer,
            Literal::Decimal(_) => Datatype::Decimal,
            Literal::Boolean(_) => Datatype::Boolean,
        }
    }

    /// Canonical lexical form (unquoted).
    pub fn lexical(&self) -> String {
        match self {
            Literal::String(s) => s.clone(),
            Literal::Integer(i) => i.to_string(),
            Literal::Decimal(d) => d.to_string(),
            Literal::Boolean(b) => b.to_string(),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Literal::Integer(_) | Literal::Decimal(_))
    }

    /// Numeric comparison; `None` when either side is non-numeric.
    pub fn numeric_cmp(&self, other: &Literal) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Literal::Integer(a), Literal::Integer(b)) => Some(a.cmp(b)),
            (Literal::Decimal(a), Literal::Decimal(b)) => Some(a.cmp_value(b)),
            (Literal::Integer(a), Literal::Decimal(b)) => Some(b.cmp_i64(*a).reverse()),
            (Literal::Decimal(a), Literal::Integer(b)) => Some(a.cmp_i64(*b)),
            _ => None,
        }
    }
}

/// A subject/predicate/object value: an IRI or a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: &str) -> Result<Term, TermError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Iri(_) => None,
        }
    }

    /// Canonical, prefix-independent token. IRIs render as `<iri>`, strings
    /// as quoted/escaped forms, numbers and booleans bare. Tokens are unique
    /// per term, so they double as the sort key for the graph order.
    pub fn canonical_token(&self) -> String {
        match self {
            Term::Iri(iri) => format!("<{iri}>"),
            Term::Literal(Literal::String(s)) => quote_string(s),
            Term::Literal(other) => other.lexical(),
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_token().cmp(&other.canonical_token())
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Term {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Term {
        Term::Literal(lit)
    }
}

/// Escape and quote a string literal for the canonical token / Turtle form.
pub(crate) fn quote_string(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One subject–predicate–object assertion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Triple {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }

    /// Builds a triple from loose terms, rejecting literal subjects and
    /// predicates. Parsers funnel through here.
    pub fn from_terms(subject: Term, predicate: Term, object: Term) -> Result<Triple, TermError> {
        let subject = match subject {
            Term::Iri(iri) => iri,
            Term::Literal(lit) => return Err(TermError::LiteralSubject(lit.lexical())),
        };
        let predicate = match predicate {
            Term::Iri(iri) => iri,
            Term::Literal(lit) => return Err(TermError::LiteralPredicate(lit.lexical())),
        };
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }
}

impl Ord for Triple {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.subject, &self.predicate)
            .cmp(&(&other.subject, &other.predicate))
            .then_with(|| self.object.cmp(&other.object))
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A named query variable (without the leading `?`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(pub String);

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// Subject/predicate slot of a pattern: a ground IRI or a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IriOrVar {
    Iri(Iri),
    Var(Variable),
}

/// Object slot of a pattern: any ground term or a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermOrVar {
    Term(Term),
    Var(Variable),
}

/// A triple pattern with zero or more variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: IriOrVar,
    pub predicate: IriOrVar,
    pub object: TermOrVar,
}

/// One satisfying assignment of pattern variables to terms.
pub type Bindings = BTreeMap<Variable, Term>;

/// A deduplicated set of triples plus a presentation-only prefix table.
///
/// Equality ignores prefixes: two graphs are equal iff they hold the same
/// triple set.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    /// Inserts a triple; returns false when it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Triples in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Declares a prefix; later declarations of the same name win.
    pub fn declare_prefix(&mut self, name: impl Into<String>, base: impl Into<String>) {
        self.prefixes.insert(name.into(), base.into());
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// All bindings under which the pattern matches a stored triple, in
    /// canonical triple order. A ground pattern that matches yields one
    /// empty binding.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Bindings> {
        let mut results = Vec::new();
        for triple in &self.triples {
            if let Some(bindings) = match_triple(pattern, triple) {
                results.push(bindings);
            }
        }
        results
    }

    /// Every rdf:type class of a subject.
    pub fn types_of(&self, subject: &Iri) -> BTreeSet<&Iri> {
        let rdf_type = Iri::new(vocab::RDF_TYPE).expect("constant IRI");
        self.triples
            .iter()
            .filter(|t| &t.subject == subject && t.predicate == rdf_type)
            .filter_map(|t| t.object.as_iri())
            .collect()
    }
}

/// Matches one pattern against one triple, extending an empty binding set.
/// Repeated variables must bind consistently.
pub fn match_triple(pattern: &TriplePattern, triple: &Triple) -> Option<Bindings> {
    let mut bindings = Bindings::new();
    bind_iri(&pattern.subject, &triple.subject, &mut bindings)?;
    bind_iri(&pattern.predicate, &triple.predicate, &mut bindings)?;
    bind_term(&pattern.object, &triple.object, &mut bindings)?;
    Some(bindings)
}

fn bind_iri(slot: &IriOrVar, value: &Iri, bindings: &mut Bindings) -> Option<()> {
    match slot {
        IriOrVar::Iri(iri) => (iri == value).then_some(()),
        IriOrVar::Var(var) => bind_var(var, Term::Iri(value.clone()), bindings),
    }
}

fn bind_term(slot: &TermOrVar, value: &Term, bindings: &mut Bindings) -> Option<()> {
    match slot {
        TermOrVar::Term(term) => (term == value).then_some(()),
        TermOrVar::Var(var) => bind_var(var, value.clone(), bindings),
    }
}

fn bind_var(var: &Variable, value: Term, bindings: &mut Bindings) -> Option<()> {
    match bindings.get(var) {
        Some(existing) => (*existing == value).then_some(()),
        None => {
            bindings.insert(var.clone(), value);
            Some(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn asr_triple() -> Triple {
        Triple::new(
            iri("urn:argus:String1"),
            iri("urn:argus:attackSuccessRate"),
            Literal::Decimal(Decimal::parse("0.5").unwrap()),
        )
    }

    #[test]
    fn insert_is_idempotent() {
        let mut g = Graph::new();
        assert!(g.insert(asr_triple()));
        assert_eq!(g.len(), 1);
        assert!(!g.insert(asr_triple()));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn literal_subject_is_rejected() {
        let err = Triple::from_terms(
            Term::Literal(Literal::string("String1")),
            Term::iri("urn:argus:p").unwrap(),
            Term::iri("urn:argus:o").unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, TermError::LiteralSubject(_)));
    }

    #[test]
    fn iri_rejects_whitespace_and_angle_chars() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("urn:a b").is_err());
        assert!(Iri::new("urn:a<b>").is_err());
        assert!(Iri::new("urn:argus:LLaMa-2-7B-chat").is_ok());
    }

    #[test]
    fn ground_pattern_match_yields_one_empty_binding() {
        let mut g = Graph::new();
        g.insert(asr_triple());
        let t = asr_triple();
        let pattern = TriplePattern {
            subject: IriOrVar::Iri(t.subject.clone()),
            predicate: IriOrVar::Iri(t.predicate.clone()),
            object: TermOrVar::Term(t.object.clone()),
        };
        let matches = g.match_pattern(&pattern);
        assert_eq!(matches.len(), 1);
        assert!(matches[0].is_empty());
    }

    #[test]
    fn variable_pattern_binds_object() {
        let mut g = Graph::new();
        g.insert(asr_triple());
        let pattern = TriplePattern {
            subject: IriOrVar::Iri(iri("urn:argus:String1")),
            predicate: IriOrVar::Iri(iri("urn:argus:attackSuccessRate")),
            object: TermOrVar::Var(Variable("v".into())),
        };
        let matches = g.match_pattern(&pattern);
        assert_eq!(matches.len(), 1);
        assert_eq!(
            matches[0][&Variable("v".into())],
            Term::Literal(Literal::Decimal(Decimal::parse("0.5").unwrap()))
        );
    }

    #[test]
    fn repeated_variable_must_bind_consistently() {
        let mut g = Graph::new();
        g.insert(Triple::new(iri("urn:a"), iri("urn:p"), Term::iri("urn:a").unwrap()));
        g.insert(Triple::new(iri("urn:a"), iri("urn:p"), Term::iri("urn:b").unwrap()));
        let v = Variable("x".into());
        let pattern = TriplePattern {
            subject: IriOrVar::Var(v.clone()),
            predicate: IriOrVar::Iri(iri("urn:p")),
            object: TermOrVar::Var(v.clone()),
        };
        let matches = g.match_pattern(&pattern);
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0][&v], Term::iri("urn:a").unwrap());
    }

    #[test]
    fn match_over_empty_graph_is_empty() {
        let g = Graph::new();
        let pattern = TriplePattern {
            subject: IriOrVar::Var(Variable("s".into())),
            predicate: IriOrVar::Var(Variable("p".into())),
            object: TermOrVar::Var(Variable("o".into())),
        };
        assert!(g.match_pattern(&pattern).is_empty());
    }

    #[test]
    fn graph_equality_ignores_prefixes() {
        let mut a = Graph::new();
        let mut b = Graph::new();
        a.insert(asr_triple());
        b.insert(asr_triple());
        a.declare_prefix("", "urn:argus:");
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_order_distinguishes_integer_and_decimal() {
        let one_int = Term::Literal(Literal::Integer(1));
        let one_dec = Term::Literal(Literal::Decimal(Decimal::parse("1.0").unwrap()));
        assert_ne!(one_int, one_dec);
        assert_ne!(one_int.canonical_token(), one_dec.canonical_token());
    }
}
