//! Ontology schema layer: declared classes, object properties, and data
//! properties with domain/range typing, plus graph validation against them.
//!
//! A schema is itself expressed as triples (`owl:Class`,
//! `owl:ObjectProperty`, `owl:DatatypeProperty`, `rdfs:domain`,
//! `rdfs:range`), so the shipped default lives in an ordinary, editable
//! `.ttl` fixture. No inference happens here: validation checks declared
//! typing only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{vocab, Datatype, Graph, Iri, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("property <{0}> is declared both object and data property")]
    ConflictingKind(Iri),
    #[error("property <{0}> has no rdfs:domain")]
    MissingDomain(Iri),
    #[error("property <{0}> has no rdfs:range")]
    MissingRange(Iri),
    #[error("property <{0}> has more than one rdfs:domain")]
    MultipleDomains(Iri),
    #[error("property <{0}> has more than one rdfs:range")]
    MultipleRanges(Iri),
    #[error("property <{property}> refers to undeclared class <{class}>")]
    UndeclaredClass { property: Iri, class: Iri },
    #[error("data property <{property}> has unsupported range <{range}>")]
    UnknownDatatype { property: Iri, range: Iri },
    #[error("property <{property}> has a non-IRI {role}")]
    NonIriConstraint { property: Iri, role: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectProperty {
    pub domain: Iri,
    pub range: Iri,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataProperty {
    pub domain: Iri,
    pub datatype: Datatype,
}

/// Declared vocabulary of a domain graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OntologySchema {
    pub classes: BTreeSet<Iri>,
    pub object_properties: BTreeMap<Iri, ObjectProperty>,
    pub data_properties: BTreeMap<Iri, DataProperty>,
}

/// The kind of rule a triple violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaViolation {
    UndeclaredProperty,
    TypeObjectNotIri,
    ObjectPropertyLiteralObject,
    DomainConflict,
    RangeConflict,
    DatatypeMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaDiagnostic {
    pub violation: SchemaViolation,
    pub triple: Triple,
    pub message: String,
}

impl fmt::Display for SchemaDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.triple.subject.as_str(),
            self.triple.predicate.as_str(),
            self.triple.object.canonical_token(),
            self.message
        )
    }
}

impl OntologySchema {
    /// Extracts a schema from a declaration graph. Domains of all properties
    /// and ranges of object properties must be declared classes; data
    /// property ranges must be one of the four supported datatypes.
    pub fn from_graph(graph: &Graph) -> Result<OntologySchema, SchemaError> {
        let rdf_type = iri(vocab::RDF_TYPE);
        let rdfs_domain = iri(vocab::RDFS_DOMAIN);
        let rdfs_range = iri(vocab::RDFS_RANGE);

        let mut classes = BTreeSet::new();
        let mut object_props = BTreeSet::new();
        let mut data_props = BTreeSet::new();
        let mut domains: BTreeMap<Iri, Vec<&Term>> = BTreeMap::new();
        let mut ranges: BTreeMap<Iri, Vec<&Term>> = BTreeMap::new();

        for triple in graph.iter() {
            if triple.predicate == rdf_type {
                match triple.object.as_iri().map(|i| i.as_str()) {
                    Some(vocab::OWL_CLASS) | Some(vocab::RDFS_CLASS) => {
                        classes.insert(triple.subject.clone());
                    }
                    Some(vocab::OWL_OBJECT_PROPERTY) => {
                        object_props.insert(triple.subject.clone());
                    }
                    Some(vocab::OWL_DATATYPE_PROPERTY) => {
                        data_props.insert(triple.subject.clone());
                    }
                    _ => {}
                }
            } else if triple.predicate == rdfs_domain {
                domains.entry(triple.subject.clone()).or_default().push(&triple.object);
            } else if triple.predicate == rdfs_range {
                ranges.entry(triple.subject.clone()).or_default().push(&triple.object);
            }
        }

        if let Some(p) = object_props.intersection(&data_props).next() {
            return Err(SchemaError::ConflictingKind(p.clone()));
        }

        let single = |map: &BTreeMap<Iri, Vec<&Term>>,
                      property: &Iri,
                      role: &'static str|
         -> Result<Iri, SchemaError> {
            let values = map.get(property).map(Vec::as_slice).unwrap_or(&[]);
            match values {
                [] => Err(if role == "domain" {
                    SchemaError::MissingDomain(property.clone())
                } else {
                    SchemaError::MissingRange(property.clone())
                }),
                [one] => one
                    .as_iri()
                    .cloned()
                    .ok_or(SchemaError::NonIriConstraint {
                        property: property.clone(),
                        role,
                    }),
                _ => Err(if role == "domain" {
                    SchemaError::MultipleDomains(property.clone())
                } else {
                    SchemaError::MultipleRanges(property.clone())
                }),
            }
        };

        let mut schema = OntologySchema {
            classes,
            object_properties: BTreeMap::new(),
            data_properties: BTreeMap::new(),
        };

        for property in &object_props {
            let domain = single(&domains, property, "domain")?;
            let range = single(&ranges, property, "range")?;
            for class in [&domain, &range] {
                if !schema.classes.contains(class) {
                    return Err(SchemaError::UndeclaredClass {
                        property: property.clone(),
                        class: class.clone(),
                    });
                }
            }
            schema
                .object_properties
                .insert(property.clone(), ObjectProperty { domain, range });
        }

        for property in &data_props {
            let domain = single(&domains, property, "domain")?;
            if !schema.classes.contains(&domain) {
                return Err(SchemaError::UndeclaredClass {
                    property: property.clone(),
                    class: domain,
                });
            }
            let range = single(&ranges, property, "range")?;
            let datatype = Datatype::from_iri(range.as_str()).ok_or_else(|| {
                SchemaError::UnknownDatatype {
                    property: property.clone(),
                    range: range.clone(),
                }
            })?;
            schema
                .data_properties
                .insert(property.clone(), DataProperty { domain, datatype });
        }

        Ok(schema)
    }

    /// Renders the schema back to a declaration graph (canonical prefixes
    /// declared for readability).
    pub fn to_graph(&self, namespace: &str) -> Graph {
        let mut graph = Graph::new();
        graph.declare_prefix("", namespace);
        graph.declare_prefix("owl", "http://www.w3.org/2002/07/owl#");
        graph.declare_prefix("rdfs", "http://www.w3.org/2000/01/rdf-schema#");
        graph.declare_prefix("xsd", "http://www.w3.org/2001/XMLSchema#");
        let rdf_type = iri(vocab::RDF_TYPE);
        let rdfs_domain = iri(vocab::RDFS_DOMAIN);
        let rdfs_range = iri(vocab::RDFS_RANGE);
        for class in &self.classes {
            graph.insert(Triple::new(class.clone(), rdf_type.clone(), Term::Iri(iri(vocab::OWL_CLASS))));
        }
        for (property, op) in &self.object_properties {
            graph.insert(Triple::new(
                property.clone(),
                rdf_type.clone(),
                Term::Iri(iri(vocab::OWL_OBJECT_PROPERTY)),
            ));
            graph.insert(Triple::new(property.clone(), rdfs_domain.clone(), Term::Iri(op.domain.clone())));
            graph.insert(Triple::new(property.clone(), rdfs_range.clone(), Term::Iri(op.range.clone())));
        }
        for (property, dp) in &self.data_properties {
            graph.insert(Triple::new(
                property.clone(),
                rdf_type.clone(),
                Term::Iri(iri(vocab::OWL_DATATYPE_PROPERTY)),
            ));
            graph.insert(Triple::new(property.clone(), rdfs_domain.clone(), Term::Iri(dp.domain.clone())));
            graph.insert(Triple::new(
                property.clone(),
                rdfs_range.clone(),
                Term::Iri(iri(dp.datatype.iri())),
            ));
        }
        graph
    }

    /// The attack/defense vocabulary used by evidence ingestion when no
    /// schema file is supplied. The shipped fixture carries the same
    /// declarations.
    pub fn default_attack_schema(namespace: &str) -> OntologySchema {
        let n = |local: &str| iri(&format!("{namespace}{local}"));
        let mut schema = OntologySchema::default();
        for class in ["Attack", "AttackType", "LLM", "Constraint", "Defense"] {
            schema.classes.insert(n(class));
        }
        let mut object = |name: &str, domain: &str, range: &str| {
            schema.object_properties.insert(
                n(name),
                ObjectProperty {
                    domain: n(domain),
                    range: n(range),
                },
            );
        };
        object("attackType", "Attack", "AttackType");
        object("targetsModel", "Attack", "LLM");
        object("underConstraint", "Attack", "Constraint");
        object("mitigates", "Defense", "Attack");
        object("deployedOn", "Defense", "LLM");
        let mut data = |name: &str, domain: &str, datatype: Datatype| {
            schema.data_properties.insert(
                n(name),
                DataProperty {
                    domain: n(domain),
                    datatype,
                },
            );
        };
        data("attackSuccessRate", "Attack", Datatype::Decimal);
        data("successes", "Attack", Datatype::Integer);
        data("trials", "Attack", Datatype::Integer);
        data("observedAt", "Attack", Datatype::String);
        data("thresholdValue", "Defense", Datatype::Decimal);
        schema
    }
}

/// Checks every triple against the schema. One diagnostic per violation, in
/// canonical triple order; an empty result means the graph conforms.
///
/// Domain/range conflicts require the node to carry at least one rdf:type
/// that excludes the declared class; untyped nodes are not flagged.
pub fn validate_schema(graph: &Graph, schema: &OntologySchema) -> Vec<SchemaDiagnostic> {
    let rdf_type = iri(vocab::RDF_TYPE);
    let mut diagnostics = Vec::new();
    let mut push = |violation, triple: &Triple, message: String| {
        diagnostics.push(SchemaDiagnostic {
            violation,
            triple: triple.clone(),
            message,
        });
    };

    for triple in graph.iter() {
        if triple.predicate == rdf_type {
            if triple.object.as_iri().is_none() {
                push(
                    SchemaViolation::TypeObjectNotIri,
                    triple,
                    "rdf:type object must be a class IRI".to_string(),
                );
            }
            continue;
        }
        if let Some(op) = schema.object_properties.get(&triple.predicate) {
            match triple.object.as_iri() {
                None => push(
                    SchemaViolation::ObjectPropertyLiteralObject,
                    triple,
                    format!(
                        "object property expects an IRI of class <{}>, got a literal",
                        op.range
                    ),
                ),
                Some(object) => {
                    let types = graph.types_of(object);
                    if !types.is_empty() && !types.contains(&op.range) {
                        push(
                            SchemaViolation::RangeConflict,
                            triple,
                            format!("object is not typed as range class <{}>", op.range),
                        );
                    }
                }
            }
            check_domain(graph, triple, &op.domain, &mut push);
        } else if let Some(dp) = schema.data_properties.get(&triple.predicate) {
            match triple.object.as_literal() {
                None => push(
                    SchemaViolation::DatatypeMismatch,
                    triple,
                    format!("data property expects a {} literal, got an IRI", dp.datatype),
                ),
                Some(lit) if lit.datatype() != dp.datatype => push(
                    SchemaViolation::DatatypeMismatch,
                    triple,
                    format!(
                        "datatype mismatch: expects {}, got {}",
                        dp.datatype,
                        lit.datatype()
                    ),
                ),
                Some(_) => {}
            }
            check_domain(graph, triple, &dp.domain, &mut push);
        } else {
            push(
                SchemaViolation::UndeclaredProperty,
                triple,
                format!("property <{}> is not declared in the schema", triple.predicate),
            );
        }
    }
    diagnostics
}

fn check_domain(
    graph: &Graph,
    triple: &Triple,
    domain: &Iri,
    push: &mut impl FnMut(SchemaViolation, &Triple, String),
) {
    let types = graph.types_of(&triple.subject);
    if !types.is_empty() && !types.contains(domain) {
        push(
            SchemaViolation::DomainConflict,
            triple,
            format!("subject is not typed as domain class <{domain}>"),
        );
    }
}

fn iri(value: &str) -> Iri {
    Iri::new(value).expect("well-formed constant IRI")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{parse_turtle, Literal, Term, Triple};

    const NS: &str = "urn:argus:";

    fn schema() -> OntologySchema {
        OntologySchema::default_attack_schema(NS)
    }

    fn graph(body: &str) -> Graph {
        parse_turtle(&format!("@prefix : <urn:argus:> .\n{body}")).unwrap()
    }

    #[test]
    fn schema_round_trips_through_declaration_graph() {
        let s = schema();
        let g = s.to_graph(NS);
        assert_eq!(OntologySchema::from_graph(&g).unwrap(), s);
    }

    #[test]
    fn conformant_graph_yields_no_diagnostics() {
        let g = graph(
            ":String1 a :Attack , :ExtractionAttack ;\n  :targetsModel :M ;\n  :attackSuccessRate 0.5 .\n\
             :M a :LLM .\n",
        );
        assert!(validate_schema(&g, &schema()).is_empty());
    }

    #[test]
    fn object_property_with_literal_object_is_flagged() {
        let g = graph(":String1 :targetsModel \"LLaMa\" .");
        let diags = validate_schema(&g, &schema());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].violation, SchemaViolation::ObjectPropertyLiteralObject);
    }

    #[test]
    fn datatype_mismatch_is_flagged() {
        let g = graph(":String1 :attackSuccessRate \"high\" .");
        let diags = validate_schema(&g, &schema());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].violation, SchemaViolation::DatatypeMismatch);
    }

    #[test]
    fn undeclared_property_is_flagged() {
        let g = graph(":String1 :severity 3 .");
        let diags = validate_schema(&g, &schema());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].violation, SchemaViolation::UndeclaredProperty);
    }

    #[test]
    fn conflicting_domain_type_is_flagged() {
        let g = graph(":D a :Defense .\n:D :attackSuccessRate 0.5 .");
        let diags = validate_schema(&g, &schema());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].violation, SchemaViolation::DomainConflict);
    }

    #[test]
    fn conflicting_range_type_is_flagged() {
        let g = graph(":A a :Attack .\n:C a :Constraint .\n:A :targetsModel :C .");
        let diags = validate_schema(&g, &schema());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].violation, SchemaViolation::RangeConflict);
    }

    #[test]
    fn untyped_nodes_are_not_flagged() {
        let g = graph(":A :targetsModel :M .");
        assert!(validate_schema(&g, &schema()).is_empty());
    }

    #[test]
    fn adding_violating_triples_never_removes_diagnostics() {
        let base = graph(":A a :Attack .\n:A :attackSuccessRate 0.5 .");
        let before = validate_schema(&base, &schema());
        let mut extended = base.clone();
        extended.insert(Triple::new(
            Iri::new("urn:argus:A").unwrap(),
            Iri::new("urn:argus:severity").unwrap(),
            Term::Literal(Literal::Integer(3)),
        ));
        let after = validate_schema(&extended, &schema());
        for d in &before {
            assert!(after.contains(d));
        }
        assert_eq!(after.len(), before.len() + 1);
    }

    #[test]
    fn from_graph_rejects_undeclared_domain_class() {
        let g = parse_turtle(
            "@prefix : <urn:argus:> .\n\
             @prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
             @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
             @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
             :p a owl:DatatypeProperty ; rdfs:domain :Ghost ; rdfs:range xsd:string .\n",
        )
        .unwrap();
        assert!(matches!(
            OntologySchema::from_graph(&g),
            Err(SchemaError::UndeclaredClass { .. })
        ));
    }
}
