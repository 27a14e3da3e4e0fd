//! Attack-experiment ingestion with current-value semantics and an
//! append-only journal.
//!
//! Each record is one observation of an attack against a model under a
//! constraint. The queryable graph keeps only the newest observation per
//! attack (queries have no "latest" selector, so the store maintains
//! latest-wins itself); every record, applied or not, lands in the journal,
//! and replaying the journal from an empty graph reproduces the current
//! view exactly.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{Datatype, Decimal, Graph, Iri, Literal, OntologySchema, Term, Triple, vocab};

/// One experiment observation, as read from the JSON-lines feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackEvidenceRecord {
    pub attack_id: String,
    pub attack_type: String,
    pub model_id: String,
    pub constraint_id: String,
    pub successes: u64,
    pub trials: u64,
    pub observed_at: String,
    pub source: String,
}

impl AttackEvidenceRecord {
    /// The record as one JSON line in the exact feed format.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// Derived attack success rate, exact in [0, 1].
    pub fn asr(&self) -> Decimal {
        Decimal::from_ratio(self.successes as i128, self.trials as i128)
            .expect("trials >= 1 checked at construction")
    }

    pub fn observed_instant(&self) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(&self.observed_at)
            .expect("timestamp checked at construction")
            .with_timezone(&Utc)
    }

    fn check(&self) -> Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".to_string());
        }
        if self.successes > self.trials {
            return Err(format!(
                "successes ({}) exceed trials ({})",
                self.successes, self.trials
            ));
        }
        if DateTime::parse_from_rfc3339(&self.observed_at).is_err() {
            return Err(format!(
                "observed_at `{}` is not an ISO-8601 timestamp",
                self.observed_at
            ));
        }
        Ok(())
    }
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordDiagnostic {
    pub line: u32,
    pub message: String,
}

impl std::fmt::Display for RecordDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Parses JSON-lines evidence. Valid records are returned in input order;
/// each malformed or invariant-violating line yields one diagnostic.
pub fn parse_records(text: &str) -> (Vec<AttackEvidenceRecord>, Vec<RecordDiagnostic>) {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = (index + 1) as u32;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<AttackEvidenceRecord>(line) {
            Ok(record) => match record.check() {
                Ok(()) => records.push(record),
                Err(message) => diagnostics.push(RecordDiagnostic {
                    line: line_no,
                    message,
                }),
            },
            Err(e) => diagnostics.push(RecordDiagnostic {
                line: line_no,
                message: e.to_string(),
            }),
        }
    }
    (records, diagnostics)
}

#[derive(Debug, Error)]
pub enum EvidenceError {
    #[error("identifier `{0}` is not a legal IRI segment")]
    BadIdentifier(String),
    #[error("schema declares <{property}> as {datatype}, which cannot hold `{value}`")]
    SchemaDatatype {
        property: Iri,
        datatype: Datatype,
        value: String,
    },
    #[error("journal write failed: {0}")]
    Journal(#[from] std::io::Error),
}

/// Checks an identifier can be minted into an IRI under the namespace:
/// non-empty, `[A-Za-z0-9._-]` only, no trailing dot.
fn check_segment(id: &str) -> Result<(), EvidenceError> {
    let ok = !id.is_empty()
        && !id.ends_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if ok {
        Ok(())
    } else {
        Err(EvidenceError::BadIdentifier(id.to_string()))
    }
}

/// `extraction` -> `ExtractionAttack`, `gradient_suffix` ->
/// `GradientSuffixAttack`: the class an attack is typed by.
pub fn attack_type_class(attack_type: &str) -> String {
    let mut class = String::new();
    for part in attack_type.split(['_', '-']) {
        let mut chars = part.chars();
        if let Some(first) = chars.next() {
            class.extend(first.to_uppercase());
            class.push_str(chars.as_str());
        }
    }
    class.push_str("Attack");
    class
}

struct Minter<'a> {
    namespace: &'a str,
}

impl<'a> Minter<'a> {
    fn iri(&self, id: &str) -> Result<Iri, EvidenceError> {
        check_segment(id)?;
        Iri::new(format!("{}{}", self.namespace, id))
            .map_err(|_| EvidenceError::BadIdentifier(id.to_string()))
    }
}

/// Converts a record into triples: the attack typed by `Attack` and its
/// attack-type class, object links to its model and constraint (each typed),
/// an `attackType` link to the type individual, and the four data
/// properties. All IRIs are minted deterministically under `namespace`.
pub fn to_triples(
    record: &AttackEvidenceRecord,
    schema: &OntologySchema,
    namespace: &str,
) -> Result<Vec<Triple>, EvidenceError> {
    let mint = Minter { namespace };
    let rdf_type = Iri::new(vocab::RDF_TYPE).expect("constant IRI");
    let attack = mint.iri(&record.attack_id)?;
    let model = mint.iri(&record.model_id)?;
    let constraint = mint.iri(&record.constraint_id)?;
    let type_individual = mint.iri(&record.attack_type)?;
    let type_class = mint.iri(&attack_type_class(&record.attack_type))?;

    let data_literal = |property: &Iri, default: Literal| -> Result<Literal, EvidenceError> {
        let Some(declared) = schema.data_properties.get(property) else {
            return Ok(default);
        };
        if declared.datatype == default.datatype() {
            return Ok(default);
        }
        // An edited schema may widen a count to decimal or narrow to string.
        let converted = match (&default, declared.datatype) {
            (Literal::Integer(i), Datatype::Decimal) => Some(Literal::Decimal(Decimal::from_i64(*i))),
            (other, Datatype::String) => Some(Literal::String(other.lexical())),
            _ => None,
        };
        converted.ok_or_else(|| EvidenceError::SchemaDatatype {
            property: property.clone(),
            datatype: declared.datatype,
            value: default.lexical(),
        })
    };

    let p_asr = mint.iri("attackSuccessRate")?;
    let p_successes = mint.iri("successes")?;
    let p_trials = mint.iri("trials")?;
    let p_observed = mint.iri("observedAt")?;

    let mut triples = vec![
        Triple::new(attack.clone(), rdf_type.clone(), Term::Iri(mint.iri("Attack")?)),
        Triple::new(attack.clone(), rdf_type.clone(), Term::Iri(type_class)),
        Triple::new(attack.clone(), mint.iri("attackType")?, Term::Iri(type_individual.clone())),
        Triple::new(type_individual, rdf_type.clone(), Term::Iri(mint.iri("AttackType")?)),
        Triple::new(attack.clone(), mint.iri("targetsModel")?, Term::Iri(model.clone())),
        Triple::new(model, rdf_type.clone(), Term::Iri(mint.iri("LLM")?)),
        Triple::new(attack.clone(), mint.iri("underConstraint")?, Term::Iri(constraint.clone())),
        Triple::new(constraint, rdf_type, Term::Iri(mint.iri("Constraint")?)),
    ];
    triples.push(Triple::new(
        attack.clone(),
        p_asr.clone(),
        data_literal(&p_asr, Literal::Decimal(record.asr()))?,
    ));
    triples.push(Triple::new(
        attack.clone(),
        p_successes.clone(),
        data_literal(&p_successes, Literal::Integer(record.successes as i64))?,
    ));
    triples.push(Triple::new(
        attack.clone(),
        p_trials.clone(),
        data_literal(&p_trials, Literal::Integer(record.trials as i64))?,
    ));
    triples.push(Triple::new(
        attack,
        p_observed.clone(),
        data_literal(&p_observed, Literal::String(record.observed_at.clone()))?,
    ));
    Ok(triples)
}

/// Append-only journal sink: a file opened in append mode, or an in-memory
/// buffer for tests and replay.
#[derive(Debug)]
pub enum Journal {
    File(PathBuf),
    Memory(Vec<String>),
}

impl Journal {
    pub fn file(path: impl Into<PathBuf>) -> Journal {
        Journal::File(path.into())
    }

    pub fn memory() -> Journal {
        Journal::Memory(Vec::new())
    }

    pub fn memory_lines(&self) -> &[String] {
        match self {
            Journal::Memory(lines) => lines,
            Journal::File(_) => &[],
        }
    }

    /// One write call for the whole batch; a failure leaves the caller's
    /// graph untouched because ingest only returns the new graph on success.
    fn append_all(&mut self, lines: &[String]) -> std::io::Result<()> {
        match self {
            Journal::Memory(existing) => {
                existing.extend(lines.iter().cloned());
                Ok(())
            }
            Journal::File(path) => {
                let mut file = OpenOptions::new().create(true).append(true).open(path)?;
                let mut buffer = String::new();
                for line in lines {
                    buffer.push_str(line);
                    buffer.push('\n');
                }
                file.write_all(buffer.as_bytes())?;
                file.flush()
            }
        }
    }
}

/// A journal line: the raw record plus whether it changed the graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JournalEntry {
    pub attack_id: String,
    pub attack_type: String,
    pub model_id: String,
    pub constraint_id: String,
    pub successes: u64,
    pub trials: u64,
    pub observed_at: String,
    pub source: String,
    pub applied: bool,
}

impl JournalEntry {
    fn new(record: &AttackEvidenceRecord, applied: bool) -> JournalEntry {
        JournalEntry {
            attack_id: record.attack_id.clone(),
            attack_type: record.attack_type.clone(),
            model_id: record.model_id.clone(),
            constraint_id: record.constraint_id.clone(),
            successes: record.successes,
            trials: record.trials,
            observed_at: record.observed_at.clone(),
            source: record.source.clone(),
            applied,
        }
    }

    pub fn record(&self) -> AttackEvidenceRecord {
        AttackEvidenceRecord {
            attack_id: self.attack_id.clone(),
            attack_type: self.attack_type.clone(),
            model_id: self.model_id.clone(),
            constraint_id: self.constraint_id.clone(),
            successes: self.successes,
            trials: self.trials,
            observed_at: self.observed_at.clone(),
            source: self.source.clone(),
        }
    }
}

/// Ingests records into a copy of the graph under current-value semantics:
/// a record strictly newer than the stored observation (or the first for
/// its attack) replaces the attack's data-property triples; older or
/// equal-timestamp records change nothing. Every record is journaled with
/// its `applied` flag; a journal failure aborts the whole batch.
pub fn ingest(
    graph: &Graph,
    records: &[AttackEvidenceRecord],
    schema: &OntologySchema,
    namespace: &str,
    journal: &mut Journal,
) -> Result<Graph, EvidenceError> {
    let mint = Minter { namespace };
    let p_observed = mint.iri("observedAt")?;
    let data_properties = [
        mint.iri("attackSuccessRate")?,
        mint.iri("successes")?,
        mint.iri("trials")?,
        p_observed.clone(),
    ];

    let mut next = graph.clone();
    let mut journal_lines = Vec::with_capacity(records.len());
    for record in records {
        let attack = mint.iri(&record.attack_id)?;
        let stored_instant = stored_observation(&next, &attack, &p_observed);
        let applied = match stored_instant {
            None => true,
            Some(stored) => record.observed_instant() > stored,
        };
        if applied {
            let stale: Vec<Triple> = next
                .iter()
                .filter(|t| t.subject == attack && data_properties.contains(&t.predicate))
                .cloned()
                .collect();
            for triple in stale {
                next.remove(&triple);
            }
            for triple in to_triples(record, schema, namespace)? {
                next.insert(triple);
            }
        }
        let entry = JournalEntry::new(record, applied);
        journal_lines.push(serde_json::to_string(&entry).expect("journal entries serialize"));
    }
    journal.append_all(&journal_lines)?;
    Ok(next)
}

/// Newest stored observation instant for an attack, if any.
fn stored_observation(graph: &Graph, attack: &Iri, p_observed: &Iri) -> Option<DateTime<Utc>> {
    graph
        .iter()
        .filter(|t| &t.subject == attack && &t.predicate == p_observed)
        .filter_map(|t| t.object.as_literal())
        .filter_map(|lit| DateTime::parse_from_rfc3339(&lit.lexical()).ok())
        .map(|dt| dt.with_timezone(&Utc))
        .max()
}

/// Rebuilds the current-value graph by replaying a journal from scratch.
/// The stored `applied` flags are informational; replay re-decides them.
pub fn replay_journal(
    journal_text: &str,
    schema: &OntologySchema,
    namespace: &str,
) -> Result<Graph, EvidenceError> {
    let mut records = Vec::new();
    for line in journal_text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: JournalEntry = serde_json::from_str(line)
            .map_err(|e| EvidenceError::Journal(std::io::Error::other(e.to_string())))?;
        records.push(entry.record());
    }
    let mut scratch = Journal::memory();
    ingest(&Graph::new(), &records, schema, namespace, &mut scratch)
}

/// Current attack success rates by attack IRI, for summaries and tests.
pub fn current_rates(graph: &Graph, namespace: &str) -> BTreeMap<String, Decimal> {
    let mut rates = BTreeMap::new();
    let Ok(p_asr) = Iri::new(format!("{namespace}attackSuccessRate")) else {
        return rates;
    };
    for triple in graph.iter() {
        if triple.predicate == p_asr {
            if let Some(Literal::Decimal(d)) = triple.object.as_literal() {
                rates.insert(triple.subject.as_str().to_string(), *d);
            }
        }
    }
    rates
}
