//! Core engine for ontology-backed assurance of LLM guardrails.
//!
//! The crate links two graph views of the same knowledge: a triple store
//! holding measured facts about attacks and defenses ([`store`]), and a GSN
//! assurance case holding claims about robustness ([`gsn`]). Evidence flows
//! between them: the guardrail simulator ([`guardsim`]) produces attack
//! observations, ingestion ([`evidence`]) maintains them in the store with a
//! full journal, queries ([`aql`]) aggregate them, and the verdict engine
//! ([`verdict`]) re-evaluates every claim whenever the store changes.
//!
//! All operations are deterministic: equal inputs produce byte-identical
//! serializations, reports, and renderings.

pub mod aql;
pub mod evidence;
pub mod gsn;
pub mod guardsim;
pub mod store;
pub mod verdict;
