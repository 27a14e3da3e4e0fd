//! `argus` — ontology-backed assurance of LLM guardrails from the shell.
//!
//! Subcommands wire the engine into one pipeline: `simulate` runs a prompt
//! corpus through the guardrail filters and emits evidence records,
//! `ingest` maintains them in a triple store with a journal, `query` reads
//! values back, `evaluate` re-derives every claim status of a GSN case
//! against the store, `diff` compares two status reports, `validate`
//! audits case well-formedness, and `render` draws the case as DOT.
//!
//! Exit codes: 0 success (or root Supported), 1 usage/IO/parse errors,
//! 2 root Defeated, 3 root Inconclusive or Undeveloped, 4 validation
//! diagnostics present. Given the same inputs and a fixed `--at`, every
//! command writes byte-identical output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use clap::{Parser, Subcommand};

use argus_core::aql::{evaluate_query, parse_query};
use argus_core::evidence::{ingest, parse_records, Journal};
use argus_core::gsn::{parse_case, render_dot, validate_case, AssuranceCase, NodeKind};
use argus_core::guardsim::{
    parse_corpus, run_pipeline, summarize, FilterConfig, Pipeline, PipelineOutcome,
};
use argus_core::store::{parse_turtle, serialize_turtle, Graph, Iri, OntologySchema, Term};
use argus_core::verdict::{
    changes_to_json, diff_status_maps, evaluate_case, parse_report_json, ClaimStatus, StatusReport,
    VerdictError,
};

const DEFAULT_NAMESPACE: &str = "urn:argus:";

#[derive(Parser)]
#[command(
    name = "argus",
    about = "Assurance engine for LLM guardrails: triple store, GSN cases, claim re-evaluation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a GSN case for well-formedness and print all diagnostics.
    Validate {
        /// Case file (.gsn)
        case: PathBuf,
    },
    /// Evaluate a case against a store and write the status report.
    Evaluate {
        /// Case file (.gsn)
        case: PathBuf,
        /// Store file (.ttl)
        store: PathBuf,
        /// Fix the report timestamp (RFC 3339) for reproducible output
        #[arg(long)]
        at: Option<String>,
        /// Write the report JSON to this file instead of stdout
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Ingest evidence records into a store (writes --out and a journal).
    Ingest {
        /// Evidence records (JSON-lines)
        records: PathBuf,
        /// Input store file (.ttl)
        store: PathBuf,
        /// Output store file; the journal is appended at <out>.journal
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a query against a store and print rows as TSV.
    Query {
        /// Store file (.ttl)
        store: PathBuf,
        /// Query text
        query: String,
    },
    /// Render a case as Graphviz DOT, optionally colored by a report.
    Render {
        /// Case file (.gsn)
        case: PathBuf,
        /// Color nodes from a previously written report JSON
        #[arg(long = "status-from")]
        status_from: Option<PathBuf>,
    },
    /// Run a prompt corpus through the guardrail filters and emit evidence.
    Simulate {
        /// Prompt corpus (JSON-lines)
        #[arg(long)]
        corpus: PathBuf,
        /// Filter configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Perplexity training corpus (overrides the config's path)
        #[arg(long)]
        train: Option<PathBuf>,
        /// Output evidence records (JSON-lines)
        #[arg(long)]
        emit: PathBuf,
        /// Timestamp recorded on emitted evidence (RFC 3339)
        #[arg(long)]
        at: Option<String>,
    },
    /// Print the status changes between two report JSON files.
    Diff {
        /// Earlier report
        report_a: PathBuf,
        /// Later report
        report_b: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version through the error path; those are
            // not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Validate { case } => cmd_validate(&case),
        Command::Evaluate {
            case,
            store,
            at,
            json,
        } => cmd_evaluate(&case, &store, at.as_deref(), json.as_deref()),
        Command::Ingest {
            records,
            store,
            out,
        } => cmd_ingest(&records, &store, &out),
        Command::Query { store, query } => cmd_query(&store, &query),
        Command::Render { case, status_from } => cmd_render(&case, status_from.as_deref()),
        Command::Simulate {
            corpus,
            config,
            train,
            emit,
            at,
        } => cmd_simulate(&corpus, &config, train.as_deref(), &emit, at.as_deref()),
        Command::Diff { report_a, report_b } => cmd_diff(&report_a, &report_b),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_case(path: &Path) -> Result<AssuranceCase> {
    let text = read(path)?;
    parse_case(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_store(path: &Path) -> Result<Graph> {
    let text = read(path)?;
    parse_turtle(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn namespace() -> Result<String> {
    let ns = std::env::var("ARGUS_PREFIX").unwrap_or_else(|_| DEFAULT_NAMESPACE.to_string());
    Iri::new(ns.as_str()).map_err(|e| anyhow!("ARGUS_PREFIX: {e}"))?;
    Ok(ns)
}

fn timestamp(at: Option<&str>) -> Result<String> {
    match at {
        Some(text) => {
            DateTime::parse_from_rfc3339(text)
                .map_err(|e| anyhow!("--at `{text}` is not an RFC 3339 timestamp: {e}"))?;
            Ok(text.to_string())
        }
        None => Ok(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)),
    }
}

fn cmd_validate(case_path: &Path) -> Result<u8> {
    let case = load_case(case_path)?;
    let diagnostics = validate_case(&case);
    for d in &diagnostics {
        eprintln!("{d}");
    }
    Ok(if diagnostics.is_empty() { 0 } else { 4 })
}

fn cmd_evaluate(
    case_path: &Path,
    store_path: &Path,
    at: Option<&str>,
    json_out: Option<&Path>,
) -> Result<u8> {
    let case = load_case(case_path)?;
    let graph = load_store(store_path)?;
    let evaluated_at = timestamp(at)?;
    let report = match evaluate_case(&case, &graph, &evaluated_at) {
        Ok(report) => report,
        Err(VerdictError::InvalidCase(diagnostics)) => {
            for d in &diagnostics {
                eprintln!("{d}");
            }
            return Ok(4);
        }
        Err(e) => return Err(anyhow!(e)),
    };
    let json = report.to_json();
    match json_out {
        Some(path) => {
            fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{json}"),
    }
    print_summary(&case, &report);
    Ok(match report.root {
        ClaimStatus::Supported => 0,
        ClaimStatus::Defeated => 2,
        ClaimStatus::Inconclusive | ClaimStatus::Undeveloped => 3,
    })
}

fn print_summary(case: &AssuranceCase, report: &StatusReport) {
    eprintln!("case: {}", report.case_title);
    eprintln!("evaluated_at: {}", report.evaluated_at);
    eprintln!("root: {}", report.root);
    let statuses = report.status_map();
    for node in case.nodes() {
        let status = statuses
            .get(node.id.as_str())
            .map(String::as_str)
            .unwrap_or("-");
        let detail = report
            .solutions
            .get(&node.id)
            .and_then(|s| s.detail.as_ref())
            .map(|d| {
                let observed = d
                    .observed
                    .as_ref()
                    .map(|o| o.lexical())
                    .unwrap_or_else(|| "no evidence".to_string());
                format!("\tobserved {} expect {} {}", observed, d.comparator, d.threshold.lexical())
            })
            .unwrap_or_default();
        eprintln!("{}\t{}\t{}{}", node.id, node.kind, status, detail);
    }
}

fn cmd_ingest(records_path: &Path, store_path: &Path, out_path: &Path) -> Result<u8> {
    let (records, diagnostics) = parse_records(&read(records_path)?);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{}: {d}", records_path.display());
        }
        return Err(anyhow!(
            "{} rejected record line(s); nothing ingested",
            diagnostics.len()
        ));
    }
    let graph = load_store(store_path)?;
    let ns = namespace()?;
    let schema = OntologySchema::default_attack_schema(&ns);
    let journal_path = PathBuf::from(format!("{}.journal", out_path.display()));
    let mut journal = Journal::file(&journal_path);
    let mut next = ingest(&graph, &records, &schema, &ns, &mut journal)?;
    if !next.prefixes().values().any(|base| base == &ns) {
        next.declare_prefix("", ns.as_str());
    }
    fs::write(out_path, serialize_turtle(&next))
        .with_context(|| format!("writing {}", out_path.display()))?;
    eprintln!(
        "ingested {} record(s) into {} (journal: {})",
        records.len(),
        out_path.display(),
        journal_path.display()
    );
    Ok(0)
}

fn cmd_query(store_path: &Path, query_text: &str) -> Result<u8> {
    let graph = load_store(store_path)?;
    let query = parse_query(query_text).map_err(|e| anyhow!("query: {e}"))?;
    let table = evaluate_query(&graph, &query).map_err(|e| anyhow!("query: {e}"))?;
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|term| match term {
                Term::Iri(iri) => iri.as_str().to_string(),
                Term::Literal(lit) => lit.lexical(),
            })
            .collect();
        println!("{}", cells.join("\t"));
    }
    Ok(0)
}

fn cmd_render(case_path: &Path, status_from: Option<&Path>) -> Result<u8> {
    let case = load_case(case_path)?;
    let diagnostics = validate_case(&case);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{d}");
        }
        return Ok(4);
    }
    let overlay = match status_from {
        Some(path) => {
            let summary =
                parse_report_json(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))?;
            Some(summary.statuses)
        }
        None => None,
    };
    print!("{}", render_dot(&case, overlay.as_ref()));
    Ok(0)
}

fn cmd_simulate(
    corpus_path: &Path,
    config_path: &Path,
    train: Option<&Path>,
    emit_path: &Path,
    at: Option<&str>,
) -> Result<u8> {
    let corpus = parse_corpus(&read(corpus_path)?)
        .map_err(|e| anyhow!("{}: {e}", corpus_path.display()))?;
    let config = FilterConfig::from_json(&read(config_path)?)
        .map_err(|e| anyhow!("{}: {e}", config_path.display()))?;
    let training_text = match (train, config.perplexity.enabled) {
        (Some(path), _) => Some(read(path)?),
        (None, true) => match &config.perplexity.training_corpus_path {
            Some(relative) => {
                // Paths in the config resolve relative to the config file.
                let base = config_path.parent().unwrap_or(Path::new("."));
                Some(read(&base.join(relative))?)
            }
            None => None,
        },
        (None, false) => None,
    };
    let pipeline = Pipeline::build(&config, training_text.as_deref())
        .map_err(|e| anyhow!("{}: {e}", config_path.display()))?;
    let outcomes: Vec<PipelineOutcome> = corpus.iter().map(|r| run_pipeline(r, &pipeline)).collect();
    for (record, outcome) in corpus.iter().zip(outcomes.iter()) {
        let verdict = match (&outcome.input_blocked_by, outcome.attack_succeeded) {
            (Some(stage), _) => format!("blocked by {}", stage.as_str()),
            (None, true) => "attack succeeded".to_string(),
            (None, false) if !outcome.output_findings.is_empty() => {
                format!("output findings: {}", outcome.output_findings.join(", "))
            }
            (None, false) => "passed".to_string(),
        };
        eprintln!("{}\t{}", record.record_id, verdict);
    }
    let observed_at = timestamp(at)?;
    let evidence = summarize(corpus.iter().zip(outcomes.iter()), &observed_at, "guardsim");
    let mut lines = String::new();
    for record in &evidence {
        lines.push_str(&serde_json_line(record)?);
        lines.push('\n');
    }
    fs::write(emit_path, lines).with_context(|| format!("writing {}", emit_path.display()))?;
    eprintln!("emitted {} evidence record(s) to {}", evidence.len(), emit_path.display());
    Ok(0)
}

fn serde_json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).context("serializing evidence record")
}

fn cmd_diff(path_a: &Path, path_b: &Path) -> Result<u8> {
    let a = parse_report_json(&read(path_a)?).map_err(|e| anyhow!("{}: {e}", path_a.display()))?;
    let b = parse_report_json(&read(path_b)?).map_err(|e| anyhow!("{}: {e}", path_b.display()))?;
    let changes = diff_status_maps(&statuses(&a), &statuses(&b)).map_err(|e| anyhow!(e))?;
    print!("{}", changes_to_json(&changes));
    Ok(0)
}

fn statuses(summary: &argus_core::verdict::ReportSummary) -> BTreeMap<String, String> {
    summary.statuses.clone()
}

// Unused-but-typed helpers keep the summary readable above.
#[allow(dead_code)]
fn kind_label(kind: NodeKind) -> &'static str {
    kind.keyword()
}
