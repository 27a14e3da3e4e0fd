//! Desk-scale guardrail middleware simulator.
//!
//! Runs prompt corpora through input filters (perplexity, character script)
//! and output code filters against a table-driven mock model, then
//! summarizes the outcomes into attack evidence records for ingestion. The
//! mock model is the corpus itself: each record states whether the model
//! would comply absent defenses and what code it would emit, which keeps
//! every run deterministic.

pub mod ngram;
pub mod rules;
pub mod script;

pub use ngram::{perplexity, train_ngram, NgramModel, PerplexityError, Sym};
pub use rules::{
    compile_rules, default_rules, output_code_filter, CompiledRule, Finding, OutputRule,
    RuleCategory, RuleError,
};
pub use script::{
    builtin_script_names, resolve_scripts, script_filter, CompiledScript, ScriptDecision,
    ScriptError, ScriptRange,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::AttackEvidenceRecord;

/// Perplexity input filter settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerplexityConfig {
    pub enabled: bool,
    pub n: usize,
    pub threshold: f64,
    pub training_corpus_path: Option<String>,
}

impl Default for PerplexityConfig {
    fn default() -> Self {
        PerplexityConfig {
            enabled: false,
            n: 2,
            threshold: 0.0,
            training_corpus_path: None,
        }
    }
}

/// Character-script input filter settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScriptConfig {
    pub enabled: bool,
    pub blocked_scripts: Vec<ScriptRange>,
    pub max_blocked_chars: usize,
}

/// Full middleware configuration, mirrored one-to-one by the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub perplexity: PerplexityConfig,
    pub script: ScriptConfig,
    pub output_rules: Vec<OutputRule>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(String),
    #[error("perplexity filter needs a threshold > 0")]
    BadThreshold,
    #[error("perplexity filter needs n >= 1")]
    BadOrder,
    #[error("perplexity filter is enabled but no training corpus was provided")]
    MissingTrainingCorpus,
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

impl FilterConfig {
    pub fn from_json(text: &str) -> Result<FilterConfig, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))
    }
}

/// One corpus entry: a prompt plus the mock model's scripted behavior.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub record_id: String,
    pub prompt: String,
    pub is_adversarial: bool,
    pub attack_type: String,
    pub model_id: String,
    pub constraint_id: String,
    /// Would the mock model comply absent any defense?
    pub baseline_success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_output: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("corpus line {line}: {message}")]
    Line { line: u32, message: String },
    #[error("corpus line {line}: duplicate record_id `{id}`")]
    DuplicateId { line: u32, id: String },
}

/// Parses a JSON-lines corpus; record ids must be unique.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = (index + 1) as u32;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(line).map_err(|e| CorpusError::Line {
                line: line_no,
                message: e.to_string(),
            })?;
        if !seen.insert(record.record_id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: record.record_id,
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// The stage that rejected an input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputStage {
    Perplexity,
    Script,
}

impl InputStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            InputStage::Perplexity => "perplexity",
            InputStage::Script => "script",
        }
    }
}

/// What happened to one corpus record in the middleware.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub record_id: String,
    pub input_blocked_by: Option<InputStage>,
    /// Rule ids that fired on the generated output, in rule order.
    pub output_findings: Vec<String>,
    pub attack_succeeded: bool,
    /// Messages delivered alongside the output (sanitization fixes).
    pub warnings: Vec<String>,
}

/// Filters compiled and ready to run.
pub struct Pipeline {
    perplexity: Option<PerplexityStage>,
    script: Option<ScriptStage>,
    rules: Vec<CompiledRule>,
}

struct PerplexityStage {
    model: NgramModel,
    threshold: f64,
}

struct ScriptStage {
    scripts: Vec<CompiledScript>,
    max_blocked_chars: usize,
}

impl Pipeline {
    /// Compiles a configuration. `training_corpus` is the text the
    /// perplexity model trains on; required when that filter is enabled.
    pub fn build(config: &FilterConfig, training_corpus: Option<&str>) -> Result<Pipeline, ConfigError> {
        let perplexity = if config.perplexity.enabled {
            if config.perplexity.n < 1 {
                return Err(ConfigError::BadOrder);
            }
            if !(config.perplexity.threshold > 0.0) {
                return Err(ConfigError::BadThreshold);
            }
            let corpus = training_corpus.ok_or(ConfigError::MissingTrainingCorpus)?;
            Some(PerplexityStage {
                model: train_ngram(corpus, config.perplexity.n),
                threshold: config.perplexity.threshold,
            })
        } else {
            None
        };
        let script = if config.script.enabled {
            Some(ScriptStage {
                scripts: resolve_scripts(&config.script.blocked_scripts)?,
                max_blocked_chars: config.script.max_blocked_chars,
            })
        } else {
            None
        };
        let rules = compile_rules(&config.output_rules)?;
        Ok(Pipeline {
            perplexity,
            script,
            rules,
        })
    }

    pub fn perplexity_of(&self, text: &str) -> Option<f64> {
        self.perplexity
            .as_ref()
            .and_then(|stage| perplexity(&stage.model, text).ok())
    }
}

/// Runs one record through the stages: perplexity filter, script filter,
/// mock model, output rules.
///
/// An injection finding suppresses delivery. An unsanitized-input finding
/// delivers the output together with the rule's fix message as a warning.
/// Either kind of finding defeats an adversarial record; for benign records
/// the warning is the whole effect. `attack_succeeded` is true only for an
/// adversarial record that passed the input filters, would have succeeded
/// absent defenses, and triggered no output rule.
pub fn run_pipeline(record: &CorpusRecord, pipeline: &Pipeline) -> PipelineOutcome {
    let mut outcome = PipelineOutcome {
        record_id: record.record_id.clone(),
        input_blocked_by: None,
        output_findings: Vec::new(),
        attack_succeeded: false,
        warnings: Vec::new(),
    };

    if let Some(stage) = &pipeline.perplexity {
        // An empty prompt has no perplexity; it cannot be an outlier.
        if let Ok(pp) = perplexity(&stage.model, &record.prompt) {
            if pp > stage.threshold {
                outcome.input_blocked_by = Some(InputStage::Perplexity);
                return outcome;
            }
        }
    }
    if let Some(stage) = &pipeline.script {
        if let ScriptDecision::Blocked { .. } =
            script_filter(&record.prompt, &stage.scripts, stage.max_blocked_chars)
        {
            outcome.input_blocked_by = Some(InputStage::Script);
            return outcome;
        }
    }

    let findings = match (&record.generated_output, record.baseline_success) {
        (Some(code), true) => output_code_filter(code, &pipeline.rules),
        _ => Vec::new(),
    };
    let any_injection = findings
        .iter()
        .any(|f| f.category == RuleCategory::Injection);
    if !any_injection {
        // Output is delivered; sanitization findings ride along as warnings.
        for finding in &findings {
            if finding.category == RuleCategory::UnsanitizedInput {
                outcome.warnings.push(finding.message.clone());
            }
        }
    }
    outcome.output_findings = findings.iter().map(|f| f.rule_id.clone()).collect();
    outcome.attack_succeeded = record.is_adversarial
        && record.baseline_success
        && outcome.output_findings.is_empty();
    outcome
}

/// Groups adversarial outcomes by (attack type, model, constraint) and
/// emits one evidence record per group: trials = records, successes =
/// outcomes where the attack succeeded. Benign records are skipped.
pub fn summarize<'a>(
    items: impl IntoIterator<Item = (&'a CorpusRecord, &'a PipelineOutcome)>,
    observed_at: &str,
    source: &str,
) -> Vec<AttackEvidenceRecord> {
    let mut groups: BTreeMap<(String, String, String), (u64, u64)> = BTreeMap::new();
    for (record, outcome) in items {
        if !record.is_adversarial {
            continue;
        }
        let key = (
            record.attack_type.clone(),
            record.model_id.clone(),
            record.constraint_id.clone(),
        );
        let entry = groups.entry(key).or_insert((0, 0));
        entry.1 += 1;
        if outcome.attack_succeeded {
            entry.0 += 1;
        }
    }
    groups
        .into_iter()
        .map(|((attack_type, model_id, constraint_id), (successes, trials))| {
            AttackEvidenceRecord {
                attack_id: format!("{attack_type}__{model_id}__{constraint_id}"),
                attack_type,
                model_id,
                constraint_id,
                successes,
                trials,
                observed_at: observed_at.to_string(),
                source: source.to_string(),
            }
        })
        .collect()
}
