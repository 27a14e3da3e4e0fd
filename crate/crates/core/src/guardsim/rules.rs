//! Regex-driven output code analysis.
//!
//! Rules flag generated code for injection sinks (delivery is suppressed)
//! or missing input sanitization (delivered with a warning and a fix
//! message). The rule set lives in configuration so the mechanism stays
//! inspectable and extensible without a rebuild.

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleCategory {
    #[serde(rename = "injection")]
    Injection,
    #[serde(rename = "unsanitized-input")]
    UnsanitizedInput,
}

impl RuleCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleCategory::Injection => "injection",
            RuleCategory::UnsanitizedInput => "unsanitized-input",
        }
    }
}

/// One configured rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRule {
    pub rule_id: String,
    pub category: RuleCategory,
    pub pattern: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule `{rule_id}`: pattern does not compile: {source}")]
    BadPattern {
        rule_id: String,
        #[source]
        source: regex::Error,
    },
}

#[derive(Debug, Clone)]
pub struct CompiledRule {
    pub rule_id: String,
    pub category: RuleCategory,
    pub regex: Regex,
    pub message: String,
}

pub fn compile_rules(rules: &[OutputRule]) -> Result<Vec<CompiledRule>, RuleError> {
    rules
        .iter()
        .map(|rule| {
            Regex::new(&rule.pattern)
                .map(|regex| CompiledRule {
                    rule_id: rule.rule_id.clone(),
                    category: rule.category,
                    regex,
                    message: rule.message.clone(),
                })
                .map_err(|source| RuleError::BadPattern {
                    rule_id: rule.rule_id.clone(),
                    source,
                })
        })
        .collect()
}

/// One rule firing on a piece of code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub rule_id: String,
    pub category: RuleCategory,
    pub message: String,
    /// The first matched span's text.
    pub matched: String,
}

/// Runs every rule over the code; one finding per rule that matches, taken
/// at its first match, in configured rule order.
pub fn output_code_filter(code: &str, rules: &[CompiledRule]) -> Vec<Finding> {
    rules
        .iter()
        .filter_map(|rule| {
            rule.regex.find(code).map(|m| Finding {
                rule_id: rule.rule_id.clone(),
                category: rule.category,
                message: rule.message.clone(),
                matched: m.as_str().to_string(),
            })
        })
        .collect()
}

/// The rule set shipped with the default configuration fixture; kept here
/// so tests and the fixture cannot drift apart.
pub fn default_rules() -> Vec<OutputRule> {
    let rule = |rule_id: &str, category: RuleCategory, pattern: &str, message: &str| OutputRule {
        rule_id: rule_id.to_string(),
        category,
        pattern: pattern.to_string(),
        message: message.to_string(),
    };
    vec![
        rule(
            "inj.os-system",
            RuleCategory::Injection,
            r"os\.system\s*\(",
            "os.system executes its argument in a shell; build a fixed argv list and use subprocess.run without shell instead.",
        ),
        rule(
            "inj.subprocess-shell",
            RuleCategory::Injection,
            r"subprocess\.(run|call|check_output|Popen)\s*\([^)]*shell\s*=\s*True",
            "shell=True hands the command line to a shell; pass an argv list and drop shell=True.",
        ),
        rule(
            "inj.eval",
            RuleCategory::Injection,
            r"\beval\s*\(",
            "eval executes arbitrary expressions; parse the expected value type explicitly.",
        ),
        rule(
            "inj.exec",
            RuleCategory::Injection,
            r"\bexec\s*\(",
            "exec executes arbitrary statements; remove it or replace it with explicit control flow.",
        ),
        rule(
            "unsan.int-input",
            RuleCategory::UnsanitizedInput,
            r"int\s*\(\s*input\s*\(\s*\)\s*\)",
            "int(input()) converts raw input without validation; wrap the conversion in try/except ValueError and check the range.",
        ),
        rule(
            "unsan.raw-index",
            RuleCategory::UnsanitizedInput,
            r"\[\s*input\s*\(\s*\)\s*\]",
            "indexing with raw input allows arbitrary keys; validate the key against the expected set first.",
        ),
    ]
}
