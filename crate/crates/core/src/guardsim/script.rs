//! Character-script input filter.
//!
//! Blocks prompts carrying more than a configured number of characters from
//! named Unicode ranges. The range table ships with the crate as a plain
//! JSON file, so what counts as a given script is auditable and bit-exact
//! rather than delegated to a library.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_TABLE: &str = include_str!("../../data/unicode_scripts.json");

/// A named script with inclusive code-point ranges as hex strings. When
/// `ranges` is empty the name is resolved against the shipped table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRange {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ranges: Vec<[String; 2]>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("unknown script name `{0}` (not in the shipped range table)")]
    UnknownScript(String),
    #[error("script `{name}`: bad code point `{value}`")]
    BadCodePoint { name: String, value: String },
    #[error("script `{name}`: range {lo:#X}-{hi:#X} is inverted")]
    InvertedRange { name: String, lo: u32, hi: u32 },
    #[error("script table is not valid JSON: {0}")]
    Table(String),
}

/// A script compiled to numeric ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledScript {
    pub name: String,
    pub ranges: Vec<(u32, u32)>,
}

impl CompiledScript {
    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        self.ranges.iter().any(|&(lo, hi)| lo <= cp && cp <= hi)
    }
}

fn parse_table(json: &str) -> Result<BTreeMap<String, Vec<(u32, u32)>>, ScriptError> {
    let entries: Vec<ScriptRange> =
        serde_json::from_str(json).map_err(|e| ScriptError::Table(e.to_string()))?;
    let mut table = BTreeMap::new();
    for entry in entries {
        let compiled = compile_ranges(&entry)?;
        table.insert(entry.name, compiled);
    }
    Ok(table)
}

fn compile_ranges(entry: &ScriptRange) -> Result<Vec<(u32, u32)>, ScriptError> {
    let mut ranges = Vec::with_capacity(entry.ranges.len());
    for [lo, hi] in &entry.ranges {
        let parse = |value: &String| {
            u32::from_str_radix(value, 16).map_err(|_| ScriptError::BadCodePoint {
                name: entry.name.clone(),
                value: value.clone(),
            })
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return Err(ScriptError::InvertedRange {
                name: entry.name.clone(),
                lo,
                hi,
            });
        }
        ranges.push((lo, hi));
    }
    Ok(ranges)
}

fn builtin_table() -> &'static BTreeMap<String, Vec<(u32, u32)>> {
    static TABLE: OnceLock<BTreeMap<String, Vec<(u32, u32)>>> = OnceLock::new();
    TABLE.get_or_init(|| parse_table(BUILTIN_TABLE).expect("shipped script table is valid"))
}

/// Names available in the shipped table.
pub fn builtin_script_names() -> Vec<&'static str> {
    builtin_table().keys().map(String::as_str).collect()
}

/// Compiles configured scripts, resolving empty-range entries against the
/// shipped table.
pub fn resolve_scripts(entries: &[ScriptRange]) -> Result<Vec<CompiledScript>, ScriptError> {
    let mut compiled = Vec::with_capacity(entries.len());
    for entry in entries {
        let ranges = if entry.ranges.is_empty() {
            builtin_table()
                .get(&entry.name)
                .cloned()
                .ok_or_else(|| ScriptError::UnknownScript(entry.name.clone()))?
        } else {
            compile_ranges(entry)?
        };
        compiled.push(CompiledScript {
            name: entry.name.clone(),
            ranges,
        });
    }
    Ok(compiled)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptDecision {
    Pass,
    Blocked { count: usize, script: String },
}

/// Counts characters falling in any blocked script; blocks when the count
/// exceeds `max_blocked_chars`. The reported script is the one matching the
/// first blocked character in the text.
pub fn script_filter(
    text: &str,
    scripts: &[CompiledScript],
    max_blocked_chars: usize,
) -> ScriptDecision {
    let mut total = 0usize;
    let mut first_hit: Option<&str> = None;
    for c in text.chars() {
        for script in scripts {
            if script.contains(c) {
                total += 1;
                first_hit.get_or_insert(&script.name);
                break;
            }
        }
    }
    if total > max_blocked_chars {
        ScriptDecision::Blocked {
            count: total,
            script: first_hit.expect("count > 0 implies a hit").to_string(),
        }
    } else {
        ScriptDecision::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn han() -> Vec<CompiledScript> {
        resolve_scripts(&[ScriptRange {
            name: "Han".into(),
            ranges: vec![],
        }])
        .unwrap()
    }

    #[test]
    fn han_characters_are_counted_and_blocked() {
        let decision = script_filter("Hello 世界", &han(), 0);
        assert_eq!(
            decision,
            ScriptDecision::Blocked {
                count: 2,
                script: "Han".into()
            }
        );
    }

    #[test]
    fn ascii_text_passes() {
        assert_eq!(script_filter("plain ascii text", &han(), 0), ScriptDecision::Pass);
    }

    #[test]
    fn empty_string_passes() {
        assert_eq!(script_filter("", &han(), 0), ScriptDecision::Pass);
    }

    #[test]
    fn threshold_tolerates_up_to_k_characters() {
        assert_eq!(script_filter("好 ok", &han(), 1), ScriptDecision::Pass);
        assert_eq!(
            script_filter("好好 ok", &han(), 1),
            ScriptDecision::Blocked {
                count: 2,
                script: "Han".into()
            }
        );
    }

    #[test]
    fn unknown_script_name_is_an_error() {
        let err = resolve_scripts(&[ScriptRange {
            name: "Klingon".into(),
            ranges: vec![],
        }])
        .unwrap_err();
        assert!(matches!(err, ScriptError::UnknownScript(_)));
    }

    #[test]
    fn inline_ranges_override_the_table() {
        let scripts = resolve_scripts(&[ScriptRange {
            name: "Digits".into(),
            ranges: vec![["0030".into(), "0039".into()]],
        }])
        .unwrap();
        assert_eq!(
            script_filter("abc123", &scripts, 0),
            ScriptDecision::Blocked {
                count: 3,
                script: "Digits".into()
            }
        );
    }

    #[test]
    fn builtin_table_has_the_usual_suspects() {
        let names = builtin_script_names();
        for expected in ["Han", "Cyrillic", "Arabic", "Hangul"] {
            assert!(names.contains(&expected), "missing {expected}");
        }
    }

    #[test]
    fn mixed_scripts_report_the_first_blocked_character() {
        let scripts = resolve_scripts(&[
            ScriptRange { name: "Han".into(), ranges: vec![] },
            ScriptRange { name: "Cyrillic".into(), ranges: vec![] },
        ])
        .unwrap();
        let decision = script_filter("привет 世界", &scripts, 0);
        match decision {
            ScriptDecision::Blocked { count, script } => {
                assert_eq!(count, 8);
                assert_eq!(script, "Cyrillic");
            }
            other => panic!("expected block, got {other:?}"),
        }
    }
}
