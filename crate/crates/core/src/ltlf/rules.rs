//! Rule definition files.
//!
//! One rule per block; blocks are separated by blank lines. Each line is a
//! `key: value` pair, lines starting with `//` are comments.
//!
//! ```text
//! // keep distance to the leader
//! name: safe_distance
//! formula: G sd_front
//! weight: 1
//! priority: 1
//! per_agent: false
//! ```
//!
//! `per_agent` must be `true` exactly when the formula uses an agent
//! placeholder such as `#j`. The printer emits the canonical formula, so
//! `parse(print(rules)) == rules` for any parsed rule set.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::formula::Formula;
use super::monitor::{RuleError, RuleTemplate};
use super::parser::{parse_ltlf, ParseError};

pub const SAFE_DISTANCE: &str = "safe_distance";
pub const ZIPPER: &str = "zipper";

#[derive(Debug, Error)]
pub enum RuleFileError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: ParseError },
    #[error("rule `{name}`: {source}")]
    Rule { name: String, source: RuleError },
    #[error("rule `{0}` defined twice")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSpec {
    pub name: String,
    pub formula: Formula,
    pub weight: f64,
    pub priority: usize,
    pub per_agent: bool,
}

/// Parsed rule definitions in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleSet {
    pub rules: Vec<RuleSpec>,
}

/// A rule definition together with its shared compiled template.
#[derive(Debug, Clone)]
pub struct CompiledRule {
    pub spec: RuleSpec,
    pub template: Arc<RuleTemplate>,
}

impl RuleSet {
    /// The two shipped traffic rules.
    pub fn default_traffic() -> Self {
        let text = format!(
            "name: {ZIPPER}\nformula: G (idf#j & !m#j -> X !ahead#j)\nweight: 1\npriority: 0\nper_agent: true\n\n\
             name: {SAFE_DISTANCE}\nformula: G sd_front\nweight: 1\npriority: 1\nper_agent: false\n"
        );
        RuleSet::parse(&text).expect("shipped rules are valid")
    }

    pub fn get(&self, name: &str) -> Option<&RuleSpec> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn parse(text: &str) -> Result<Self, RuleFileError> {
        let mut rules = Vec::new();
        let mut block: Vec<(usize, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with("//") {
                continue;
            }
            if line.is_empty() {
                if !block.is_empty() {
                    rules.push(parse_block(&block)?);
                    block.clear();
                }
                continue;
            }
            block.push((i + 1, line));
        }
        if !block.is_empty() {
            rules.push(parse_block(&block)?);
        }
        let set = RuleSet { rules };
        for (i, r) in set.rules.iter().enumerate() {
            if set.rules[..i].iter().any(|o| o.name == r.name) {
                return Err(RuleFileError::Duplicate(r.name.clone()));
            }
        }
        Ok(set)
    }

    pub fn compile(&self) -> Result<Vec<CompiledRule>, RuleFileError> {
        self.rules
            .iter()
            .map(|spec| {
                let template =
                    RuleTemplate::compile(spec.name.clone(), &spec.formula).map_err(|source| {
                        RuleFileError::Rule {
                            name: spec.name.clone(),
                            source,
                        }
                    })?;
                Ok(CompiledRule {
                    spec: spec.clone(),
                    template,
                })
            })
            .collect()
    }
}

fn parse_block(lines: &[(usize, &str)]) -> Result<RuleSpec, RuleFileError> {
    let first = lines[0].0;
    let mut name = None;
    let mut formula = None;
    let mut weight = None;
    let mut priority = None;
    let mut per_agent = None;
    for &(line, text) in lines {
        let Some((key, value)) = text.split_once(':') else {
            return Err(RuleFileError::Format {
                line,
                message: format!("expected `key: value`, got `{text}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| RuleFileError::Format {
            line,
            message: format!("invalid {what} `{value}`"),
        };
        let slot_taken = match key {
            "name" => name.replace(value.to_string()).is_some(),
            "formula" => {
                let f =
                    parse_ltlf(value).map_err(|source| RuleFileError::Formula { line, source })?;
                formula.replace((line, f)).is_some()
            }
            "weight" => {
                let w: f64 = value.parse().map_err(|_| bad("weight"))?;
                if !(w.is_finite() && w >= 0.0) {
                    return Err(bad("weight"));
                }
                weight.replace(w).is_some()
            }
            "priority" => priority
                .replace(value.parse::<usize>().map_err(|_| bad("priority"))?)
                .is_some(),
            "per_agent" => per_agent
                .replace(value.parse::<bool>().map_err(|_| bad("per_agent"))?)
                .is_some(),
            other => {
                return Err(RuleFileError::Format {
                    line,
                    message: format!("unknown key `{other}`"),
                })
            }
        };
        if slot_taken {
            return Err(RuleFileError::Format {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let missing = |key: &str| RuleFileError::Format {
        line: first,
        message: format!("rule block is missing `{key}`"),
    };
    let name = name.ok_or_else(|| missing("name"))?;
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(RuleFileError::Format {
            line: first,
            message: format!("invalid rule name `{name}`"),
        });
    }
    let (formula_line, formula) = formula.ok_or_else(|| missing("formula"))?;
    let per_agent = per_agent.ok_or_else(|| missing("per_agent"))?;
    let has_slot = formula.atoms().iter().any(|a| !a.is_ground());
    if has_slot != per_agent {
        return Err(RuleFileError::Format {
            line: formula_line,
            message: format!(
                "per_agent is {per_agent} but the formula {} an agent placeholder",
                if has_slot { "uses" } else { "has no" }
            ),
        });
    }
    Ok(RuleSpec {
        name,
        formula,
        weight: weight.ok_or_else(|| missing("weight"))?,
        priority: priority.ok_or_else(|| missing("priority"))?,
        per_agent,
    })
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "name: {}", r.name)?;
            writeln!(f, "formula: {}", r.formula)?;
            writeln!(f, "weight: {}", r.weight)?;
            writeln!(f, "priority: {}", r.priority)?;
            writeln!(f, "per_agent: {}", r.per_agent)?;
        }
        Ok(())
    }
}
