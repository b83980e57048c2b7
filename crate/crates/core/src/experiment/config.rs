//! Experiment configuration files.
//!
//! The format is line oriented:
//!
//! ```text
//! # applies to every experiment
//! learning_rate = 0.001
//! seeds = 0, 1, 2
//!
//! [fig6_budget_curve]
//! epsilons = [0.5, 1.0]
//! ```
//!
//! Keys before the first section apply to all experiments; keys inside a
//! section named after an experiment id apply only to that experiment and
//! take precedence. Blank lines and `#` comments are ignored. Lists may be
//! written with or without brackets.

use std::path::Path;

use super::{ExperimentId, ExperimentSpec};
use crate::{Error, Result};

/// Reads `path` and resolves the spec for `id`.
pub fn load_config(path: &Path, id: ExperimentId) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, id)
}

/// Resolves the spec for `id` from configuration text. Absent keys keep
/// their defaults; an empty text yields [`ExperimentSpec::defaults`].
pub fn parse_config(text: &str, id: ExperimentId) -> Result<ExperimentSpec> {
    let mut common = Vec::new();
    let mut specific = Vec::new();
    let mut section: Option<ExperimentId> = None;

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Config {
                line: line_no,
                column: indent + trimmed.len(),
                message: "section header is missing its closing ']'".into(),
            })?;
            let parsed = name.trim().parse::<ExperimentId>().map_err(|_| Error::Config {
                line: line_no,
                column: indent + 2,
                message: format!("unknown section {:?}", name.trim()),
            })?;
            section = Some(parsed);
            continue;
        }
        let eq = trimmed.find('=').ok_or_else(|| Error::Config {
            line: line_no,
            column: indent + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = trimmed[..eq].trim();
        let value = trimmed[eq + 1..].trim();
        if key.is_empty() {
            return Err(Error::Config {
                line: line_no,
                column: indent + 1,
                message: "missing key before '='".into(),
            });
        }
        let value_column = indent + eq + 2 + (trimmed[eq + 1..].len() - trimmed[eq + 1..].trim_start().len());
        let entry = Entry {
            line: line_no,
            key_column: indent + 1,
            value_column,
            key: key.to_string(),
            value: value.to_string(),
        };
        match section {
            None => common.push(entry),
            Some(s) if s == id => specific.push(entry),
            // Other experiments' sections are still validated.
            Some(s) => {
                let mut scratch = ExperimentSpec::defaults(s);
                entry.apply(&mut scratch)?;
            }
        }
    }

    let mut spec = ExperimentSpec::defaults(id);
    for entry in common.iter().chain(&specific) {
        entry.apply(&mut spec)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

struct Entry {
    line: usize,
    key_column: usize,
    value_column: usize,
    key: String,
    value: String,
}

impl Entry {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        spec.set(&self.key, &self.value).map_err(|e| {
            let column = match e {
                SetError::UnknownKey => self.key_column,
                SetError::BadValue(_) => self.value_column,
            };
            Error::Config {
                line: self.line,
                column,
                message: match e {
                    SetError::UnknownKey => format!("unknown key {:?}", self.key),
                    SetError::BadValue(msg) => format!("invalid value for {}: {msg}", self.key),
                },
            }
        })
    }
}

#[derive(Debug)]
pub(crate) enum SetError {
    UnknownKey,
    BadValue(String),
}

pub(crate) fn parse_scalar<T: std::str::FromStr>(value: &str) -> std::result::Result<T, SetError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .trim_matches('"')
        .parse::<T>()
        .map_err(|e| SetError::BadValue(format!("{value:?}: {e}")))
}

pub(crate) fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, SetError>
where
    T::Err: std::fmt::Display,
{
    let inner = value.trim();
    let inner = inner
        .strip_prefix('[')
        .map(|v| v.strip_suffix(']').ok_or_else(|| SetError::BadValue("unterminated list".into())))
        .transpose()?
        .unwrap_or(inner);
    if inner.trim().is_empty() {
        return Err(SetError::BadValue("empty list".into()));
    }
    inner.split(',').map(parse_scalar).collect()
}

/// Parses a comma-separated seed list such as `0,1,2`.
pub fn parse_seed_list(value: &str) -> Result<Vec<u64>> {
    parse_list(value).map_err(|e| match e {
        SetError::BadValue(msg) => Error::InvalidArgument(format!("bad seed list: {msg}")),
        SetError::UnknownKey => unreachable!(),
    })
}
