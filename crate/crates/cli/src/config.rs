//! Pipeline configuration files.
//!
//! ```toml
//! [theory]
//! kind = "dense"          # "finite", "dense" or "custom"
//! lookback = 1
//! # alphabet = ["a", "b"] # finite theories only
//!
//! [input]
//! format = "csv"          # "jsonl" (default), "csv" or "lines"
//! letter = "price"        # field read as the letter
//! value = "price"         # field fed to aggregates (optional)
//!
//! [[window]]
//! prefix = "[true]*"
//! window = "[x0 > x-1]"
//! aggregate = "count"     # count, sum, min, max, average, first, last
//!
//! [specifier]             # optional, used by `check` and `simulate`
//! avoid = "[x0 in{a}] . [x0 in{a}] . [x0 in{a}]"
//! # automaton = "spec.json"
//! ```
//!
//! A window is given by a `prefix`/`window` expression pair, a guarded
//! `formula`, or a `compiled` expression file written by `symwin compile`.
//! Relative paths are resolved against the configuration's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use symwin::boundedness::{avoiding_factor, validate_input_specifier, InputSpecifier};
use symwin::processor::NumericOp;
use symwin::smso::{GuardedFormula, WindowExpression};
use symwin::sre::Sre;
use symwin::theory::{Alphabet, Theory};
use symwin::{QKsla, QTheory, QWindowExpression, Q};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub theory: TheorySection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default, rename = "window")]
    pub windows: Vec<WindowSection>,
    pub specifier: Option<SpecifierSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryKindName {
    Finite,
    Dense,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySection {
    pub kind: TheoryKindName,
    #[serde(default)]
    pub lookback: usize,
    pub alphabet: Option<Vec<String>>,
    /// Largest number of cubes kept in normal forms.
    pub dnf_budget: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Jsonl,
    Csv,
    /// One letter per line.
    Lines,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    #[serde(default)]
    pub format: InputFormat,
    pub letter: Option<String>,
    pub value: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub prefix: Option<String>,
    pub window: Option<String>,
    pub formula: Option<String>,
    pub compiled: Option<PathBuf>,
    #[serde(default = "default_aggregate")]
    pub aggregate: String,
}

fn default_aggregate() -> String {
    "count".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecifierSection {
    pub automaton: Option<PathBuf>,
    pub avoid: Option<String>,
}

/// Where letters and aggregation values come from in each record.
#[derive(Debug, Clone)]
pub struct InputMapping {
    pub format: InputFormat,
    pub letter: Option<String>,
    pub value: Option<String>,
}

#[derive(Debug, Clone)]
pub struct WindowDef {
    pub expr: QWindowExpression,
    pub op: NumericOp,
}

/// A loaded and compiled configuration.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub theory: QTheory,
    pub input: InputMapping,
    pub windows: Vec<WindowDef>,
    pub specifier: Option<InputSpecifier<Q>>,
}

impl Pipeline {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn from_toml(text: &str, base: &Path) -> CliResult<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::build(file, base)
    }

    pub fn build(file: ConfigFile, base: &Path) -> CliResult<Self> {
        let theory = build_theory(&file.theory)?;
        if file.windows.is_empty() {
            return Err(CliError::Config("at least one [[window]] is required".into()));
        }
        let numeric = theory.is_numeric();
        let input = InputMapping { format: file.input.format, letter: file.input.letter, value: file.input.value };
        if input.format != InputFormat::Lines && input.letter.is_none() {
            return Err(CliError::Config("[input] needs a 'letter' field for jsonl and csv input".into()));
        }
        let mut windows = Vec::new();
        for (i, w) in file.windows.iter().enumerate() {
            let op = NumericOp::parse(&w.aggregate).map_err(|e| CliError::Config(format!("window {i}: {e}")))?;
            if op != NumericOp::Count && !numeric && input.value.is_none() {
                return Err(CliError::Config(format!(
                    "window {i}: aggregate '{}' needs a numeric 'value' field in [input]",
                    w.aggregate
                )));
            }
            let expr = build_window(i, w, &theory, base)?;
            windows.push(WindowDef { expr, op });
        }
        let specifier = match &file.specifier {
            None => None,
            Some(s) => Some(build_specifier(s, &theory, base)?),
        };
        Ok(Pipeline { theory, input, windows, specifier })
    }

    /// All pairs of all windows, numbered in order of appearance.
    pub fn combined(&self) -> CliResult<QWindowExpression> {
        let pairs = self.windows.iter().flat_map(|w| w.expr.pairs().iter().cloned()).collect();
        Ok(WindowExpression::new(self.theory.clone(), pairs)?)
    }

    /// The configured specifier, or the universal one.
    pub fn specifier_or_universal(&self) -> InputSpecifier<Q> {
        self.specifier.clone().unwrap_or_else(|| InputSpecifier::universal(self.theory.clone()))
    }
}

fn build_theory(t: &TheorySection) -> CliResult<QTheory> {
    let theory = match t.kind {
        TheoryKindName::Finite => {
            let symbols = t
                .alphabet
                .as_ref()
                .ok_or_else(|| CliError::Config("a finite theory needs an 'alphabet'".into()))?;
            Theory::finite(Alphabet::new(symbols.iter().map(String::as_str))?, t.lookback)
        }
        TheoryKindName::Dense | TheoryKindName::Custom if t.alphabet.is_some() => {
            return Err(CliError::Config("'alphabet' only applies to finite theories".into()));
        }
        TheoryKindName::Dense => Theory::dense_order(t.lookback),
        TheoryKindName::Custom => Theory::custom(t.lookback),
    };
    Ok(match t.dnf_budget {
        Some(b) => theory.with_budget(b),
        None => theory,
    })
}

fn build_window(i: usize, w: &WindowSection, theory: &QTheory, base: &Path) -> CliResult<QWindowExpression> {
    let expr = match (&w.prefix, &w.window, &w.formula, &w.compiled) {
        (Some(p), Some(win), None, None) => {
            let pair = (Sre::parse(p, theory)?, Sre::parse(win, theory)?);
            WindowExpression::from_sre_pairs(&[pair])?
        }
        (None, None, Some(f), None) => GuardedFormula::parse(f, theory)?.compile()?,
        (None, None, None, Some(path)) => {
            let path = base.join(path);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            WindowExpression::from_json_str(&text)?
        }
        _ => {
            return Err(CliError::Config(format!(
                "window {i}: give either 'prefix' and 'window', 'formula', or 'compiled'"
            )))
        }
    };
    if expr.theory() != theory {
        return Err(CliError::Config(format!("window {i}: compiled for a different theory")));
    }
    Ok(expr)
}

fn build_specifier(s: &SpecifierSection, theory: &QTheory, base: &Path) -> CliResult<InputSpecifier<Q>> {
    match (&s.automaton, &s.avoid) {
        (Some(path), None) => {
            let path = base.join(path);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let a = QKsla::from_json_str(&text)?;
            if a.theory() != theory {
                return Err(CliError::Config("the specifier automaton uses a different theory".into()));
            }
            Ok(validate_input_specifier(&a)?)
        }
        (None, Some(text)) => Ok(avoiding_factor(&Sre::parse(text, theory)?)?),
        _ => Err(CliError::Config("[specifier] needs exactly one of 'automaton' or 'avoid'".into())),
    }
}
