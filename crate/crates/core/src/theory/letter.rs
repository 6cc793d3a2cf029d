use std::fmt;
use std::sync::Arc;


use crate::scalar::Scalar;

/// Interned-by-value symbol of a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(text: &str) -> Self {
        Symbol(Arc::from(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub(crate) fn is_bare(text: &str) -> bool {
        let mut chars = text.chars();
        let Some(first) = chars.next() else {
            return false;
        };
        let word = (first.is_alphabetic() || first == '_')
            && chars.all(|c| c.is_alphanumeric() || c == '_');
        let digits = text.bytes().all(|b| b.is_ascii_digit());
        (word || digits) && !matches!(text, "true" | "false" | "in" | "min")
    }

    /// Text form used in predicate syntax: bare when it lexes as an
    /// identifier, double-quoted otherwise.
    pub fn quoted(&self) -> String {
        if Self::is_bare(&self.0) {
            self.0.to_string()
        } else {
            let mut out = String::from("\"");
            for c in self.0.chars() {
                if c == '"' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('"');
            out
        }
    }
}

impl From<&str> for Symbol {
    fn from(text: &str) -> Self {
        Symbol::new(text)
    }
}

impl From<String> for Symbol {
    fn from(text: String) -> Self {
        Symbol(Arc::from(text))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A stream element: a symbol of a finite alphabet or a number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter<S> {
    Sym(Symbol),
    Num(S),
}

impl<S> Letter<S> {
    pub fn sym(text: &str) -> Self {
        Letter::Sym(Symbol::new(text))
    }

    pub fn as_num(&self) -> Option<&S> {
        match self {
            Letter::Num(v) => Some(v),
            Letter::Sym(_) => None,
        }
    }

    pub fn as_sym(&self) -> Option<&Symbol> {
        match self {
            Letter::Sym(s) => Some(s),
            Letter::Num(_) => None,
        }
    }
}

impl<S: Scalar> Letter<S> {
    pub fn num(value: i64) -> Self {
        Letter::Num(S::from_int(value))
    }

    /// Parses a numeric letter from exact text, a symbol otherwise.
    pub fn parse(text: &str, numeric: bool) -> Option<Self> {
        if numeric {
            S::parse_exact(text).map(Letter::Num)
        } else {
            Some(Letter::sym(text))
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Letter::Sym(s) => serde_json::Value::String(s.to_string()),
            Letter::Num(v) => v.to_json(),
        }
    }
}

impl<S: Scalar> fmt::Display for Letter<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Sym(s) => write!(f, "{s}"),
            Letter::Num(v) => write!(f, "{}", v.to_exact_string()),
        }
    }
}

/// Builds a symbolic word from a string, one letter per character.
pub fn word<S>(text: &str) -> Vec<Letter<S>> {
    text.chars()
        .map(|c| Letter::Sym(Symbol::new(c.encode_utf8(&mut [0; 4]))))
        .collect()
}

/// Builds a numeric word.
pub fn num_word<S: Scalar>(values: &[i64]) -> Vec<Letter<S>> {
    values.iter().map(|&v| Letter::num(v)).collect()
}

/// Renders a symbolic word back to a string (numbers separated by commas).
pub fn word_text<S: Scalar>(word: &[Letter<S>]) -> String {
    if word.iter().all(|l| matches!(l, Letter::Sym(s) if s.as_str().chars().count() == 1)) {
        word.iter().map(|l| l.to_string()).collect()
    } else {
        word.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }
}
