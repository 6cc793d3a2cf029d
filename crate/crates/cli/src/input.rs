//! Stream ingestion: JSONL, CSV and one-letter-per-line input.

use std::io::BufRead;

use serde_json::Value;
use symwin::theory::Letter;
use symwin::{QLetter, QTheory, Scalar, Q};

use crate::config::{InputFormat, InputMapping};

#[derive(Debug, Clone, PartialEq)]
pub struct StreamRecord {
    /// 1-based line in the input.
    pub line: usize,
    pub letter: QLetter,
    /// Fed to numeric aggregates.
    pub value: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

fn reject<T>(line: usize, message: impl Into<String>) -> Result<T, RecordError> {
    Err(RecordError { line, message: message.into() })
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn letter_from_text(text: &str, theory: &QTheory, line: usize) -> Result<QLetter, RecordError> {
    let letter = if theory.is_numeric() {
        match Q::parse_exact(text) {
            Some(v) => Letter::Num(v),
            None => return reject(line, format!("'{text}' is not a number")),
        }
    } else {
        Letter::sym(text.trim())
    };
    theory.check_letter(&letter).map_err(|e| RecordError { line, message: e.to_string() })?;
    Ok(letter)
}

fn value_from_text(text: &str, line: usize) -> Result<Q, RecordError> {
    Q::parse_exact(text).map_or_else(|| reject(line, format!("'{text}' is not a number")), Ok)
}

/// Builds a record from the letter text and the optional value text.
fn record(letter: &str, value: Option<&str>, theory: &QTheory, line: usize) -> Result<StreamRecord, RecordError> {
    let letter = letter_from_text(letter, theory, line)?;
    let value = match (value, &letter) {
        (Some(text), _) => value_from_text(text, line)?,
        (None, Letter::Num(v)) => v.clone(),
        (None, Letter::Sym(_)) => Q::from_int(0),
    };
    Ok(StreamRecord { line, letter, value })
}

/// Decodes one JSONL or plain line. JSON records keep their fields under
/// `"fields"` or at the top level.
pub fn parse_stream_record(
    text: &str,
    line: usize,
    mapping: &InputMapping,
    theory: &QTheory,
) -> Result<StreamRecord, RecordError> {
    match mapping.format {
        InputFormat::Lines => {
            let mut parts = text.split(',').map(str::trim);
            let letter = parts.next().unwrap_or_default();
            record(letter, parts.next(), theory, line)
        }
        InputFormat::Jsonl => {
            let doc: Value = serde_json::from_str(text).map_err(|e| RecordError { line, message: e.to_string() })?;
            let fields = doc.get("fields").unwrap_or(&doc);
            if !fields.is_object() {
                return reject(line, "expected a JSON object");
            }
            let field = |name: &str| -> Result<String, RecordError> {
                match fields.get(name) {
                    None => reject(line, format!("missing field '{name}'")),
                    Some(v) => scalar_text(v).map_or_else(|| reject(line, format!("field '{name}' is not a scalar")), Ok),
                }
            };
            let letter = field(mapping.letter.as_deref().unwrap_or_default())?;
            let value = mapping.value.as_deref().map(field).transpose()?;
            record(&letter, value.as_deref(), theory, line)
        }
        InputFormat::Csv => reject(line, "CSV records are decoded by RecordReader"),
    }
}

/// Iterates over the records of an input, yielding rejected records as
/// errors so that callers can report them and continue.
pub struct RecordReader<R: BufRead> {
    inner: Inner<R>,
    mapping: InputMapping,
    theory: QTheory,
}

enum Inner<R: BufRead> {
    Lines { lines: std::io::Lines<R>, line: usize },
    Csv { reader: csv::Reader<R>, letter: Option<usize>, value: Option<usize>, header_error: Option<String> },
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(input: R, mapping: &InputMapping, theory: &QTheory) -> Self {
        let inner = match mapping.format {
            InputFormat::Csv => {
                let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
                let (mut letter, mut value, mut header_error) = (None, None, None);
                match reader.headers() {
                    Ok(h) => {
                        let find = |name: &Option<String>| name.as_ref().and_then(|n| h.iter().position(|c| c == n));
                        letter = find(&mapping.letter);
                        value = find(&mapping.value);
                        if letter.is_none() {
                            header_error = Some(format!("missing column '{}'", mapping.letter.clone().unwrap_or_default()));
                        } else if mapping.value.is_some() && value.is_none() {
                            header_error = Some(format!("missing column '{}'", mapping.value.clone().unwrap_or_default()));
                        }
                    }
                    Err(e) => header_error = Some(e.to_string()),
                }
                Inner::Csv { reader, letter, value, header_error }
            }
            _ => Inner::Lines { lines: input.lines(), line: 0 },
        };
        RecordReader { inner, mapping: mapping.clone(), theory: theory.clone() }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<StreamRecord, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        match &mut self.inner {
            Inner::Lines { lines, line } => loop {
                *line += 1;
                let text = match lines.next()? {
                    Ok(t) => t,
                    Err(e) => return Some(reject(*line, e.to_string())),
                };
                if text.trim().is_empty() {
                    continue;
                }
                return Some(parse_stream_record(&text, *line, &self.mapping, &self.theory));
            },
            Inner::Csv { reader, letter, value, header_error } => {
                if let Some(message) = header_error.take() {
                    // Without the columns no record can be decoded.
                    *letter = None;
                    return Some(reject(1, message));
                }
                let letter = (*letter)?;
                let mut rec = csv::StringRecord::new();
                match reader.read_record(&mut rec) {
                    Ok(false) => None,
                    Err(e) => {
                        let line = e.position().map_or(0, |p| p.line() as usize);
                        Some(reject(line, e.to_string()))
                    }
                    Ok(true) => {
                        let line = rec.position().map_or(0, |p| p.line() as usize);
                        let Some(l) = rec.get(letter) else {
                            return Some(reject(line, "missing letter column"));
                        };
                        let v = match value.map(|i| rec.get(i)) {
                            Some(None) => return Some(reject(line, "missing value column")),
                            Some(Some(v)) => Some(v),
                            None => None,
                        };
                        Some(record(l, v, &self.theory, line))
                    }
                }
            }
        }
    }
}
