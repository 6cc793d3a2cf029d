//! Canonical JSON documents for automata.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Ksla;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{Alphabet, Theory, TheoryKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct TheoryDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "is_zero")]
    tracks: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TransitionDoc {
    from: String,
    to: String,
    guard: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KslaDoc {
    theory: TheoryDoc,
    k: usize,
    states: Vec<String>,
    initial: String,
    finals: Vec<String>,
    transitions: Vec<TransitionDoc>,
}

fn theory_doc<S>(theory: &Theory<S>) -> TheoryDoc {
    let (kind, alphabet) = match theory.kind() {
        TheoryKind::Finite(a) => ("finite", Some(a.symbols().iter().map(|s| s.to_string()).collect())),
        TheoryKind::DenseOrder => ("dense", None),
        TheoryKind::Custom => ("custom", None),
    };
    TheoryDoc { kind: kind.to_string(), alphabet, tracks: theory.tracks() }
}

fn theory_from_doc<S>(doc: &TheoryDoc, k: usize) -> Result<Theory<S>> {
    let theory = match (doc.kind.as_str(), &doc.alphabet) {
        ("finite", Some(symbols)) => {
            Theory::finite(Alphabet::new(symbols.iter().map(String::as_str)).map_err(|e| Error::Document(e.to_string()))?, k)
        }
        ("finite", None) => return Err(Error::Document("finite theory without alphabet".into())),
        ("dense", _) => Theory::dense_order(k),
        ("custom", _) => Theory::custom(k),
        (other, _) => return Err(Error::Document(format!("unknown theory kind '{other}'"))),
    };
    Ok(theory.with_tracks(doc.tracks))
}

/// JSON description of a theory (without its lookback).
pub fn theory_to_json<S>(theory: &Theory<S>) -> serde_json::Value {
    serde_json::to_value(theory_doc(theory)).expect("theory documents serialize")
}

pub fn theory_from_json<S>(value: &serde_json::Value, k: usize) -> Result<Theory<S>> {
    let doc: TheoryDoc = serde_json::from_value(value.clone()).map_err(|e| Error::Document(e.to_string()))?;
    theory_from_doc(&doc, k)
}

fn state_name(q: usize) -> String {
    format!("q{q}")
}

impl<S: Scalar> Ksla<S> {
    fn doc(&self) -> KslaDoc {
        let mut transitions = Vec::new();
        for q in 0..self.num_states() {
            let mut out: Vec<_> = self.edges[q].iter().collect();
            out.sort_by_key(|(t, _)| *t);
            for (t, g) in out {
                transitions.push(TransitionDoc { from: state_name(q), to: state_name(*t), guard: g.to_string() });
            }
        }
        KslaDoc {
            theory: theory_doc(&self.theory),
            k: self.lookback(),
            states: (0..self.num_states()).map(state_name).collect(),
            initial: state_name(self.initial),
            finals: self.finals().map(state_name).collect(),
            transitions,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.doc()).expect("automaton documents serialize")
    }

    /// Canonical pretty-printed document; equal automata give identical text.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.doc()).expect("automaton documents serialize")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Ksla<S>> {
        let doc: KslaDoc = serde_json::from_value(value.clone()).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn from_json_str(text: &str) -> Result<Ksla<S>> {
        let doc: KslaDoc = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: KslaDoc) -> Result<Ksla<S>> {
        let theory = theory_from_doc(&doc.theory, doc.k)?;
        let mut names: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, s) in doc.states.iter().enumerate() {
            if names.insert(s.as_str(), i).is_some() {
                return Err(Error::Document(format!("duplicate state '{s}'")));
            }
        }
        let lookup = |name: &str| {
            names.get(name).copied().ok_or_else(|| Error::Document(format!("unknown state '{name}'")))
        };
        if doc.states.is_empty() {
            return Err(Error::Document("automaton without states".into()));
        }
        let mut a = Ksla::new(theory.clone(), doc.states.len(), lookup(&doc.initial)?);
        for f in &doc.finals {
            a.set_final(lookup(f)?, true);
        }
        for t in &doc.transitions {
            let from = lookup(&t.from)?;
            let to = lookup(&t.to)?;
            let guard = theory
                .parse(&t.guard)
                .map_err(|e| Error::Document(format!("guard of {} -> {}: {e}", t.from, t.to)))?;
            a.add_transition(from, to, guard)?;
        }
        a.sort_edges();
        a.certify_deterministic()?;
        Ok(a)
    }
}
